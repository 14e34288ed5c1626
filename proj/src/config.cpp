#include "rigcast/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "rigcast/error.hpp"

namespace rigcast {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigurationError("config key " + std::string(key) + ": '" + std::string(v) + "' is not a number");
  }
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigurationError("config key " + std::string(key) + ": '" + std::string(v) +
                             "' is not a non-negative integer");
  }
  return out;
}

std::string fmt_minutes(Duration d) { return fmt_double(static_cast<double>(d.count()) / 60.0); }

std::vector<std::string_view> split_list(std::string_view v) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto next = v.find(',', pos);
    if (next == std::string_view::npos) next = v.size();
    auto item = v.substr(pos, next - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) out.push_back(item);
    pos = next + 1;
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;
};

Key duration_key(std::string name, Duration PipelineConfig::*field) {
  return {name, [field](const PipelineConfig& c) { return fmt_minutes(c.*field); },
          [field, name](PipelineConfig& c, std::string_view v) { c.*field = minutes(to_double(name, v)); }};
}

template <typename Struct>
Key nested_duration_key(std::string name, Struct PipelineConfig::*outer, Duration Struct::*field) {
  return {name, [=](const PipelineConfig& c) { return fmt_minutes(c.*outer.*field); },
          [=](PipelineConfig& c, std::string_view v) { c.*outer.*field = minutes(to_double(name, v)); }};
}

template <typename T, typename Struct>
Key nested_number_key(std::string name, Struct PipelineConfig::*outer, T Struct::*field) {
  return {name,
          [=](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*outer.*field);
            else return std::to_string(c.*outer.*field);
          },
          [=](PipelineConfig& c, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) c.*outer.*field = to_double(name, v);
            else c.*outer.*field = static_cast<T>(to_uint(name, v));
          }};
}

template <typename T>
Key number_key(std::string name, T PipelineConfig::*field) {
  return {name,
          [=](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*field);
            else return std::to_string(c.*field);
          },
          [=](PipelineConfig& c, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) c.*field = to_double(name, v);
            else c.*field = static_cast<T>(to_uint(name, v));
          }};
}

template <typename T>
Key list_key(std::string name, std::vector<T> PipelineConfig::*field) {
  return {name,
          [=](const PipelineConfig& c) {
            return join(c.*field, [](T v) {
              if constexpr (std::is_floating_point_v<T>) return fmt_double(v);
              else return std::to_string(v);
            });
          },
          [=](PipelineConfig& c, std::string_view v) {
            std::vector<T> out;
            for (auto item : split_list(v)) {
              if constexpr (std::is_floating_point_v<T>) out.push_back(to_double(name, item));
              else out.push_back(static_cast<T>(to_uint(name, item)));
            }
            c.*field = std::move(out);
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(number_key("seed", &PipelineConfig::seed));
    k.push_back(nested_duration_key("window.t_length_min", &PipelineConfig::window, &WindowConfig::t_length));
    k.push_back(nested_duration_key("window.t_step_min", &PipelineConfig::window, &WindowConfig::t_step));
    k.push_back(nested_duration_key("window.tau_length_min", &PipelineConfig::window, &WindowConfig::tau_length));
    k.push_back(nested_duration_key("window.tau_step_min", &PipelineConfig::window, &WindowConfig::tau_step));
    k.push_back(duration_key("codebook.tau_step_min", &PipelineConfig::codebook_tau_step));
    k.push_back({"wavelet.family", [](const PipelineConfig& c) { return std::string(dwt::family_name(c.wavelet.family)); },
                 [](PipelineConfig& c, std::string_view v) { c.wavelet.family = dwt::parse_family(v); }});
    k.push_back({"wavelet.level", [](const PipelineConfig& c) { return std::to_string(c.wavelet.level); },
                 [](PipelineConfig& c, std::string_view v) { c.wavelet.level = static_cast<int>(to_uint("wavelet.level", v)); }});
    k.push_back(number_key("codebook.k", &PipelineConfig::k));
    k.push_back(number_key("kmeans.max_iter", &PipelineConfig::kmeans_max_iter));
    k.push_back(number_key("kmeans.tol", &PipelineConfig::kmeans_tol));
    k.push_back(nested_number_key("boost.n_estimators", &PipelineConfig::boosting, &BoostingParams::n_estimators));
    k.push_back(nested_number_key("boost.learning_rate", &PipelineConfig::boosting, &BoostingParams::learning_rate));
    k.push_back(nested_number_key("boost.max_depth", &PipelineConfig::boosting, &BoostingParams::max_depth));
    k.push_back(nested_number_key("boost.subsample", &PipelineConfig::boosting, &BoostingParams::subsample));
    k.push_back(nested_number_key("boost.colsample_bytree", &PipelineConfig::boosting, &BoostingParams::colsample_bytree));
    k.push_back(nested_number_key("boost.positive_class_weight", &PipelineConfig::boosting, &BoostingParams::positive_class_weight));
    k.push_back(nested_number_key("boost.reg_lambda", &PipelineConfig::boosting, &BoostingParams::reg_lambda));
    k.push_back(nested_number_key("boost.min_child_weight", &PipelineConfig::boosting, &BoostingParams::min_child_weight));
    k.push_back(number_key("crossval.k", &PipelineConfig::crossval_folds));
    k.push_back(duration_key("crossval.pre_accident_min", &PipelineConfig::pre_accident_interval));
    k.push_back(number_key("crossval.normal_intervals", &PipelineConfig::normal_intervals));
    k.push_back(duration_key("crossval.normal_interval_min", &PipelineConfig::normal_interval_length));
    k.push_back(duration_key("crossval.normal_clearance_min", &PipelineConfig::normal_clearance));
    k.push_back(duration_key("inference.step_min", &PipelineConfig::inference_step));
    k.push_back(number_key("inference.threshold", &PipelineConfig::threshold));
    k.push_back(number_key("synth.n_wells", &PipelineConfig::synth_wells));
    k.push_back(number_key("synth.hours_per_well", &PipelineConfig::synth_hours));
    k.push_back(number_key("synth.accidents_per_type", &PipelineConfig::synth_accidents_per_type));
    k.push_back(number_key("synth.pattern_amplitude", &PipelineConfig::synth_pattern_amplitude));
    k.push_back({"tune.stage1.families",
                 [](const PipelineConfig& c) {
                   return join(c.stage1_families, [](dwt::Family f) { return std::string(dwt::family_name(f)); });
                 },
                 [](PipelineConfig& c, std::string_view v) {
                   c.stage1_families.clear();
                   for (auto item : split_list(v)) c.stage1_families.push_back(dwt::parse_family(item));
                 }});
    k.push_back(list_key("tune.stage1.levels", &PipelineConfig::stage1_levels));
    k.push_back(list_key("tune.stage1.ks", &PipelineConfig::stage1_ks));
    k.push_back(number_key("tune.stage1.segments", &PipelineConfig::stage1_segments));
    k.push_back(number_key("tune.stage1.n_min", &PipelineConfig::stage1_n_min));
    k.push_back(number_key("tune.stage1.n_max", &PipelineConfig::stage1_n_max));
    k.push_back(list_key("tune.stage2.tau_min", &PipelineConfig::stage2_tau_minutes));
    k.push_back(list_key("tune.stage2.t_min", &PipelineConfig::stage2_t_minutes));
    k.push_back(list_key("tune.sensitivity.ks", &PipelineConfig::sensitivity_ks));
    k.push_back(list_key("tune.sensitivity.ns", &PipelineConfig::sensitivity_ns));
    k.push_back(number_key("tune.sensitivity.repeats", &PipelineConfig::sensitivity_repeats));
    k.push_back(list_key("tune.step.step_min", &PipelineConfig::step_minutes));
    for (auto ch : kAllChannels) {
      const auto i = index_of(ch);
      const std::string base = "channel." + std::string(channel_name(ch));
      k.push_back({base + ".min", [i](const PipelineConfig& c) { return fmt_double(c.specs[i].min_value); },
                   [i, base](PipelineConfig& c, std::string_view v) { c.specs[i].min_value = to_double(base + ".min", v); }});
      k.push_back({base + ".max", [i](const PipelineConfig& c) { return fmt_double(c.specs[i].max_value); },
                   [i, base](PipelineConfig& c, std::string_view v) { c.specs[i].max_value = to_double(base + ".max", v); }});
    }
    std::sort(k.begin(), k.end(), [](const Key& a, const Key& b) { return a.name < b.name; });
    return k;
  }();
  return table;
}

}  // namespace

CodebookOptions PipelineConfig::codebook_options(std::uint64_t seed_value) const {
  return {window.tau_length, codebook_tau_step, wavelet, k, seed_value, kmeans_max_iter, kmeans_tol};
}

synth::ScenarioConfig PipelineConfig::scenario() const {
  synth::ScenarioConfig s;
  s.n_wells = synth_wells;
  s.hours_per_well = synth_hours;
  s.pattern_amplitude = synth_pattern_amplitude;
  s.seed = seed;
  if (synth_accidents_per_type > 0 && synth_wells > 0) {
    s.schedule = synth::balanced_schedule(synth_wells, synth_hours, synth_accidents_per_type, seed);
  }
  return s;
}

std::string PipelineConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k.name + "=" + k.get(*this) + "\n";
  return out;
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    auto line = text.substr(pos, next - pos);
    pos = next + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigurationError("config line " + std::to_string(line_no) + " is not key=value");
    }
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.remove_suffix(1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ConfigurationError("unknown config key '" + std::string(key) + "'");
    it->set(c, value);
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace rigcast
