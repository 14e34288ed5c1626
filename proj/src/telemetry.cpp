#include "rigcast/telemetry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rigcast/error.hpp"

namespace rigcast {

namespace {

constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "HKLA", "BPOS", "DBTM", "DMEA", "TQA", "WOB", "RPMA", "SPPA", "MFIA", "TVT", "GASA"};

constexpr std::array<std::string_view, kAccidentTypeCount> kAccidentTokens = {
    "stuck", "washout", "mud_loss", "break", "fluid_show", "packing"};

constexpr std::array<std::string_view, kAccidentTypeCount> kAccidentNames = {
    "Stuck", "WashoutOfDrillingPipe", "MudLoss", "BreakOfDrillingPipe", "FluidShow", "Packing"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// Non-empty lines of a text blob.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto next = text.find('\n', pos);
    if (next == std::string_view::npos) next = text.size();
    auto line = text.substr(pos, next - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) out.push_back(line);
    pos = next + 1;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_cell(std::string_view cell, std::size_t row) {
  if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw FormatError("row " + std::to_string(row) + ": non-numeric cell '" + std::string(cell) + "'");
  }
  return v;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

std::string_view channel_name(Channel c) { return kChannelNames[index_of(c)]; }

std::optional<Channel> parse_channel(std::string_view name) {
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (kChannelNames[i] == name) return kAllChannels[i];
  }
  return std::nullopt;
}

const ChannelSpecs& canonical_specs() {
  static const ChannelSpecs specs = {{
      {Channel::HKLA, "t", 0.0, 300.0},
      {Channel::BPOS, "m", 0.0, 50.0},
      {Channel::DBTM, "m", 0.0, 10000.0},
      {Channel::DMEA, "m", 0.0, 10000.0},
      {Channel::TQA, "kN*m", 0.0, 140.0},
      {Channel::WOB, "t", 0.0, 25.0},
      {Channel::RPMA, "rpm", 0.0, 200.0},
      {Channel::SPPA, "atm", 0.0, 350.0},
      {Channel::MFIA, "l/s", 0.0, 65.0},
      {Channel::TVT, "m3", 0.0, 240.0},
      {Channel::GASA, "%", 0.0, 1.0},
  }};
  return specs;
}

std::string_view accident_token(AccidentType t) { return kAccidentTokens[index_of(t)]; }
std::string_view accident_name(AccidentType t) { return kAccidentNames[index_of(t)]; }

AccidentType parse_accident_type(std::string_view text) {
  const auto key = lower(trim(text));
  for (std::size_t i = 0; i < kAccidentTypeCount; ++i) {
    if (key == kAccidentTokens[i] || key == lower(kAccidentNames[i])) return kAllAccidentTypes[i];
  }
  throw ParseError("unknown accident type '" + std::string(text) + "'", std::string(text));
}

TelemetryLog parse_log(std::string_view csv_text, std::string well_id) {
  const auto lines = lines_of(csv_text);
  if (lines.empty()) throw SchemaError("telemetry file has no header", "time");
  const auto header = split(lines[0]);

  std::optional<std::size_t> time_col;
  std::array<std::optional<std::size_t>, kChannelCount> cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "time") time_col = j;
    if (auto c = parse_channel(header[j])) cols[index_of(*c)] = j;
  }
  if (!time_col) throw SchemaError("missing required column time", "time");
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (!cols[i]) {
      const std::string name(kChannelNames[i]);
      throw SchemaError("missing required column " + name, name);
    }
  }

  TelemetryLog log;
  log.well_id = std::move(well_id);
  std::vector<Timestamp> times;
  times.reserve(lines.size() - 1);
  for (auto& ch : log.channels) ch.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != header.size()) {
      throw FormatError("row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(header.size()));
    }
    times.push_back(parse_time(cells[*time_col]));
    for (std::size_t i = 0; i < kChannelCount; ++i) log.channels[i].push_back(parse_cell(cells[*cols[i]], r));
  }

  if (!times.empty()) log.start_time = times.front();
  if (times.size() >= 2) {
    log.sample_period = times[1] - times[0];
    if (log.sample_period.count() <= 0) throw FormatError("timestamps are not increasing at row 2");
    for (std::size_t r = 1; r < times.size(); ++r) {
      if (times[r] - times[r - 1] != log.sample_period) {
        throw FormatError("non-uniform or non-monotonic timestamp at row " + std::to_string(r + 1));
      }
    }
  }
  return log;
}

TelemetryLog load_log(const std::filesystem::path& path, const ChannelSpecs&, std::optional<std::string> well_id) {
  return parse_log(read_file(path), well_id ? *well_id : path.stem().string());
}

void write_log(const TelemetryLog& log, const std::filesystem::path& path) {
  std::string out = "time";
  for (auto name : kChannelNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  out.reserve(log.length() * 110);
  for (std::size_t i = 0; i < log.length(); ++i) {
    out += format_time(log.time_at(i));
    for (const auto& ch : log.channels) {
      out += ',';
      if (!std::isnan(ch[i])) append_number(out, ch[i]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << out;
  if (!f) throw IoError("failed writing " + path.string());
}

TelemetryLog clean(const TelemetryLog& log, const ChannelSpecs& specs) {
  TelemetryLog out = log;
  for (const auto& spec : specs) {
    auto& series = out.channels[index_of(spec.channel)];
    const auto valid = [&](double v) { return !std::isnan(v) && spec.contains(v); };
    const auto first = std::find_if(series.begin(), series.end(), valid);
    if (first == series.end()) {
      if (series.empty()) continue;
      const std::string name(channel_name(spec.channel));
      throw UnusableChannelError("channel " + name + " has no valid values", name);
    }
    double last = *first;
    for (auto& v : series) {
      if (valid(v)) {
        last = v;
      } else {
        v = last;
      }
    }
  }
  return out;
}

std::vector<AccidentRecord> parse_reference(std::string_view csv_text) {
  const auto lines = lines_of(csv_text);
  if (lines.empty()) throw SchemaError("reference file has no header", "well_id");
  const auto header = split(lines[0]);
  std::optional<std::size_t> well_col, type_col, time_col;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "well_id") well_col = j;
    if (header[j] == "accident_type") type_col = j;
    if (header[j] == "start_time") time_col = j;
  }
  if (!well_col) throw SchemaError("missing required column well_id", "well_id");
  if (!type_col) throw SchemaError("missing required column accident_type", "accident_type");
  if (!time_col) throw SchemaError("missing required column start_time", "start_time");

  std::vector<AccidentRecord> out;
  out.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != header.size()) {
      throw FormatError("reference row " + std::to_string(r) + " has wrong cell count");
    }
    out.push_back({std::string(cells[*well_col]), parse_accident_type(cells[*type_col]),
                   parse_time(cells[*time_col])});
  }
  return out;
}

std::vector<AccidentRecord> load_reference(const std::filesystem::path& path) {
  return parse_reference(read_file(path));
}

void write_reference(std::span<const AccidentRecord> records, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << "well_id,accident_type,start_time\n";
  for (const auto& r : records) {
    f << r.well_id << ',' << accident_token(r.type) << ',' << format_time(r.start_time) << '\n';
  }
  if (!f) throw IoError("failed writing " + path.string());
}

TelemetryLog slice(const TelemetryLog& log, Timestamp start, Timestamp end) {
  const auto period = log.sample_period.count();
  const auto rel_start = (start - log.start_time).count();
  const auto rel_end = (end - log.start_time).count();
  // First sample index with time >= start, first index with time >= end.
  const auto ceil_div = [period](std::int64_t a) {
    return a <= 0 ? std::int64_t{0} : (a + period - 1) / period;
  };
  const auto n = static_cast<std::int64_t>(log.length());
  const auto lo = std::min(ceil_div(rel_start), n);
  const auto hi = std::min(ceil_div(rel_end), n);
  if (end <= start || hi <= lo) {
    throw EmptySliceError("slice [" + format_time(start) + ", " + format_time(end) + ") of well " +
                          log.well_id + " is empty");
  }
  TelemetryLog out;
  out.well_id = log.well_id;
  out.sample_period = log.sample_period;
  out.start_time = log.time_at(static_cast<std::size_t>(lo));
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    out.channels[c].assign(log.channels[c].begin() + lo, log.channels[c].begin() + hi);
  }
  return out;
}

}  // namespace rigcast
