#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rigcast/time.hpp"

namespace rigcast {

// Mud-log channels in their fixed canonical order. Feature vectors, CSV
// columns and artifacts all use this order.
enum class Channel : int { HKLA, BPOS, DBTM, DMEA, TQA, WOB, RPMA, SPPA, MFIA, TVT, GASA };

inline constexpr std::size_t kChannelCount = 11;

inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::HKLA, Channel::BPOS, Channel::DBTM, Channel::DMEA, Channel::TQA, Channel::WOB,
    Channel::RPMA, Channel::SPPA, Channel::MFIA, Channel::TVT,  Channel::GASA};

std::string_view channel_name(Channel c);
std::optional<Channel> parse_channel(std::string_view name);
inline constexpr std::size_t index_of(Channel c) { return static_cast<std::size_t>(c); }

struct ChannelSpec {
  Channel channel;
  std::string units;
  double min_value;
  double max_value;

  bool contains(double v) const { return v >= min_value && v <= max_value; }
  bool operator==(const ChannelSpec&) const = default;
};

using ChannelSpecs = std::array<ChannelSpec, kChannelCount>;

// Physical ranges of the standard mud-log parameters.
const ChannelSpecs& canonical_specs();

inline constexpr Duration kCanonicalSamplePeriod{5};

// One well's uniformly sampled multichannel log. Sample i is taken at
// start_time + i * sample_period. Missing cells are NaN until cleaned.
struct TelemetryLog {
  std::string well_id;
  Timestamp start_time{};
  Duration sample_period = kCanonicalSamplePeriod;
  std::array<std::vector<double>, kChannelCount> channels;

  std::size_t length() const { return channels[0].size(); }
  std::span<const double> channel(Channel c) const { return channels[index_of(c)]; }
  Timestamp time_at(std::size_t i) const {
    return start_time + sample_period * static_cast<std::int64_t>(i);
  }
  Timestamp end_time() const { return time_at(length()); }

  bool operator==(const TelemetryLog&) const = default;
};

enum class AccidentType : int { Stuck, WashoutOfDrillingPipe, MudLoss, BreakOfDrillingPipe, FluidShow, Packing };

inline constexpr std::size_t kAccidentTypeCount = 6;

inline constexpr std::array<AccidentType, kAccidentTypeCount> kAllAccidentTypes = {
    AccidentType::Stuck,      AccidentType::WashoutOfDrillingPipe, AccidentType::MudLoss,
    AccidentType::BreakOfDrillingPipe, AccidentType::FluidShow,     AccidentType::Packing};

inline constexpr std::size_t index_of(AccidentType t) { return static_cast<std::size_t>(t); }

// Short CSV token: stuck, washout, mud_loss, break, fluid_show, packing.
std::string_view accident_token(AccidentType t);
// Long enumerator name, e.g. "WashoutOfDrillingPipe".
std::string_view accident_name(AccidentType t);
// Case-insensitive; accepts the CSV token or the long name. Throws ParseError.
AccidentType parse_accident_type(std::string_view text);

struct AccidentRecord {
  std::string well_id;
  AccidentType type;
  Timestamp start_time;

  bool operator==(const AccidentRecord&) const = default;
};

// Reads the telemetry CSV (`time,HKLA,...,GASA`). Empty cells become NaN.
// The well id is taken from the file stem unless given.
TelemetryLog load_log(const std::filesystem::path& path, const ChannelSpecs& specs = canonical_specs(),
                      std::optional<std::string> well_id = std::nullopt);
TelemetryLog parse_log(std::string_view csv_text, std::string well_id);
void write_log(const TelemetryLog& log, const std::filesystem::path& path);

// Replaces missing and out-of-range samples with the last valid value of the
// same channel; a leading invalid run takes the first valid value.
TelemetryLog clean(const TelemetryLog& log, const ChannelSpecs& specs = canonical_specs());

std::vector<AccidentRecord> load_reference(const std::filesystem::path& path);
std::vector<AccidentRecord> parse_reference(std::string_view csv_text);
void write_reference(std::span<const AccidentRecord> records, const std::filesystem::path& path);

// Samples with timestamps in [start, end).
TelemetryLog slice(const TelemetryLog& log, Timestamp start, Timestamp end);

}  // namespace rigcast
