#pragma once

// File formats:
//   events      CSV `t_ns,polarity` with polarity +1 (ON) / -1 (OFF), plus an
//               optional `<path>.meta` sidecar (channel, duration_ns, initial_level)
//   signal      CSV `t_s,amplitude`, or raw little-endian float32 with a
//               `<path>.meta` sidecar declaring sample_rate_hz and t0_ns
//   spike times one integer nanosecond per line
//   key-values  `key = value` lines, `#` starts a comment

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr::io {

namespace fs = std::filesystem;

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

std::vector<KeyValue> read_key_values(const fs::path& path);
std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin);
void write_key_values(const fs::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries);

fs::path sidecar_path(const fs::path& path);

void write_events_csv(const fs::path& path, const EventStream& stream);
EventStream read_events_csv(const fs::path& path);

/// `.csv` selects the text format; any other extension selects raw float32.
void write_signal(const fs::path& path, const SampledSignal& signal);
SampledSignal read_signal(const fs::path& path);

void write_spike_times(const fs::path& path, const std::vector<TimeNs>& times);
/// Enforces strictly increasing times; violations report the offending line.
std::vector<TimeNs> read_spike_times(const fs::path& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);
/// Fixed-point with `digits` decimals, for report columns.
std::string format_fixed(double v, int digits);

}  // namespace ebnr::io
