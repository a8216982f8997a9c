#pragma once

// Shared domain types for the event-domain spike detection pipeline.
//
// Time is integer nanoseconds everywhere. Amplitudes are dimensionless and
// normalized so that a spike template peaks at 1.0.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebnr {

using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerSecond = 1'000'000'000;

/// Precondition or invariant violation on caller-supplied data.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `where()` carries "path:line" or "path@offset".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

struct SampledSignal {
  double sample_rate_hz = 24000.0;
  std::vector<double> samples;
  TimeNs t0_ns = 0;

  std::size_t size() const noexcept { return samples.size(); }

  /// Timestamp of sample n, rounded to the nearest nanosecond.
  TimeNs time_of(std::size_t n) const noexcept;
  /// Time from t0 to one period past the last sample.
  TimeNs duration_ns() const noexcept;
  double period_ns() const noexcept { return 1e9 / sample_rate_hz; }

  void validate() const;
};

enum class Polarity : std::int8_t { On = 1, Off = -1 };

struct Event {
  TimeNs t_ns = 0;
  Polarity polarity = Polarity::On;

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventStream {
  int channel = 0;
  /// Recording length in ns; bins are laid out over [0, duration_ns).
  /// Zero means "unknown", in which case the last event bounds the stream.
  TimeNs duration_ns = 0;
  /// Tracking level the modulator started from.
  double initial_level = 0.0;
  std::vector<Event> events;

  std::size_t size() const noexcept { return events.size(); }
  bool is_sorted() const noexcept;
  /// Throws ValidationError when events are out of order or negative.
  void validate() const;
};

struct GroundTruth {
  std::vector<TimeNs> spike_times_ns;
  void validate() const;
};

struct DetectionSet {
  std::vector<TimeNs> detected_times_ns;
  std::size_t size() const noexcept { return detected_times_ns.size(); }
  void validate() const;

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

/// Throws ValidationError unless `times` is strictly increasing.
void require_strictly_increasing(std::span<const TimeNs> times, const char* what);

/// Number of bins of width t_bin_ns needed to cover the stream.
std::size_t bin_count_for(const EventStream& stream, TimeNs t_bin_ns);

/// Per-bin event counts, both polarities weighted equally. Bins are
/// half-open [k*t_bin, (k+1)*t_bin), so an event on a boundary lands in the
/// later bin.
std::vector<int> bin_events(const EventStream& stream, TimeNs t_bin_ns);
/// As above with an explicit bin count; events past the last bin are an error.
std::vector<int> bin_events(const EventStream& stream, TimeNs t_bin_ns, std::size_t n_bins);

SampledSignal normalize_signal(const SampledSignal& signal, double spike_peak);

/// Smallest integer n >= 0 with n * step >= threshold, evaluated in floating
/// point exactly as the comparison downstream evaluates it.
int min_steps_to_reach(double threshold, double step);

}  // namespace ebnr
