#include "ebnr/core.hpp"

#include <algorithm>
#include <cmath>

namespace ebnr {

TimeNs SampledSignal::time_of(std::size_t n) const noexcept {
  return t0_ns + static_cast<TimeNs>(std::llround(static_cast<double>(n) * 1e9 / sample_rate_hz));
}

TimeNs SampledSignal::duration_ns() const noexcept { return time_of(samples.size()) - t0_ns; }

void SampledSignal::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
    throw ValidationError("signal: sample_rate_hz must be positive");
  if (samples.empty()) throw ValidationError("signal: at least one sample required");
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i]))
      throw ValidationError("signal: non-finite sample at index " + std::to_string(i));
}

bool EventStream::is_sorted() const noexcept {
  return std::is_sorted(events.begin(), events.end(),
                        [](const Event& a, const Event& b) { return a.t_ns < b.t_ns; });
}

void EventStream::validate() const {
  if (!is_sorted()) throw ValidationError("event stream: events not sorted by time");
  if (!events.empty() && events.front().t_ns < 0)
    throw ValidationError("event stream: negative timestamp");
  if (duration_ns > 0 && !events.empty() && events.back().t_ns >= duration_ns)
    throw ValidationError("event stream: event at " + std::to_string(events.back().t_ns) +
                          " ns is past the recording duration");
}

void require_strictly_increasing(std::span<const TimeNs> times, const char* what) {
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw ValidationError(std::string(what) + ": times not strictly increasing at index " +
                            std::to_string(i));
}

void GroundTruth::validate() const { require_strictly_increasing(spike_times_ns, "ground truth"); }

void DetectionSet::validate() const {
  require_strictly_increasing(detected_times_ns, "detection set");
}

std::size_t bin_count_for(const EventStream& stream, TimeNs t_bin_ns) {
  if (t_bin_ns <= 0) throw ValidationError("bin width must be positive");
  TimeNs span_end = stream.duration_ns;
  if (!stream.events.empty()) span_end = std::max(span_end, stream.events.back().t_ns + 1);
  return static_cast<std::size_t>((span_end + t_bin_ns - 1) / t_bin_ns);
}

std::vector<int> bin_events(const EventStream& stream, TimeNs t_bin_ns) {
  return bin_events(stream, t_bin_ns, bin_count_for(stream, t_bin_ns));
}

std::vector<int> bin_events(const EventStream& stream, TimeNs t_bin_ns, std::size_t n_bins) {
  if (t_bin_ns <= 0) throw ValidationError("bin width must be positive");
  stream.validate();
  std::vector<int> counts(n_bins, 0);
  for (const Event& e : stream.events) {
    const auto k = static_cast<std::size_t>(e.t_ns / t_bin_ns);
    if (k >= n_bins)
      throw ValidationError("event at " + std::to_string(e.t_ns) + " ns falls past bin " +
                            std::to_string(n_bins));
    ++counts[k];
  }
  return counts;
}

SampledSignal normalize_signal(const SampledSignal& signal, double spike_peak) {
  if (!(spike_peak > 0.0)) throw ValidationError("normalize: spike_peak must be positive");
  SampledSignal out = signal;
  for (double& x : out.samples) x /= spike_peak;
  return out;
}

int min_steps_to_reach(double threshold, double step) {
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  if (threshold <= 0.0) return 0;
  auto n = static_cast<int>(std::ceil(threshold / step));
  while (n > 0 && static_cast<double>(n - 1) * step >= threshold) --n;
  while (static_cast<double>(n) * step < threshold) ++n;
  return n;
}

}  // namespace ebnr
