#pragma once

// Ideal delta modulator: the event-based frontend abstraction.

#include <optional>
#include <stdexcept>

#include "ebnr/core.hpp"

namespace ebnr {

struct DmConfig {
  double delta = 0.05;
  TimeNs pulse_width_ns = 1;
  /// Unset: start tracking from the first sample.
  std::optional<double> initial_level;

  void validate() const;
};

/// More pulses are due within one sample period than fit at pulse_width_ns.
class SlewOverflowError : public std::runtime_error {
 public:
  SlewOverflowError(std::size_t sample, std::size_t pulses);
  std::size_t sample() const noexcept { return sample_; }

 private:
  std::size_t sample_;
};

/// The tracking level is initial + delta * (ON - OFF), recomputed from the
/// integer balance after every pulse. Pulses due at sample n are stamped
/// pulse_width_ns apart and end at the sample instant t_n.
EventStream modulate(const SampledSignal& signal, const DmConfig& cfg, int channel = 0);

/// Stair-step reconstruction sampled at the original instants:
/// V[n] = initial + delta * (#ON - #OFF with t <= t_n).
/// Uses cfg.initial_level if set, else the level recorded in the stream.
SampledSignal reconstruct(const EventStream& stream, const DmConfig& cfg, std::size_t n_samples,
                          double sample_rate_hz, TimeNs t0_ns = 0);

}  // namespace ebnr
