#include "ebnr/delta_mod.hpp"

#include <cmath>
#include <string>

namespace ebnr {

void DmConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("dm: delta must be positive");
  if (pulse_width_ns <= 0) throw ValidationError("dm: pulse_width_ns must be positive");
  if (initial_level && !std::isfinite(*initial_level))
    throw ValidationError("dm: initial_level must be finite");
}

SlewOverflowError::SlewOverflowError(std::size_t sample, std::size_t pulses)
    : std::runtime_error("delta modulator slew overflow at sample " + std::to_string(sample) + ": " +
                         std::to_string(pulses) + " pulses do not fit in one sample period"),
      sample_(sample) {}

EventStream modulate(const SampledSignal& signal, const DmConfig& cfg, int channel) {
  signal.validate();
  cfg.validate();

  EventStream out;
  out.channel = channel;
  out.duration_ns = signal.t0_ns + signal.duration_ns();
  out.initial_level = cfg.initial_level.value_or(signal.samples.front());

  const double init = out.initial_level;
  const double delta = cfg.delta;
  // A crossing within a relative 1e-9 of the step still fires, so an input
  // landing exactly on a level is not lost to rounding. The tracking error
  // stays below delta either way.
  const double trigger = delta * (1.0 - 1e-9);
  const auto period = static_cast<TimeNs>(std::floor(signal.period_ns()));
  long balance = 0;
  auto level = [&] { return init + delta * static_cast<double>(balance); };

  for (std::size_t n = 0; n < signal.size(); ++n) {
    const double x = signal.samples[n];
    long due = 0;
    Polarity pol = Polarity::On;
    if (x - level() >= trigger) {
      while (x - level() >= trigger) { ++balance; ++due; }
    } else if (level() - x >= trigger) {
      pol = Polarity::Off;
      while (level() - x >= trigger) { --balance; ++due; }
    }
    if (due == 0) continue;

    const TimeNs tn = signal.time_of(n);
    const TimeNs first = tn - (due - 1) * cfg.pulse_width_ns;
    const TimeNs prev = n > 0 ? signal.time_of(n - 1) : TimeNs{-1};
    if (due * cfg.pulse_width_ns > period || first <= prev || first < 0)
      throw SlewOverflowError(n, static_cast<std::size_t>(due));
    for (long j = 0; j < due; ++j) out.events.push_back({first + j * cfg.pulse_width_ns, pol});
  }
  return out;
}

SampledSignal reconstruct(const EventStream& stream, const DmConfig& cfg, std::size_t n_samples,
                          double sample_rate_hz, TimeNs t0_ns) {
  stream.validate();
  cfg.validate();
  SampledSignal out;
  out.sample_rate_hz = sample_rate_hz;
  out.t0_ns = t0_ns;
  out.samples.resize(n_samples);
  const double init = cfg.initial_level.value_or(stream.initial_level);
  long balance = 0;
  std::size_t next = 0;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const TimeNs tn = out.time_of(n);
    while (next < stream.events.size() && stream.events[next].t_ns <= tn) {
      balance += stream.events[next].polarity == Polarity::On ? 1 : -1;
      ++next;
    }
    out.samples[n] = init + cfg.delta * static_cast<double>(balance);
  }
  return out;
}

}  // namespace ebnr
