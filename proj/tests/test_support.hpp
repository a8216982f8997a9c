#pragma once

// Random input generators shared by the property tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr::testing {

/// Event stream laid out over n_bins bins of width t_bin: mostly sparse
/// background with occasional multi-bin bursts, so detectors actually fire.
inline EventStream random_bursty_stream(std::mt19937_64& rng, std::size_t n_bins, TimeNs t_bin,
                                        std::size_t quiet_prefix_bins = 0) {
  std::poisson_distribution<int> background(1.2);
  std::uniform_int_distribution<int> burst_count(3, 14);
  std::uniform_int_distribution<int> burst_len(1, 4);
  std::bernoulli_distribution burst_start(0.06);
  std::uniform_int_distribution<TimeNs> offset(0, t_bin - 1);
  std::bernoulli_distribution on(0.5);

  EventStream s;
  s.duration_ns = static_cast<TimeNs>(n_bins) * t_bin;
  int burst_left = 0;
  for (std::size_t k = 0; k < n_bins; ++k) {
    int count = 0;
    if (k >= quiet_prefix_bins) {
      if (burst_left == 0 && burst_start(rng)) burst_left = burst_len(rng);
      if (burst_left > 0) {
        count = burst_count(rng);
        --burst_left;
      } else {
        count = background(rng);
      }
    }
    std::vector<TimeNs> ts;
    for (int i = 0; i < count; ++i) ts.push_back(static_cast<TimeNs>(k) * t_bin + offset(rng));
    std::sort(ts.begin(), ts.end());
    for (TimeNs t : ts) s.events.push_back({t, on(rng) ? Polarity::On : Polarity::Off});
  }
  return s;
}

/// Sum of a few random sinusoids below max_hz, roughly unit amplitude.
inline SampledSignal random_bandlimited(std::mt19937_64& rng, std::size_t n, double fs = 24000.0,
                                        double max_hz = 3000.0) {
  std::uniform_int_distribution<int> n_tones(1, 6);
  std::uniform_real_distribution<double> freq(5.0, max_hz);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(0.05, 0.6);
  SampledSignal s;
  s.sample_rate_hz = fs;
  s.samples.assign(n, 0.0);
  const int tones = n_tones(rng);
  for (int t = 0; t < tones; ++t) {
    const double f = freq(rng), p = phase(rng), a = amp(rng);
    for (std::size_t i = 0; i < n; ++i)
      s.samples[i] += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + p);
  }
  return s;
}

/// Sorted times with every gap at least min_gap.
inline std::vector<TimeNs> random_spaced_times(std::mt19937_64& rng, std::size_t max_count, TimeNs min_gap,
                                               TimeNs max_extra) {
  std::uniform_int_distribution<std::size_t> count(0, max_count);
  std::uniform_int_distribution<TimeNs> extra(0, max_extra);
  std::vector<TimeNs> out;
  TimeNs t = extra(rng);
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(t);
    t += min_gap + extra(rng);
  }
  return out;
}

}  // namespace ebnr::testing
