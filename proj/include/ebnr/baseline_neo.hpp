#pragma once

// Software NEO detector on sampled signals (original or stair-step
// reconstruction), used as the comparison baseline.

#include <span>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr {

struct NeoParams {
  /// Odd length of the triangular smoothing window.
  int smooth_window = 7;
  double threshold_multiplier = 8.0;
  TimeNs refractory_ns = 1'000'000;

  void validate() const;
};

/// Discrete Teager operator x[n]^2 - x[n-1] x[n+1]; endpoints are 0.
std::vector<double> neo(std::span<const double> x);
std::vector<double> neo(const SampledSignal& signal);

/// Unit-sum triangular weights 1 - |i - c| / (c + 1) for i in [0, window).
std::vector<double> bartlett_weights(int window);

/// Centered convolution with zero padding; output length equals input length.
std::vector<double> smooth(std::span<const double> x, std::span<const double> weights);

/// Local maxima of smoothed NEO strictly above C * mean(smoothed NEO),
/// refractory-spaced, stamped at the sample time of the maximum.
DetectionSet detect_neo(const SampledSignal& signal, const NeoParams& p);

}  // namespace ebnr
