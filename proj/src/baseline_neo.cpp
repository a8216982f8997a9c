#include "ebnr/baseline_neo.hpp"

#include <cmath>
#include <numeric>

namespace ebnr {

void NeoParams::validate() const {
  if (smooth_window <= 0 || smooth_window % 2 == 0)
    throw ValidationError("neo: smooth_window must be a positive odd integer");
  if (!(threshold_multiplier > 0.0)) throw ValidationError("neo: threshold_multiplier must be positive");
  if (refractory_ns < 0) throw ValidationError("neo: refractory_ns must be non-negative");
}

std::vector<double> neo(std::span<const double> x) {
  if (x.size() < 3) throw ValidationError("neo: signal needs at least 3 samples");
  std::vector<double> psi(x.size(), 0.0);
  for (std::size_t n = 1; n + 1 < x.size(); ++n) psi[n] = x[n] * x[n] - x[n - 1] * x[n + 1];
  return psi;
}

std::vector<double> neo(const SampledSignal& signal) { return neo(std::span<const double>(signal.samples)); }

std::vector<double> bartlett_weights(int window) {
  if (window <= 0 || window % 2 == 0) throw ValidationError("bartlett window must be odd and positive");
  const int c = window / 2;
  std::vector<double> w(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) w[i] = 1.0 - std::abs(i - c) / static_cast<double>(c + 1);
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
  return w;
}

std::vector<double> smooth(std::span<const double> x, std::span<const double> weights) {
  const auto half = static_cast<long>(weights.size() / 2);
  const auto n = static_cast<long>(x.size());
  std::vector<double> out(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = 0; j < static_cast<long>(weights.size()); ++j) {
      const long k = i + j - half;
      if (k >= 0 && k < n) acc += weights[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

DetectionSet detect_neo(const SampledSignal& signal, const NeoParams& p) {
  signal.validate();
  p.validate();
  const auto psi = neo(signal);
  const auto s = smooth(psi, bartlett_weights(p.smooth_window));
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  const double threshold = p.threshold_multiplier * mean;

  DetectionSet out;
  std::optional<TimeNs> last;
  for (std::size_t n = 1; n + 1 < s.size(); ++n) {
    if (!(s[n] > threshold && s[n] >= s[n - 1] && s[n] > s[n + 1])) continue;
    const TimeNs t = signal.time_of(n);
    if (last && t - *last < p.refractory_ns) continue;
    out.detected_times_ns.push_back(t);
    last = t;
  }
  return out;
}

}  // namespace ebnr
