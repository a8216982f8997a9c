#include "ebnr/metrics.hpp"

#include <cstdlib>

namespace ebnr {

MatchResult match_spikes(const GroundTruth& truth, const DetectionSet& det, TimeNs window_ns) {
  if (window_ns <= 0) throw ValidationError("match: window_ns must be positive");
  truth.validate();
  det.validate();
  const auto& t = truth.spike_times_ns;
  std::vector<bool> used(t.size(), false);
  MatchResult r;
  std::size_t lo = 0;  // first truth that can still be within reach
  for (TimeNs d : det.detected_times_ns) {
    while (lo < t.size() && t[lo] < d - window_ns) ++lo;
    std::size_t best = t.size();
    TimeNs best_dist = window_ns + 1;
    for (std::size_t j = lo; j < t.size() && t[j] <= d + window_ns; ++j) {
      if (used[j]) continue;
      const TimeNs dist = std::llabs(t[j] - d);
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    if (best == t.size()) {
      ++r.fp;
      continue;
    }
    used[best] = true;
    ++r.tp;
    r.pairs.emplace_back(t[best], d);
  }
  r.fn = static_cast<int>(t.size()) - r.tp;
  return r;
}

EvalReport evaluate(const MatchResult& m) {
  if (m.tp < 0 || m.fp < 0 || m.fn < 0) throw ValidationError("evaluate: negative counts");
  EvalReport e;
  e.tp = m.tp;
  e.fp = m.fp;
  e.fn = m.fn;
  e.sensitivity = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 1.0;
  e.accuracy = m.tp + m.fp + m.fn > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp + m.fn) : 1.0;
  e.fdr = m.tp + m.fp > 0 ? static_cast<double>(m.fp) / (m.tp + m.fp) : 0.0;
  return e;
}

}  // namespace ebnr
