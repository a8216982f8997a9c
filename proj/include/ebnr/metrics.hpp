#pragma once

#include <utility>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr {

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  /// (truth time, detected time) for each true positive, in detection order.
  std::vector<std::pair<TimeNs, TimeNs>> pairs;
};

struct EvalReport {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double sensitivity = 1.0;
  double accuracy = 1.0;
  double fdr = 0.0;
};

/// Greedy chronological one-to-one matching: each detection, in time order,
/// claims the nearest still-unmatched truth spike within +-window_ns (the
/// earlier one on a distance tie).
MatchResult match_spikes(const GroundTruth& truth, const DetectionSet& det, TimeNs window_ns = 1'000'000);

/// S = TP/(TP+FN), A = TP/(TP+FP+FN), FDR = FP/(TP+FP).
/// Empty denominators give S = 1, A = 1, FDR = 0.
EvalReport evaluate(const MatchResult& match);

}  // namespace ebnr
