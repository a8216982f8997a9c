#pragma once

// Event-domain spike detector. The energy of a bin is the number of pulses in
// it (fixed pulse amplitude, so squaring is a no-op), binarized against
// theta_bin, then summed over a sliding window of n_s bins and compared to
// th_det, with a refractory period between detections.

#include <optional>
#include <span>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr {

struct DetectorParams {
  TimeNs t_bin_ns = 125'000;
  int theta_bin = 6;
  int n_s = 5;
  int th_det = 2;
  TimeNs refractory_ns = 1'000'000;

  void validate() const;
};

/// Pulse count per bin, ON and OFF weighted equally.
std::vector<int> neo_prime(const EventStream& stream, TimeNs t_bin_ns);

/// Streaming form of the window logic: constant memory, one bin per push.
class WindowDetector {
 public:
  explicit WindowDetector(const DetectorParams& p);

  /// Feeds bin `bins_seen()`; returns the detection time if it fires.
  std::optional<TimeNs> push(int count);
  std::size_t bins_seen() const noexcept { return seen_; }

 private:
  DetectorParams p_;
  std::vector<unsigned char> bits_;
  std::size_t head_ = 0;
  int window_sum_ = 0;
  std::size_t seen_ = 0;
  std::optional<TimeNs> last_;
};

DetectionSet detect_counts(std::span<const int> counts, const DetectorParams& p);
DetectionSet detect(const EventStream& stream, const DetectorParams& p);

}  // namespace ebnr
