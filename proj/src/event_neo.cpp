#include "ebnr/event_neo.hpp"

namespace ebnr {

void DetectorParams::validate() const {
  if (t_bin_ns <= 0) throw ValidationError("detector: t_bin_ns must be positive");
  if (theta_bin <= 0) throw ValidationError("detector: theta_bin must be positive");
  if (n_s <= 0) throw ValidationError("detector: n_s must be positive");
  if (th_det <= 0 || th_det > n_s) throw ValidationError("detector: th_det must lie in [1, n_s]");
  if (refractory_ns < t_bin_ns) throw ValidationError("detector: refractory_ns must be >= t_bin_ns");
}

std::vector<int> neo_prime(const EventStream& stream, TimeNs t_bin_ns) { return bin_events(stream, t_bin_ns); }

WindowDetector::WindowDetector(const DetectorParams& p) : p_(p), bits_(static_cast<std::size_t>(p.n_s), 0) {
  p_.validate();
}

std::optional<TimeNs> WindowDetector::push(int count) {
  const unsigned char bit = count >= p_.theta_bin ? 1 : 0;
  window_sum_ += bit - bits_[head_];
  bits_[head_] = bit;
  head_ = (head_ + 1) % bits_.size();
  const std::size_t k = seen_++;

  if (k + 1 < bits_.size()) return std::nullopt;
  const TimeNs end = static_cast<TimeNs>(k + 1) * p_.t_bin_ns;
  if (last_ && end - *last_ < p_.refractory_ns) return std::nullopt;
  if (window_sum_ < p_.th_det) return std::nullopt;
  last_ = end;
  return end;
}

DetectionSet detect_counts(std::span<const int> counts, const DetectorParams& p) {
  WindowDetector det(p);
  DetectionSet out;
  for (int c : counts)
    if (auto t = det.push(c)) out.detected_times_ns.push_back(*t);
  return out;
}

DetectionSet detect(const EventStream& stream, const DetectorParams& p) {
  p.validate();
  return detect_counts(neo_prime(stream, p.t_bin_ns), p);
}

}  // namespace ebnr
