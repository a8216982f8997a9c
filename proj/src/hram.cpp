#include "ebnr/hram.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ebnr/parallel.hpp"

namespace ebnr {

void HramParams::validate() const {
  if (!(vdd > 0.0)) throw ValidationError("hram: vdd must be positive");
  if (!(dv_per_pulse > 0.0)) throw ValidationError("hram: dv_per_pulse must be positive");
  if (!(th_sram > 0.0 && th_sram < vdd)) throw ValidationError("hram: th_sram must lie in (0, vdd)");
  if (!(leak_v_per_s >= 0.0)) throw ValidationError("hram: leak_v_per_s must be non-negative");
  if (n_s <= 0) throw ValidationError("hram: n_s must be positive");
  if (th_det <= 0 || th_det > n_s) throw ValidationError("hram: th_det must lie in [1, n_s]");
  if (t_bin_ns <= 0) throw ValidationError("hram: t_bin_ns must be positive");
  if (refractory_ns < t_bin_ns) throw ValidationError("hram: refractory_ns must be >= t_bin_ns");
}

double HramParams::v_ref() const noexcept { return (th_det - 0.5) * vdd / n_s; }

int HramParams::theta_bin() const { return std::max(1, min_steps_to_reach(th_sram, dv_per_pulse)); }

DetectorParams HramParams::equivalent_detector() const {
  return DetectorParams{t_bin_ns, theta_bin(), n_s, th_det, refractory_ns};
}

void MismatchModel::validate() const {
  if (!(sigma_dv_rel >= 0.0) || !(sigma_th_v >= 0.0)) throw ValidationError("mismatch: sigmas must be >= 0");
}

double accumulate_phase(HramCell& cell, int n_pulses, const HramParams& p) {
  if (n_pulses < 0) throw ValidationError("hram: negative pulse count");
  double v = std::min(p.vdd, static_cast<double>(n_pulses) * cell.dv_eff);
  v -= p.leak_v_per_s * static_cast<double>(p.t_bin_ns) * 1e-9;
  cell.v_cap = std::clamp(v, 0.0, p.vdd);
  return cell.v_cap;
}

bool threshold_phase(HramCell& cell) {
  cell.bit = cell.v_cap >= cell.th_eff;
  cell.v_cap = 0.0;
  return cell.bit;
}

DetectionLineReading detection_phase(std::span<const HramCell> row, const HramParams& p) {
  int ones = 0;
  for (const HramCell& c : row) ones += c.bit ? 1 : 0;
  DetectionLineReading r;
  r.v_dl = static_cast<double>(ones) / static_cast<double>(p.n_s) * p.vdd;
  r.spike = r.v_dl >= p.v_ref();
  return r;
}

std::vector<HramCell> draw_cells(const HramParams& p, const MismatchModel& m, std::uint64_t stream) {
  p.validate();
  m.validate();
  std::vector<HramCell> cells(static_cast<std::size_t>(p.n_s));
  for (auto& c : cells) {
    c.dv_eff = p.dv_per_pulse;
    c.th_eff = p.th_sram;
  }
  if (m.is_zero()) return cells;
  std::seed_seq seq{static_cast<std::uint32_t>(m.seed), static_cast<std::uint32_t>(m.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> z(0.0, 1.0);
  for (auto& c : cells) {
    c.dv_eff = std::max(0.0, p.dv_per_pulse * (1.0 + m.sigma_dv_rel * z(rng)));
    c.th_eff = p.th_sram + m.sigma_th_v * z(rng);
  }
  return cells;
}

HramArrayState::HramArrayState(const HramParams& p, std::vector<HramCell> cells)
    : p_(p), cells_(std::move(cells)) {
  p_.validate();
  if (cells_.size() != static_cast<std::size_t>(p_.n_s)) throw ValidationError("hram: row must hold n_s cells");
}

HramArrayState::HramArrayState(const HramParams& p, const MismatchModel& m, int channel)
    : HramArrayState(p, draw_cells(p, m, static_cast<std::uint64_t>(channel))) {}

std::optional<TimeNs> HramArrayState::step_bin(int count, std::size_t bin_index) {
  if (bin_index != next_bin_)
    throw ValidationError("hram: bin " + std::to_string(bin_index) + " fed out of order, expected " +
                          std::to_string(next_bin_));
  ++next_bin_;

  HramCell& cell = cells_[pointer_];
  cell.v_cap = 0.0;
  cell.bit = false;
  peak_v_cap_ = std::max(peak_v_cap_, accumulate_phase(cell, count, p_));
  threshold_phase(cell);
  pointer_ = (pointer_ + 1) % cells_.size();

  // The row holds a full window only once every cell has been written.
  if (bin_index + 1 < cells_.size()) return std::nullopt;
  const TimeNs end = static_cast<TimeNs>(bin_index + 1) * p_.t_bin_ns;
  if (last_detection_ && end - *last_detection_ < p_.refractory_ns) return std::nullopt;
  last_reading_ = detection_phase(cells_, p_);
  if (!last_reading_.spike) return std::nullopt;
  last_detection_ = end;
  return end;
}

DetectionSet run_hram_counts(std::span<const int> counts, const HramParams& p, const MismatchModel& m,
                             int channel) {
  HramArrayState state(p, m, channel);
  DetectionSet out;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (auto t = state.step_bin(counts[k], k)) out.detected_times_ns.push_back(*t);
  return out;
}

DetectionSet run_hram(const EventStream& stream, const HramParams& p, const MismatchModel& m) {
  p.validate();
  const auto counts = bin_events(stream, p.t_bin_ns);
  return run_hram_counts(counts, p, m, stream.channel);
}

double PeakDistributions::margin() const {
  if (noise_peaks.empty() || spike_peaks.empty()) throw ValidationError("margin of empty distributions");
  return *std::min_element(spike_peaks.begin(), spike_peaks.end()) -
         *std::max_element(noise_peaks.begin(), noise_peaks.end());
}

PeakDistributions monte_carlo_peaks(const EventStream& noise_input, const EventStream& spike_input,
                                    const HramParams& p, const MismatchModel& m, int runs) {
  p.validate();
  m.validate();
  if (runs < 1) throw ValidationError("monte carlo: runs must be >= 1");
  const auto noise_counts = bin_events(noise_input, p.t_bin_ns);
  const auto spike_counts = bin_events(spike_input, p.t_bin_ns);

  PeakDistributions out;
  out.noise_peaks.resize(static_cast<std::size_t>(runs));
  out.spike_peaks.resize(static_cast<std::size_t>(runs));
  auto peak_of = [&](std::span<const int> counts, const std::vector<HramCell>& cells) {
    HramArrayState state(p, cells);
    for (std::size_t k = 0; k < counts.size(); ++k) state.step_bin(counts[k], k);
    return state.peak_v_cap();
  };
  parallel_for(out.noise_peaks.size(), [&](std::size_t r) {
    const auto cells = draw_cells(p, m, r);
    out.noise_peaks[r] = peak_of(noise_counts, cells);
    out.spike_peaks[r] = peak_of(spike_counts, cells);
  });
  return out;
}

}  // namespace ebnr
