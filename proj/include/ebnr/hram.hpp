#pragma once

// Behavioral model of the hybrid SRAM/DRAM bitcell array.
//
// Each channel owns a row of n_s cells used as a circular buffer. Per time bin
// the cell under the pointer is reset, accumulates one voltage step per pulse
// on its capacitor, and latches a bit when the capacitor reaches the SRAM trip
// voltage. The latched bits of the row are then charge-shared onto the
// detection line and compared against a reference between adjacent levels.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ebnr/core.hpp"
#include "ebnr/event_neo.hpp"

namespace ebnr {

struct HramParams {
  double vdd = 1.0;
  double dv_per_pulse = 0.100;
  double th_sram = 0.600;
  double leak_v_per_s = 0.0;
  int n_s = 5;
  int th_det = 2;
  TimeNs t_bin_ns = 125'000;
  TimeNs refractory_ns = 1'000'000;

  void validate() const;
  /// Detection-line reference: midway between th_det - 1 and th_det cells.
  double v_ref() const noexcept;
  /// Pulse-count threshold equivalent to th_sram at nominal dv_per_pulse.
  int theta_bin() const;
  /// The algorithmic detector that this array reproduces with zero mismatch.
  DetectorParams equivalent_detector() const;
};

struct MismatchModel {
  double sigma_dv_rel = 0.05;
  double sigma_th_v = 0.020;
  std::uint64_t seed = 1;

  static MismatchModel none() { return {0.0, 0.0, 1}; }
  bool is_zero() const noexcept { return sigma_dv_rel == 0.0 && sigma_th_v == 0.0; }
  void validate() const;
};

struct HramCell {
  double v_cap = 0.0;
  bool bit = false;
  double dv_eff = 0.1;
  double th_eff = 0.6;
};

/// Charges a freshly reset cell with n_pulses steps; returns the new v_cap.
double accumulate_phase(HramCell& cell, int n_pulses, const HramParams& p);
/// Latches v_cap >= th_eff into the SRAM bit and clears the capacitor.
bool threshold_phase(HramCell& cell);

struct DetectionLineReading {
  double v_dl = 0.0;
  bool spike = false;
};

DetectionLineReading detection_phase(std::span<const HramCell> row, const HramParams& p);

/// Per-cell parameters drawn from the mismatch model.
std::vector<HramCell> draw_cells(const HramParams& p, const MismatchModel& m, std::uint64_t stream);

/// One channel row: cells, circular pointer, refractory bookkeeping.
class HramArrayState {
 public:
  HramArrayState(const HramParams& p, std::vector<HramCell> cells);
  HramArrayState(const HramParams& p, const MismatchModel& m, int channel = 0);

  /// Processes the bin with index `bin_index`, which must be the next one.
  std::optional<TimeNs> step_bin(int count, std::size_t bin_index);

  std::span<const HramCell> cells() const noexcept { return cells_; }
  std::size_t pointer() const noexcept { return pointer_; }
  std::optional<TimeNs> last_detection() const noexcept { return last_detection_; }
  /// Highest capacitor voltage reached since construction.
  double peak_v_cap() const noexcept { return peak_v_cap_; }
  DetectionLineReading last_reading() const noexcept { return last_reading_; }

 private:
  HramParams p_;
  std::vector<HramCell> cells_;
  std::size_t pointer_ = 0;
  std::size_t next_bin_ = 0;
  std::optional<TimeNs> last_detection_;
  double peak_v_cap_ = 0.0;
  DetectionLineReading last_reading_;
};

DetectionSet run_hram(const EventStream& stream, const HramParams& p, const MismatchModel& m);
DetectionSet run_hram_counts(std::span<const int> counts, const HramParams& p, const MismatchModel& m,
                             int channel = 0);

struct PeakDistributions {
  std::vector<double> noise_peaks;
  std::vector<double> spike_peaks;

  /// min(spike peaks) - max(noise peaks).
  double margin() const;
};

/// Each run draws a fresh set of cells and reports the peak capacitor voltage
/// reached by each input on that set. Deterministic given m.seed.
PeakDistributions monte_carlo_peaks(const EventStream& noise_input, const EventStream& spike_input,
                                    const HramParams& p, const MismatchModel& m, int runs);

}  // namespace ebnr
