#pragma once

// Experiment orchestration: full pipeline runs, the trip-voltage x detection
// threshold heatmap, the mismatch Monte Carlo study and the detector
// comparison. Independent jobs run on a bounded pool; rows are stored by job
// index so output bytes never depend on scheduling.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ebnr/config.hpp"
#include "ebnr/metrics.hpp"

namespace ebnr {

/// Encoded recording plus everything a detector might need.
struct PreparedRun {
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string id;
  Recording rec;
  EventStream events;
};

PreparedRun prepare_run(const ExperimentConfig& cfg, std::span<const SpikeTemplate> templates,
                        double noise_level, std::uint64_t seed);

DetectionSet run_detector(const ExperimentConfig& cfg, DetectorKind kind, const PreparedRun& run);
DetectionSet run_detector(const ExperimentConfig& cfg, DetectorKind kind, const SampledSignal& signal,
                          const EventStream& events);

/// FNV-1a over the canonical text of the parameters a detector reads.
std::string params_hash(const ExperimentConfig& cfg, DetectorKind kind);

struct RunRow {
  std::string recording;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string detector;
  std::string params_hash;
  EvalReport report;
};

std::vector<RunRow> run_pipeline(const ExperimentConfig& cfg);

struct HeatmapCell {
  double delta = 0.0;
  TimeNs t_bin_ns = 0;
  int n_s = 0;
  double th_sram_mv = 0.0;
  int theta_bin = 0;
  int th_det = 0;
  double mean_accuracy = 0.0;
  double mean_sensitivity = 0.0;
  double mean_fdr = 0.0;
};

struct HeatmapRawRow {
  std::string recording;
  double noise_level = 0.0;
  std::size_t cell = 0;
  EvalReport report;
};

struct HeatmapResult {
  std::vector<HeatmapCell> cells;
  std::vector<HeatmapRawRow> raw;
  std::size_t argmax = 0;
  bool extended = false;  // true when delta/t_bin/n_s were swept too

  const HeatmapCell& best() const { return cells.at(argmax); }
  /// Cells whose mean accuracy is within `points` (absolute) of the best.
  std::size_t plateau_size(double points) const;
};

/// Accuracy is averaged over seeds, then over noise levels with equal weight.
/// The argmax is the first maximal cell in grid order.
HeatmapResult sweep_heatmap(const ExperimentConfig& cfg);

struct McResult {
  PeakDistributions peaks;
  double margin = 0.0;
  int noise_events = 0;
  int spike_events = 0;
};

/// Noise-only and noise-plus-one-spike segments of mc.segment_ms.
McResult mc_experiment(const ExperimentConfig& cfg);

struct ComparisonRow {
  std::string detector;
  double noise_level = 0.0;
  /// Baseline multiplier selected by the sweep; 0 for event-domain rows.
  double threshold_multiplier = 0.0;
  double mean_sensitivity = 0.0;
  double mean_accuracy = 0.0;
  double mean_fdr = 0.0;
  std::size_t runs = 0;
};

/// Event-domain detectors at their configured parameters; baselines at the
/// multiplier maximizing mean accuracy for each noise level.
std::vector<ComparisonRow> compare_detectors(const ExperimentConfig& cfg);

// CSV writers.
std::string report_csv(const std::vector<RunRow>& rows);
std::string heatmap_csv(const HeatmapResult& r);
std::string heatmap_raw_csv(const HeatmapResult& r);
std::string mc_csv(const McResult& r);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Records the command, tool version and every config key.
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::string& command);

}  // namespace ebnr
