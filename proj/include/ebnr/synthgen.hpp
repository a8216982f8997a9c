#pragma once

// Synthetic extracellular recordings: unit-peak spike templates placed by a
// dead-time Poisson process over noise assembled from the same shapes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ebnr/core.hpp"

namespace ebnr {

struct SpikeTemplate {
  std::vector<double> waveform;
  int peak_index = 0;
  std::string name;

  /// Rescales so max |waveform| == 1 and re-locates peak_index.
  void normalize();
  void validate() const;
};

enum class NoiseModel { TemplateSuperposition, BandlimitedGaussian };

std::string to_string(NoiseModel m);
NoiseModel noise_model_from_string(const std::string& s);

struct GenConfig {
  double duration_s = 6.0;
  double sample_rate_hz = 24000.0;
  /// Noise standard deviation relative to the unit spike peak.
  double noise_level = 0.05;
  double firing_rate_hz = 20.0;
  double generator_refractory_ms = 2.0;
  NoiseModel noise_model = NoiseModel::TemplateSuperposition;
  /// Background units per second contributing to superposition noise.
  double noise_density_hz = 2000.0;
  /// Time dilation applied to background units (distant units look slower).
  double noise_dilation = 3.0;
  /// Low-pass corner of the Gaussian noise model.
  double gaussian_cutoff_hz = 3000.0;
  std::uint64_t seed = 1;

  std::size_t n_samples() const;
  void validate() const;
};

struct Recording {
  SampledSignal signal;
  GroundTruth truth;
  /// Spike component alone (no noise), same length as signal.
  std::vector<double> clean;
};

/// The three bundled shapes: biphasic positive, triphasic, inverted biphasic.
/// 64 samples at 24 kHz, unit peak.
std::vector<SpikeTemplate> builtin_templates();

/// One amplitude per line; `peak_index` is recomputed after normalization.
SpikeTemplate load_template(const std::filesystem::path& path);

/// Time-stretches a waveform by `factor` with linear interpolation.
std::vector<double> dilate(std::span<const double> waveform, double factor);

std::vector<double> make_noise(const GenConfig& cfg, std::span<const SpikeTemplate> templates,
                               std::size_t n_samples, std::uint64_t seed);

/// Sorted spike peak sample indices with the configured rate and dead time.
std::vector<std::size_t> draw_spike_indices(const GenConfig& cfg, std::uint64_t seed);

/// Samples are quantized to float32 so the binary file format round-trips exactly.
Recording generate_recording(std::span<const SpikeTemplate> templates, const GenConfig& cfg);

Recording load_recording(const std::filesystem::path& signal_path,
                         const std::filesystem::path& truth_path);
void save_recording(const Recording& rec, const std::filesystem::path& signal_path,
                    const std::filesystem::path& truth_path);

}  // namespace ebnr
