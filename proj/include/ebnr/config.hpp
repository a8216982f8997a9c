#pragma once

// Experiment configuration. Every field is addressable as a dotted key in a
// `key = value` file and through `--set key=value` on the command line.
// List values are comma separated; `lo:hi:step` expands to an inclusive range.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ebnr/baseline_neo.hpp"
#include "ebnr/delta_mod.hpp"
#include "ebnr/event_neo.hpp"
#include "ebnr/hram.hpp"
#include "ebnr/synthgen.hpp"

namespace ebnr {

inline constexpr const char* kToolVersion = "0.3.0";

enum class DetectorKind { Event, Hram, NeoOriginal, NeoReconstructed };

std::string to_string(DetectorKind k);
DetectorKind detector_from_string(const std::string& s);

struct SweepRanges {
  std::vector<double> th_sram_mv{100, 200, 300, 400, 500, 600, 700, 800, 900};
  std::vector<int> th_det{1, 2, 3, 4, 5};
  /// Empty: use the single base value.
  std::vector<TimeNs> t_bin_ns;
  std::vector<int> n_s;
  std::vector<double> delta;
  /// Baseline multipliers tried by the comparison; the best is reported.
  std::vector<double> threshold_multiplier{4, 6, 8, 12, 16, 24};
};

struct McSettings {
  int runs = 200;
  double noise_level = 0.1;
  double segment_ms = 10.0;
  int template_index = 0;
};

struct IoPaths {
  std::string signal;
  std::string events;
  std::string truth;
  std::string detections;
  std::string recording;
};

struct ExperimentConfig {
  GenConfig gen;
  DmConfig dm;
  DetectorParams event;
  HramParams hram;
  MismatchModel mismatch;
  NeoParams neo;
  DetectorKind detector = DetectorKind::Event;
  SweepRanges sweep;
  McSettings mc;
  IoPaths io;
  /// Comma-separated template files; "builtin" selects the bundled shapes.
  std::string templates = "builtin";
  std::vector<double> noise_levels{0.05, 0.1, 0.15, 0.2};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  TimeNs match_window_ns = 1'000'000;
  std::filesystem::path output_dir = "out";

  /// Throws ValidationError on an unknown key or unparsable value.
  void set(const std::string& key, const std::string& value);
  void apply_file(const std::filesystem::path& path);
  /// Every key with its current value, in a stable order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  void validate() const;

  std::vector<SpikeTemplate> load_templates() const;
};

}  // namespace ebnr
