#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "ebnr/harness.hpp"

using namespace ebnr;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.gen.duration_s = 2.0;
  c.seeds = {1, 2, 3};
  c.noise_levels = {0.05, 0.2};
  return c;
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1) / 2;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - mean) * (rb[i] - mean);
    saa += (ra[i] - mean) * (ra[i] - mean);
    sbb += (rb[i] - mean) * (rb[i] - mean);
  }
  return sab / std::sqrt(saa * sbb);
}

const HeatmapCell& cell_at(const HeatmapResult& r, double mv, int td) {
  for (const auto& c : r.cells)
    if (c.th_sram_mv == mv && c.th_det == td) return c;
  throw std::runtime_error("cell not found");
}

}  // namespace

TEST_CASE("pipeline rows and determinism") {
  const auto cfg = small_config();
  const auto a = run_pipeline(cfg);
  REQUIRE(a.size() == 6);
  CHECK(a[0].recording == "n0.05_s1");
  CHECK(a[5].recording == "n0.2_s3");
  for (const auto& r : a) {
    CHECK(r.detector == "event");
    CHECK(r.params_hash == a[0].params_hash);
    CHECK(r.params_hash.size() == 16);
  }
  CHECK(report_csv(run_pipeline(cfg)) == report_csv(a));
}

TEST_CASE("output does not depend on the worker count") {
  auto cfg = small_config();
  cfg.detector = DetectorKind::Hram;
  ::setenv("EBNR_SPD_THREADS", "1", 1);
  const auto serial = report_csv(run_pipeline(cfg));
  ::setenv("EBNR_SPD_THREADS", "4", 1);
  const auto parallel = report_csv(run_pipeline(cfg));
  ::unsetenv("EBNR_SPD_THREADS");
  CHECK(serial == parallel);
}

TEST_CASE("params hash tracks only what the detector reads") {
  ExperimentConfig a, b;
  CHECK(params_hash(a, DetectorKind::Event) == params_hash(b, DetectorKind::Event));
  b.neo.threshold_multiplier = 5.0;
  CHECK(params_hash(a, DetectorKind::Event) == params_hash(b, DetectorKind::Event));
  CHECK(params_hash(a, DetectorKind::NeoOriginal) != params_hash(b, DetectorKind::NeoOriginal));
  b.event.theta_bin = 7;
  CHECK(params_hash(a, DetectorKind::Event) != params_hash(b, DetectorKind::Event));
  CHECK(params_hash(a, DetectorKind::Event) != params_hash(a, DetectorKind::Hram));
}

TEST_CASE("a one-cell sweep equals the direct pipeline") {
  auto cfg = small_config();
  cfg.noise_levels = {0.1};
  cfg.seeds = {4};
  cfg.sweep.th_sram_mv = {700};
  cfg.sweep.th_det = {3};
  const auto sweep = sweep_heatmap(cfg);
  REQUIRE(sweep.cells.size() == 1);
  REQUIRE(sweep.raw.size() == 1);
  CHECK(sweep.best().theta_bin == 7);

  cfg.event.theta_bin = 7;
  cfg.event.th_det = 3;
  const auto direct = run_pipeline(cfg).at(0).report;
  CHECK(sweep.raw[0].report.tp == direct.tp);
  CHECK(sweep.raw[0].report.fp == direct.fp);
  CHECK(sweep.raw[0].report.fn == direct.fn);
  CHECK(sweep.best().mean_accuracy == doctest::Approx(direct.accuracy));
}

TEST_CASE("sweep grid layout") {
  auto cfg = small_config();
  cfg.seeds = {1};
  cfg.sweep.th_det = {1, 2, 6};
  const auto r = sweep_heatmap(cfg);
  CHECK_FALSE(r.extended);
  CHECK(r.cells.size() == 18);  // th_det = 6 exceeds n_s = 5
  CHECK(r.raw.size() == 2 * 18);
  for (const auto& c : r.cells) {
    CHECK(c.mean_accuracy <= r.best().mean_accuracy);
    CHECK(c.mean_accuracy >= 0.0);
  }
  CHECK(r.plateau_size(0.0) >= 1);
  CHECK(r.plateau_size(1.0) == r.cells.size());

  std::istringstream csv(heatmap_csv(r));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "th_sram_mv,th_det,mean_accuracy,mean_sensitivity,mean_fdr");

  cfg.sweep.n_s = {3, 5};
  cfg.sweep.th_sram_mv = {600};
  const auto ext = sweep_heatmap(cfg);
  CHECK(ext.extended);
  CHECK(ext.cells.size() == 2 + 2);
  CHECK(heatmap_csv(ext).rfind("delta,t_bin_ns,n_s,", 0) == 0);

  cfg.sweep.th_det = {9};
  CHECK_THROWS_AS(sweep_heatmap(cfg), ValidationError);
}

TEST_CASE("heatmap structure on the default grid") {
  ExperimentConfig cfg;
  cfg.seeds = {1, 2, 3, 4, 5};
  const auto r = sweep_heatmap(cfg);
  CHECK(r.cells.size() == 45);

  // Requiring all five bins is never better than two near the optimum.
  for (double mv : {500.0, 600.0, 700.0}) CHECK(cell_at(r, mv, 5).mean_accuracy <= cell_at(r, mv, 2).mean_accuracy);

  // A different seed set moves the argmax by at most one grid step.
  auto other = cfg;
  other.seeds = {11, 12, 13, 14, 15};
  const auto r2 = sweep_heatmap(other);
  CHECK(std::abs(r2.best().th_sram_mv - r.best().th_sram_mv) <= 100.0);
  CHECK(std::abs(r2.best().th_det - r.best().th_det) <= 1);
}

TEST_CASE("accuracy falls as noise rises") {
  ExperimentConfig cfg;
  cfg.noise_levels = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  const auto rows = run_pipeline(cfg);
  std::vector<double> level, acc;
  for (const auto& r : rows) {
    level.push_back(r.noise_level);
    acc.push_back(r.report.accuracy);
  }
  CHECK(spearman(level, acc) < 0.0);
}

TEST_CASE("noise-free recordings are scored perfectly by every detector") {
  auto cfg = small_config();
  cfg.noise_levels = {0.0};
  for (const auto& r : compare_detectors(cfg)) {
    INFO(r.detector);
    CHECK(r.mean_accuracy == 1.0);
  }
}

TEST_CASE("comparison layout") {
  auto cfg = small_config();
  cfg.sweep.threshold_multiplier = {6, 8};
  const auto rows = compare_detectors(cfg);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].detector == "event");
  CHECK(rows[2].detector == "hram");
  CHECK(rows[4].detector == "neo_original");
  CHECK(rows[6].detector == "neo_reconstructed");
  CHECK(rows[1].noise_level == 0.2);
  for (const auto& r : rows) {
    CHECK(r.runs == 3);
    if (r.detector.rfind("neo", 0) == 0)
      CHECK((r.threshold_multiplier == 6 || r.threshold_multiplier == 8));
    else
      CHECK(r.threshold_multiplier == 0);
  }
  CHECK(comparison_csv(rows).rfind("detector,noise_level,threshold_multiplier,", 0) == 0);
}

TEST_CASE("monte carlo experiment") {
  ExperimentConfig cfg;
  cfg.mc.runs = 50;
  cfg.mismatch.seed = 1;
  const auto a = mc_experiment(cfg);
  cfg.mismatch.seed = 2;
  const auto b = mc_experiment(cfg);
  CHECK(a.peaks.noise_peaks.size() == 50);
  CHECK(a.margin > 0.0);
  CHECK(b.margin > 0.0);
  CHECK(a.peaks.noise_peaks != b.peaks.noise_peaks);
  CHECK(a.spike_events > a.noise_events);

  cfg.mismatch = MismatchModel::none();
  const auto z = mc_experiment(cfg);
  CHECK(std::all_of(z.peaks.spike_peaks.begin(), z.peaks.spike_peaks.end(),
                    [&](double v) { return v == z.peaks.spike_peaks[0]; }));

  std::istringstream csv(mc_csv(a));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "run,input_kind,peak_v");
  std::getline(csv, line);
  CHECK(line.rfind("0,noise,", 0) == 0);

  cfg.mc.template_index = 7;
  CHECK_THROWS_AS(mc_experiment(cfg), ValidationError);
}

TEST_CASE("stage-tagged failures") {
  auto cfg = small_config();
  cfg.dm.pulse_width_ns = 20'000;  // cannot fit a steep spike edge in one sample period
  try {
    run_pipeline(cfg);
    FAIL("expected failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).rfind("[encode n0.05_s", 0) == 0);
  }
}

TEST_CASE("manifest lists tool, command and config") {
  const auto p = std::filesystem::temp_directory_path() / ("ebnr_manifest_" + std::to_string(::getpid()) + ".txt");
  ExperimentConfig cfg;
  cfg.dm.delta = 0.07;
  write_manifest(p, cfg, "sweep");
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto text = ss.str();
  CHECK(text.find("tool = ebnr-spd") != std::string::npos);
  CHECK(text.find("command = sweep") != std::string::npos);
  CHECK(text.find("dm.delta = 0.07") != std::string::npos);
  std::filesystem::remove(p);
}
