// ebnr-spd: command-line entry point for the event-domain spike detection
// pipeline.
//
//   ebnr-spd <command> [--config FILE] [--set key=value ...] [--seed N] [--out DIR]
//
// Commands: generate, encode, detect-event, detect-hram, detect-neo, evaluate,
// run, sweep, montecarlo, compare. Outputs land in --out (default "out")
// together with a manifest.txt that reproduces the run.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "ebnr/harness.hpp"
#include "ebnr/io.hpp"

namespace {

using namespace ebnr;
namespace fs = std::filesystem;

struct CommonArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string signal, events, truth, detections;
  std::string input = "original";
};

void add_common(CLI::App* sub, CommonArgs& a) {
  sub->add_option("--config", a.config, "key = value configuration file");
  sub->add_option("--set", a.sets, "override a config key (key=value), repeatable");
  sub->add_option("--seed", a.seed, "single seed for generation and sweeps");
  sub->add_option("--out", a.out, "output directory");
}

ExperimentConfig build_config(const CommonArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg.apply_file(a.config);
  for (const auto& s : a.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (a.seed) {
    cfg.gen.seed = *a.seed;
    cfg.seeds = {*a.seed};
  }
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (!a.signal.empty()) cfg.io.signal = a.signal;
  if (!a.events.empty()) cfg.io.events = a.events;
  if (!a.truth.empty()) cfg.io.truth = a.truth;
  if (!a.detections.empty()) cfg.io.detections = a.detections;
  cfg.validate();
  return cfg;
}

const std::string& require_path(const std::string& p, const char* what) {
  if (p.empty()) throw ValidationError(std::string("missing input: ") + what);
  return p;
}

void print_row(const std::string& label, const EvalReport& r) {
  std::printf("%s tp=%d fp=%d fn=%d S=%.4f A=%.4f FDR=%.4f\n", label.c_str(), r.tp, r.fp, r.fn, r.sensitivity,
              r.accuracy, r.fdr);
}

int cmd_generate(const ExperimentConfig& cfg) {
  const auto templates = cfg.load_templates();
  const auto rec = generate_recording(templates, cfg.gen);
  save_recording(rec, cfg.output_dir / "signal.f32", cfg.output_dir / "truth.txt");
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "generate");
  std::printf("generated %zu samples, %zu spikes -> %s\n", rec.signal.size(), rec.truth.spike_times_ns.size(),
              cfg.output_dir.string().c_str());
  return 0;
}

int cmd_encode(const ExperimentConfig& cfg) {
  const auto signal = io::read_signal(require_path(cfg.io.signal, "--signal"));
  const auto events = modulate(signal, cfg.dm);
  io::write_events_csv(cfg.output_dir / "events.csv", events);
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "encode");
  std::printf("encoded %zu samples into %zu events\n", signal.size(), events.size());
  return 0;
}

int cmd_detect_events(const ExperimentConfig& cfg, DetectorKind kind) {
  const auto events = io::read_events_csv(require_path(cfg.io.events, "--events"));
  const auto det = kind == DetectorKind::Event ? detect(events, cfg.event) : run_hram(events, cfg.hram, cfg.mismatch);
  io::write_spike_times(cfg.output_dir / "detections.txt", det.detected_times_ns);
  write_manifest(cfg.output_dir / "manifest.txt", cfg, kind == DetectorKind::Event ? "detect-event" : "detect-hram");
  std::printf("%zu detections\n", det.size());
  return 0;
}

int cmd_detect_neo(const ExperimentConfig& cfg, const std::string& input) {
  const auto signal = io::read_signal(require_path(cfg.io.signal, "--signal"));
  DetectionSet det;
  if (input == "original") {
    det = detect_neo(signal, cfg.neo);
  } else if (input == "reconstructed") {
    const auto events = cfg.io.events.empty() ? modulate(signal, cfg.dm) : io::read_events_csv(cfg.io.events);
    det = detect_neo(reconstruct(events, cfg.dm, signal.size(), signal.sample_rate_hz, signal.t0_ns), cfg.neo);
  } else {
    throw ValidationError("--input must be original or reconstructed");
  }
  io::write_spike_times(cfg.output_dir / "detections.txt", det.detected_times_ns);
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "detect-neo --input " + input);
  std::printf("%zu detections\n", det.size());
  return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  GroundTruth truth{io::read_spike_times(require_path(cfg.io.truth, "--truth"))};
  DetectionSet det{io::read_spike_times(require_path(cfg.io.detections, "--detections"))};
  RunRow row;
  row.recording = cfg.io.recording.empty() ? fs::path(cfg.io.truth).stem().string() : cfg.io.recording;
  row.noise_level = cfg.gen.noise_level;
  row.detector = to_string(cfg.detector);
  row.params_hash = params_hash(cfg, cfg.detector);
  row.report = evaluate(match_spikes(truth, det, cfg.match_window_ns));
  write_text(cfg.output_dir / "report.csv", report_csv({row}));
  print_row(row.recording, row.report);
  return 0;
}

int cmd_run(const ExperimentConfig& cfg) {
  const auto rows = run_pipeline(cfg);
  write_text(cfg.output_dir / "report.csv", report_csv(rows));
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "run");
  for (const auto& r : rows) print_row(r.recording, r.report);
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  const auto result = sweep_heatmap(cfg);
  write_text(cfg.output_dir / "heatmap.csv", heatmap_csv(result));
  write_text(cfg.output_dir / "sweep_runs.csv", heatmap_raw_csv(result));
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "sweep");
  const auto& b = result.best();
  io::write_key_values(cfg.output_dir / "sweep_summary.txt",
                       {{"argmax_th_sram_mv", io::format_double(b.th_sram_mv)},
                        {"argmax_th_det", std::to_string(b.th_det)},
                        {"argmax_theta_bin", std::to_string(b.theta_bin)},
                        {"argmax_mean_accuracy", io::format_fixed(b.mean_accuracy, 6)},
                        {"plateau_cells_within_2pt", std::to_string(result.plateau_size(0.02))}});
  std::printf("argmax th_sram=%g mV th_det=%d mean_accuracy=%.4f (plateau %zu cells within 2 pt)\n", b.th_sram_mv,
              b.th_det, b.mean_accuracy, result.plateau_size(0.02));
  return 0;
}

int cmd_montecarlo(const ExperimentConfig& cfg) {
  const auto r = mc_experiment(cfg);
  write_text(cfg.output_dir / "mc.csv", mc_csv(r));
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "montecarlo");
  const auto& np = r.peaks.noise_peaks;
  const auto& sp = r.peaks.spike_peaks;
  const double max_noise = *std::max_element(np.begin(), np.end());
  const double min_spike = *std::min_element(sp.begin(), sp.end());
  io::write_key_values(cfg.output_dir / "mc_summary.txt", {{"runs", std::to_string(np.size())},
                                                           {"max_noise_peak_v", io::format_fixed(max_noise, 9)},
                                                           {"min_spike_peak_v", io::format_fixed(min_spike, 9)},
                                                           {"margin_v", io::format_fixed(r.margin, 9)}});
  std::printf("runs=%zu max_noise=%.4f V min_spike=%.4f V margin=%.4f V\n", np.size(), max_noise, min_spike,
              r.margin);
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg) {
  const auto rows = compare_detectors(cfg);
  write_text(cfg.output_dir / "comparison.csv", comparison_csv(rows));
  write_manifest(cfg.output_dir / "manifest.txt", cfg, "compare");
  for (const auto& r : rows)
    std::printf("%-18s sigma=%-5g A=%.4f S=%.4f FDR=%.4f\n", r.detector.c_str(), r.noise_level, r.mean_accuracy,
                r.mean_sensitivity, r.mean_fdr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-domain neural spike detection: generator, encoder, detectors and experiments"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonArgs args;
  std::map<std::string, CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub, args);
    subs[name] = sub;
    return sub;
  };
  add("generate", "synthesize a recording (signal.f32 + truth.txt)");
  add("encode", "delta-modulate a signal into events.csv")->add_option("--signal", args.signal, "signal file");
  add("detect-event", "event-domain pulse-count detector")->add_option("--events", args.events, "events CSV");
  add("detect-hram", "HRAM array behavioral model")->add_option("--events", args.events, "events CSV");
  {
    auto* s = add("detect-neo", "software NEO baseline");
    s->add_option("--signal", args.signal, "signal file");
    s->add_option("--events", args.events, "events CSV used for reconstruction");
    s->add_option("--input", args.input, "original|reconstructed")->check(CLI::IsMember({"original", "reconstructed"}));
  }
  {
    auto* s = add("evaluate", "score detections against ground truth");
    s->add_option("--truth", args.truth, "ground-truth spike times");
    s->add_option("--detections", args.detections, "detected spike times");
  }
  add("run", "generate, encode, detect and evaluate over noise levels x seeds");
  add("sweep", "trip voltage x detection threshold accuracy heatmap");
  add("montecarlo", "mismatch Monte Carlo of capacitor peak voltages");
  add("compare", "event-domain detectors against NEO on original and reconstructed signals");

  CLI11_PARSE(app, argc, argv);

  std::string stage = "config";
  try {
    const ExperimentConfig cfg = build_config(args);
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      stage = name;
      if (name == "generate") return cmd_generate(cfg);
      if (name == "encode") return cmd_encode(cfg);
      if (name == "detect-event") return cmd_detect_events(cfg, DetectorKind::Event);
      if (name == "detect-hram") return cmd_detect_events(cfg, DetectorKind::Hram);
      if (name == "detect-neo") return cmd_detect_neo(cfg, args.input);
      if (name == "evaluate") return cmd_evaluate(cfg);
      if (name == "run") return cmd_run(cfg);
      if (name == "sweep") return cmd_sweep(cfg);
      if (name == "montecarlo") return cmd_montecarlo(cfg);
      if (name == "compare") return cmd_compare(cfg);
    }
  } catch (const ValidationError& e) {
    std::cerr << "ebnr-spd: [" << stage << "] " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "ebnr-spd: [" << stage << "] " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ebnr-spd: [" << stage << "] " << e.what() << '\n';
    return 1;
  }
  return 1;
}
