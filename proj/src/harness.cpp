#include "ebnr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ebnr/io.hpp"
#include "ebnr/parallel.hpp"

namespace ebnr {

namespace {

std::string run_id(double noise_level, std::uint64_t seed) {
  return "n" + io::format_double(noise_level) + "_s" + std::to_string(seed);
}

struct GridJob {
  double noise_level;
  std::uint64_t seed;
};

std::vector<GridJob> grid_jobs(const ExperimentConfig& cfg) {
  std::vector<GridJob> jobs;
  for (double level : cfg.noise_levels)
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({level, seed});
  return jobs;
}

EvalReport score(const ExperimentConfig& cfg, const GroundTruth& truth, const DetectionSet& det) {
  return evaluate(match_spikes(truth, det, cfg.match_window_ns));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Mean of per-noise-level means, levels weighted equally.
struct LevelAverager {
  std::vector<double> levels;
  std::vector<double> acc_sum, sens_sum, fdr_sum;
  std::vector<std::size_t> n;

  explicit LevelAverager(std::vector<double> lv)
      : levels(std::move(lv)), acc_sum(levels.size()), sens_sum(levels.size()), fdr_sum(levels.size()),
        n(levels.size()) {}

  void add(double level, const EvalReport& r) {
    const auto it = std::find(levels.begin(), levels.end(), level);
    const auto i = static_cast<std::size_t>(it - levels.begin());
    acc_sum[i] += r.accuracy;
    sens_sum[i] += r.sensitivity;
    fdr_sum[i] += r.fdr;
    ++n[i];
  }
  double mean(const std::vector<double>& sums) const {
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) total += sums[i] / static_cast<double>(n[i]);
    return total / static_cast<double>(levels.size());
  }
};

}  // namespace

PreparedRun prepare_run(const ExperimentConfig& cfg, std::span<const SpikeTemplate> templates,
                        double noise_level, std::uint64_t seed) {
  PreparedRun run;
  run.noise_level = noise_level;
  run.seed = seed;
  run.id = run_id(noise_level, seed);
  GenConfig gen = cfg.gen;
  gen.noise_level = noise_level;
  gen.seed = seed;
  try {
    run.rec = generate_recording(templates, gen);
  } catch (const std::exception& e) {
    throw std::runtime_error("[generate " + run.id + "] " + e.what());
  }
  try {
    run.events = modulate(run.rec.signal, cfg.dm);
  } catch (const std::exception& e) {
    throw std::runtime_error("[encode " + run.id + "] " + e.what());
  }
  return run;
}

DetectionSet run_detector(const ExperimentConfig& cfg, DetectorKind kind, const SampledSignal& signal,
                          const EventStream& events) {
  switch (kind) {
    case DetectorKind::Event: return detect(events, cfg.event);
    case DetectorKind::Hram: return run_hram(events, cfg.hram, cfg.mismatch);
    case DetectorKind::NeoOriginal: return detect_neo(signal, cfg.neo);
    case DetectorKind::NeoReconstructed: {
      const auto rec = reconstruct(events, cfg.dm, signal.size(), signal.sample_rate_hz, signal.t0_ns);
      return detect_neo(rec, cfg.neo);
    }
  }
  throw ValidationError("unknown detector");
}

DetectionSet run_detector(const ExperimentConfig& cfg, DetectorKind kind, const PreparedRun& run) {
  try {
    return run_detector(cfg, kind, run.rec.signal, run.events);
  } catch (const std::exception& e) {
    throw std::runtime_error("[detect " + run.id + "] " + e.what());
  }
}

std::string params_hash(const ExperimentConfig& cfg, DetectorKind kind) {
  std::ostringstream s;
  s << to_string(kind) << ";delta=" << io::format_double(cfg.dm.delta);
  switch (kind) {
    case DetectorKind::Event:
      s << ";t_bin=" << cfg.event.t_bin_ns << ";theta=" << cfg.event.theta_bin << ";n_s=" << cfg.event.n_s
        << ";th_det=" << cfg.event.th_det << ";refr=" << cfg.event.refractory_ns;
      break;
    case DetectorKind::Hram:
      for (const auto& [k, v] : cfg.entries())
        if (k.rfind("hram.", 0) == 0 || k.rfind("mismatch.", 0) == 0) s << ';' << k << '=' << v;
      break;
    case DetectorKind::NeoOriginal:
    case DetectorKind::NeoReconstructed:
      s << ";win=" << cfg.neo.smooth_window << ";C=" << io::format_double(cfg.neo.threshold_multiplier)
        << ";refr=" << cfg.neo.refractory_ns;
      break;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.str())));
  return buf;
}

std::vector<RunRow> run_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto templates = cfg.load_templates();
  const auto jobs = grid_jobs(cfg);
  const std::string hash = params_hash(cfg, cfg.detector);
  std::vector<RunRow> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const auto run = prepare_run(cfg, templates, jobs[i].noise_level, jobs[i].seed);
    const auto det = run_detector(cfg, cfg.detector, run);
    rows[i] = RunRow{run.id, run.noise_level, run.seed, to_string(cfg.detector), hash,
                     score(cfg, run.rec.truth, det)};
  });
  return rows;
}

std::size_t HeatmapResult::plateau_size(double points) const {
  const double best_acc = best().mean_accuracy;
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](const HeatmapCell& c) {
    return c.mean_accuracy >= best_acc - points;
  }));
}

HeatmapResult sweep_heatmap(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& sw = cfg.sweep;
  const std::vector<double> deltas = sw.delta.empty() ? std::vector<double>{cfg.dm.delta} : sw.delta;
  const std::vector<TimeNs> bins = sw.t_bin_ns.empty() ? std::vector<TimeNs>{cfg.event.t_bin_ns} : sw.t_bin_ns;
  const std::vector<int> windows = sw.n_s.empty() ? std::vector<int>{cfg.event.n_s} : sw.n_s;

  HeatmapResult result;
  result.extended = deltas.size() > 1 || bins.size() > 1 || windows.size() > 1;
  for (double d : deltas)
    for (TimeNs tb : bins)
      for (int ns : windows)
        for (double mv : sw.th_sram_mv)
          for (int td : sw.th_det) {
            if (td > ns) continue;
            HeatmapCell c;
            c.delta = d;
            c.t_bin_ns = tb;
            c.n_s = ns;
            c.th_sram_mv = mv;
            c.theta_bin = std::max(1, min_steps_to_reach(mv / 1000.0, cfg.hram.dv_per_pulse));
            c.th_det = td;
            result.cells.push_back(c);
          }
  if (result.cells.empty()) throw ValidationError("sweep: grid is empty (th_det exceeds every n_s)");

  const auto templates = cfg.load_templates();
  const auto jobs = grid_jobs(cfg);
  std::vector<std::vector<EvalReport>> reports(jobs.size());
  std::vector<GroundTruth> truths(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    ExperimentConfig local = cfg;
    local.dm.delta = deltas.front();
    PreparedRun run = prepare_run(local, templates, jobs[j].noise_level, jobs[j].seed);
    auto& out = reports[j];
    out.resize(result.cells.size());
    double cur_delta = deltas.front();
    TimeNs cur_bin = -1;
    std::vector<int> counts;
    for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
      const HeatmapCell& c = result.cells[ci];
      if (c.delta != cur_delta) {
        local.dm.delta = c.delta;
        run.events = modulate(run.rec.signal, local.dm);
        cur_delta = c.delta;
        cur_bin = -1;
      }
      if (c.t_bin_ns != cur_bin) {
        counts = bin_events(run.events, c.t_bin_ns);
        cur_bin = c.t_bin_ns;
      }
      const DetectorParams p{c.t_bin_ns, c.theta_bin, c.n_s, c.th_det,
                             std::max(cfg.event.refractory_ns, c.t_bin_ns)};
      out[ci] = score(cfg, run.rec.truth, detect_counts(counts, p));
    }
  });

  for (std::size_t ci = 0; ci < result.cells.size(); ++ci) {
    LevelAverager avg(cfg.noise_levels);
    for (std::size_t j = 0; j < jobs.size(); ++j) avg.add(jobs[j].noise_level, reports[j][ci]);
    auto& c = result.cells[ci];
    c.mean_accuracy = avg.mean(avg.acc_sum);
    c.mean_sensitivity = avg.mean(avg.sens_sum);
    c.mean_fdr = avg.mean(avg.fdr_sum);
    if (c.mean_accuracy > result.cells[result.argmax].mean_accuracy) result.argmax = ci;
  }
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (std::size_t ci = 0; ci < result.cells.size(); ++ci)
      result.raw.push_back({run_id(jobs[j].noise_level, jobs[j].seed), jobs[j].noise_level, ci, reports[j][ci]});
  return result;
}

McResult mc_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto templates = cfg.load_templates();
  if (cfg.mc.template_index < 0 || static_cast<std::size_t>(cfg.mc.template_index) >= templates.size())
    throw ValidationError("mc: template index out of range");
  GenConfig gen = cfg.gen;
  gen.noise_level = cfg.mc.noise_level;
  const auto n = static_cast<std::size_t>(std::llround(cfg.mc.segment_ms * gen.sample_rate_hz / 1000.0));
  if (n < 2) throw ValidationError("mc: segment shorter than two samples");

  SampledSignal noise;
  noise.sample_rate_hz = gen.sample_rate_hz;
  noise.samples = make_noise(gen, templates, n, cfg.seeds.front());
  SampledSignal spike = noise;
  const SpikeTemplate& tpl = templates[static_cast<std::size_t>(cfg.mc.template_index)];
  const long start = static_cast<long>(n / 2) - tpl.peak_index;
  for (std::size_t i = 0; i < tpl.waveform.size(); ++i) {
    const long idx = start + static_cast<long>(i);
    if (idx >= 0 && idx < static_cast<long>(n)) spike.samples[static_cast<std::size_t>(idx)] += tpl.waveform[i];
  }

  McResult r;
  const auto noise_events = modulate(noise, cfg.dm);
  const auto spike_events = modulate(spike, cfg.dm);
  r.noise_events = static_cast<int>(noise_events.size());
  r.spike_events = static_cast<int>(spike_events.size());
  r.peaks = monte_carlo_peaks(noise_events, spike_events, cfg.hram, cfg.mismatch, cfg.mc.runs);
  r.margin = r.peaks.margin();
  return r;
}

std::vector<ComparisonRow> compare_detectors(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto templates = cfg.load_templates();
  const auto jobs = grid_jobs(cfg);
  const auto& cs = cfg.sweep.threshold_multiplier;

  // Per job: event, hram, then |cs| original and |cs| reconstructed reports.
  std::vector<std::vector<EvalReport>> reports(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t j) {
    const auto run = prepare_run(cfg, templates, jobs[j].noise_level, jobs[j].seed);
    auto& out = reports[j];
    out.push_back(score(cfg, run.rec.truth, run_detector(cfg, DetectorKind::Event, run)));
    out.push_back(score(cfg, run.rec.truth, run_detector(cfg, DetectorKind::Hram, run)));
    const auto recon = reconstruct(run.events, cfg.dm, run.rec.signal.size(), run.rec.signal.sample_rate_hz,
                                   run.rec.signal.t0_ns);
    NeoParams np = cfg.neo;
    for (double c : cs) {
      np.threshold_multiplier = c;
      out.push_back(score(cfg, run.rec.truth, detect_neo(run.rec.signal, np)));
    }
    for (double c : cs) {
      np.threshold_multiplier = c;
      out.push_back(score(cfg, run.rec.truth, detect_neo(recon, np)));
    }
  });

  auto aggregate = [&](std::size_t slot, double level) {
    ComparisonRow row;
    row.noise_level = level;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].noise_level != level) continue;
      const auto& r = reports[j][slot];
      row.mean_accuracy += r.accuracy;
      row.mean_sensitivity += r.sensitivity;
      row.mean_fdr += r.fdr;
      ++row.runs;
    }
    const auto n = static_cast<double>(row.runs);
    row.mean_accuracy /= n;
    row.mean_sensitivity /= n;
    row.mean_fdr /= n;
    return row;
  };

  std::vector<ComparisonRow> rows;
  for (auto kind : {DetectorKind::Event, DetectorKind::Hram})
    for (double level : cfg.noise_levels) {
      auto row = aggregate(kind == DetectorKind::Event ? 0 : 1, level);
      row.detector = to_string(kind);
      rows.push_back(row);
    }
  for (int pass = 0; pass < 2; ++pass)
    for (double level : cfg.noise_levels) {
      ComparisonRow best;
      for (std::size_t ci = 0; ci < cs.size(); ++ci) {
        auto row = aggregate(2 + static_cast<std::size_t>(pass) * cs.size() + ci, level);
        row.threshold_multiplier = cs[ci];
        if (ci == 0 || row.mean_accuracy > best.mean_accuracy) best = row;
      }
      best.detector = to_string(pass == 0 ? DetectorKind::NeoOriginal : DetectorKind::NeoReconstructed);
      rows.push_back(best);
    }
  return rows;
}

std::string report_csv(const std::vector<RunRow>& rows) {
  std::ostringstream s;
  s << "recording,noise_level,detector,params_hash,tp,fp,fn,sensitivity,accuracy,fdr\n";
  for (const auto& r : rows)
    s << r.recording << ',' << io::format_double(r.noise_level) << ',' << r.detector << ',' << r.params_hash << ','
      << r.report.tp << ',' << r.report.fp << ',' << r.report.fn << ',' << io::format_fixed(r.report.sensitivity, 6)
      << ',' << io::format_fixed(r.report.accuracy, 6) << ',' << io::format_fixed(r.report.fdr, 6) << '\n';
  return s.str();
}

std::string heatmap_csv(const HeatmapResult& r) {
  std::ostringstream s;
  if (r.extended) s << "delta,t_bin_ns,n_s,";
  s << "th_sram_mv,th_det,mean_accuracy,mean_sensitivity,mean_fdr\n";
  for (const auto& c : r.cells) {
    if (r.extended) s << io::format_double(c.delta) << ',' << c.t_bin_ns << ',' << c.n_s << ',';
    s << io::format_double(c.th_sram_mv) << ',' << c.th_det << ',' << io::format_fixed(c.mean_accuracy, 6) << ','
      << io::format_fixed(c.mean_sensitivity, 6) << ',' << io::format_fixed(c.mean_fdr, 6) << '\n';
  }
  return s.str();
}

std::string heatmap_raw_csv(const HeatmapResult& r) {
  std::ostringstream s;
  s << "recording,noise_level,delta,t_bin_ns,n_s,th_sram_mv,th_det,tp,fp,fn,sensitivity,accuracy,fdr\n";
  for (const auto& row : r.raw) {
    const auto& c = r.cells[row.cell];
    s << row.recording << ',' << io::format_double(row.noise_level) << ',' << io::format_double(c.delta) << ','
      << c.t_bin_ns << ',' << c.n_s << ',' << io::format_double(c.th_sram_mv) << ',' << c.th_det << ','
      << row.report.tp << ',' << row.report.fp << ',' << row.report.fn << ','
      << io::format_fixed(row.report.sensitivity, 6) << ',' << io::format_fixed(row.report.accuracy, 6) << ','
      << io::format_fixed(row.report.fdr, 6) << '\n';
  }
  return s.str();
}

std::string mc_csv(const McResult& r) {
  std::ostringstream s;
  s << "run,input_kind,peak_v\n";
  for (std::size_t i = 0; i < r.peaks.noise_peaks.size(); ++i) {
    s << i << ",noise," << io::format_fixed(r.peaks.noise_peaks[i], 9) << '\n';
    s << i << ",spike," << io::format_fixed(r.peaks.spike_peaks[i], 9) << '\n';
  }
  return s.str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream s;
  s << "detector,noise_level,threshold_multiplier,mean_sensitivity,mean_accuracy,mean_fdr,runs\n";
  for (const auto& r : rows)
    s << r.detector << ',' << io::format_double(r.noise_level) << ','
      << (r.threshold_multiplier > 0 ? io::format_double(r.threshold_multiplier) : std::string()) << ','
      << io::format_fixed(r.mean_sensitivity, 6) << ',' << io::format_fixed(r.mean_accuracy, 6) << ','
      << io::format_fixed(r.mean_fdr, 6) << ',' << r.runs << '\n';
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::string& command) {
  std::vector<std::pair<std::string, std::string>> entries{{"tool", "ebnr-spd"},
                                                           {"tool_version", kToolVersion},
                                                           {"command", command}};
  for (auto& e : cfg.entries()) entries.push_back(std::move(e));
  io::write_key_values(path, entries);
}

}  // namespace ebnr
