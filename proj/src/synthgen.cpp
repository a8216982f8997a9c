#include "ebnr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "ebnr/io.hpp"

namespace ebnr {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kSpikeStream = 1;
constexpr std::uint32_t kNoiseStream = 2;

double gauss(double n, double center, double width) {
  const double z = (n - center) / width;
  return std::exp(-0.5 * z * z);
}

void rescale_to_std(std::vector<double>& x, double target) {
  if (x.empty()) return;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  if (sd == 0.0 || target == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const double k = target / sd;
  for (double& v : x) v *= k;
}

std::vector<double> superposition_noise(const GenConfig& cfg, std::span<const SpikeTemplate> templates,
                                        std::size_t n, std::mt19937_64& rng) {
  std::vector<std::vector<double>> shapes;
  shapes.reserve(templates.size());
  for (const auto& t : templates) shapes.push_back(dilate(t.waveform, cfg.noise_dilation));

  std::size_t longest = 0;
  for (const auto& s : shapes) longest = std::max(longest, s.size());

  std::vector<double> noise(n, 0.0);
  const double expected = cfg.noise_density_hz * static_cast<double>(n) / cfg.sample_rate_hz;
  std::poisson_distribution<long> count_dist(expected);
  const long count = count_dist(rng);
  // Starts may precede the record so the head is as dense as the body.
  std::uniform_int_distribution<long> start_dist(-static_cast<long>(longest) + 1, static_cast<long>(n) - 1);
  std::uniform_int_distribution<std::size_t> pick(0, shapes.size() - 1);
  std::normal_distribution<double> amp(0.0, 1.0);

  for (long c = 0; c < count; ++c) {
    const auto& shape = shapes[pick(rng)];
    const long start = start_dist(rng);
    const double a = amp(rng);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      const long idx = start + static_cast<long>(i);
      if (idx < 0) continue;
      if (idx >= static_cast<long>(n)) break;
      noise[static_cast<std::size_t>(idx)] += a * shape[i];
    }
  }
  return noise;
}

std::vector<double> gaussian_noise(const GenConfig& cfg, std::size_t n, std::mt19937_64& rng) {
  constexpr int kTaps = 101;
  constexpr int kHalf = kTaps / 2;
  const double fc = cfg.gaussian_cutoff_hz / cfg.sample_rate_hz;
  std::vector<double> taps(kTaps);
  double sum = 0.0;
  for (int i = 0; i < kTaps; ++i) {
    const double m = i - kHalf;
    const double sinc = m == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double hamming = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (kTaps - 1));
    taps[i] = sinc * hamming;
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;

  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<double> w(n + kTaps - 1);
  for (double& v : w) v = white(rng);
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < kTaps; ++i) acc += taps[i] * w[k + static_cast<std::size_t>(i)];
    out[k] = acc;
  }
  return out;
}

}  // namespace

void SpikeTemplate::normalize() {
  if (waveform.empty()) throw ValidationError("template '" + name + "' is empty");
  std::size_t at = 0;
  for (std::size_t i = 1; i < waveform.size(); ++i)
    if (std::abs(waveform[i]) > std::abs(waveform[at])) at = i;
  const double peak = std::abs(waveform[at]);
  if (peak == 0.0) throw ValidationError("template '" + name + "' is all zero");
  for (double& v : waveform) v /= peak;
  waveform[at] = waveform[at] > 0 ? 1.0 : -1.0;
  peak_index = static_cast<int>(at);
}

void SpikeTemplate::validate() const {
  if (waveform.empty()) throw ValidationError("template '" + name + "' is empty");
  if (peak_index < 0 || static_cast<std::size_t>(peak_index) >= waveform.size())
    throw ValidationError("template '" + name + "' peak_index out of range");
  for (double v : waveform)
    if (!std::isfinite(v)) throw ValidationError("template '" + name + "' has non-finite samples");
}

std::string to_string(NoiseModel m) {
  return m == NoiseModel::TemplateSuperposition ? "template_superposition" : "bandlimited_gaussian";
}

NoiseModel noise_model_from_string(const std::string& s) {
  if (s == "template_superposition") return NoiseModel::TemplateSuperposition;
  if (s == "bandlimited_gaussian") return NoiseModel::BandlimitedGaussian;
  throw ValidationError("unknown noise model '" + s + "'");
}

std::size_t GenConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

void GenConfig::validate() const {
  if (!(duration_s > 0.0)) throw ValidationError("gen: duration_s must be positive");
  if (!(sample_rate_hz > 0.0)) throw ValidationError("gen: sample_rate_hz must be positive");
  if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw ValidationError("gen: noise_level must lie in [0, 1]");
  if (!(firing_rate_hz > 0.0)) throw ValidationError("gen: firing_rate_hz must be positive");
  if (!(generator_refractory_ms > 0.0)) throw ValidationError("gen: generator_refractory_ms must be positive");
  if (firing_rate_hz * generator_refractory_ms / 1000.0 >= 1.0)
    throw ValidationError("gen: firing rate is infeasible with the generator refractory period");
  if (!(noise_density_hz > 0.0)) throw ValidationError("gen: noise_density_hz must be positive");
  if (!(noise_dilation > 0.0)) throw ValidationError("gen: noise_dilation must be positive");
  if (!(gaussian_cutoff_hz > 0.0 && gaussian_cutoff_hz < sample_rate_hz / 2))
    throw ValidationError("gen: gaussian_cutoff_hz must lie below Nyquist");
  if (n_samples() == 0) throw ValidationError("gen: recording shorter than one sample");
}

std::vector<SpikeTemplate> builtin_templates() {
  constexpr int kLen = 64;
  auto build = [](std::string name, auto&& fn) {
    SpikeTemplate t;
    t.name = std::move(name);
    t.waveform.resize(kLen);
    for (int i = 0; i < kLen; ++i) t.waveform[i] = fn(static_cast<double>(i));
    const double base = t.waveform.front();
    for (double& v : t.waveform) v -= base;
    t.normalize();
    return t;
  };
  std::vector<SpikeTemplate> out;
  out.push_back(build("biphasic", [](double n) { return gauss(n, 20, 3.52) - 0.38 * gauss(n, 30, 10.56); }));
  out.push_back(build("triphasic", [](double n) {
    return -0.25 * gauss(n, 14, 4.8) + gauss(n, 20, 3.2) - 0.45 * gauss(n, 28, 8.0);
  }));
  out.push_back(build("inverted", [](double n) { return -(gauss(n, 20, 4.16) - 0.35 * gauss(n, 32, 11.232)); }));
  return out;
}

SpikeTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open template");
  SpikeTemplate t;
  t.name = path.stem().string();
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      t.waveform.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(n), "expected one amplitude per line");
    }
  }
  t.normalize();
  return t;
}

std::vector<double> dilate(std::span<const double> waveform, double factor) {
  if (waveform.empty()) return {};
  if (!(factor > 0.0)) throw ValidationError("dilation factor must be positive");
  const auto len = static_cast<std::size_t>(std::ceil(static_cast<double>(waveform.size()) * factor));
  const double last = static_cast<double>(waveform.size() - 1);
  std::vector<double> out(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    const double src = static_cast<double>(i) / factor;
    if (src > last) break;
    const auto lo = static_cast<std::size_t>(src);
    const double frac = src - static_cast<double>(lo);
    out[i] = lo + 1 < waveform.size() ? waveform[lo] * (1.0 - frac) + waveform[lo + 1] * frac : waveform[lo];
  }
  return out;
}

std::vector<double> make_noise(const GenConfig& cfg, std::span<const SpikeTemplate> templates,
                               std::size_t n_samples, std::uint64_t seed) {
  cfg.validate();
  if (n_samples == 0) throw ValidationError("make_noise: n_samples must be positive");
  if (cfg.noise_level == 0.0) return std::vector<double>(n_samples, 0.0);
  auto rng = make_rng(seed, kNoiseStream);
  std::vector<double> noise;
  if (cfg.noise_model == NoiseModel::TemplateSuperposition) {
    if (templates.empty()) throw ValidationError("make_noise: superposition noise needs templates");
    noise = superposition_noise(cfg, templates, n_samples, rng);
  } else {
    noise = gaussian_noise(cfg, n_samples, rng);
  }
  rescale_to_std(noise, cfg.noise_level);
  return noise;
}

std::vector<std::size_t> draw_spike_indices(const GenConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = make_rng(seed, kSpikeStream);
  // Dead time plus an exponential interval; the exponential rate is raised so
  // the mean rate still equals firing_rate_hz.
  const double dead = cfg.generator_refractory_ms / 1000.0;
  const double rate = 1.0 / (1.0 / cfg.firing_rate_hz - dead);
  std::exponential_distribution<double> interval(rate);
  const std::size_t n = cfg.n_samples();
  std::vector<std::size_t> out;
  double t = 0.0;
  for (;;) {
    t += dead + interval(rng);
    const auto idx = static_cast<std::size_t>(std::llround(t * cfg.sample_rate_hz));
    if (idx >= n) break;
    if (!out.empty() && idx <= out.back()) continue;
    out.push_back(idx);
  }
  return out;
}

Recording generate_recording(std::span<const SpikeTemplate> templates, const GenConfig& cfg) {
  if (templates.empty()) throw ValidationError("generate: at least one template required");
  for (const auto& t : templates) t.validate();
  cfg.validate();

  const std::size_t n = cfg.n_samples();
  Recording rec;
  rec.signal.sample_rate_hz = cfg.sample_rate_hz;
  rec.signal.t0_ns = 0;
  rec.clean.assign(n, 0.0);

  const auto peaks = draw_spike_indices(cfg, cfg.seed);
  auto rng = make_rng(cfg.seed, kSpikeStream + 16);
  std::uniform_int_distribution<std::size_t> pick(0, templates.size() - 1);
  for (std::size_t peak : peaks) {
    const SpikeTemplate& tpl = templates[pick(rng)];
    const long start = static_cast<long>(peak) - tpl.peak_index;
    for (std::size_t i = 0; i < tpl.waveform.size(); ++i) {
      const long idx = start + static_cast<long>(i);
      if (idx < 0) continue;
      if (idx >= static_cast<long>(n)) break;
      rec.clean[static_cast<std::size_t>(idx)] += tpl.waveform[i];
    }
    rec.truth.spike_times_ns.push_back(rec.signal.time_of(peak));
  }

  const auto noise = make_noise(cfg, templates, n, cfg.seed);
  rec.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    rec.signal.samples[i] = static_cast<float>(rec.clean[i] + noise[i]);
  return rec;
}

Recording load_recording(const std::filesystem::path& signal_path, const std::filesystem::path& truth_path) {
  Recording rec;
  rec.signal = io::read_signal(signal_path);
  rec.truth.spike_times_ns = io::read_spike_times(truth_path);
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& signal_path,
                    const std::filesystem::path& truth_path) {
  io::write_signal(signal_path, rec.signal);
  io::write_spike_times(truth_path, rec.truth.spike_times_ns);
}

}  // namespace ebnr
