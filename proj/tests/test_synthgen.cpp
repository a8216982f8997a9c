#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include <unistd.h>

#include "doctest.h"
#include "ebnr/synthgen.hpp"

using namespace ebnr;

namespace {

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double std_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::size_t index_of(const SampledSignal& s, TimeNs t) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(t - s.t0_ns) * s.sample_rate_hz / 1e9));
}

}  // namespace

TEST_CASE("builtin templates") {
  const auto t = builtin_templates();
  REQUIRE(t.size() == 3);
  for (const auto& tpl : t) {
    CHECK(tpl.waveform.size() == 64);
    CHECK_NOTHROW(tpl.validate());
    double peak = 0.0;
    for (double v : tpl.waveform) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(tpl.waveform[static_cast<std::size_t>(tpl.peak_index)]) == 1.0);
  }
  CHECK(t[0].waveform[static_cast<std::size_t>(t[0].peak_index)] == 1.0);
  CHECK(t[2].waveform[static_cast<std::size_t>(t[2].peak_index)] == -1.0);
  CHECK(t[0].waveform != t[1].waveform);
  CHECK(t[1].waveform != t[2].waveform);
}

TEST_CASE("template files are normalized on load") {
  const auto p = std::filesystem::temp_directory_path() / ("ebnr_tpl_" + std::to_string(::getpid()) + ".txt");
  std::ofstream(p) << "0\n1\n-4\n2\n\n";
  const auto t = load_template(p);
  CHECK(t.waveform == std::vector<double>{0.0, 0.25, -1.0, 0.5});
  CHECK(t.peak_index == 2);
  std::ofstream(p) << "0\nabc\n";
  CHECK_THROWS_AS(load_template(p), ParseError);
  std::ofstream(p) << "0\n0\n";
  CHECK_THROWS_AS(load_template(p), ValidationError);
  std::filesystem::remove(p);
}

TEST_CASE("dilate") {
  const std::vector<double> w{0.0, 1.0, 0.0, -2.0};
  CHECK(dilate(w, 1.0) == w);
  const auto d = dilate(w, 2.0);
  REQUIRE(d.size() == 8);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(0.5));
  CHECK(d[2] == 1.0);
  CHECK(d[5] == doctest::Approx(-1.0));
  CHECK(d[6] == -2.0);
  CHECK(d[7] == 0.0);
  CHECK_THROWS_AS(dilate(w, 0.0), ValidationError);
}

TEST_CASE("noise-free recording is the exact template sum") {
  GenConfig cfg;
  cfg.noise_level = 0.0;
  cfg.seed = 21;
  const auto templates = builtin_templates();
  const auto rec = generate_recording(std::span(templates.data(), 1), cfg);

  std::vector<double> oracle(rec.signal.size(), 0.0);
  const auto& tpl = templates[0];
  for (TimeNs t : rec.truth.spike_times_ns) {
    const long start = static_cast<long>(index_of(rec.signal, t)) - tpl.peak_index;
    for (std::size_t i = 0; i < tpl.waveform.size(); ++i) {
      const long idx = start + static_cast<long>(i);
      if (idx >= 0 && idx < static_cast<long>(oracle.size())) oracle[static_cast<std::size_t>(idx)] += tpl.waveform[i];
    }
  }
  REQUIRE(!rec.truth.spike_times_ns.empty());
  for (std::size_t i = 0; i < oracle.size(); ++i)
    REQUIRE(rec.signal.samples[i] == static_cast<double>(static_cast<float>(oracle[i])));
}

TEST_CASE("spike counts follow the configured rate") {
  GenConfig cfg;
  const double mean = 120.0, band = 3.0 * std::sqrt(120.0);
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const double n = static_cast<double>(draw_spike_indices(cfg, seed).size());
    if (std::abs(n - mean) <= band) ++inside;
  }
  CHECK(inside >= 997);

  cfg.duration_s = 600.0;
  const double rate = static_cast<double>(draw_spike_indices(cfg, 77).size()) / 600.0;
  CHECK(rate == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("spike indices respect the dead time") {
  GenConfig cfg;
  cfg.firing_rate_hz = 200.0;
  const auto idx = draw_spike_indices(cfg, 5);
  const auto min_gap = static_cast<std::size_t>(cfg.generator_refractory_ms * 24.0) - 1;
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] - idx[i - 1] >= min_gap);
}

TEST_CASE("noise statistics") {
  GenConfig cfg;
  const auto templates = builtin_templates();

  cfg.noise_level = 0.0;
  const auto zero = make_noise(cfg, templates, 1000, 1);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));

  cfg.noise_level = 0.2;
  const auto a = make_noise(cfg, templates, 144'000, 1);
  const auto b = make_noise(cfg, templates, 144'000, 2);
  CHECK(std_of(a) == doctest::Approx(0.2).epsilon(0.01));
  CHECK(std::abs(correlation(a, b)) < 0.1);
  CHECK(make_noise(cfg, templates, 144'000, 1) == a);

  cfg.noise_model = NoiseModel::BandlimitedGaussian;
  const auto g = make_noise(cfg, templates, 144'000, 3);
  CHECK(std_of(g) == doctest::Approx(0.2).epsilon(0.01));
}

TEST_CASE("band-limited Gaussian noise has little power above the cutoff") {
  GenConfig cfg;
  cfg.noise_model = NoiseModel::BandlimitedGaussian;
  cfg.noise_level = 0.1;
  constexpr std::size_t n = 2048;
  const auto x = make_noise(cfg, {}, n, 8);
  double low = 0.0, high = 0.0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < n; ++i)
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n));
    const double f = static_cast<double>(k) * 24000.0 / static_cast<double>(n);
    (f < 3000.0 ? low : f > 4500.0 ? high : low) += std::norm(acc);
  }
  CHECK(high / (low + high) < 0.01);
}

TEST_CASE("recording noise level on spike-free stretches") {
  GenConfig cfg;
  cfg.noise_level = 0.1;
  cfg.seed = 12;
  const auto rec = generate_recording(builtin_templates(), cfg);
  std::vector<bool> busy(rec.signal.size(), false);
  for (TimeNs t : rec.truth.spike_times_ns) {
    const long c = static_cast<long>(index_of(rec.signal, t));
    for (long i = c - 40; i <= c + 64; ++i)
      if (i >= 0 && i < static_cast<long>(busy.size())) busy[static_cast<std::size_t>(i)] = true;
  }
  std::vector<double> quiet;
  for (std::size_t i = 0; i < busy.size(); ++i)
    if (!busy[i]) quiet.push_back(rec.signal.samples[i]);
  REQUIRE(quiet.size() > 50'000);
  CHECK(std_of(quiet) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("recordings are deterministic per seed") {
  GenConfig cfg;
  cfg.noise_level = 0.15;
  cfg.seed = 33;
  const auto templates = builtin_templates();
  const auto a = generate_recording(templates, cfg);
  const auto b = generate_recording(templates, cfg);
  CHECK(a.signal.samples == b.signal.samples);
  CHECK(a.truth.spike_times_ns == b.truth.spike_times_ns);
  cfg.seed = 34;
  CHECK(generate_recording(templates, cfg).truth.spike_times_ns != a.truth.spike_times_ns);
}

TEST_CASE("truth times sit on an extremum of the clean signal") {
  GenConfig cfg;
  cfg.noise_level = 0.1;
  cfg.seed = 2;
  const auto rec = generate_recording(builtin_templates(), cfg);
  CHECK(rec.signal.size() == 144'000);
  CHECK_NOTHROW(rec.truth.validate());
  for (TimeNs t : rec.truth.spike_times_ns) {
    const long c = static_cast<long>(index_of(rec.signal, t));
    long best = c;
    for (long i = std::max(0L, c - 8); i <= std::min<long>(static_cast<long>(rec.clean.size()) - 1, c + 8); ++i)
      if (std::abs(rec.clean[static_cast<std::size_t>(i)]) > std::abs(rec.clean[static_cast<std::size_t>(best)]))
        best = i;
    CHECK(std::abs(best - c) <= 2);
  }
}

TEST_CASE("generator validation") {
  GenConfig cfg;
  const auto templates = builtin_templates();
  CHECK_THROWS_AS(generate_recording({}, cfg), ValidationError);

  cfg.firing_rate_hz = 600.0;  // 600 Hz x 2 ms dead time is not attainable
  CHECK_THROWS_AS(generate_recording(templates, cfg), ValidationError);

  cfg = GenConfig{};
  cfg.noise_level = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = GenConfig{};
  cfg.duration_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = GenConfig{};
  cfg.gaussian_cutoff_hz = 12000.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  CHECK(noise_model_from_string(to_string(NoiseModel::BandlimitedGaussian)) == NoiseModel::BandlimitedGaussian);
  CHECK_THROWS_AS(noise_model_from_string("pink"), ValidationError);
}
