#include "ebnr/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include "ebnr/io.hpp"

namespace ebnr {

namespace {

std::string strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_scalar(const std::string& key, std::string_view text) {
  const std::string s = strip(text);
  T out{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ValidationError("config: bad value '" + s + "' for " + key);
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  if (strip(value).empty()) return out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const std::string item = strip(std::string_view(value).substr(pos, comma - pos));
    if (const auto c1 = item.find(':'); c1 != std::string::npos) {
      const auto c2 = item.find(':', c1 + 1);
      const T lo = parse_scalar<T>(key, std::string_view(item).substr(0, c1));
      const T hi = parse_scalar<T>(key, std::string_view(item).substr(c1 + 1, c2 - c1 - 1));
      const T step = c2 == std::string::npos ? T{1} : parse_scalar<T>(key, std::string_view(item).substr(c2 + 1));
      if (!(step > T{0})) throw ValidationError("config: range step must be positive for " + key);
      // Index-based so floating steps land exactly on lo + i*step.
      for (long i = 0;; ++i) {
        const T v = static_cast<T>(lo + static_cast<T>(i) * step);
        if (v > hi + (std::is_floating_point_v<T> ? step * 1e-9 : T{0})) break;
        out.push_back(v);
      }
    } else {
      out.push_back(parse_scalar<T>(key, item));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += io::format_double(xs[i]);
    else
      out += std::to_string(xs[i]);
  }
  return out;
}

struct Field {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <typename T>
Field scalar(std::string key, T& ref) {
  return {key,
          [key, &ref](const std::string& v) {
            if constexpr (std::is_same_v<T, bool>) {
              const std::string s = strip(v);
              if (s != "true" && s != "false") throw ValidationError("config: " + key + " must be true|false");
              ref = s == "true";
            } else {
              ref = parse_scalar<T>(key, v);
            }
          },
          [&ref] {
            if constexpr (std::is_floating_point_v<T>)
              return io::format_double(ref);
            else
              return std::to_string(ref);
          }};
}

template <typename T>
Field list(std::string key, std::vector<T>& ref) {
  return {key, [key, &ref](const std::string& v) { ref = parse_list<T>(key, v); }, [&ref] { return join(ref); }};
}

Field text(std::string key, std::string& ref) {
  return {key, [&ref](const std::string& v) { ref = strip(v); }, [&ref] { return ref; }};
}

std::vector<Field> fields(ExperimentConfig& c) {
  std::vector<Field> f;
  f.push_back(scalar("gen.duration_s", c.gen.duration_s));
  f.push_back(scalar("gen.sample_rate_hz", c.gen.sample_rate_hz));
  f.push_back(scalar("gen.noise_level", c.gen.noise_level));
  f.push_back(scalar("gen.firing_rate_hz", c.gen.firing_rate_hz));
  f.push_back(scalar("gen.generator_refractory_ms", c.gen.generator_refractory_ms));
  f.push_back({"gen.noise_model", [&c](const std::string& v) { c.gen.noise_model = noise_model_from_string(strip(v)); },
               [&c] { return to_string(c.gen.noise_model); }});
  f.push_back(scalar("gen.noise_density_hz", c.gen.noise_density_hz));
  f.push_back(scalar("gen.noise_dilation", c.gen.noise_dilation));
  f.push_back(scalar("gen.gaussian_cutoff_hz", c.gen.gaussian_cutoff_hz));
  f.push_back(scalar("gen.seed", c.gen.seed));
  f.push_back(text("gen.templates", c.templates));

  f.push_back(scalar("dm.delta", c.dm.delta));
  f.push_back(scalar("dm.pulse_width_ns", c.dm.pulse_width_ns));
  f.push_back({"dm.initial_level",
               [&c](const std::string& v) {
                 const std::string s = strip(v);
                 if (s.empty() || s == "first_sample")
                   c.dm.initial_level.reset();
                 else
                   c.dm.initial_level = parse_scalar<double>("dm.initial_level", s);
               },
               [&c] { return c.dm.initial_level ? io::format_double(*c.dm.initial_level) : std::string("first_sample"); }});

  f.push_back(scalar("event.t_bin_ns", c.event.t_bin_ns));
  f.push_back(scalar("event.theta_bin", c.event.theta_bin));
  f.push_back(scalar("event.n_s", c.event.n_s));
  f.push_back(scalar("event.th_det", c.event.th_det));
  f.push_back(scalar("event.refractory_ns", c.event.refractory_ns));

  f.push_back(scalar("hram.vdd", c.hram.vdd));
  f.push_back(scalar("hram.dv_per_pulse", c.hram.dv_per_pulse));
  f.push_back(scalar("hram.th_sram", c.hram.th_sram));
  f.push_back(scalar("hram.leak_v_per_s", c.hram.leak_v_per_s));
  f.push_back(scalar("hram.n_s", c.hram.n_s));
  f.push_back(scalar("hram.th_det", c.hram.th_det));
  f.push_back(scalar("hram.t_bin_ns", c.hram.t_bin_ns));
  f.push_back(scalar("hram.refractory_ns", c.hram.refractory_ns));
  f.push_back(scalar("mismatch.sigma_dv_rel", c.mismatch.sigma_dv_rel));
  f.push_back(scalar("mismatch.sigma_th_v", c.mismatch.sigma_th_v));
  f.push_back(scalar("mismatch.seed", c.mismatch.seed));

  f.push_back(scalar("neo.smooth_window", c.neo.smooth_window));
  f.push_back(scalar("neo.threshold_multiplier", c.neo.threshold_multiplier));
  f.push_back(scalar("neo.refractory_ns", c.neo.refractory_ns));

  f.push_back({"detector", [&c](const std::string& v) { c.detector = detector_from_string(strip(v)); },
               [&c] { return to_string(c.detector); }});
  f.push_back(list("noise_levels", c.noise_levels));
  f.push_back(list("seeds", c.seeds));
  f.push_back(scalar("eval.window_ns", c.match_window_ns));

  f.push_back(list("sweep.th_sram_mv", c.sweep.th_sram_mv));
  f.push_back(list("sweep.th_det", c.sweep.th_det));
  f.push_back(list("sweep.t_bin_ns", c.sweep.t_bin_ns));
  f.push_back(list("sweep.n_s", c.sweep.n_s));
  f.push_back(list("sweep.delta", c.sweep.delta));
  f.push_back(list("sweep.threshold_multiplier", c.sweep.threshold_multiplier));

  f.push_back(scalar("mc.runs", c.mc.runs));
  f.push_back(scalar("mc.noise_level", c.mc.noise_level));
  f.push_back(scalar("mc.segment_ms", c.mc.segment_ms));
  f.push_back(scalar("mc.template", c.mc.template_index));

  f.push_back(text("io.signal", c.io.signal));
  f.push_back(text("io.events", c.io.events));
  f.push_back(text("io.truth", c.io.truth));
  f.push_back(text("io.detections", c.io.detections));
  f.push_back(text("io.recording", c.io.recording));
  f.push_back({"output_dir", [&c](const std::string& v) { c.output_dir = strip(v); },
               [&c] { return c.output_dir.string(); }});
  return f;
}

}  // namespace

std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::Event: return "event";
    case DetectorKind::Hram: return "hram";
    case DetectorKind::NeoOriginal: return "neo_original";
    case DetectorKind::NeoReconstructed: return "neo_reconstructed";
  }
  return "?";
}

DetectorKind detector_from_string(const std::string& s) {
  if (s == "event") return DetectorKind::Event;
  if (s == "hram") return DetectorKind::Hram;
  if (s == "neo_original" || s == "neo") return DetectorKind::NeoOriginal;
  if (s == "neo_reconstructed") return DetectorKind::NeoReconstructed;
  throw ValidationError("unknown detector '" + s + "' (event|hram|neo_original|neo_reconstructed)");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (auto& f : fields(*this)) {
    if (f.key == key) {
      f.set(value);
      return;
    }
  }
  throw ValidationError("config: unknown key '" + key + "'");
}

void ExperimentConfig::apply_file(const std::filesystem::path& path) {
  for (const auto& kv : io::read_key_values(path)) {
    try {
      set(kv.key, kv.value);
    } catch (const ValidationError& e) {
      throw ParseError(path.string() + ":" + std::to_string(kv.line), e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& f : fields(const_cast<ExperimentConfig&>(*this))) out.emplace_back(f.key, f.get());
  return out;
}

void ExperimentConfig::validate() const {
  gen.validate();
  dm.validate();
  event.validate();
  hram.validate();
  mismatch.validate();
  neo.validate();
  if (noise_levels.empty()) throw ValidationError("config: noise_levels must be non-empty");
  if (seeds.empty()) throw ValidationError("config: seeds must be non-empty");
  for (double s : noise_levels)
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("config: noise levels must lie in [0, 1]");
  if (sweep.th_sram_mv.empty() || sweep.th_det.empty())
    throw ValidationError("config: sweep.th_sram_mv and sweep.th_det must be non-empty");
  if (sweep.threshold_multiplier.empty())
    throw ValidationError("config: sweep.threshold_multiplier must be non-empty");
  if (match_window_ns <= 0) throw ValidationError("config: eval.window_ns must be positive");
  if (mc.runs < 1) throw ValidationError("config: mc.runs must be >= 1");
  if (!(mc.segment_ms > 0.0)) throw ValidationError("config: mc.segment_ms must be positive");
}

std::vector<SpikeTemplate> ExperimentConfig::load_templates() const {
  if (templates.empty() || templates == "builtin") return builtin_templates();
  std::vector<SpikeTemplate> out;
  std::size_t pos = 0;
  while (pos <= templates.size()) {
    const auto comma = templates.find(',', pos);
    const std::string item = strip(std::string_view(templates).substr(pos, comma - pos));
    if (!item.empty()) out.push_back(load_template(item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError("config: gen.templates lists no files");
  return out;
}

}  // namespace ebnr
