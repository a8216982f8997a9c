#include "ebnr/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ebnr::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(const fs::path& path, int line) { return path.string() + ":" + std::to_string(line); }

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ParseError(path.string(), "cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

const KeyValue* find_key(const std::vector<KeyValue>& kvs, std::string_view key) {
  for (const auto& kv : kvs)
    if (kv.key == key) return &kv;
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double v, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return buf.data();
}

std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& origin) {
  std::vector<KeyValue> out;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(origin + ":" + std::to_string(line), "expected `key = value`");
    KeyValue kv{trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)), line};
    if (kv.key.empty()) throw ParseError(origin + ":" + std::to_string(line), "empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<KeyValue> read_key_values(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

void write_key_values(const fs::path& path,
                      const std::vector<std::pair<std::string, std::string>>& entries) {
  auto out = open_out(path);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

fs::path sidecar_path(const fs::path& path) {
  fs::path p = path;
  p += ".meta";
  return p;
}

void write_events_csv(const fs::path& path, const EventStream& stream) {
  stream.validate();
  {
    auto out = open_out(path);
    out << "t_ns,polarity\n";
    for (const Event& e : stream.events)
      out << e.t_ns << ',' << (e.polarity == Polarity::On ? "+1" : "-1") << '\n';
  }
  write_key_values(sidecar_path(path), {{"channel", std::to_string(stream.channel)},
                                        {"duration_ns", std::to_string(stream.duration_ns)},
                                        {"initial_level", format_double(stream.initial_level)}});
}

EventStream read_events_csv(const fs::path& path) {
  EventStream stream;
  auto in = open_in(path);
  std::string raw;
  int line = 0;
  if (!std::getline(in, raw)) throw ParseError(where(path, 1), "missing header");
  ++line;
  if (trim(raw) != "t_ns,polarity") throw ParseError(where(path, line), "expected header `t_ns,polarity`");
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw ParseError(where(path, line), "expected two columns");
    Event e;
    if (!parse_number(std::string_view(s).substr(0, comma), e.t_ns) || e.t_ns < 0)
      throw ParseError(where(path, line), "bad timestamp");
    const std::string pol = trim(std::string_view(s).substr(comma + 1));
    if (pol == "+1" || pol == "1")
      e.polarity = Polarity::On;
    else if (pol == "-1")
      e.polarity = Polarity::Off;
    else
      throw ParseError(where(path, line), "polarity must be +1 or -1");
    if (!stream.events.empty() && e.t_ns < stream.events.back().t_ns)
      throw ParseError(where(path, line), "events out of time order");
    stream.events.push_back(e);
  }
  if (const auto meta = sidecar_path(path); fs::exists(meta)) {
    const auto kvs = read_key_values(meta);
    if (const auto* kv = find_key(kvs, "channel"); kv && !parse_number(kv->value, stream.channel))
      throw ParseError(where(meta, kv->line), "bad channel");
    if (const auto* kv = find_key(kvs, "duration_ns"); kv && !parse_number(kv->value, stream.duration_ns))
      throw ParseError(where(meta, kv->line), "bad duration_ns");
    if (const auto* kv = find_key(kvs, "initial_level");
        kv && !parse_number(kv->value, stream.initial_level))
      throw ParseError(where(meta, kv->line), "bad initial_level");
  }
  stream.validate();
  return stream;
}

void write_signal(const fs::path& path, const SampledSignal& signal) {
  signal.validate();
  if (path.extension() == ".csv") {
    auto out = open_out(path);
    out << "t_s,amplitude\n";
    for (std::size_t n = 0; n < signal.size(); ++n) {
      const TimeNs t = signal.time_of(n);
      out << format_fixed(static_cast<double>(t) / 1e9, 9) << ',' << format_double(signal.samples[n])
          << '\n';
    }
    return;
  }
  {
    auto out = open_out(path, std::ios::binary);
    for (double x : signal.samples) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
      if constexpr (std::endian::native == std::endian::big)
        bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
      std::array<char, 4> bytes;
      std::memcpy(bytes.data(), &bits, 4);
      out.write(bytes.data(), 4);
    }
  }
  write_key_values(sidecar_path(path), {{"sample_rate_hz", format_double(signal.sample_rate_hz)},
                                        {"t0_ns", std::to_string(signal.t0_ns)},
                                        {"format", "f32le"},
                                        {"n_samples", std::to_string(signal.size())}});
}

SampledSignal read_signal(const fs::path& path) {
  SampledSignal signal;
  if (path.extension() == ".csv") {
    auto in = open_in(path);
    std::string raw;
    int line = 1;
    if (!std::getline(in, raw) || trim(raw) != "t_s,amplitude")
      throw ParseError(where(path, 1), "expected header `t_s,amplitude`");
    std::vector<double> times;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(raw);
      if (s.empty()) continue;
      const auto comma = s.find(',');
      double t = 0, a = 0;
      if (comma == std::string::npos || !parse_number(std::string_view(s).substr(0, comma), t) ||
          !parse_number(trim(std::string_view(s).substr(comma + 1)), a))
        throw ParseError(where(path, line), "expected `t_s,amplitude` numbers");
      if (!times.empty() && t <= times.back()) throw ParseError(where(path, line), "time not increasing");
      times.push_back(t);
      signal.samples.push_back(a);
    }
    if (times.empty()) throw ParseError(where(path, line), "no samples");
    signal.t0_ns = std::llround(times.front() * 1e9);
    if (times.size() > 1) {
      double rate = static_cast<double>(times.size() - 1) / (times.back() - times.front());
      if (std::abs(rate - std::round(rate)) < 1e-6 * rate) rate = std::round(rate);
      signal.sample_rate_hz = rate;
      const double period = 1.0 / rate;
      for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - period) > 0.01 * period)
          throw ParseError(where(path, static_cast<int>(i) + 2), "non-uniform sampling");
    }
    signal.validate();
    return signal;
  }

  const auto meta = sidecar_path(path);
  if (!fs::exists(meta)) throw ParseError(meta.string(), "missing sidecar for raw float32 signal");
  const auto kvs = read_key_values(meta);
  const auto* rate = find_key(kvs, "sample_rate_hz");
  if (!rate || !parse_number(rate->value, signal.sample_rate_hz))
    throw ParseError(meta.string(), "sidecar must declare numeric sample_rate_hz");
  if (const auto* t0 = find_key(kvs, "t0_ns"); t0 && !parse_number(t0->value, signal.t0_ns))
    throw ParseError(where(meta, t0->line), "bad t0_ns");

  auto in = open_in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0)
    throw ParseError(path.string() + "@" + std::to_string(bytes.size() - bytes.size() % 4),
                     "trailing partial float32");
  signal.samples.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big)
      bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
    const float x = std::bit_cast<float>(bits);
    if (!std::isfinite(x)) throw ParseError(path.string() + "@" + std::to_string(4 * i), "non-finite sample");
    signal.samples[i] = x;
  }
  signal.validate();
  return signal;
}

void write_spike_times(const fs::path& path, const std::vector<TimeNs>& times) {
  auto out = open_out(path);
  for (TimeNs t : times) out << t << '\n';
}

std::vector<TimeNs> read_spike_times(const fs::path& path) {
  auto in = open_in(path);
  std::vector<TimeNs> times;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty()) continue;
    TimeNs t = 0;
    if (!parse_number(s, t)) throw ParseError(where(path, line), "expected an integer nanosecond");
    if (!times.empty() && t <= times.back())
      throw ParseError(where(path, line), "spike times must be strictly increasing");
    times.push_back(t);
  }
  return times;
}

}  // namespace ebnr::io
