// Copyright 2026 The homsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "homsim/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "homsim/fitting.hpp"
#include "homsim/permanent.hpp"
#include "homsim/rng.hpp"

#ifndef HOMSIM_VERSION
#define HOMSIM_VERSION "0.0.0"
#endif
#ifndef HOMSIM_BUILD_ID
#define HOMSIM_BUILD_ID "unknown"
#endif

namespace homsim {

namespace {

constexpr std::pair<Preset, std::string_view> kPresetNames[] = {
    {Preset::Fig3a, "fig3a"}, {Preset::Fig3b, "fig3b"}, {Preset::Fig4, "fig4"},
    {Preset::Fig5a, "fig5a"}, {Preset::Fig5b, "fig5b"}, {Preset::G2S1, "g2_s1"},
    {Preset::G2S2, "g2_s2"},  {Preset::Boson, "boson"},
};

std::string num(double x) { return fmt::format("{}", x); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || std::isnan(v))
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, text));
  return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text));
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string v = lower(trim(text));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

// Integer sweep points; rounding must not merge neighbours.
std::vector<std::int64_t> integer_points(const Sweep& sweep, std::string_view unit) {
  std::vector<std::int64_t> out;
  for (double v : sweep.values()) {
    const auto r = static_cast<std::int64_t>(std::llround(v));
    if (!out.empty() && r == out.back())
      throw ConfigError(fmt::format(
          "sweep {}..{} with {} steps repeats points after rounding to whole {}", sweep.start,
          sweep.stop, sweep.steps, unit));
    out.push_back(r);
  }
  return out;
}

std::int64_t quarter_period_ns(const Physics& physics) {
  return std::llround(1e3 / (4.0 * physics.rabi_mhz));
}

PulseProgram make_program(Preset preset, std::int64_t x, const ExperimentConfig& c) {
  const std::int64_t qp = quarter_period_ns(c.physics);
  PulseProgram p;
  auto& s = p.statements;
  switch (preset) {
    case Preset::Fig3a:
      s = {Prepare{Spin::S1}, Raman{x, 0, {}}, Read{Spin::S1}, Read{Spin::S2}};
      break;
    case Preset::Fig3b:
      s = {Prepare{Spin::S1}, Prepare{Spin::S2}, Raman{x, 0, {}}, Read{Spin::S1}, Read{Spin::S2}};
      break;
    case Preset::Fig4:
      s = {Prepare{Spin::S1}, Prepare{Spin::S2}, Raman{qp, static_cast<int>(x), {}},
           Read{Spin::S1}, Read{Spin::S2}};
      break;
    case Preset::Fig5a:
      s = {Prepare{Spin::S1}, Raman{qp, 0, {}}, Wait{x + c.plot_offset_ns}, Raman{qp, 0, {}},
           Read{Spin::S1}, Read{Spin::S2}};
      break;
    case Preset::Fig5b:
      s = {Prepare{Spin::S1},          Prepare{Spin::S2}, Raman{qp, 0, {}},
           Wait{x + c.plot_offset_ns}, Raman{qp, 0, {}},  Read{Spin::S1},
           Read{Spin::S2}};
      break;
    case Preset::G2S1:
      s = {Prepare{Spin::S1}, Wait{x}, Read{Spin::S1}};
      break;
    case Preset::G2S2:
      s = {Prepare{Spin::S2}, Wait{x}, Read{Spin::S2}};
      break;
    case Preset::Boson:
      break;
  }
  return p;
}

// "s1"/"s2": trials with at least one click in that window; "n1n2": exact counts.
std::uint64_t class_count(const CountsHistogram& h, std::string_view cls) {
  if (cls == "s1" || cls == "s2") {
    const bool s1 = cls == "s1";
    std::uint64_t total = 0;
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2; ++b)
        if ((s1 ? a : b) > 0) total += h.count(a, b);
    return total;
  }
  return h.count(cls[0] - '0', cls[1] - '0');
}

void check_class(std::string_view cls) {
  const bool digits = cls.size() == 2 && cls[0] >= '0' && cls[0] <= '2' && cls[1] >= '0' &&
                      cls[1] <= '2';
  if (!digits && cls != "s1" && cls != "s2")
    throw ConfigError(fmt::format("unknown outcome class '{}' (expected s1, s2 or n1n2 digits)", cls));
}

ResultRow count_row(double sweep, const CountsHistogram& h, const std::vector<std::string>& classes,
                    std::string_view rate_class) {
  ResultRow row;
  row.sweep = sweep;
  for (const auto& c : classes) row.counts.push_back(class_count(h, c));
  const double n = static_cast<double>(h.total_trials());
  const double k = static_cast<double>(class_count(h, rate_class));
  row.rate = k / n;
  row.err = std::sqrt(k) / n;
  return row;
}

void echo_config(ResultTable& t, const ExperimentConfig& c) {
  t.metadata.emplace_back("build", fmt::format("homsim {} {}", HOMSIM_VERSION, build_id()));
  for (const auto& key : config_keys()) t.metadata.emplace_back(key, get_config_value(c, key));
}

void fit_rows(ResultTable& t, double trials, bool pinned, std::string_view time_unit_label) {
  Series s;
  for (const auto& r : t.rows) {
    s.t.push_back(r.sweep * 1e-9);
    s.y.push_back(r.rate * trials);
  }
  FitOptions opts;
  if (pinned) opts.pin_tau = std::numeric_limits<double>::infinity();
  try {
    const DampedCosineFit fit = fit_damped_cosine(s, opts);
    t.metadata.emplace_back("fit.model", pinned ? "offset + amplitude cos(2 pi f t + phase)"
                                                : "offset + amplitude exp(-t/tau) cos(2 pi f t + phase)");
    t.metadata.emplace_back("fit.time_axis", std::string(time_unit_label));
    t.metadata.emplace_back("fit.converged", fit.converged ? "true" : "false");
    t.metadata.emplace_back("fit.frequency_hz", num(fit.frequency()));
    t.metadata.emplace_back("fit.frequency_err_hz", num(std::sqrt(fit.variance[2])));
    t.metadata.emplace_back("fit.offset", num(fit.offset() / trials));
    t.metadata.emplace_back("fit.amplitude", num(fit.amplitude() / trials));
    t.metadata.emplace_back("fit.phase_rad", num(fit.phase()));
    t.metadata.emplace_back("fit.tau_s", num(fit.tau));
    if (pinned && fit.converged && fit.offset() > 0.0) {
      const RamseyVisibility v = ramsey_visibility(fit);
      t.metadata.emplace_back("ramsey.visibility", num(v.visibility));
      t.metadata.emplace_back("ramsey.above_classical_bound", v.above_classical_bound ? "true" : "false");
    }
  } catch (const FitError& e) {
    t.metadata.emplace_back("fit.converged", "false");
    t.metadata.emplace_back("fit.error", e.what());
  }
}

CountsHistogram run_point(const PulseProgram& program, const NoiseParams& noise,
                          const DetectionParams& det, const ExperimentConfig& c,
                          std::uint64_t point) {
  try {
    const TrialRunner runner(program, noise, det, c.physics);
    return kernels::run_trials_omp(runner, c.seed, point, c.trials);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(e.what());
  }
}

ResultTable run_boson(const ExperimentConfig& c) {
  ResultTable t;
  t.name = "boson";
  t.sweep_label = "modes M";
  t.rate_label = "collision-free fraction";
  t.classes = {"collision_free", "bunched"};
  echo_config(t, c);
  t.metadata.emplace_back("boson.input", "one boson in each of the first max(2, M/2) modes");
  t.metadata.emplace_back("boson.unitary", "M = 2: 50:50 Raman beam splitter; M >= 3: Haar random");
  const auto points = integer_points(c.sweep, "modes");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int m = static_cast<int>(points[i]);
    if (m < 2 || m > 16) throw ConfigError("boson sweep needs 2 <= M <= 16");
    const int n = std::max(2, m / 2);
    Occupation input(static_cast<std::size_t>(m), 0);
    for (int j = 0; j < n; ++j) input[static_cast<std::size_t>(j)] = 1;
    Rng urng(c.seed ^ mix64(0xb050'0000ULL + i));
    const Interferometer u(m == 2 ? beamsplitter_matrix(std::numbers::pi / 2) : haar_unitary(m, urng));
    std::vector<OutputProbability> dist;
    try {
      dist = output_distribution(u, input);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    std::vector<double> cumulative;
    std::vector<char> free_of_collisions;
    double acc = 0.0, exact_free = 0.0;
    for (const auto& o : dist) {
      acc += o.probability;
      cumulative.push_back(acc);
      const bool cf = std::all_of(o.occupation.begin(), o.occupation.end(), [](int k) { return k <= 1; });
      free_of_collisions.push_back(cf ? 1 : 0);
      if (cf) exact_free += o.probability;
    }
    std::uint64_t cf_count = 0;
    for (std::uint64_t trial = 0; trial < c.trials; ++trial) {
      Rng rng = Rng::substream(c.seed, i, trial);
      cf_count += free_of_collisions[sample_index(cumulative, rng)] ? 1 : 0;
    }
    const double nt = static_cast<double>(c.trials);
    t.rows.push_back({static_cast<double>(m), {cf_count, c.trials - cf_count},
                      static_cast<double>(cf_count) / nt, std::sqrt(static_cast<double>(cf_count)) / nt});
    t.metadata.emplace_back(fmt::format("boson.exact_collision_free.m{}", m), num(exact_free));
  }
  return t;
}

}  // namespace

std::string_view preset_name(Preset p) noexcept {
  for (const auto& [preset, name] : kPresetNames)
    if (preset == p) return name;
  return "unknown";
}

std::optional<Preset> parse_preset(std::string_view name) {
  const std::string key = lower(trim(name));
  for (const auto& [preset, n] : kPresetNames)
    if (n == key) return preset;
  return std::nullopt;
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets = [] {
    std::vector<Preset> v;
    for (const auto& entry : kPresetNames) v.push_back(entry.first);
    return v;
  }();
  return presets;
}

std::vector<double> Sweep::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(steps, 0)));
  for (int i = 0; i < steps; ++i)
    v[static_cast<std::size_t>(i)] =
        i + 1 == steps ? stop : start + (stop - start) * i / static_cast<double>(steps - 1);
  return v;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  // Substreams key on the low 32 bits of the trial index.
  if (trials > (std::uint64_t{1} << 32)) throw ConfigError("trials must be <= 2^32");
  if (sweep.steps < 2) throw ConfigError("sweep.steps must be >= 2");
  if (!(sweep.start < sweep.stop)) throw ConfigError("sweep.start must be < sweep.stop");
  if (!std::isfinite(sweep.start) || !std::isfinite(sweep.stop))
    throw ConfigError("sweep bounds must be finite");
  if (plot_offset_ns < 0) throw ConfigError("plot_offset_ns must be >= 0");
  if (!(mrad_per_unit > 0.0)) throw ConfigError("fig4.mrad_per_unit must be > 0");
  if (coincidence_class != "02" && coincidence_class != "11")
    throw ConfigError("fig5b.class must be 02 or 11");
  try {
    noise.validate();
    detection.validate();
    physics.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig default_config(Preset preset) {
  ExperimentConfig c;
  c.preset = preset;
  switch (preset) {
    case Preset::Fig3a:
      c.sweep = {0, 1200, 61};
      break;
    case Preset::Fig3b:
      c.sweep = {0, 620, 32};
      break;
    case Preset::Fig4:
      c.sweep = {0, 3, 4};
      break;
    case Preset::Fig5a:
      c.sweep = {0, 1500, 61};
      break;
    case Preset::Fig5b:
      c.sweep = {0, 1500, 61};
      c.detection.split_same_mode = true;
      break;
    case Preset::G2S1:
    case Preset::G2S2:
      c.sweep = {0, 1000, 2};
      c.detection.split_same_mode = true;
      break;
    case Preset::Boson:
      c.sweep = {2, 5, 4};
      break;
  }
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "preset",           "trials",           "seed",
      "ideal",            "plot_offset_ns",   "sweep.start",
      "sweep.stop",       "sweep.steps",      "noise.eta_r",
      "noise.eta_s",      "noise.p2_s1",      "noise.p2_s2",
      "noise.tau_memory", "noise.tau_raman",  "noise.envelope",
      "detection.eta_det_s1", "detection.eta_det_s2", "detection.sigma_k",
      "detection.p_dark", "detection.p_crosstalk", "detection.split_same_mode",
      "detection.crosstalk", "physics.rabi_mhz", "physics.larmor_mhz",
      "fig4.mrad_per_unit", "fig5b.class",
  };
  return keys;
}

void set_config_value(ExperimentConfig& c, std::string_view key_in, std::string_view value) {
  const std::string key = lower(trim(key_in));
  value = trim(value);
  if (key == "preset") {
    const auto p = parse_preset(value);
    if (!p) throw ConfigError(fmt::format("unknown preset '{}'", value));
    c.preset = *p;
  } else if (key == "trials") {
    c.trials = parse_int<std::uint64_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "ideal") {
    c.ideal = parse_bool(key, value);
  } else if (key == "plot_offset_ns") {
    c.plot_offset_ns = parse_int<std::int64_t>(key, value);
  } else if (key == "sweep.start") {
    c.sweep.start = parse_double(key, value);
  } else if (key == "sweep.stop") {
    c.sweep.stop = parse_double(key, value);
  } else if (key == "sweep.steps") {
    c.sweep.steps = parse_int<int>(key, value);
  } else if (key == "noise.eta_r") {
    c.noise.eta_r = parse_double(key, value);
  } else if (key == "noise.eta_s") {
    c.noise.eta_s = parse_double(key, value);
  } else if (key == "noise.p2_s1") {
    c.noise.p2_s1 = parse_double(key, value);
  } else if (key == "noise.p2_s2") {
    c.noise.p2_s2 = parse_double(key, value);
  } else if (key == "noise.tau_memory") {
    c.noise.tau_memory = parse_double(key, value);
  } else if (key == "noise.tau_raman") {
    c.noise.tau_raman = parse_double(key, value);
  } else if (key == "noise.envelope") {
    const std::string v = lower(value);
    if (v == "gaussian") c.noise.envelope = DecayEnvelope::Gaussian;
    else if (v == "exponential") c.noise.envelope = DecayEnvelope::Exponential;
    else throw ConfigError(fmt::format("{}: expected gaussian or exponential, got '{}'", key, value));
  } else if (key == "detection.eta_det_s1") {
    c.detection.eta_det_s1 = parse_double(key, value);
  } else if (key == "detection.eta_det_s2") {
    c.detection.eta_det_s2 = parse_double(key, value);
  } else if (key == "detection.sigma_k") {
    c.detection.sigma_k = parse_double(key, value);
  } else if (key == "detection.p_dark") {
    c.detection.p_dark = parse_double(key, value);
  } else if (key == "detection.p_crosstalk") {
    c.detection.p_crosstalk = parse_double(key, value);
  } else if (key == "detection.split_same_mode") {
    c.detection.split_same_mode = parse_bool(key, value);
  } else if (key == "detection.crosstalk") {
    const std::string v = lower(value);
    if (v == "misroute") c.detection.crosstalk = CrosstalkModel::Misroute;
    else if (v == "duplicate") c.detection.crosstalk = CrosstalkModel::Duplicate;
    else throw ConfigError(fmt::format("{}: expected misroute or duplicate, got '{}'", key, value));
  } else if (key == "physics.rabi_mhz") {
    c.physics.rabi_mhz = parse_double(key, value);
  } else if (key == "physics.larmor_mhz") {
    c.physics.larmor_mhz = parse_double(key, value);
  } else if (key == "fig4.mrad_per_unit") {
    c.mrad_per_unit = parse_double(key, value);
  } else if (key == "fig5b.class") {
    c.coincidence_class = std::string(value);
  } else {
    throw ConfigError(fmt::format("unknown config key '{}'", key_in));
  }
}

std::string get_config_value(const ExperimentConfig& c, std::string_view key) {
  const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  if (key == "preset") return std::string(preset_name(c.preset));
  if (key == "trials") return std::to_string(c.trials);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "ideal") return b(c.ideal);
  if (key == "plot_offset_ns") return std::to_string(c.plot_offset_ns);
  if (key == "sweep.start") return num(c.sweep.start);
  if (key == "sweep.stop") return num(c.sweep.stop);
  if (key == "sweep.steps") return std::to_string(c.sweep.steps);
  if (key == "noise.eta_r") return num(c.noise.eta_r);
  if (key == "noise.eta_s") return num(c.noise.eta_s);
  if (key == "noise.p2_s1") return num(c.noise.p2_s1);
  if (key == "noise.p2_s2") return num(c.noise.p2_s2);
  if (key == "noise.tau_memory") return num(c.noise.tau_memory);
  if (key == "noise.tau_raman") return num(c.noise.tau_raman);
  if (key == "noise.envelope")
    return c.noise.envelope == DecayEnvelope::Gaussian ? "gaussian" : "exponential";
  if (key == "detection.eta_det_s1") return num(c.detection.eta_det_s1);
  if (key == "detection.eta_det_s2") return num(c.detection.eta_det_s2);
  if (key == "detection.sigma_k") return num(c.detection.sigma_k);
  if (key == "detection.p_dark") return num(c.detection.p_dark);
  if (key == "detection.p_crosstalk") return num(c.detection.p_crosstalk);
  if (key == "detection.split_same_mode") return b(c.detection.split_same_mode);
  if (key == "detection.crosstalk")
    return c.detection.crosstalk == CrosstalkModel::Misroute ? "misroute" : "duplicate";
  if (key == "physics.rabi_mhz") return num(c.physics.rabi_mhz);
  if (key == "physics.larmor_mhz") return num(c.physics.larmor_mhz);
  if (key == "fig4.mrad_per_unit") return num(c.mrad_per_unit);
  if (key == "fig5b.class") return c.coincidence_class;
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

ConfigEntries parse_config_text(std::string_view text) {
  ConfigEntries out;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

void apply_config(ExperimentConfig& config, const ConfigEntries& entries) {
  for (const auto& [k, v] : entries) set_config_value(config, k, v);
}

std::optional<std::string> ResultTable::find_metadata(std::string_view key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

ResultTable run_preset(const ExperimentConfig& config) {
  config.validate();
  if (config.preset == Preset::Boson) return run_boson(config);

  const NoiseParams noise = config.ideal ? NoiseParams::ideal() : config.noise;
  const DetectionParams det = config.ideal ? config.detection.idealized() : config.detection;
  const Preset p = config.preset;
  const double trials = static_cast<double>(config.trials);

  ResultTable t;
  t.name = std::string(preset_name(p));
  echo_config(t, config);

  const bool fig4 = p == Preset::Fig4;
  const auto points = integer_points(config.sweep, fig4 ? "grid units" : "ns");
  if (points.front() < 0) throw ConfigError("sweep values must be >= 0");

  std::string rate_class;
  switch (p) {
    case Preset::Fig3a:
      t.classes = {"s1", "s2"};
      rate_class = "s2";
      t.sweep_label = "Raman pulse duration (ns)";
      t.rate_label = "S2 singles per trial";
      break;
    case Preset::Fig3b:
    case Preset::Fig4:
      t.classes = {"10", "01", "11"};
      rate_class = "11";
      t.sweep_label = fig4 ? "Raman separation (grid units)" : "Raman pulse duration (ns)";
      t.rate_label = "{1,1} coincidences per trial";
      break;
    case Preset::Fig5a:
      t.classes = {"s1", "s2"};
      rate_class = "s2";
      t.sweep_label = fmt::format("Ramsey delay (ns, +{} ns offset)", config.plot_offset_ns);
      t.rate_label = "S2 singles per trial";
      break;
    case Preset::Fig5b:
      t.classes = {"11", "20", "02"};
      rate_class = config.coincidence_class;
      t.sweep_label = fmt::format("Ramsey delay (ns, +{} ns offset)", config.plot_offset_ns);
      t.rate_label = fmt::format("{{{},{}}} coincidences per trial", rate_class[0], rate_class[1]);
      break;
    case Preset::G2S1:
    case Preset::G2S2:
      t.classes = {"d0", "d1", "cc"};
      t.sweep_label = "storage time (ns)";
      t.rate_label = "g2";
      break;
    case Preset::Boson:
      break;
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const PulseProgram program = make_program(p, points[i], config);
    const CountsHistogram h = run_point(program, noise, det, config, i);
    const double x = static_cast<double>(points[i]);
    if (p == Preset::G2S1 || p == Preset::G2S2) {
      const Spin w = p == Preset::G2S1 ? Spin::S1 : Spin::S2;
      const std::uint64_t d0 = h.detector_clicks(w, 0), d1 = h.detector_clicks(w, 1);
      std::uint64_t cc = 0;
      for (int other_n = 0; other_n <= 2; ++other_n)
        cc += w == Spin::S1 ? h.count(2, other_n) : h.count(other_n, 2);
      ResultRow row{x, {d0, d1, cc}, std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
      if (const auto g2 = estimate_g2(h, w)) {
        row.rate = *g2;
        // Poisson error of the coincidence count; one count when none were seen.
        row.err = *g2 > 0.0 ? *g2 / std::sqrt(static_cast<double>(cc))
                            : trials / (static_cast<double>(d0) * static_cast<double>(d1));
      }
      t.rows.push_back(std::move(row));
    } else {
      t.rows.push_back(count_row(x, h, t.classes, rate_class));
    }
  }

  switch (p) {
    case Preset::Fig3a:
    case Preset::Fig3b:
      fit_rows(t, trials, false, "sweep value in ns");
      break;
    case Preset::Fig5a:
    case Preset::Fig5b:
      fit_rows(t, trials, true, "sweep value in ns, offset excluded");
      break;
    default:
      break;
  }

  if (p == Preset::Fig3b) {
    // The HOM dip is the pi/2 minimum: search the first pi-pulse window only.
    const double pi_pulse_ns = 2.0 * static_cast<double>(quarter_period_ns(config.physics));
    auto dip_end = std::find_if(t.rows.begin(), t.rows.end(),
                                [&](const auto& r) { return r.sweep > pi_pulse_ns; });
    if (dip_end == t.rows.begin()) dip_end = t.rows.end();
    const auto min_it = std::min_element(t.rows.begin(), dip_end,
                                         [](const auto& a, const auto& b) { return a.rate < b.rate; });
    t.metadata.emplace_back("hom.min_sweep_ns", num(min_it->sweep));
    if (t.rows.front().sweep == 0.0 && t.rows.front().rate > 0.0)
      t.metadata.emplace_back("hom.visibility", num(hom_visibility(min_it->rate, t.rows.front().rate)));
  }
  if (fig4) {
    const double c0 = t.rows.front().rate, cl = t.rows.back().rate;
    t.metadata.emplace_back("fig4.sweep_mrad", fmt::format("{}..{}", num(points.front() * config.mrad_per_unit),
                                                           num(points.back() * config.mrad_per_unit)));
    if (cl > 0.0) {
      t.metadata.emplace_back("fig4.visibility_raw", num(1.0 - c0 / cl));
      t.metadata.emplace_back("fig4.visibility_corrected", num(1.0 - c0 / (2.0 * cl)));
    }
  }
  return t;
}

ProgramSweep parse_program_sweep(std::string_view text) {
  std::vector<std::string_view> parts;
  std::string_view rest = text;
  while (true) {
    const auto colon = rest.find(':');
    parts.push_back(trim(rest.substr(0, colon)));
    if (colon == std::string_view::npos) break;
    rest = rest.substr(colon + 1);
  }
  if (parts.size() != 4)
    throw ConfigError(fmt::format("sweep '{}' must have the form key:start:stop:steps", text));
  ProgramSweep s;
  s.key = lower(parts[0]);
  if (s.key != "raman.duration" && s.key != "raman.angle" && s.key != "raman.rabi" &&
      s.key != "wait.duration")
    throw ConfigError(fmt::format(
        "unknown sweep key '{}' (expected raman.duration, raman.angle, raman.rabi or wait.duration)",
        parts[0]));
  s.sweep.start = parse_double("sweep start", parts[1]);
  s.sweep.stop = parse_double("sweep stop", parts[2]);
  s.sweep.steps = parse_int<int>("sweep steps", parts[3]);
  if (s.sweep.steps < 2) throw ConfigError("sweep steps must be >= 2");
  if (!(s.sweep.start < s.sweep.stop)) throw ConfigError("sweep start must be < stop");
  return s;
}

PulseProgram apply_sweep_value(const PulseProgram& program, std::string_view key, double value) {
  PulseProgram out = program;
  bool touched = false;
  for (auto& s : out.statements) {
    if (auto* r = std::get_if<Raman>(&s)) {
      if (key == "raman.duration") {
        if (value < 0) throw ConfigError("raman.duration must be >= 0");
        r->duration_ns = std::llround(value);
      } else if (key == "raman.angle") {
        r->angle = static_cast<int>(std::lround(value));
      } else if (key == "raman.rabi") {
        if (!(value > 0)) throw ConfigError("raman.rabi must be > 0");
        r->rabi_mhz = value;
      } else {
        continue;
      }
      touched = true;
    } else if (auto* w = std::get_if<Wait>(&s); w && key == "wait.duration") {
      if (value < 0) throw ConfigError("wait.duration must be >= 0");
      w->duration_ns = std::llround(value);
      touched = true;
    }
  }
  if (!touched) throw ConfigError(fmt::format("program has no statement for sweep key '{}'", key));
  return out;
}

ResultTable run_program(const PulseProgram& program, const ProgramSweep& sweep,
                        const ExperimentConfig& config, std::string_view rate_class) {
  ExperimentConfig c = config;
  c.sweep = sweep.sweep;
  c.validate();
  check_class(rate_class);
  try {
    validate_structure(program);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const NoiseParams noise = c.ideal ? NoiseParams::ideal() : c.noise;
  const DetectionParams det = c.ideal ? c.detection.idealized() : c.detection;

  ResultTable t;
  t.name = "program";
  t.sweep_label = sweep.key;
  t.rate_label = std::string(rate_class) + " per trial";
  t.classes = {"10", "01", "11", "20", "02"};
  if (std::find(t.classes.begin(), t.classes.end(), rate_class) == t.classes.end())
    t.classes.emplace_back(rate_class);
  echo_config(t, c);
  std::string text = print(program);
  std::replace(text.begin(), text.end(), '\n', ';');
  if (!text.empty()) text.pop_back();
  t.metadata.emplace_back("program", text);
  t.metadata.emplace_back("program.sweep", fmt::format("{}:{}:{}:{}", sweep.key, num(sweep.sweep.start),
                                                       num(sweep.sweep.stop), sweep.sweep.steps));
  t.metadata.emplace_back("program.class", std::string(rate_class));

  std::vector<double> xs;
  if (sweep.key == "raman.rabi") {
    xs = sweep.sweep.values();
  } else {
    for (auto v : integer_points(sweep.sweep, sweep.key == "raman.angle" ? "grid units" : "ns"))
      xs.push_back(static_cast<double>(v));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const PulseProgram p = apply_sweep_value(program, sweep.key, xs[i]);
    if (p.duration_ns() > kDefaultTrialBudgetNs)
      throw ConfigError(fmt::format("program lasts {} ns at {} = {}, over the {} ns trial budget",
                                    p.duration_ns(), sweep.key, num(xs[i]), kDefaultTrialBudgetNs));
    const CountsHistogram h = run_point(p, noise, det, c, i);
    t.rows.push_back(count_row(xs[i], h, t.classes, rate_class));
  }
  return t;
}

std::string format_csv(const ResultTable& table) {
  std::string out;
  for (const auto& [k, v] : table.metadata) out += fmt::format("# {} = {}\n", k, v);
  out += "sweep";
  for (const auto& c : table.classes) out += ",counts_" + c;
  out += ",rate,err\n";
  for (const auto& r : table.rows) {
    out += num(r.sweep);
    for (auto n : r.counts) out += fmt::format(",{}", n);
    out += fmt::format(",{},{}\n", num(r.rate), num(r.err));
  }
  return out;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + step * 1e-9; v += step)
    ticks.push_back(std::abs(v) < step * 1e-9 ? 0.0 : v);
  return ticks;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (!f) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace

std::string format_svg(const ResultTable& table) {
  constexpr double kW = 800, kH = 500, kLeft = 90, kRight = 30, kTop = 40, kBottom = 70;
  constexpr double kPlotW = kW - kLeft - kRight, kPlotH = kH - kTop - kBottom;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& r : table.rows) {
    xlo = std::min(xlo, r.sweep);
    xhi = std::max(xhi, r.sweep);
    if (!std::isfinite(r.rate)) continue;
    const double e = std::isfinite(r.err) ? r.err : 0.0;
    ylo = std::min(ylo, r.rate - e);
    yhi = std::max(yhi, r.rate + e);
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  if (xhi <= xlo) xhi = xlo + 1;
  if (yhi <= ylo) {
    const double pad = ylo == 0.0 ? 0.5 : std::abs(ylo) * 0.1;
    ylo -= pad;
    yhi += pad;
  }
  const double ypad = (yhi - ylo) * 0.05;
  ylo -= ypad;
  yhi += ypad;

  const auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * kPlotW; };
  const auto py = [&](double y) { return kTop + (yhi - y) / (yhi - ylo) * kPlotH; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
      kW, kH);
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  s += fmt::format("<text x=\"{:.2f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
                   "text-anchor=\"middle\">{}</text>\n",
                   kLeft + kPlotW / 2, xml_escape(table.name));
  s += fmt::format("<g stroke=\"black\" stroke-width=\"1\"><line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" "
                   "y2=\"{1:.2f}\"/><line x1=\"{0:.2f}\" y1=\"{3:.2f}\" x2=\"{0:.2f}\" y2=\"{1:.2f}\"/></g>\n",
                   kLeft, kTop + kPlotH, kLeft + kPlotW, kTop);

  s += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : nice_ticks(xlo, xhi)) {
    const double x = px(v);
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
                     "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:g}</text>\n",
                     x, kTop + kPlotH, kTop + kPlotH + 5, kTop + kPlotH + 18, v);
  }
  for (double v : nice_ticks(ylo, yhi)) {
    const double y = py(v);
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>"
                     "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:g}</text>\n",
                     kLeft - 5, y, kLeft, kLeft - 8, y + 4, v);
  }
  s += "</g>\n";
  s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
                   "text-anchor=\"middle\">{}</text>\n",
                   kLeft + kPlotW / 2, kH - 20, xml_escape(table.sweep_label));
  s += fmt::format("<text x=\"20\" y=\"{0:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
                   "text-anchor=\"middle\" transform=\"rotate(-90 20 {0:.2f})\">{1}</text>\n",
                   kTop + kPlotH / 2, xml_escape(table.rate_label));

  s += "<g stroke=\"#555555\" stroke-width=\"1\">\n";
  for (const auto& r : table.rows) {
    if (!std::isfinite(r.rate) || !std::isfinite(r.err)) continue;
    s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>\n", px(r.sweep),
                     py(r.rate - r.err), py(r.rate + r.err));
  }
  s += "</g>\n";
  s += "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (const auto& r : table.rows) {
    if (!std::isfinite(r.rate)) continue;
    s += fmt::format("{}{:.2f},{:.2f}", first ? "" : " ", px(r.sweep), py(r.rate));
    first = false;
  }
  s += "\"/>\n</svg>\n";
  return s;
}

void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  write_file(path, format_csv(table));
}

void emit_svg(const ResultTable& table, const std::filesystem::path& path) {
  write_file(path, format_svg(table));
}

std::string_view build_id() noexcept { return HOMSIM_BUILD_ID; }

}  // namespace homsim
