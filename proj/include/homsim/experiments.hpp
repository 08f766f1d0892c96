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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "homsim/execute.hpp"
#include "homsim/noise.hpp"
#include "homsim/pulse_program.hpp"

namespace homsim {

/// Invalid configuration, sweep or preset name. The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output. The CLI maps it to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Preset { Fig3a, Fig3b, Fig4, Fig5a, Fig5b, G2S1, G2S2, Boson };

std::string_view preset_name(Preset p) noexcept;
std::optional<Preset> parse_preset(std::string_view name);
const std::vector<Preset>& all_presets();

struct Sweep {
  double start = 0.0;
  double stop = 1.0;
  int steps = 2;

  /// Evenly spaced, endpoints included.
  std::vector<double> values() const;
};

struct ExperimentConfig {
  Preset preset = Preset::Fig3b;
  std::uint64_t trials = 200'000;
  std::uint64_t seed = 1;
  NoiseParams noise;
  DetectionParams detection;
  Physics physics;
  Sweep sweep;
  bool ideal = false;
  std::int64_t plot_offset_ns = 800;
  double mrad_per_unit = 1.0;          // fig4 axis scale, metadata only
  std::string coincidence_class = "02";  // fig5b derived class, "02" or "11"

  void validate() const;
};

/// Defaults for a preset: sweep range in the preset's units and the detector layout.
ExperimentConfig default_config(Preset preset);

/// Documented `key = value` keys, in echo order.
const std::vector<std::string>& config_keys();

/// Sets one dotted key; throws ConfigError on unknown keys or malformed values.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const ExperimentConfig& config, std::string_view key);

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` lines; `#` starts a comment. Errors name the line.
ConfigEntries parse_config_text(std::string_view text);
void apply_config(ExperimentConfig& config, const ConfigEntries& entries);

struct ResultRow {
  double sweep = 0.0;
  std::vector<std::uint64_t> counts;  // one per class
  double rate = 0.0;
  double err = 0.0;
};

struct ResultTable {
  std::string name;
  std::string sweep_label;
  std::string rate_label;
  std::vector<std::string> classes;
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::optional<std::string> find_metadata(std::string_view key) const;
};

ResultTable run_preset(const ExperimentConfig& config);

/// `key:start:stop:steps` with key one of raman.duration, raman.angle, raman.rabi,
/// wait.duration. The value is applied to every statement of that kind.
struct ProgramSweep {
  std::string key;
  Sweep sweep;
};

ProgramSweep parse_program_sweep(std::string_view text);
PulseProgram apply_sweep_value(const PulseProgram& program, std::string_view key, double value);

/// Runs a user program at every sweep point; rate is the `class` coincidence rate
/// (`n1n2` digits, or `s1`/`s2` for window singles).
ResultTable run_program(const PulseProgram& program, const ProgramSweep& sweep,
                        const ExperimentConfig& config, std::string_view rate_class = "11");

std::string format_csv(const ResultTable& table);
std::string format_svg(const ResultTable& table);
void emit_csv(const ResultTable& table, const std::filesystem::path& path);
void emit_svg(const ResultTable& table, const std::filesystem::path& path);

std::string_view build_id() noexcept;

}  // namespace homsim
