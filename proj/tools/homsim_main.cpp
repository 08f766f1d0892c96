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

// Command-line driver: runs a preset or a pulse-program sweep and writes CSV/SVG.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "homsim/experiments.hpp"
#include "homsim/pulse_program.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw homsim::IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string preset_list() {
  std::string out;
  for (auto p : homsim::all_presets()) {
    if (!out.empty()) out += ", ";
    out += homsim::preset_name(p);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homsim: Monte Carlo HOM / NOON interference experiments"};
  std::optional<std::string> preset_arg;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool ideal = false;
  bool svg = false;
  std::optional<std::string> config_path;
  std::optional<std::string> program_path;
  std::optional<std::string> sweep_arg;
  std::string rate_class = "11";
  int threads = 0;

  app.add_option("--preset", preset_arg, "Preset: " + preset_list());
  app.add_option("--trials", trials, "Monte Carlo trials per sweep point");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--ideal", ideal, "Disable every noise channel");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_flag("--svg", svg, "Also write an SVG plot");
  app.add_option("--program", program_path, "Pulse-program file to sweep");
  app.add_option("--sweep", sweep_arg, "key:start:stop:steps for --program");
  app.add_option("--class", rate_class, "Outcome class for --program rates (n1n2, s1 or s2)");
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (threads < 0) throw homsim::ConfigError("--threads must be >= 0");
    if (threads > 0) omp_set_num_threads(threads);
    if (program_path && preset_arg) throw homsim::ConfigError("--preset and --program are exclusive");
    if (program_path && !sweep_arg) throw homsim::ConfigError("--program requires --sweep");
    if (sweep_arg && !program_path) throw homsim::ConfigError("--sweep applies only to --program");

    homsim::ConfigEntries entries;
    if (config_path) entries = homsim::parse_config_text(read_file(*config_path));

    std::optional<homsim::Preset> preset;
    if (preset_arg) {
      preset = homsim::parse_preset(*preset_arg);
      if (!preset)
        throw homsim::ConfigError("unknown preset '" + *preset_arg + "' (known: " + preset_list() + ")");
    } else {
      for (const auto& [k, v] : entries) {
        if (k != "preset") continue;
        preset = homsim::parse_preset(v);
        if (!preset) throw homsim::ConfigError("unknown preset '" + v + "' (known: " + preset_list() + ")");
      }
    }
    if (!preset && !program_path) throw homsim::ConfigError("one of --preset or --program is required");

    homsim::ExperimentConfig config =
        preset ? homsim::default_config(*preset) : homsim::ExperimentConfig{};
    homsim::apply_config(config, entries);
    if (preset) config.preset = *preset;
    if (trials) config.trials = *trials;
    if (seed) config.seed = *seed;
    if (ideal) config.ideal = true;

    homsim::ResultTable table;
    std::string stem;
    if (program_path) {
      const std::string source = read_file(*program_path);
      const homsim::PulseProgram program = homsim::parse(source);
      const homsim::ProgramSweep sweep = homsim::parse_program_sweep(*sweep_arg);
      table = homsim::run_program(program, sweep, config, rate_class);
      stem = std::filesystem::path(*program_path).stem().string();
    } else {
      table = homsim::run_preset(config);
      stem = std::string(homsim::preset_name(config.preset));
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw homsim::IoError("cannot create output directory '" + out_dir + "': " + ec.message());
    const auto csv = std::filesystem::path(out_dir) / (stem + ".csv");
    homsim::emit_csv(table, csv);
    std::cout << csv.string() << '\n';
    if (svg) {
      const auto svg_path = std::filesystem::path(out_dir) / (stem + ".svg");
      homsim::emit_svg(table, svg_path);
      std::cout << svg_path.string() << '\n';
    }
    return 0;
  } catch (const homsim::IoError& e) {
    std::cerr << "homsim: " << e.what() << '\n';
    return kExitIo;
  } catch (const homsim::ParseError& e) {
    std::cerr << "homsim: program: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "homsim: " << e.what() << '\n';
    return kExitConfig;
  }
}
