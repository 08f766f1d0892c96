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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "homsim/fock.hpp"

namespace homsim {

/// 200 ns Rydberg excitation + 500 ns transfer + two 100 ns guard intervals.
inline constexpr std::int64_t kPrepareDurationNs = 900;
inline constexpr std::int64_t kReadDurationNs = 100;
inline constexpr std::int64_t kDefaultTrialBudgetNs = 10'700;

struct Prepare {
  Spin target = Spin::S1;
  friend bool operator==(const Prepare&, const Prepare&) = default;
};

struct Raman {
  std::int64_t duration_ns = 0;
  int angle = 0;                    // Raman wave-vector kick in grid units
  std::optional<double> rabi_mhz;   // overrides the default Rabi frequency
  friend bool operator==(const Raman&, const Raman&) = default;
};

struct Wait {
  std::int64_t duration_ns = 0;
  friend bool operator==(const Wait&, const Wait&) = default;
};

struct Read {
  Spin target = Spin::S1;
  friend bool operator==(const Read&, const Read&) = default;
};

using Statement = std::variant<Prepare, Raman, Wait, Read>;

struct PulseProgram {
  std::vector<Statement> statements;

  std::int64_t duration_ns() const;
  friend bool operator==(const PulseProgram&, const PulseProgram&) = default;
};

std::int64_t statement_duration_ns(const Statement& s);

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, std::string message, std::string token);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& token() const noexcept { return token_; }

 private:
  int line_;
  int column_;
  std::string message_;
  std::string token_;
};

struct ParseOptions {
  std::int64_t trial_budget_ns = kDefaultTrialBudgetNs;
};

/**
 * One statement per line, '#' starts a comment, keywords are case-insensitive:
 *
 *   prepare s1|s2
 *   raman duration=<int>ns [angle=<int>] [rabi=<num>mhz]
 *   wait <int>ns
 *   read s1|s2
 *
 * Besides syntax, every Read must follow a Prepare, each target is prepared and
 * read at most once, and the program must fit the trial budget. The first error
 * is thrown as ParseError with a 1-based line and column.
 */
PulseProgram parse(std::string_view source, const ParseOptions& options = {});

/// Canonical text: lowercase, one statement per line, each line LF-terminated.
std::string print(const PulseProgram& program);

/// Structural invariants only (no budget); throws std::invalid_argument.
void validate_structure(const PulseProgram& program);

}  // namespace homsim
