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

#include "homsim/pulse_program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace homsim {

namespace {

struct Token {
  std::string text;
  int column = 0;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && line[i] != '#' && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    tokens.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
  }
  return tokens;
}

class LineParser {
 public:
  LineParser(int line, std::vector<Token> tokens) : line_(line), tokens_(std::move(tokens)) {}

  Statement parse() {
    const std::string kw = lower(tokens_[0].text);
    if (kw == "prepare") return Prepare{target()};
    if (kw == "read") return Read{target()};
    if (kw == "wait") return wait();
    if (kw == "raman") return raman();
    fail(tokens_[0], fmt::format("unknown keyword '{}'", tokens_[0].text));
  }

  [[noreturn]] void fail(const Token& tok, std::string message) const {
    throw ParseError(line_, tok.column, std::move(message), tok.text);
  }

 private:
  [[noreturn]] void fail_at_end(std::string message) const {
    const Token& last = tokens_.back();
    throw ParseError(line_, last.column + static_cast<int>(last.text.size()), std::move(message),
                     "");
  }

  void expect_count(std::size_t n) const {
    if (tokens_.size() > n) fail(tokens_[n], fmt::format("unexpected token '{}'", tokens_[n].text));
  }

  Spin target() {
    if (tokens_.size() < 2) fail_at_end("expected target s1 or s2");
    expect_count(2);
    const std::string t = lower(tokens_[1].text);
    if (t == "s1") return Spin::S1;
    if (t == "s2") return Spin::S2;
    fail(tokens_[1], fmt::format("unknown target '{}', expected s1 or s2", tokens_[1].text));
  }

  // Splits "155ns" into number and unit; the unit may also come as the next token.
  std::int64_t duration(const Token& tok, std::string_view text, const Token* unit_tok) {
    std::size_t split = text.size();
    while (split > 0 && std::isalpha(static_cast<unsigned char>(text[split - 1]))) --split;
    std::string_view number = text.substr(0, split);
    std::string unit = lower(text.substr(split));
    if (unit.empty() && unit_tok != nullptr) unit = lower(unit_tok->text);
    if (number.empty()) fail(tok, "missing number");
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec != std::errc() || ptr != number.data() + number.size())
      fail(tok, fmt::format("malformed integer '{}'", number));
    if (unit.empty()) fail(tok, "missing unit, expected 'ns'");
    if (unit != "ns") fail(tok, fmt::format("unsupported unit '{}', expected 'ns'", unit));
    if (value < 0) fail(tok, "duration must be non-negative");
    return value;
  }

  Wait wait() {
    if (tokens_.size() < 2) fail_at_end("expected duration");
    const bool separate_unit = tokens_.size() >= 3;
    expect_count(separate_unit ? 3 : 2);
    return Wait{duration(tokens_[1], tokens_[1].text, separate_unit ? &tokens_[2] : nullptr)};
  }

  Raman raman() {
    if (tokens_.size() < 2) fail_at_end("raman needs at least duration=<int>ns");
    Raman r;
    bool has_duration = false, has_angle = false, has_rabi = false;
    for (std::size_t i = 1; i < tokens_.size(); ++i) {
      const Token& tok = tokens_[i];
      const auto eq = tok.text.find('=');
      if (eq == std::string::npos) fail(tok, fmt::format("expected key=value, got '{}'", tok.text));
      const std::string key = lower(std::string_view(tok.text).substr(0, eq));
      const std::string_view value = std::string_view(tok.text).substr(eq + 1);
      auto once = [&](bool& seen) {
        if (seen) fail(tok, fmt::format("duplicate key '{}'", key));
        seen = true;
      };
      if (key == "duration") {
        once(has_duration);
        r.duration_ns = duration(tok, value, nullptr);
      } else if (key == "angle") {
        once(has_angle);
        int a = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), a);
        if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
          fail(tok, fmt::format("malformed integer angle '{}'", value));
        r.angle = a;
      } else if (key == "rabi") {
        once(has_rabi);
        std::size_t split = value.size();
        while (split > 0 && std::isalpha(static_cast<unsigned char>(value[split - 1]))) --split;
        const std::string unit = lower(value.substr(split));
        const std::string_view number = value.substr(0, split);
        double mhz = 0.0;
        const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), mhz);
        if (number.empty() || ec != std::errc() || ptr != number.data() + number.size())
          fail(tok, fmt::format("malformed number '{}'", number));
        if (unit.empty()) fail(tok, "missing unit, expected 'mhz'");
        if (unit != "mhz") fail(tok, fmt::format("unsupported unit '{}', expected 'mhz'", unit));
        if (!(mhz > 0.0) || !std::isfinite(mhz)) fail(tok, "rabi frequency must be positive");
        r.rabi_mhz = mhz;
      } else {
        fail(tok, fmt::format("unknown raman key '{}'", key));
      }
    }
    if (!has_duration) fail(tokens_[0], "raman requires duration=<int>ns");
    return r;
  }

  int line_;
  std::vector<Token> tokens_;
};

struct StructureTracker {
  bool prepared[2] = {false, false};
  bool read[2] = {false, false};
  bool any_prepare = false;

  // Returns an error message, or empty when the statement is admissible.
  std::string check(const Statement& s) {
    if (const auto* p = std::get_if<Prepare>(&s)) {
      const int t = spin_index(p->target);
      if (prepared[t]) return fmt::format("target {} is prepared twice", to_string(p->target));
      prepared[t] = any_prepare = true;
    } else if (const auto* r = std::get_if<Read>(&s)) {
      const int t = spin_index(r->target);
      if (!any_prepare) return fmt::format("read {} before any prepare", to_string(r->target));
      if (read[t]) return fmt::format("target {} is read twice", to_string(r->target));
      read[t] = true;
    }
    return {};
  }
};

}  // namespace

ParseError::ParseError(int line, int column, std::string message, std::string token)
    : std::runtime_error(fmt::format("line {}, column {}: {}{}", line, column, message,
                                     token.empty() ? "" : fmt::format(" (at '{}')", token))),
      line_(line),
      column_(column),
      message_(std::move(message)),
      token_(std::move(token)) {}

std::int64_t statement_duration_ns(const Statement& s) {
  return std::visit(
      [](const auto& st) -> std::int64_t {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Prepare>) return kPrepareDurationNs;
        if constexpr (std::is_same_v<T, Read>) return kReadDurationNs;
        if constexpr (std::is_same_v<T, Raman> || std::is_same_v<T, Wait>) return st.duration_ns;
      },
      s);
}

std::int64_t PulseProgram::duration_ns() const {
  std::int64_t total = 0;
  for (const auto& s : statements) total += statement_duration_ns(s);
  return total;
}

PulseProgram parse(std::string_view source, const ParseOptions& options) {
  if (source.starts_with("\xEF\xBB\xBF")) source.remove_prefix(3);
  PulseProgram program;
  StructureTracker tracker;
  std::int64_t elapsed = 0;
  int line_no = 0;
  while (!source.empty() || line_no == 0) {
    ++line_no;
    const auto nl = source.find('\n');
    std::string_view line = source.substr(0, nl);
    source.remove_prefix(nl == std::string_view::npos ? source.size() : nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto tokens = tokenize(line);
    if (tokens.empty()) {
      if (source.empty()) break;
      continue;
    }
    const Token head = tokens[0];
    LineParser lp(line_no, std::move(tokens));
    Statement st = lp.parse();
    if (auto err = tracker.check(st); !err.empty()) lp.fail(head, err);
    elapsed += statement_duration_ns(st);
    if (elapsed > options.trial_budget_ns)
      lp.fail(head, fmt::format("program duration {} ns exceeds the trial budget of {} ns", elapsed,
                                options.trial_budget_ns));
    program.statements.push_back(std::move(st));
  }
  return program;
}

std::string print(const PulseProgram& program) {
  std::string out;
  for (const auto& s : program.statements) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, Prepare>) {
            out += fmt::format("prepare {}", lower(to_string(st.target)));
          } else if constexpr (std::is_same_v<T, Read>) {
            out += fmt::format("read {}", lower(to_string(st.target)));
          } else if constexpr (std::is_same_v<T, Wait>) {
            out += fmt::format("wait {}ns", st.duration_ns);
          } else {
            out += fmt::format("raman duration={}ns", st.duration_ns);
            if (st.angle != 0) out += fmt::format(" angle={}", st.angle);
            if (st.rabi_mhz) out += fmt::format(" rabi={}mhz", *st.rabi_mhz);
          }
        },
        s);
    out += '\n';
  }
  return out;
}

void validate_structure(const PulseProgram& program) {
  StructureTracker tracker;
  for (const auto& s : program.statements) {
    if (auto err = tracker.check(s); !err.empty()) throw std::invalid_argument(err);
    if (const auto* r = std::get_if<Raman>(&s)) {
      if (r->duration_ns < 0) throw std::invalid_argument("negative raman duration");
      if (r->rabi_mhz && !(*r->rabi_mhz > 0.0))
        throw std::invalid_argument("rabi frequency must be positive");
    }
    if (const auto* w = std::get_if<Wait>(&s); w && w->duration_ns < 0)
      throw std::invalid_argument("negative wait duration");
  }
}

}  // namespace homsim
