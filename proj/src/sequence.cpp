#include "nvmem/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nvmem {

namespace {
constexpr double pi = std::numbers::pi_v<double>;
constexpr double tau = 2.0 * pi;
constexpr std::size_t max_expanded_events = 1'000'000;
} // namespace

std::string to_string(Channel c) {
  switch (c) {
    case Channel::laser: return "laser";
    case Channel::mw1: return "mw1";
    case Channel::mw2: return "mw2";
    case Channel::rf1: return "rf1";
    case Channel::rf2: return "rf2";
    case Channel::delay: return "delay";
  }
  return "?";
}

double ValueWithUnit::scaled() const {
  if (unit.empty() || unit == "s") return value;
  if (unit == "ns") return value * 1e-9;
  if (unit == "us") return value * 1e-6;
  if (unit == "ms") return value * 1e-3;
  if (unit == "deg") return value * pi / 180.0;
  if (unit == "rad") return value;
  return value;
}

double AngleSpec::radians() const {
  if (pi_form) return num * pi / den;
  return v.scaled();
}

bool RawEvent::operator==(const RawEvent& o) const {
  return channel == o.channel && timed == o.timed &&
         angle.radians() == o.angle.radians() &&
         duration.var == o.duration.var &&
         (duration.symbolic() || duration.seconds() == o.duration.seconds()) &&
         phase.radians() == o.phase.radians() && power == o.power &&
         at.has_value() == o.at.has_value() &&
         (!at || (at->var == o.at->var &&
                  (at->symbolic() || at->seconds() == o.at->seconds())));
}

bool SequenceItem::operator==(const SequenceItem& o) const {
  if (is_repeat != o.is_repeat) return false;
  if (is_repeat) return repeat_count == o.repeat_count && children == o.children;
  return event == o.event;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out;
  if (steps <= 0) return out;
  if (steps == 1) return {from.seconds()};
  const double a = from.seconds(), b = to.seconds();
  out.reserve(static_cast<std::size_t>(steps));
  for (long i = 0; i < steps; ++i)
    out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1));
  return out;
}

std::size_t SequenceIR::event_count() const {
  std::size_t n = 0;
  auto walk = [&n](const auto& self, const std::vector<SequenceItem>& items) -> void {
    for (const auto& it : items) {
      if (it.is_repeat)
        self(self, it.children);
      else
        ++n;
    }
  };
  walk(walk, items);
  return n;
}

std::string to_string(const Diagnostic& d, std::string_view file) {
  std::ostringstream os;
  os << file << ":" << d.line << ":" << d.col << ": "
     << (d.severity == Severity::error ? "error" : "warning") << ": " << d.message;
  return os.str();
}

// --- lexer --------------------------------------------------------------------

namespace {

enum class Tok { ident, number, punct, separator, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;    // ident name or punct char
  double value = 0.0;  // number
  std::string suffix;  // unit letters glued to a number
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    Token t;
    t.line = line_;
    t.col = col_;
    if (pos_ >= text_.size()) {
      t.kind = Tok::end;
      return t;
    }
    const char c = text_[pos_];
    if (c == '\n' || c == ';') {
      advance();
      t.kind = Tok::separator;
      t.text = c == '\n' ? "\\n" : ";";
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
      return lex_number(t);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        t.text += text_[pos_];
        advance();
      }
      t.kind = Tok::ident;
      return t;
    }
    t.kind = Tok::punct;
    t.text = std::string(1, c);
    advance();
    return t;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    for (;;) {
      while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                     text_[pos_] == '\r')) {
        advance();
      }
      if (pos_ < text_.size() && text_[pos_] == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
  }

  Token lex_number(Token t) {
    const std::size_t start = pos_;
    const int line0 = line_, col0 = col_;
    if (text_[pos_] == '-' || text_[pos_] == '+') advance();
    bool any_digit = false;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      any_digit |= std::isdigit(static_cast<unsigned char>(text_[pos_])) != 0;
      advance();
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      // Exponent only when followed by digits; otherwise it is a suffix.
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        advance();
        if (text_[pos_] == '+' || text_[pos_] == '-') advance();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          advance();
      }
    }
    if (!any_digit) {
      // A lone '-', '+' or '.' is punctuation.
      pos_ = start;
      line_ = line0;
      col_ = col0;
      t.kind = Tok::punct;
      t.text = std::string(1, text_[pos_]);
      advance();
      return t;
    }
    const std::string digits(text_.substr(start, pos_ - start));
    t.value = std::strtod(digits.c_str(), nullptr);
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      t.suffix += text_[pos_];
      advance();
    }
    t.kind = Tok::number;
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// --- parser ---------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { bump(); }

  ParseResult run() {
    ParseResult out;
    out.ir.items = parse_items(/*depth=*/0, /*in_block=*/false, out);
    for (const auto& d : out.diagnostics)
      if (d.severity == Severity::error) {
        out.ok = false;
        return out;
      }
    out.ok = true;
    return out;
  }

 private:
  void bump() { tok_ = lexer_.next(); }

  bool is_punct(const char* p) const { return tok_.kind == Tok::punct && tok_.text == p; }

  void error(ParseResult& out, const std::string& msg, const Token& at) {
    out.diagnostics.push_back({at.line, at.col, Severity::error, msg});
  }

  // Skip to the next statement separator or block edge.
  void synchronize() {
    while (tok_.kind != Tok::end && tok_.kind != Tok::separator &&
           !is_punct("}")) {
      bump();
    }
  }

  std::vector<SequenceItem> parse_items(int depth, bool in_block, ParseResult& out) {
    std::vector<SequenceItem> items;
    for (;;) {
      while (tok_.kind == Tok::separator) bump();
      if (tok_.kind == Tok::end) {
        if (in_block) error(out, "unterminated repeat block", tok_);
        return items;
      }
      if (is_punct("}")) {
        if (!in_block) {
          error(out, "unmatched '}'", tok_);
          bump();
          continue;
        }
        return items;
      }
      if (auto item = parse_statement(depth, out)) items.push_back(std::move(*item));
    }
  }

  std::optional<SequenceItem> parse_statement(int depth, ParseResult& out) {
    if (tok_.kind != Tok::ident) {
      error(out, "expected a statement", tok_);
      synchronize();
      return std::nullopt;
    }
    const Token head = tok_;
    const std::string word = tok_.text;
    bump();

    if (word == "repeat") return parse_repeat(head, depth, out);
    if (word == "sweep") {
      parse_sweep(head, out);
      return std::nullopt;
    }

    RawEvent ev;
    ev.line = head.line;
    ev.col = head.col;
    if (word == "laser") {
      ev.channel = Channel::laser;
      if (!parse_duration(ev.duration, out)) return recover();
    } else if (word == "delay") {
      ev.channel = Channel::delay;
      if (!parse_duration(ev.duration, out)) return recover();
    } else if (word == "mw1" || word == "mw2" || word == "rf1" || word == "rf2") {
      ev.channel = word == "mw1"   ? Channel::mw1
                   : word == "mw2" ? Channel::mw2
                   : word == "rf1" ? Channel::rf1
                                   : Channel::rf2;
      if (!parse_pulse_spec(ev, out)) return recover();
    } else {
      error(out, "unknown channel or statement '" + word + "'", head);
      synchronize();
      return std::nullopt;
    }

    if (!parse_attributes(ev, out)) return recover();
    if (tok_.kind != Tok::separator && tok_.kind != Tok::end && !is_punct("}")) {
      error(out, "unexpected input after statement", tok_);
      synchronize();
      return std::nullopt;
    }
    SequenceItem item;
    item.event = std::move(ev);
    item.line = head.line;
    item.col = head.col;
    return item;
  }

  std::optional<SequenceItem> recover() {
    synchronize();
    return std::nullopt;
  }

  std::optional<SequenceItem> parse_repeat(const Token& head, int depth, ParseResult& out) {
    if (depth > 32) {
      error(out, "repeat blocks nested too deeply", head);
      synchronize();
      return std::nullopt;
    }
    if (tok_.kind != Tok::number || !tok_.suffix.empty() ||
        tok_.value != std::floor(tok_.value) || tok_.value < 0 || tok_.value > 1e9) {
      error(out, "repeat needs a non-negative integer count", tok_);
      synchronize();
      return std::nullopt;
    }
    SequenceItem item;
    item.is_repeat = true;
    item.repeat_count = static_cast<long>(tok_.value);
    item.line = head.line;
    item.col = head.col;
    bump();
    while (tok_.kind == Tok::separator) bump();
    if (!is_punct("{")) {
      error(out, "expected '{' after repeat count", tok_);
      synchronize();
      return std::nullopt;
    }
    bump();
    item.children = parse_items(depth + 1, /*in_block=*/true, out);
    if (is_punct("}")) bump();
    return item;
  }

  void parse_sweep(const Token& head, ParseResult& out) {
    SweepSpec sweep;
    sweep.line = head.line;
    sweep.col = head.col;
    if (tok_.kind != Tok::ident) {
      error(out, "sweep needs a variable name", tok_);
      synchronize();
      return;
    }
    sweep.var = tok_.text;
    bump();
    auto expect_word = [&](const char* w) {
      if (tok_.kind == Tok::ident && tok_.text == w) {
        bump();
        return true;
      }
      error(out, std::string("expected '") + w + "' in sweep", tok_);
      synchronize();
      return false;
    };
    if (!expect_word("from")) return;
    if (!parse_duration(sweep.from, out) || sweep.from.symbolic()) {
      synchronize();
      return;
    }
    if (!expect_word("to")) return;
    if (!parse_duration(sweep.to, out) || sweep.to.symbolic()) {
      synchronize();
      return;
    }
    if (!expect_word("steps")) return;
    if (tok_.kind != Tok::number || !tok_.suffix.empty() ||
        tok_.value != std::floor(tok_.value) || tok_.value < 1 || tok_.value > 1e7) {
      error(out, "sweep needs a positive integer step count", tok_);
      synchronize();
      return;
    }
    sweep.steps = static_cast<long>(tok_.value);
    bump();
    out.ir.sweeps.push_back(std::move(sweep));
  }

  bool parse_duration(DurationSpec& d, ParseResult& out) {
    if (tok_.kind == Tok::ident) {
      d.var = tok_.text;
      bump();
      return true;
    }
    if (tok_.kind != Tok::number) {
      error(out, "expected a duration", tok_);
      return false;
    }
    if (tok_.suffix != "ns" && tok_.suffix != "us" && tok_.suffix != "ms" &&
        tok_.suffix != "s") {
      error(out, "duration needs a time unit (ns/us/ms/s)", tok_);
      return false;
    }
    if (tok_.value < 0) {
      error(out, "duration must be non-negative", tok_);
      return false;
    }
    d.v = {tok_.value, tok_.suffix};
    bump();
    return true;
  }

  bool parse_angle(AngleSpec& a, ParseResult& out) {
    if (tok_.kind == Tok::ident && tok_.text == "pi") {
      a = AngleSpec{true, 1.0, 1.0, {}};
      bump();
    } else if (tok_.kind == Tok::number && tok_.suffix == "pi") {
      a = AngleSpec{true, tok_.value, 1.0, {}};
      bump();
    } else if (tok_.kind == Tok::number &&
               (tok_.suffix == "deg" || tok_.suffix == "rad")) {
      a = AngleSpec{false, 0.0, 1.0, {tok_.value, tok_.suffix}};
      bump();
      return true;
    } else {
      error(out, "expected an angle (pi forms or deg/rad)", tok_);
      return false;
    }
    if (is_punct("/")) {
      bump();
      if (tok_.kind != Tok::number || !tok_.suffix.empty() || tok_.value <= 0) {
        error(out, "expected a divisor after '/'", tok_);
        return false;
      }
      a.den = tok_.value;
      bump();
    }
    return true;
  }

  bool parse_pulse_spec(RawEvent& ev, ParseResult& out) {
    if (tok_.kind == Tok::ident && (tok_.text == "X" || tok_.text == "Y" ||
                                    tok_.text == "x" || tok_.text == "y")) {
      ev.timed = true;
      ev.phase = (tok_.text == "Y" || tok_.text == "y")
                     ? AngleSpec{true, 1.0, 2.0, {}}
                     : AngleSpec{true, 0.0, 1.0, {}};
      bump();
      if (!is_punct("(")) {
        error(out, "expected '(' after rotation axis", tok_);
        return false;
      }
      bump();
      if (!parse_duration(ev.duration, out)) return false;
      if (!is_punct(")")) {
        error(out, "expected ')' after drive duration", tok_);
        return false;
      }
      bump();
      return true;
    }
    return parse_angle(ev.angle, out);
  }

  bool parse_attributes(RawEvent& ev, ParseResult& out) {
    while (tok_.kind == Tok::ident) {
      const Token key = tok_;
      bump();
      if (!is_punct("=")) {
        error(out, "expected '=' after attribute '" + key.text + "'", tok_);
        return false;
      }
      bump();
      if (key.text == "phase") {
        AngleSpec extra;
        if (!parse_angle(extra, out)) return false;
        if (ev.timed) {
          // X/Y shorthand carries 0/90deg; an explicit phase adds to it.
          AngleSpec sum;
          sum.pi_form = false;
          sum.v = {ev.phase.radians() + extra.radians(), "rad"};
          ev.phase = sum;
        } else {
          ev.phase = extra;
        }
      } else if (key.text == "power") {
        if (tok_.kind != Tok::number || !tok_.suffix.empty()) {
          error(out, "power needs a bare number", tok_);
          return false;
        }
        ev.power = tok_.value;
        bump();
      } else if (key.text == "at") {
        DurationSpec d;
        if (!parse_duration(d, out)) return false;
        ev.at = d;
      } else {
        error(out, "unknown attribute '" + key.text + "'", key);
        return false;
      }
    }
    return true;
  }

  Lexer lexer_;
  Token tok_;
};

} // namespace

ParseResult parse_sequence(std::string_view text) { return Parser(text).run(); }

// --- emission -------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string emit_duration(const DurationSpec& d) {
  if (d.symbolic()) return d.var;
  return format_double(d.v.value) + d.v.unit;
}

std::string emit_angle(const AngleSpec& a) {
  if (!a.pi_form) return format_double(a.v.value) + a.v.unit;
  std::string s;
  if (a.num != 1.0) s += format_double(a.num);
  s += "pi";
  if (a.den != 1.0) s += "/" + format_double(a.den);
  return s;
}

void emit_items(const std::vector<SequenceItem>& items, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const auto& it : items) {
    if (it.is_repeat) {
      out += pad + "repeat " + std::to_string(it.repeat_count) + " {\n";
      emit_items(it.children, out, indent + 1);
      out += pad + "}\n";
      continue;
    }
    const RawEvent& e = it.event;
    out += pad + to_string(e.channel);
    if (e.channel == Channel::laser || e.channel == Channel::delay) {
      out += " " + emit_duration(e.duration);
    } else if (e.timed) {
      const double ph = e.phase.radians();
      const double y_base = AngleSpec{true, 1.0, 2.0, {}}.radians();
      if (ph == y_base) {
        out += " Y(" + emit_duration(e.duration) + ")";
      } else {
        out += " X(" + emit_duration(e.duration) + ")";
        if (ph != 0.0) {
          // Re-emitted as an exact radian offset on the X axis.
          AngleSpec rest;
          rest.pi_form = false;
          rest.v = {ph, "rad"};
          out += " phase=" + emit_angle(rest);
        }
      }
    } else {
      out += " " + emit_angle(e.angle);
      if (e.phase.radians() != 0.0) out += " phase=" + emit_angle(e.phase);
    }
    if (e.channel == Channel::laser && e.power != 1.0)
      out += " power=" + format_double(e.power);
    if (e.at) out += " at=" + emit_duration(*e.at);
    out += "\n";
  }
}

} // namespace

std::string emit(const SequenceIR& ir) {
  std::string out;
  for (const auto& s : ir.sweeps) {
    out += "sweep " + s.var + " from " + emit_duration(s.from) + " to " +
           emit_duration(s.to) + " steps " + std::to_string(s.steps) + "\n";
  }
  emit_items(ir.items, out, 0);
  return out;
}

// --- repeat expansion -------------------------------------------------------------

namespace {

std::size_t count_repeat_blocks(const std::vector<SequenceItem>& items) {
  std::size_t n = 0;
  for (const auto& it : items)
    if (it.is_repeat) n += 1 + count_repeat_blocks(it.children);
  return n;
}

// Repeat blocks are numbered in document order; overrides index that numbering.
void expand_into(const std::vector<SequenceItem>& items, std::vector<SequenceItem>& out,
                 const std::vector<long>& overrides, std::size_t block_id) {
  for (const auto& it : items) {
    if (!it.is_repeat) {
      if (out.size() >= max_expanded_events)
        throw std::length_error("expanded sequence exceeds the event limit");
      out.push_back(it);
      continue;
    }
    long count = it.repeat_count;
    if (block_id < overrides.size() && overrides[block_id] >= 0)
      count = overrides[block_id];
    if (count < 0) throw std::invalid_argument("repeat count must be >= 0");
    const std::size_t child_base = block_id + 1;
    for (long k = 0; k < count; ++k)
      expand_into(it.children, out, overrides, child_base);
    block_id = child_base + count_repeat_blocks(it.children);
  }
}

} // namespace

SequenceIR expand_repeats(const SequenceIR& ir, const std::vector<long>& overrides) {
  SequenceIR out;
  out.sweeps = ir.sweeps;
  expand_into(ir.items, out.items, overrides, 0);
  return out;
}

// --- resolution -------------------------------------------------------------------

double DriveCalibration::rabi_for(Channel c) const {
  switch (c) {
    case Channel::mw1:
    case Channel::mw2: return mw_rabi;
    case Channel::rf1:
    case Channel::rf2: return rf_rabi;
    default: return 0.0;
  }
}

ResolveResult resolve(const SequenceIR& ir, const std::map<std::string, double>& vars,
                      const DriveCalibration& cal) {
  ResolveResult out;

  auto bind = [&](const DurationSpec& d, double& value, int line, int col) {
    if (d.symbolic()) {
      const auto found = vars.find(d.var);
      if (found == vars.end()) {
        out.diagnostics.push_back(
            {line, col, Severity::error, "unresolved sweep variable '" + d.var + "'"});
        return false;
      }
      value = found->second;
    } else {
      value = d.seconds();
    }
    if (value < 0) {
      out.diagnostics.push_back({line, col, Severity::error, "negative duration"});
      return false;
    }
    return true;
  };

  double cursor = 0.0;
  for (const auto& item : ir.items) {
    if (item.is_repeat) {
      out.diagnostics.push_back(
          {item.line, item.col, Severity::error, "repeat block not expanded"});
      return out;
    }
    const RawEvent& e = item.event;
    TimedEvent t;
    t.channel = e.channel;
    t.phase = e.phase.radians();
    t.power = e.power;
    t.timed_drive = e.timed;
    t.line = e.line;
    t.col = e.col;

    if (e.channel == Channel::laser || e.channel == Channel::delay || e.timed) {
      if (!bind(e.duration, t.duration, e.line, e.col)) continue;
      if (e.timed) t.amplitude = cal.rabi_for(e.channel);
    } else {
      t.angle = e.angle.radians();
      t.amplitude = cal.rabi_for(e.channel);
      if (t.amplitude <= 0) {
        out.diagnostics.push_back({e.line, e.col, Severity::error,
                                   "no drive calibration for " + to_string(e.channel)});
        continue;
      }
      t.duration = std::abs(t.angle) / (tau * t.amplitude);
    }

    t.start = cursor;
    if (e.at) {
      double at_value = 0.0;
      if (!bind(*e.at, at_value, e.line, e.col)) continue;
      t.start = at_value;
    }
    cursor = std::max(cursor, t.end());
    out.seq.events.push_back(t);
  }

  std::stable_sort(out.seq.events.begin(), out.seq.events.end(),
                   [](const TimedEvent& a, const TimedEvent& b) { return a.start < b.start; });
  out.seq.total_duration = cursor;
  out.ok = std::none_of(out.diagnostics.begin(), out.diagnostics.end(),
                        [](const Diagnostic& d) { return d.severity == Severity::error; });
  return out;
}

// --- timing validation ---------------------------------------------------------------

namespace {

bool is_pulse_channel(Channel c) {
  return c == Channel::mw1 || c == Channel::mw2 || c == Channel::rf1 || c == Channel::rf2;
}

bool is_mw(Channel c) { return c == Channel::mw1 || c == Channel::mw2; }
bool is_rf(Channel c) { return c == Channel::rf1 || c == Channel::rf2; }

bool angle_near(double angle, double target) {
  return std::abs(angle - target) < 1e-9;
}

} // namespace

std::vector<Diagnostic> validate_timing(const CompiledSequence& seq) {
  std::vector<Diagnostic> diags;
  constexpr double overlap_slack = 1e-15;
  constexpr double align_tol = 5e-9;
  constexpr double gap_tol = 2e-8;

  const auto& ev = seq.events;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    for (std::size_t j = i + 1; j < ev.size(); ++j) {
      if (ev[j].start >= ev[i].end() - overlap_slack) break;  // sorted by start
      const bool pi_ = is_pulse_channel(ev[i].channel);
      const bool pj = is_pulse_channel(ev[j].channel);
      if (pi_ && pj) {
        diags.push_back({ev[j].line, ev[j].col, Severity::error,
                         to_string(ev[i].channel) + " and " + to_string(ev[j].channel) +
                             " pulses overlap in time"});
      } else if ((ev[i].channel == Channel::laser && pj) ||
                 (pi_ && ev[j].channel == Channel::laser)) {
        diags.push_back({ev[j].line, ev[j].col, Severity::error,
                         "laser overlaps a mw/rf pulse"});
      }
    }
  }

  // Echo alignment advisories on [mw pi/2][mw pi][rf pi][mw pi] runs.
  std::vector<const TimedEvent*> pulses;
  for (const auto& e : ev)
    if (is_pulse_channel(e.channel) && !e.timed_drive) pulses.push_back(&e);
  for (std::size_t i = 0; i + 3 < pulses.size(); ++i) {
    const auto& p0 = *pulses[i];
    const auto& p1 = *pulses[i + 1];
    const auto& pr = *pulses[i + 2];
    const auto& p2 = *pulses[i + 3];
    const bool pattern = is_mw(p0.channel) && angle_near(p0.angle, pi / 2.0) &&
                         p1.channel == p0.channel && angle_near(p1.angle, pi) &&
                         is_rf(pr.channel) && angle_near(pr.angle, pi) &&
                         p2.channel == p0.channel && angle_near(p2.angle, pi);
    if (!pattern) continue;
    const double echo_time = p1.center() + (p1.center() - p0.center());
    const double miss = pr.center() - echo_time;
    if (std::abs(miss) > align_tol) {
      std::ostringstream os;
      os << "rf pulse center misses the echo maximum by " << miss * 1e9 << " ns";
      diags.push_back({pr.line, pr.col, Severity::warning, os.str()});
    }
    const double gap = p2.start - pr.end();
    if (gap > gap_tol) {
      std::ostringstream os;
      os << "gap of " << gap * 1e9 << " ns between the rf pulse and the closing mw pulse";
      diags.push_back({p2.line, p2.col, Severity::warning, os.str()});
    }
  }
  return diags;
}

} // namespace nvmem
