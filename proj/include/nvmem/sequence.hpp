#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nvmem {

// --- pulse-sequence language --------------------------------------------------
//
// Line-oriented statements, separated by ';' or newline, '#' comments:
//
//   laser 10us [power=1.5]
//   mw1 pi | mw2 pi/2 phase=90deg | rf1 3pi/2     fixed-angle pulses
//   rf1 X(t) | rf1 Y(250ns)                       timed drives, phase 0 / 90deg
//   delay 5us | delay t
//   repeat 10 { ... }
//   sweep t from 0ns to 2us steps 101
//
// Durations take ns/us/ms/s suffixes; angles take pi fractions or deg/rad.
// An optional at=<duration> attribute places an event at an absolute time
// instead of appending it after the previous event.

enum class Channel { laser, mw1, mw2, rf1, rf2, delay };

std::string to_string(Channel c);

// A number with its authored unit, kept for exact re-emission.
struct ValueWithUnit {
  double value = 0.0;
  std::string unit;  // "", ns, us, ms, s, deg, rad

  double scaled() const;  // seconds or radians depending on the unit
  bool operator==(const ValueWithUnit&) const = default;
};

struct DurationSpec {
  ValueWithUnit v;
  std::string var;  // sweep variable name when symbolic

  bool symbolic() const { return !var.empty(); }
  double seconds() const { return v.scaled(); }
  bool operator==(const DurationSpec&) const = default;
};

struct AngleSpec {
  bool pi_form = true;
  double num = 0.0;  // num*pi/den when pi_form
  double den = 1.0;
  ValueWithUnit v;   // deg/rad value otherwise

  double radians() const;
  bool operator==(const AngleSpec&) const = default;
};

struct RawEvent {
  Channel channel = Channel::delay;
  bool timed = false;       // X(...)/Y(...) drive; otherwise fixed-angle
  AngleSpec angle;          // fixed-angle pulses
  DurationSpec duration;    // laser / delay / timed drives
  AngleSpec phase;          // default 0
  double power = 1.0;       // laser only
  std::optional<DurationSpec> at;  // absolute start override
  int line = 0, col = 0;

  bool operator==(const RawEvent& o) const;
};

struct SequenceItem {
  bool is_repeat = false;
  RawEvent event;                     // when !is_repeat
  long repeat_count = 0;              // when is_repeat
  std::vector<SequenceItem> children; // when is_repeat
  int line = 0, col = 0;

  bool operator==(const SequenceItem&) const;
};

struct SweepSpec {
  std::string var;
  DurationSpec from, to;
  long steps = 0;
  int line = 0, col = 0;

  // Source position is not part of the IR identity.
  bool operator==(const SweepSpec& o) const {
    return var == o.var && from == o.from && to == o.to && steps == o.steps;
  }
  std::vector<double> values() const;
};

struct SequenceIR {
  std::vector<SequenceItem> items;
  std::vector<SweepSpec> sweeps;

  bool operator==(const SequenceIR&) const = default;
  std::size_t event_count() const;  // events inside repeats counted once
};

enum class Severity { error, warning };

struct Diagnostic {
  int line = 0, col = 0;
  Severity severity = Severity::error;
  std::string message;
};

std::string to_string(const Diagnostic& d, std::string_view file = "<input>");

struct ParseResult {
  SequenceIR ir;
  std::vector<Diagnostic> diagnostics;
  bool ok = false;
};

// Total parser: any byte string yields either an IR or structured errors.
ParseResult parse_sequence(std::string_view text);

// Canonical text form; parse(emit(ir)) reproduces an identical IR.
std::string emit(const SequenceIR& ir);

// Flatten repeat blocks. `overrides` replaces repeat counts in document
// order; entries < 0 keep the literal count. Throws on negative counts.
SequenceIR expand_repeats(const SequenceIR& ir,
                          const std::vector<long>& overrides = {});

// Effective Rabi frequencies used to convert pulse angles into durations.
struct DriveCalibration {
  double mw_rabi = 25.0e6;  // Hz
  double rf_rabi = 4.3e6;   // Hz

  double rabi_for(Channel c) const;
};

struct TimedEvent {
  Channel channel = Channel::delay;
  double start = 0.0;     // s
  double duration = 0.0;  // s
  double amplitude = 0.0; // effective Rabi, Hz (MW/RF)
  double phase = 0.0;     // rad
  double power = 1.0;     // laser
  bool timed_drive = false;
  double angle = 0.0;     // rad, fixed-angle pulses
  int line = 0, col = 0;

  double end() const { return start + duration; }
  double center() const { return start + 0.5 * duration; }
};

struct CompiledSequence {
  std::vector<TimedEvent> events;  // sorted by start time
  double total_duration = 0.0;
};

struct ResolveResult {
  CompiledSequence seq;
  std::vector<Diagnostic> diagnostics;
  bool ok = false;
};

// Bind sweep variables, convert angles to durations, lay out start times.
// Repeat blocks must have been expanded already.
ResolveResult resolve(const SequenceIR& ir, const std::map<std::string, double>& vars,
                      const DriveCalibration& cal = {});

// Overlap checks (errors) plus echo-alignment advisories (warnings):
// a pi/2 .. pi .. rf-pi .. pi pattern should center the rf pulse on the echo
// maximum and close the gap to the following MW pi pulse.
std::vector<Diagnostic> validate_timing(const CompiledSequence& seq);

} // namespace nvmem
