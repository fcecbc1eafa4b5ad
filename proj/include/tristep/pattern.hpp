#ifndef TRISTEP_PATTERN_HPP
#define TRISTEP_PATTERN_HPP

#include <array>
#include <cstdint>
#include <string>

#include "tristep/errors.hpp"
#include "tristep/machine.hpp"

namespace tristep {

enum class Actor : uint8_t { Victim, Attacker };

// Step targets: accesses of the three candidate addresses (plus the secret u,
// victim-only), their invalidation counterparts, and the unconstrained star.
enum class TargetClass : uint8_t { U, A, Alias, Nib, InvU, InvA, InvAlias, InvNib, Star };

struct StepOp {
  Actor actor = Actor::Victim;
  TargetClass target = TargetClass::Star;

  bool is_star() const { return target == TargetClass::Star; }
  bool is_inv() const {
    return target == TargetClass::InvU || target == TargetClass::InvA ||
           target == TargetClass::InvAlias || target == TargetClass::InvNib;
  }
  bool is_access() const { return !is_star() && !is_inv(); }
  bool is_secret() const { return target == TargetClass::U || target == TargetClass::InvU; }

  bool operator==(const StepOp&) const = default;
};

enum class SignalClass : uint8_t { None, AO, SO, SA };
enum class Interference : uint8_t { Internal, External };

struct VulnPattern {
  int id = 0;  // catalog index 1..88
  std::array<StepOp, 3> steps{};
  SignalClass type = SignalClass::None;
  Interference interference = Interference::External;
  std::string name;  // canonical attack name when one applies
};

// E iff the attacker performs an operation in step 2 or step 3.
inline Interference interference_of(const std::array<StepOp, 3>& steps) {
  bool ext = (!steps[1].is_star() && steps[1].actor == Actor::Attacker) ||
             (!steps[2].is_star() && steps[2].actor == Actor::Attacker);
  return ext ? Interference::External : Interference::Internal;
}

inline bool involves_both_actors(const std::array<StepOp, 3>& steps) {
  bool v = false, a = false;
  for (const auto& s : steps) {
    if (s.is_star()) continue;
    (s.actor == Actor::Victim ? v : a) = true;
  }
  return v && a;
}

enum class OpKind : uint8_t { None, Read, Write, Flush, RemoteWrite };
enum class Scheduling : uint8_t { TimeSliced, MultiThreaded };
enum class Candidate : uint8_t { A, Alias, Nib };

struct ConcreteCase {
  int pattern_id = 0;
  int case_index = 0;  // per-pattern ordinal
  std::array<StepOp, 3> steps{};
  std::array<OpKind, 3> ops{OpKind::None, OpKind::None, OpKind::None};
  Scheduling sched = Scheduling::TimeSliced;
  Cluster local_cluster = Cluster::Little;
  Cluster remote_cluster = Cluster::Big;
  bool lock_prelude = false;  // PL runs: lock the candidate lines first
  int rep = 1;                // primed set count for set-contention cases

  bool uses_remote_write() const {
    for (OpKind k : ops)
      if (k == OpKind::RemoteWrite) return true;
    return false;
  }
};

inline const char* to_string(Actor a) { return a == Actor::Victim ? "V" : "A"; }

inline const char* to_string(TargetClass t) {
  switch (t) {
    case TargetClass::U: return "u";
    case TargetClass::A: return "a";
    case TargetClass::Alias: return "a_alias";
    case TargetClass::Nib: return "NIB";
    case TargetClass::InvU: return "inv_u";
    case TargetClass::InvA: return "inv_a";
    case TargetClass::InvAlias: return "inv_alias";
    case TargetClass::InvNib: return "inv_NIB";
    case TargetClass::Star: return "star";
  }
  return "?";
}

inline TargetClass target_from_string(const std::string& s) {
  if (s == "u") return TargetClass::U;
  if (s == "a") return TargetClass::A;
  if (s == "a_alias") return TargetClass::Alias;
  if (s == "NIB") return TargetClass::Nib;
  if (s == "inv_u") return TargetClass::InvU;
  if (s == "inv_a") return TargetClass::InvA;
  if (s == "inv_alias") return TargetClass::InvAlias;
  if (s == "inv_NIB") return TargetClass::InvNib;
  if (s == "star") return TargetClass::Star;
  throw SchemaError("unknown step target: " + s);
}

inline const char* to_string(SignalClass c) {
  switch (c) {
    case SignalClass::AO: return "AO";
    case SignalClass::SO: return "SO";
    case SignalClass::SA: return "SA";
    case SignalClass::None: return "None";
  }
  return "?";
}

inline SignalClass signal_from_string(const std::string& s) {
  if (s == "AO") return SignalClass::AO;
  if (s == "SO") return SignalClass::SO;
  if (s == "SA") return SignalClass::SA;
  if (s == "None") return SignalClass::None;
  throw SchemaError("unknown vulnerability type: " + s);
}

inline const char* to_string(Interference i) { return i == Interference::Internal ? "I" : "E"; }

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::None: return "none";
    case OpKind::Read: return "read";
    case OpKind::Write: return "write";
    case OpKind::Flush: return "flush";
    case OpKind::RemoteWrite: return "remote_write";
  }
  return "?";
}

inline const char* to_string(Scheduling s) {
  return s == Scheduling::TimeSliced ? "time_sliced" : "multi_threaded";
}

inline const char* to_string(Candidate c) {
  switch (c) {
    case Candidate::A: return "a";
    case Candidate::Alias: return "a_alias";
    case Candidate::Nib: return "NIB";
  }
  return "?";
}

inline std::string step_string(const StepOp& s) {
  if (s.is_star()) return "*";
  return std::string(to_string(s.actor)) + "_" + to_string(s.target);
}

inline std::string triple_string(const std::array<StepOp, 3>& steps) {
  return step_string(steps[0]) + " ; " + step_string(steps[1]) + " ; " + step_string(steps[2]);
}

}  // namespace tristep

#endif
