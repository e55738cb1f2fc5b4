#pragma once

#include <string>
#include <vector>

#include "bpaxos/history.hpp"

namespace bpaxos {

struct Verdict {
  enum class Kind {
    Ok,
    Agreement,          // two different values for one vertex
    Nontriviality,      // a chosen value nobody proposed
    DependencyInvariant,
    ConflictOrder,      // replicas ordered a conflicting pair differently
    ExactlyOnce,
    ResponseMismatch,
    StateDivergence,    // same executed set, different KV state
  };

  Kind kind = Kind::Ok;
  std::string message;
  std::vector<Event> trace;  // the offending events

  bool ok() const { return kind == Kind::Ok; }
};

const char* verdict_name(Verdict::Kind kind);

// Post-hoc safety check over a complete history.
Verdict check_history(const History& history);

}  // namespace bpaxos
