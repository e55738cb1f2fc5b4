#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bpaxos/core.hpp"
#include "bpaxos/messages.hpp"

namespace bpaxos {

// Simulated or wall-clock time in microseconds.
using Time = std::int64_t;

constexpr Time kMillisecond = 1000;
constexpr Time kSecond = 1000 * kMillisecond;

struct InvokeEvent {
  ClientId client = 0;
  std::uint64_t seq = 0;
  Command cmd;
};

struct CompleteEvent {
  ClientId client = 0;
  std::uint64_t seq = 0;
  Output output;
  Time latency = 0;
};

// A proposer put its own value (a leader's proposal or a recovery noop) into
// consensus for a vertex.
struct ProposeEvent {
  Address proposer;
  VertexId v;
  Proposal proposal;
};

struct ChosenEvent {
  Address proposer;
  VertexId v;
  Proposal proposal;
};

struct CommitEvent {
  std::uint32_t replica = 0;
  VertexId v;
  Proposal proposal;
};

struct ExecuteEvent {
  std::uint32_t replica = 0;
  VertexId v;
  std::uint64_t position = 0;  // per-replica execution counter over vertices
  std::uint32_t slot = 0;      // index inside a batch
  CmdOrNoop cmd;
  bool applied = false;        // false: skipped by the client table
  std::optional<Output> output;
};

struct ResponseEvent {
  std::uint32_t replica = 0;
  VertexId v;
  ClientId client = 0;
  std::uint64_t seq = 0;
  Output output;
};

using EventBody = std::variant<InvokeEvent, CompleteEvent, ProposeEvent, ChosenEvent, CommitEvent,
                               ExecuteEvent, ResponseEvent>;

struct Event {
  Time time = 0;
  EventBody body;
};

std::string to_string(const Event& e);

struct History {
  std::vector<Event> events;

  void add(Time t, EventBody body) { events.push_back(Event{t, std::move(body)}); }

  // Newline-delimited key=value records, one per event.
  std::string serialize() const;
};

}  // namespace bpaxos
