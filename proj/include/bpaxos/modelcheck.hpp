#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bpaxos::model {

// Abstract commands are 0..num_commands-1; -1 is the noop.
constexpr int kNoop = -1;

struct AbstractProposal {
  int cmd = kNoop;
  std::uint32_t deps = 0;  // bitmask over vertex ids

  friend bool operator==(const AbstractProposal&, const AbstractProposal&) = default;
  friend auto operator<=>(const AbstractProposal&, const AbstractProposal&) = default;
};

std::string to_string(const AbstractProposal& p);

// Mirrors the abstract specification's variables. Vertex ids are
// 0..vertex_bound-1.
struct AbstractState {
  std::vector<std::vector<std::optional<AbstractProposal>>> dependency_graphs;  // [node][vertex]
  std::uint32_t next_vertex_id = 0;
  std::vector<std::optional<int>> proposed_commands;             // [vertex]
  std::vector<std::set<AbstractProposal>> proposals;             // [vertex]
  std::vector<std::optional<AbstractProposal>> chosen;           // [vertex]

  friend bool operator==(const AbstractState&, const AbstractState&) = default;

  // Canonical byte encoding, used for hashing and deduplication.
  std::string encode() const;
};

struct ModelConfig {
  std::uint32_t num_commands = 2;
  // Symmetric conflict relation over command indices.
  std::set<std::pair<int, int>> conflicts;
  std::uint32_t dep_nodes = 3;
  // Each quorum is a bitmask over dependency nodes.
  std::vector<std::uint32_t> quorums;
  std::uint32_t vertex_bound = 2;
  std::size_t max_states = 5'000'000;
  // Record every distinct reachable `chosen` assignment in the report.
  bool collect_chosen = false;

  bool conflict(int a, int b) const;

  static std::set<std::pair<int, int>> full_conflicts(std::uint32_t commands);
  static std::vector<std::uint32_t> quorums_of_size(std::uint32_t nodes, std::uint32_t size);
};

struct Action {
  enum class Kind { ProposeCommand, DepServiceProcess, ConsensusProposeNoop, ConsensusPropose, ConsensusChoose };
  Kind kind;
  int cmd = 0;              // ProposeCommand
  std::uint32_t node = 0;   // DepServiceProcess
  std::uint32_t vertex = 0;
  std::uint32_t quorum = 0; // ConsensusPropose
  AbstractProposal value;   // ConsensusChoose

  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const Action& a);

AbstractState initial_state(const ModelConfig& config);

// Every enabled action with its successor, including stuttering ones.
std::vector<std::pair<Action, AbstractState>> successors(const AbstractState& s, const ModelConfig& config);

enum class Invariant {
  ConsensusConsistency,
  DepServiceConflicts,
  Nontriviality,
  ChosenConflicts,
  NoNoopEverythingChosen,
};

const char* invariant_name(Invariant inv);

struct Report {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t terminal_states = 0;
  bool complete = true;  // false when max_states was hit
  std::optional<Invariant> violated;
  std::vector<Action> counterexample;  // actions from the initial state
  std::set<std::vector<std::optional<AbstractProposal>>> chosen_assignments;

  bool ok() const { return complete && !violated; }
};

Report explore(const ModelConfig& config);

std::string format_report(const Report& r);

}  // namespace bpaxos::model
