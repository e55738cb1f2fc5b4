#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bpaxos/consensus.hpp"
#include "bpaxos/core.hpp"
#include "bpaxos/role.hpp"

namespace bpaxos {

// Per-client record of every executed request id plus the output of the
// largest one. Ids are stored as a contiguous prefix and a sparse overflow.
class ClientTable {
 public:
  struct Row {
    std::uint64_t prefix = 0;  // every id in [1, prefix] was executed
    std::set<std::uint64_t> sparse;
    std::uint64_t highest_seq = 0;
    Output cached_output;
  };

  bool executed(ClientId client, std::uint64_t seq) const;
  // Output of `seq` if it is the client's largest executed id.
  std::optional<Output> cached_output(ClientId client, std::uint64_t seq) const;
  void record(ClientId client, std::uint64_t seq, Output output);

  const Row* row(ClientId client) const;

 private:
  std::unordered_map<ClientId, Row> rows_;
};

// Committed vertices and their execution status. Eligible vertices come out
// one strongly connected component at a time, in reverse topological order.
class BPaxosGraph {
 public:
  enum class CommitResult { Added, Duplicate, Mismatch };

  CommitResult commit(VertexId v, Proposal p);

  bool committed(VertexId v) const { return committed_.count(v) > 0; }
  bool executed(VertexId v) const { return executed_.count(v) > 0; }
  const Proposal* proposal(VertexId v) const;

  // Dependencies of v that are neither committed nor executed.
  std::vector<VertexId> missing_dependencies(VertexId v) const;

  // Marks every eligible component executed and returns them in execution
  // order; members of a component are sorted by vertex id.
  std::vector<std::vector<VertexId>> take_eligible();

  // Marks v executed regardless of its dependencies.
  void force_executed(VertexId v);

  std::size_t committed_count() const { return committed_.size(); }
  std::size_t executed_count() const { return executed_.size(); }
  std::size_t frontier_size() const { return unexecuted_.size(); }

 private:
  template <typename Fn>
  void for_each_dependency(VertexId v, const Proposal& p, Fn&& fn) const;
  void mark_executed(VertexId v);

  std::map<VertexId, Proposal> committed_;
  std::set<VertexId> executed_;
  std::set<VertexId> unexecuted_;
  std::vector<Sequence> executed_prefix_;  // per leader
};

struct ApplyResult {
  bool applied = false;
  std::optional<Output> output;
};

class Replica : public Role {
 public:
  static constexpr std::uint64_t kRecoveryTimer = 1ULL << 63;

  Replica(std::uint32_t index, const ClusterConfig& config);

  void on_message(const Address& from, const Message& msg, Context& ctx) override;
  void on_timer(std::uint64_t token, Context& ctx) override;

  // Adds a chosen vertex and executes whatever became eligible.
  std::vector<std::pair<VertexId, std::optional<Output>>> commit(VertexId v, Proposal p,
                                                                 Context& ctx);
  std::vector<std::pair<VertexId, std::optional<Output>>> execute_eligible(Context& ctx);
  ApplyResult apply_command(const CmdOrNoop& x);
  bool owns_response(VertexId v) const;
  void recovery_tick(VertexId v, Context& ctx);

  const std::map<std::string, std::string>& kv() const { return kv_; }
  const BPaxosGraph& graph() const { return graph_; }
  const ClientTable& client_table() const { return client_table_; }
  std::uint32_t index() const { return index_; }
  std::uint64_t executed_positions() const { return position_; }

 private:
  void execute_vertex(VertexId v, Context& ctx,
                      std::vector<std::pair<VertexId, std::optional<Output>>>& out);
  void arm_recovery(VertexId v, Context& ctx);

  std::uint32_t index_;
  ClusterConfig config_;
  BPaxosGraph graph_;
  std::map<std::string, std::string> kv_;
  ClientTable client_table_;
  ProposerCore recovery_;
  std::map<VertexId, std::uint32_t> recovery_attempts_;
  std::uint64_t position_ = 0;
};

}  // namespace bpaxos
