#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "bpaxos/core.hpp"
#include "bpaxos/role.hpp"

namespace bpaxos {

// State of one dependency service node. Every command the node has seen is
// indexed by key, with reads and writes kept apart so a read only picks up
// prior writes.
class DepNodeState {
 public:
  DepNodeState(bool compaction_enabled, std::uint32_t num_leaders)
      : compact_(compaction_enabled), num_leaders_(num_leaders) {}

  // Returns the dependencies of vertex v. Re-delivery of a vertex returns the
  // first reply unchanged.
  Deps handle_dep_request(VertexId v, std::span<const Command> cmds);
  Deps handle_dep_request(VertexId v, const Command& x) {
    return handle_dep_request(v, std::span<const Command>(&x, 1));
  }

  bool compaction_enabled() const { return compact_; }
  std::size_t stored_vertices() const { return reply_cache_.size(); }

 private:
  struct KeyIndex {
    std::vector<VertexId> writes;
    std::vector<VertexId> reads;
    // Per-leader highest sequence among writes / among all entries.
    std::vector<std::optional<Sequence>> max_write;
    std::vector<std::optional<Sequence>> max_any;
  };

  bool compact_;
  std::uint32_t num_leaders_;
  std::unordered_map<std::string, KeyIndex> seen_;
  std::map<VertexId, Deps> reply_cache_;
};

class DepNode : public Role {
 public:
  DepNode(std::uint32_t index, const ClusterConfig& config)
      : index_(index), state_(config.compact_deps, config.num_leaders) {}

  void on_message(const Address& from, const Message& msg, Context& ctx) override;

  const DepNodeState& state() const { return state_; }

 private:
  std::uint32_t index_;
  DepNodeState state_;
};

}  // namespace bpaxos
