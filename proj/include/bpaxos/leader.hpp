#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "bpaxos/core.hpp"
#include "bpaxos/role.hpp"

namespace bpaxos {

// Owner of round 0 for v (and the proposer a leader forwards v to).
std::uint32_t designated_proposer(VertexId v, std::uint32_t num_proposers);

// Sequences client commands into vertices, collects f+1 dependency replies
// per vertex and hands the unioned result to the vertex's proposer.
class Leader : public Role {
 public:
  Leader(std::uint32_t index, const ClusterConfig& config);

  void on_message(const Address& from, const Message& msg, Context& ctx) override;
  void on_timer(std::uint64_t token, Context& ctx) override;

  // Assigns the next vertex id to a batch of commands and sends dependency
  // requests for it.
  VertexId assign_vertex_id(std::vector<Command> cmds, Context& ctx);

  // Returns the proposal once exactly `quorum` distinct nodes replied.
  std::optional<ProposeRequest> on_dep_reply(std::uint32_t node, const DepReply& reply,
                                             Context& ctx);

  // Flushes the batch buffer. `timer_fired` distinguishes the flush timer from
  // the size trigger.
  std::optional<std::vector<Command>> form_batch(bool timer_fired);

  std::uint32_t index() const { return index_; }
  Sequence next_seq() const { return next_seq_; }
  std::size_t pending_count() const { return pending_.size(); }
  std::size_t buffered() const { return batch_buffer_.size(); }
  std::uint32_t proposer_for(VertexId v) const;

 private:
  struct Pending {
    std::vector<Command> cmds;
    std::map<std::uint32_t, Deps> replies;
    std::vector<std::uint32_t> targets;  // nodes contacted so far
  };

  void send_dep_requests(VertexId v, const Pending& p, bool only_missing, Context& ctx);
  std::uint32_t needed_replies() const;

  std::uint32_t index_;
  ClusterConfig config_;
  Sequence next_seq_ = 0;
  std::map<VertexId, Pending> pending_;
  std::vector<Command> batch_buffer_;
  std::uint64_t flush_epoch_ = 0;
  // A client retry suggests our proposer is unreachable; each one moves later
  // vertices to the next proposer.
  std::map<ClientId, std::uint64_t> highest_client_seq_;
  std::uint32_t proposer_offset_ = 0;
};

}  // namespace bpaxos
