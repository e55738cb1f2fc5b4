#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>

#include "bpaxos/core.hpp"
#include "bpaxos/messages.hpp"
#include "bpaxos/role.hpp"

namespace bpaxos {

// Round ownership for one vertex. There are `num_ids` proposer identities;
// round k belongs to (designated + k) mod num_ids, and round 0 belongs to the
// designated proposer, which may skip phase 1 in it.
struct RoundSchedule {
  std::uint32_t designated = 0;
  std::uint32_t num_ids = 1;

  std::uint32_t owner(Round r) const {
    return static_cast<std::uint32_t>((designated + r) % num_ids);
  }
  // Smallest round >= at_least owned by `id`.
  Round lowest_owned(std::uint32_t id, Round at_least) const;
};

RoundSchedule schedule_for(VertexId v, const ClusterConfig& config);

// Per-vertex state of one acceptor.
struct AcceptorState {
  std::optional<Round> promised;
  std::optional<Round> voted_round;
  std::optional<Proposal> voted_value;
};

// Grants when r >= promised. Re-granting the promised round keeps
// retransmitted Phase1a messages from the round's single owner idempotent.
std::variant<Phase1b, Nack> handle_phase1a(AcceptorState& a, VertexId v, Round r,
                                           bool ignore_promises = false);

std::variant<Phase2b, Nack> handle_phase2a(AcceptorState& a, VertexId v, Round r,
                                           const Proposal& value, bool ignore_promises = false);

// Standard Paxos safe value: the vote with the highest round among the
// replies, or `own` when nobody voted.
Proposal select_phase2_value(std::span<const Phase1b> replies, const Proposal& own);

class Acceptor : public Role {
 public:
  Acceptor(std::uint32_t index, const ClusterConfig& config) : index_(index), config_(config) {}

  void on_message(const Address& from, const Message& msg, Context& ctx) override;

  const AcceptorState* state(VertexId v) const;

 private:
  std::uint32_t index_;
  ClusterConfig config_;
  std::map<VertexId, AcceptorState> vertices_;
};

// Drives single-decree Paxos for any number of vertices on behalf of one
// proposer identity. Used by regular proposers and by replicas' recovery.
class ProposerCore {
 public:
  // Timer tokens produced by the core have this bit set.
  static constexpr std::uint64_t kTimerTag = 1ULL << 62;

  ProposerCore(std::uint32_t proposer_id, const ClusterConfig& config)
      : id_(proposer_id), config_(config) {}

  void propose(VertexId v, Proposal value, Context& ctx);
  // Abandons the current round and starts phase 1 in a higher owned round.
  void retry(VertexId v, Context& ctx);
  // Re-broadcasts Commit for v if it was chosen here.
  void rebroadcast_commit(VertexId v, Context& ctx);

  // Returns true when the message was a consensus reply meant for the core.
  bool on_message(const Address& from, const Message& msg, Context& ctx);
  void on_timer(std::uint64_t token, Context& ctx);

  bool active(VertexId v) const { return instances_.count(v) > 0; }
  std::optional<Proposal> chosen(VertexId v) const;
  std::optional<Round> current_round(VertexId v) const;

 private:
  enum class Phase { One, Two, Chosen };

  struct Instance {
    Proposal own_value;
    Proposal value;  // value being driven in phase 2
    Round round = 0;
    Round highest_seen = 0;
    Phase phase = Phase::One;
    std::map<std::uint32_t, Phase1b> phase1;
    std::set<std::uint32_t> phase2;
    std::uint32_t attempts = 0;
    bool retry_scheduled = false;
    bool resend_armed = false;
  };

  void start_round(VertexId v, Instance& inst, Round r, Context& ctx);
  void send_phase1(VertexId v, const Instance& inst, bool only_missing, Context& ctx);
  void send_phase2(VertexId v, const Instance& inst, bool only_missing, Context& ctx);
  void broadcast_commit(VertexId v, const Proposal& p, Context& ctx);
  void arm_resend(VertexId v, Instance& inst, Context& ctx);

  std::uint32_t id_;
  ClusterConfig config_;
  std::map<VertexId, Instance> instances_;
};

class Proposer : public Role {
 public:
  Proposer(std::uint32_t index, const ClusterConfig& config) : core_(index, config) {}

  void on_message(const Address& from, const Message& msg, Context& ctx) override;
  void on_timer(std::uint64_t token, Context& ctx) override { core_.on_timer(token, ctx); }

  const ProposerCore& core() const { return core_; }

 private:
  ProposerCore core_;
};

}  // namespace bpaxos
