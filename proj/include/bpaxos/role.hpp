#pragma once

#include <cstdint>

#include "bpaxos/history.hpp"
#include "bpaxos/messages.hpp"

namespace bpaxos {

// Deliberate protocol bugs used to validate the checkers. All off by default.
struct Mutations {
  bool dep_quorum_one = false;             // leader proposes after a single dep reply
  bool acceptor_ignores_promises = false;  // acceptor grants and accepts any round
  bool replica_skips_ordering = false;     // replica executes on commit, ignoring deps
  bool client_table_largest_only = false;  // skip any id <= the largest executed id

  bool any() const {
    return dep_quorum_one || acceptor_ignores_promises || replica_skips_ordering ||
           client_table_largest_only;
  }
};

// Static cluster shape and protocol knobs shared by every role.
struct ClusterConfig {
  std::uint32_t f = 1;
  std::uint32_t num_leaders = 2;
  std::uint32_t num_proposers = 2;
  std::uint32_t num_dep_nodes = 3;
  std::uint32_t num_acceptors = 3;
  std::uint32_t num_replicas = 2;

  bool thrifty = false;
  bool compact_deps = false;
  std::uint32_t batch_size = 1;
  Time batch_flush = 5 * kMillisecond;

  Time leader_resend = 50 * kMillisecond;
  Time proposer_resend = 50 * kMillisecond;
  Time nack_backoff = 10 * kMillisecond;
  Time recovery_timeout = 100 * kMillisecond;
  Time client_retry = 500 * kMillisecond;

  // A duplicate Commit with a different value aborts the process when set;
  // otherwise it is only recorded in the history for the checker.
  bool abort_on_safety_violation = true;

  Mutations mutations;

  std::uint32_t quorum() const { return f + 1; }
  // Proposer identities: regular proposers first, then one recovery proposer
  // per replica.
  std::uint32_t num_proposer_ids() const { return num_proposers + num_replicas; }

  // Throws std::invalid_argument when the deployment rules are violated.
  void validate() const;
};

// What a role can do to the world. Implemented by the simulator and by the
// socket transport.
class Context {
 public:
  virtual ~Context() = default;
  virtual Time now() const = 0;
  virtual Address self() const = 0;
  virtual void send(const Address& to, Message msg) = 0;
  virtual void set_timer(Time delay, std::uint64_t token) = 0;
  // Uniform in [0, bound).
  virtual std::uint64_t random(std::uint64_t bound) = 0;
  virtual void record(EventBody event) = 0;
};

class Role {
 public:
  virtual ~Role() = default;
  virtual void start(Context&) {}
  virtual void on_message(const Address& from, const Message& msg, Context& ctx) = 0;
  virtual void on_timer(std::uint64_t, Context&) {}
};

}  // namespace bpaxos
