#pragma once

#include <cstdint>
#include <vector>

#include "bpaxos/role.hpp"
#include "bpaxos/workload.hpp"

namespace bpaxos {

// Closed-loop client: one outstanding command at a time. A command that is
// not answered within `client_retry` is resent, with the same id, to the next
// leader.
class ClosedLoopClient : public Role {
 public:
  // `limit` == 0 means unbounded.
  ClosedLoopClient(ClientId id, const ClusterConfig& config, CommandGenerator generator,
                   std::uint64_t limit);

  void start(Context& ctx) override;
  void on_message(const Address& from, const Message& msg, Context& ctx) override;
  void on_timer(std::uint64_t token, Context& ctx) override;

  bool done() const { return limit_ != 0 && completed_ >= limit_; }
  std::uint64_t completed() const { return completed_; }
  const std::vector<Time>& latencies() const { return latencies_; }

 private:
  void send_next(Context& ctx);
  void transmit(Context& ctx);

  ClientId id_;
  ClusterConfig config_;
  CommandGenerator generator_;
  std::uint64_t limit_;
  std::uint32_t leader_;
  std::uint64_t completed_ = 0;
  std::uint64_t outstanding_seq_ = 0;  // 0 when idle
  Command outstanding_;
  Time sent_at_ = 0;
  std::vector<Time> latencies_;
};

}  // namespace bpaxos
