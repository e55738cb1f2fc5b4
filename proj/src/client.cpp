#include "bpaxos/client.hpp"

namespace bpaxos {

ClosedLoopClient::ClosedLoopClient(ClientId id, const ClusterConfig& config,
                                   CommandGenerator generator, std::uint64_t limit)
    : id_(id),
      config_(config),
      generator_(generator),
      limit_(limit),
      leader_(static_cast<std::uint32_t>(id % config.num_leaders)) {}

void ClosedLoopClient::start(Context& ctx) { send_next(ctx); }

void ClosedLoopClient::send_next(Context& ctx) {
  if (done()) {
    outstanding_seq_ = 0;
    return;
  }
  outstanding_seq_ = completed_ + 1;
  outstanding_ = generator_.next(id_, outstanding_seq_);
  sent_at_ = ctx.now();
  ctx.record(InvokeEvent{id_, outstanding_seq_, outstanding_});
  transmit(ctx);
}

void ClosedLoopClient::transmit(Context& ctx) {
  ctx.send(Address{RoleKind::Leader, leader_}, ClientRequest{outstanding_});
  ctx.set_timer(config_.client_retry, outstanding_seq_);
}

void ClosedLoopClient::on_message(const Address&, const Message& msg, Context& ctx) {
  const auto* resp = std::get_if<ClientResponse>(&msg);
  if (resp == nullptr || outstanding_seq_ == 0 || resp->client_seq != outstanding_seq_) return;
  if (resp->output.kind == Output::Kind::DuplicateUnavailable) return;
  const Time latency = ctx.now() - sent_at_;
  latencies_.push_back(latency);
  ctx.record(CompleteEvent{id_, outstanding_seq_, resp->output, latency});
  ++completed_;
  send_next(ctx);
}

void ClosedLoopClient::on_timer(std::uint64_t token, Context& ctx) {
  if (token != outstanding_seq_ || outstanding_seq_ == 0) return;
  leader_ = (leader_ + 1) % config_.num_leaders;
  transmit(ctx);
}

}  // namespace bpaxos
