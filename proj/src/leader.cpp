#include "bpaxos/leader.hpp"

namespace bpaxos {

namespace {

constexpr std::uint64_t kFlushTimer = 1ULL << 63;

}  // namespace

std::uint32_t designated_proposer(VertexId v, std::uint32_t num_proposers) {
  return v.leader % num_proposers;
}

Leader::Leader(std::uint32_t index, const ClusterConfig& config) : index_(index), config_(config) {}

std::uint32_t Leader::needed_replies() const {
  return config_.mutations.dep_quorum_one ? 1 : config_.quorum();
}

VertexId Leader::assign_vertex_id(std::vector<Command> cmds, Context& ctx) {
  const VertexId v{index_, next_seq_++};
  Pending p;
  p.cmds = std::move(cmds);
  const std::uint32_t n = config_.num_dep_nodes;
  if (config_.thrifty) {
    for (std::uint32_t k = 0; k < config_.quorum(); ++k) p.targets.push_back((v.seq + k) % n);
  } else {
    for (std::uint32_t d = 0; d < n; ++d) p.targets.push_back(d);
  }
  auto& stored = pending_.emplace(v, std::move(p)).first->second;
  send_dep_requests(v, stored, false, ctx);
  ctx.set_timer(config_.leader_resend, v.seq);
  return v;
}

void Leader::send_dep_requests(VertexId v, const Pending& p, bool only_missing, Context& ctx) {
  for (std::uint32_t d : p.targets) {
    if (only_missing && p.replies.count(d)) continue;
    ctx.send(Address{RoleKind::DepNode, d}, DepRequest{v, p.cmds});
  }
}

std::optional<ProposeRequest> Leader::on_dep_reply(std::uint32_t node, const DepReply& reply,
                                                   Context& ctx) {
  auto it = pending_.find(reply.v);
  if (it == pending_.end()) return std::nullopt;
  auto& p = it->second;
  if (node >= config_.num_dep_nodes || !p.replies.emplace(node, reply.deps).second) {
    return std::nullopt;
  }
  if (p.replies.size() < needed_replies()) return std::nullopt;

  Deps deps = p.replies.begin()->second;
  for (auto r = std::next(p.replies.begin()); r != p.replies.end(); ++r) {
    deps = union_deps(deps, r->second);
  }
  Proposal proposal;
  proposal.cmds.assign(p.cmds.begin(), p.cmds.end());
  proposal.deps = std::move(deps);
  ProposeRequest out{reply.v, std::move(proposal)};
  pending_.erase(it);
  ctx.send(Address{RoleKind::Proposer, proposer_for(out.v)}, out);
  return out;
}

std::uint32_t Leader::proposer_for(VertexId v) const {
  return (designated_proposer(v, config_.num_proposers) + proposer_offset_) % config_.num_proposers;
}

std::optional<std::vector<Command>> Leader::form_batch(bool timer_fired) {
  if (batch_buffer_.empty()) return std::nullopt;
  if (!timer_fired && batch_buffer_.size() < config_.batch_size) return std::nullopt;
  std::vector<Command> batch;
  batch.swap(batch_buffer_);
  ++flush_epoch_;
  return batch;
}

void Leader::on_message(const Address& from, const Message& msg, Context& ctx) {
  if (const auto* req = std::get_if<ClientRequest>(&msg)) {
    auto& highest = highest_client_seq_[req->cmd.client_id];
    if (req->cmd.client_seq <= highest) {
      ++proposer_offset_;
    } else {
      highest = req->cmd.client_seq;
    }
    if (config_.batch_size <= 1) {
      assign_vertex_id({req->cmd}, ctx);
      return;
    }
    batch_buffer_.push_back(req->cmd);
    if (auto batch = form_batch(false)) {
      assign_vertex_id(std::move(*batch), ctx);
    } else if (batch_buffer_.size() == 1) {
      ctx.set_timer(config_.batch_flush, kFlushTimer | flush_epoch_);
    }
    return;
  }
  if (const auto* reply = std::get_if<DepReply>(&msg)) {
    if (from.kind == RoleKind::DepNode) on_dep_reply(from.index, *reply, ctx);
  }
}

void Leader::on_timer(std::uint64_t token, Context& ctx) {
  if (token & kFlushTimer) {
    if ((token & ~kFlushTimer) != flush_epoch_) return;
    if (auto batch = form_batch(true)) assign_vertex_id(std::move(*batch), ctx);
    return;
  }
  const VertexId v{index_, static_cast<Sequence>(token)};
  auto it = pending_.find(v);
  if (it == pending_.end()) return;
  auto& p = it->second;
  if (p.targets.size() < config_.num_dep_nodes) {
    p.targets.clear();
    for (std::uint32_t d = 0; d < config_.num_dep_nodes; ++d) p.targets.push_back(d);
  }
  send_dep_requests(v, p, true, ctx);
  ctx.set_timer(config_.leader_resend, token);
}

}  // namespace bpaxos
