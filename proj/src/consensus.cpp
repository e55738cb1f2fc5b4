#include "bpaxos/consensus.hpp"

#include <algorithm>

#include "bpaxos/leader.hpp"

namespace bpaxos {

namespace {

constexpr std::uint64_t kRetryBit = 1ULL << 61;
constexpr std::uint64_t kLeaderMask = (1ULL << 29) - 1;

std::uint64_t timer_token(VertexId v, bool retry) {
  return ProposerCore::kTimerTag | (retry ? kRetryBit : 0) |
         ((static_cast<std::uint64_t>(v.leader) & kLeaderMask) << 32) | v.seq;
}

VertexId token_vertex(std::uint64_t token) {
  return VertexId{static_cast<LeaderIndex>((token >> 32) & kLeaderMask),
                  static_cast<Sequence>(token & 0xffffffffULL)};
}

}  // namespace

Round RoundSchedule::lowest_owned(std::uint32_t id, Round at_least) const {
  const Round first = (id + num_ids - designated % num_ids) % num_ids;
  if (first >= at_least) return first;
  const Round periods = (at_least - first + num_ids - 1) / num_ids;
  return first + periods * num_ids;
}

RoundSchedule schedule_for(VertexId v, const ClusterConfig& config) {
  return RoundSchedule{designated_proposer(v, config.num_proposers), config.num_proposer_ids()};
}

std::variant<Phase1b, Nack> handle_phase1a(AcceptorState& a, VertexId v, Round r,
                                           bool ignore_promises) {
  if (!ignore_promises && a.promised && r < *a.promised) return Nack{v, r, *a.promised};
  if (!a.promised || *a.promised < r) a.promised = r;
  return Phase1b{v, r, a.voted_round, a.voted_value};
}

std::variant<Phase2b, Nack> handle_phase2a(AcceptorState& a, VertexId v, Round r,
                                           const Proposal& value, bool ignore_promises) {
  if (!ignore_promises && a.promised && r < *a.promised) return Nack{v, r, *a.promised};
  if (!a.promised || *a.promised < r) a.promised = r;
  a.voted_round = r;
  a.voted_value = value;
  return Phase2b{v, r};
}

Proposal select_phase2_value(std::span<const Phase1b> replies, const Proposal& own) {
  const Phase1b* best = nullptr;
  for (const auto& r : replies) {
    if (!r.voted_round || !r.voted_value) continue;
    if (best == nullptr || *best->voted_round < *r.voted_round) best = &r;
  }
  return best ? *best->voted_value : own;
}

const AcceptorState* Acceptor::state(VertexId v) const {
  auto it = vertices_.find(v);
  return it == vertices_.end() ? nullptr : &it->second;
}

void Acceptor::on_message(const Address& from, const Message& msg, Context& ctx) {
  const bool ignore = config_.mutations.acceptor_ignores_promises;
  if (const auto* p1 = std::get_if<Phase1a>(&msg)) {
    std::visit([&](auto&& reply) { ctx.send(from, std::move(reply)); },
               handle_phase1a(vertices_[p1->v], p1->v, p1->round, ignore));
  } else if (const auto* p2 = std::get_if<Phase2a>(&msg)) {
    std::visit([&](auto&& reply) { ctx.send(from, std::move(reply)); },
               handle_phase2a(vertices_[p2->v], p2->v, p2->round, p2->value, ignore));
  }
}

std::optional<Proposal> ProposerCore::chosen(VertexId v) const {
  auto it = instances_.find(v);
  if (it == instances_.end() || it->second.phase != Phase::Chosen) return std::nullopt;
  return it->second.value;
}

std::optional<Round> ProposerCore::current_round(VertexId v) const {
  auto it = instances_.find(v);
  if (it == instances_.end()) return std::nullopt;
  return it->second.round;
}

void ProposerCore::propose(VertexId v, Proposal value, Context& ctx) {
  if (instances_.count(v)) return;
  auto& inst = instances_[v];
  inst.own_value = value;
  inst.value = std::move(value);
  ctx.record(ProposeEvent{ctx.self(), v, inst.own_value});
  const auto schedule = schedule_for(v, config_);
  start_round(v, inst, schedule.lowest_owned(id_, 0), ctx);
}

void ProposerCore::start_round(VertexId v, Instance& inst, Round r, Context& ctx) {
  inst.round = r;
  inst.highest_seen = std::max(inst.highest_seen, r);
  inst.phase1.clear();
  inst.phase2.clear();
  inst.retry_scheduled = false;
  if (r == 0) {
    // Round 0 has a single owner, so no earlier vote can exist.
    inst.phase = Phase::Two;
    inst.value = inst.own_value;
    send_phase2(v, inst, false, ctx);
  } else {
    inst.phase = Phase::One;
    send_phase1(v, inst, false, ctx);
  }
  arm_resend(v, inst, ctx);
}

void ProposerCore::send_phase1(VertexId v, const Instance& inst, bool only_missing, Context& ctx) {
  for (std::uint32_t a = 0; a < config_.num_acceptors; ++a) {
    if (only_missing && inst.phase1.count(a)) continue;
    ctx.send(Address{RoleKind::Acceptor, a}, Phase1a{v, inst.round});
  }
}

void ProposerCore::send_phase2(VertexId v, const Instance& inst, bool only_missing, Context& ctx) {
  for (std::uint32_t a = 0; a < config_.num_acceptors; ++a) {
    if (only_missing && inst.phase2.count(a)) continue;
    ctx.send(Address{RoleKind::Acceptor, a}, Phase2a{v, inst.round, inst.value});
  }
}

void ProposerCore::broadcast_commit(VertexId v, const Proposal& p, Context& ctx) {
  for (std::uint32_t r = 0; r < config_.num_replicas; ++r) {
    ctx.send(Address{RoleKind::Replica, r}, Commit{v, p});
  }
}

void ProposerCore::arm_resend(VertexId v, Instance& inst, Context& ctx) {
  if (inst.resend_armed) return;
  inst.resend_armed = true;
  ctx.set_timer(config_.proposer_resend, timer_token(v, false));
}

void ProposerCore::retry(VertexId v, Context& ctx) {
  auto it = instances_.find(v);
  if (it == instances_.end() || it->second.phase == Phase::Chosen) return;
  auto& inst = it->second;
  ++inst.attempts;
  const auto schedule = schedule_for(v, config_);
  start_round(v, inst, schedule.lowest_owned(id_, inst.highest_seen + 1), ctx);
}

void ProposerCore::rebroadcast_commit(VertexId v, Context& ctx) {
  if (auto p = chosen(v)) broadcast_commit(v, *p, ctx);
}

bool ProposerCore::on_message(const Address& from, const Message& msg, Context& ctx) {
  if (from.kind != RoleKind::Acceptor || from.index >= config_.num_acceptors) return false;
  const std::uint32_t acceptor = from.index;

  if (const auto* p1b = std::get_if<Phase1b>(&msg)) {
    auto it = instances_.find(p1b->v);
    if (it == instances_.end()) return true;
    auto& inst = it->second;
    if (inst.phase != Phase::One || p1b->round != inst.round) return true;
    inst.phase1.emplace(acceptor, *p1b);
    if (inst.phase1.size() < config_.quorum()) return true;
    std::vector<Phase1b> replies;
    for (const auto& [_, r] : inst.phase1) replies.push_back(r);
    inst.value = select_phase2_value(replies, inst.own_value);
    inst.phase = Phase::Two;
    send_phase2(p1b->v, inst, false, ctx);
    return true;
  }

  if (const auto* p2b = std::get_if<Phase2b>(&msg)) {
    auto it = instances_.find(p2b->v);
    if (it == instances_.end()) return true;
    auto& inst = it->second;
    if (inst.phase != Phase::Two || p2b->round != inst.round) return true;
    inst.phase2.insert(acceptor);
    if (inst.phase2.size() < config_.quorum()) return true;
    inst.phase = Phase::Chosen;
    ctx.record(ChosenEvent{ctx.self(), p2b->v, inst.value});
    broadcast_commit(p2b->v, inst.value, ctx);
    return true;
  }

  if (const auto* nack = std::get_if<Nack>(&msg)) {
    auto it = instances_.find(nack->v);
    if (it == instances_.end()) return true;
    auto& inst = it->second;
    inst.highest_seen = std::max(inst.highest_seen, nack->promised);
    if (inst.phase == Phase::Chosen || nack->round != inst.round || inst.retry_scheduled) {
      return true;
    }
    inst.retry_scheduled = true;
    const std::uint32_t shift = std::min<std::uint32_t>(inst.attempts, 10);
    const Time base = config_.nack_backoff << shift;
    const Time jitter = static_cast<Time>(ctx.random(static_cast<std::uint64_t>(config_.nack_backoff) + 1));
    ctx.set_timer(base + jitter, timer_token(nack->v, true));
    return true;
  }

  return false;
}

void ProposerCore::on_timer(std::uint64_t token, Context& ctx) {
  const VertexId v = token_vertex(token);
  auto it = instances_.find(v);
  if (it == instances_.end()) return;
  auto& inst = it->second;
  if (token & kRetryBit) {
    if (inst.retry_scheduled && inst.phase != Phase::Chosen) retry(v, ctx);
    return;
  }
  inst.resend_armed = false;
  if (inst.phase == Phase::Chosen) return;
  if (!inst.retry_scheduled) {
    if (inst.phase == Phase::One) {
      send_phase1(v, inst, true, ctx);
    } else {
      send_phase2(v, inst, true, ctx);
    }
  }
  arm_resend(v, inst, ctx);
}

void Proposer::on_message(const Address& from, const Message& msg, Context& ctx) {
  if (const auto* req = std::get_if<ProposeRequest>(&msg)) {
    if (core_.chosen(req->v)) {
      core_.rebroadcast_commit(req->v, ctx);
    } else {
      core_.propose(req->v, req->proposal, ctx);
    }
    return;
  }
  core_.on_message(from, msg, ctx);
}

}  // namespace bpaxos
