#include "bpaxos/depservice.hpp"

namespace bpaxos {

namespace {

void raise(std::vector<std::optional<Sequence>>& w, VertexId v) {
  if (v.leader >= w.size()) w.resize(v.leader + 1);
  if (!w[v.leader] || *w[v.leader] < v.seq) w[v.leader] = v.seq;
}

void merge_max(std::vector<std::optional<Sequence>>& into,
               const std::vector<std::optional<Sequence>>& from) {
  for (LeaderIndex i = 0; i < from.size(); ++i) {
    if (from[i]) raise(into, VertexId{i, *from[i]});
  }
}

}  // namespace

Deps DepNodeState::handle_dep_request(VertexId v, std::span<const Command> cmds) {
  if (auto it = reply_cache_.find(v); it != reply_cache_.end()) return it->second;

  Deps deps;
  if (compact_) {
    // v has never been stored, so the per-key maxima cannot include it.
    deps = Deps::compact(num_leaders_);
    auto& w = deps.as_compact().watermark;
    for (const auto& x : cmds) {
      auto it = seen_.find(x.key());
      if (it == seen_.end()) continue;
      merge_max(w, x.is_write() ? it->second.max_any : it->second.max_write);
    }
  } else {
    std::set<VertexId> found;
    for (const auto& x : cmds) {
      auto it = seen_.find(x.key());
      if (it == seen_.end()) continue;
      found.insert(it->second.writes.begin(), it->second.writes.end());
      if (x.is_write()) found.insert(it->second.reads.begin(), it->second.reads.end());
    }
    found.erase(v);
    deps = Deps::exact(std::move(found));
  }

  for (const auto& x : cmds) {
    auto& index = seen_[x.key()];
    (x.is_write() ? index.writes : index.reads).push_back(v);
    if (x.is_write()) raise(index.max_write, v);
    raise(index.max_any, v);
  }
  reply_cache_.emplace(v, deps);
  return deps;
}

void DepNode::on_message(const Address& from, const Message& msg, Context& ctx) {
  const auto* req = std::get_if<DepRequest>(&msg);
  if (req == nullptr) return;
  Deps deps = state_.handle_dep_request(req->v, req->cmds);
  ctx.send(from, DepReply{req->v, req->cmds, std::move(deps)});
}

}  // namespace bpaxos
