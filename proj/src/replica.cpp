#include "bpaxos/replica.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>

namespace bpaxos {

bool ClientTable::executed(ClientId client, std::uint64_t seq) const {
  const Row* r = row(client);
  if (r == nullptr) return false;
  return seq <= r->prefix || r->sparse.count(seq) > 0;
}

std::optional<Output> ClientTable::cached_output(ClientId client, std::uint64_t seq) const {
  const Row* r = row(client);
  if (r == nullptr || r->highest_seq != seq || seq == 0) return std::nullopt;
  return r->cached_output;
}

void ClientTable::record(ClientId client, std::uint64_t seq, Output output) {
  Row& r = rows_[client];
  if (seq > r.prefix) r.sparse.insert(seq);
  while (!r.sparse.empty() && *r.sparse.begin() == r.prefix + 1) {
    ++r.prefix;
    r.sparse.erase(r.sparse.begin());
  }
  if (seq > r.highest_seq) {
    r.highest_seq = seq;
    r.cached_output = std::move(output);
  }
}

const ClientTable::Row* ClientTable::row(ClientId client) const {
  auto it = rows_.find(client);
  return it == rows_.end() ? nullptr : &it->second;
}

BPaxosGraph::CommitResult BPaxosGraph::commit(VertexId v, Proposal p) {
  if (auto it = committed_.find(v); it != committed_.end()) {
    return it->second == p ? CommitResult::Duplicate : CommitResult::Mismatch;
  }
  committed_.emplace(v, std::move(p));
  unexecuted_.insert(v);
  return CommitResult::Added;
}

const Proposal* BPaxosGraph::proposal(VertexId v) const {
  auto it = committed_.find(v);
  return it == committed_.end() ? nullptr : &it->second;
}

template <typename Fn>
void BPaxosGraph::for_each_dependency(VertexId v, const Proposal& p, Fn&& fn) const {
  if (p.deps.is_exact()) {
    for (const auto& d : p.deps.as_exact().ids) {
      if (d != v && !executed(d)) fn(d);
    }
    return;
  }
  const auto& w = p.deps.as_compact().watermark;
  for (LeaderIndex i = 0; i < w.size(); ++i) {
    if (!w[i]) continue;
    const Sequence start = i < executed_prefix_.size() ? executed_prefix_[i] : 0;
    for (std::uint64_t k = start; k <= *w[i]; ++k) {
      const VertexId d{i, static_cast<Sequence>(k)};
      if (d != v && !executed(d)) fn(d);
    }
  }
}

std::vector<VertexId> BPaxosGraph::missing_dependencies(VertexId v) const {
  std::vector<VertexId> out;
  const Proposal* p = proposal(v);
  if (p == nullptr) return out;
  for_each_dependency(v, *p, [&](VertexId d) {
    if (!committed(d)) out.push_back(d);
  });
  return out;
}

void BPaxosGraph::mark_executed(VertexId v) {
  executed_.insert(v);
  unexecuted_.erase(v);
  if (v.leader >= executed_prefix_.size()) executed_prefix_.resize(v.leader + 1, 0);
  Sequence& prefix = executed_prefix_[v.leader];
  while (executed_.count(VertexId{v.leader, prefix})) ++prefix;
}

void BPaxosGraph::force_executed(VertexId v) {
  if (committed(v)) mark_executed(v);
}

std::vector<std::vector<VertexId>> BPaxosGraph::take_eligible() {
  std::vector<VertexId> nodes(unexecuted_.begin(), unexecuted_.end());
  const int n = static_cast<int>(nodes.size());
  std::map<VertexId, int> slot;
  for (int i = 0; i < n; ++i) slot.emplace(nodes[i], i);

  std::vector<std::vector<int>> edges(n);
  std::vector<char> blocked(n, 0);
  for (int i = 0; i < n; ++i) {
    for_each_dependency(nodes[i], committed_.at(nodes[i]), [&](VertexId d) {
      auto it = slot.find(d);
      if (it == slot.end()) {
        blocked[i] = 1;  // not committed yet
      } else {
        edges[i].push_back(it->second);
      }
    });
  }

  // Iterative Tarjan. Components are emitted in reverse topological order,
  // so every component a member points at has been decided already.
  std::vector<int> index(n, -1), low(n, 0), component(n, -1);
  std::vector<char> on_stack(n, 0), done(n, 0);
  std::vector<int> stack;
  std::vector<std::pair<int, std::size_t>> calls;
  int next_index = 0;
  int next_component = 0;
  std::vector<std::vector<VertexId>> out;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    calls.emplace_back(root, 0);
    while (!calls.empty()) {
      auto& [u, pos] = calls.back();
      if (pos == 0 && index[u] == -1) {
        index[u] = low[u] = next_index++;
        stack.push_back(u);
        on_stack[u] = 1;
      }
      if (pos < edges[u].size()) {
        const int w = edges[u][pos++];
        if (index[w] == -1) {
          calls.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[u] = std::min(low[u], index[w]);
        }
        continue;
      }
      const int finished = u;
      calls.pop_back();
      if (!calls.empty()) {
        const int parent = calls.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
      if (low[finished] != index[finished]) continue;

      std::vector<int> members;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        component[w] = next_component;
        members.push_back(w);
      } while (w != finished);

      bool eligible = true;
      for (int m : members) {
        if (blocked[m]) eligible = false;
        for (int e : edges[m]) {
          if (component[e] != next_component && !done[e]) eligible = false;
        }
      }
      ++next_component;
      if (!eligible) continue;
      std::vector<VertexId> batch;
      for (int m : members) {
        done[m] = 1;
        batch.push_back(nodes[m]);
      }
      std::sort(batch.begin(), batch.end());
      out.push_back(std::move(batch));
    }
  }

  for (const auto& batch : out) {
    for (const auto& v : batch) mark_executed(v);
  }
  return out;
}

Replica::Replica(std::uint32_t index, const ClusterConfig& config)
    : index_(index), config_(config), recovery_(config.num_proposers + index, config) {}

bool Replica::owns_response(VertexId v) const {
  return vertex_hash(v) % config_.num_replicas == index_;
}

ApplyResult Replica::apply_command(const CmdOrNoop& x) {
  if (is_noop(x)) return {};
  const auto& cmd = std::get<Command>(x);
  const ClientTable::Row* row = client_table_.row(cmd.client_id);
  const bool seen = config_.mutations.client_table_largest_only
                        ? (row != nullptr && cmd.client_seq <= row->highest_seq)
                        : client_table_.executed(cmd.client_id, cmd.client_seq);
  if (seen) {
    auto cached = client_table_.cached_output(cmd.client_id, cmd.client_seq);
    return ApplyResult{false, cached ? *cached : Output::unavailable()};
  }
  Output out;
  if (const auto* s = std::get_if<Set>(&cmd.op)) {
    kv_[s->key] = s->value;
    out = Output::ack();
  } else {
    auto it = kv_.find(cmd.key());
    out = it == kv_.end() ? Output::not_found() : Output::found(it->second);
  }
  client_table_.record(cmd.client_id, cmd.client_seq, out);
  return ApplyResult{true, out};
}

void Replica::execute_vertex(VertexId v, Context& ctx,
                             std::vector<std::pair<VertexId, std::optional<Output>>>& out) {
  const Proposal* p = graph_.proposal(v);
  const bool owner = owns_response(v);
  const std::uint64_t position = position_++;
  for (std::uint32_t slot = 0; slot < p->cmds.size(); ++slot) {
    const auto& x = p->cmds[slot];
    ApplyResult r = apply_command(x);
    ctx.record(ExecuteEvent{index_, v, position, slot, x, r.applied, r.output});
    out.emplace_back(v, r.output);
    // A re-proposed command means the client never heard back, perhaps
    // because the owner is down, so every replica relays the cached output.
    const bool relay = !r.applied && r.output && r.output->kind != Output::Kind::DuplicateUnavailable;
    if (!(owner || relay) || !r.output || is_noop(x)) continue;
    const auto& cmd = std::get<Command>(x);
    ClientResponse resp{cmd.client_id, cmd.client_seq, *r.output};
    ctx.record(ResponseEvent{index_, v, cmd.client_id, cmd.client_seq, *r.output});
    ctx.send(Address{RoleKind::Client, static_cast<std::uint32_t>(cmd.client_id)}, std::move(resp));
  }
}

std::vector<std::pair<VertexId, std::optional<Output>>> Replica::execute_eligible(Context& ctx) {
  std::vector<std::pair<VertexId, std::optional<Output>>> out;
  for (const auto& component : graph_.take_eligible()) {
    for (const auto& v : component) execute_vertex(v, ctx, out);
  }
  return out;
}

std::vector<std::pair<VertexId, std::optional<Output>>> Replica::commit(VertexId v, Proposal p,
                                                                        Context& ctx) {
  const Proposal copy = p;
  switch (graph_.commit(v, std::move(p))) {
    case BPaxosGraph::CommitResult::Duplicate:
      return {};
    case BPaxosGraph::CommitResult::Mismatch:
      ctx.record(CommitEvent{index_, v, copy});
      if (config_.abort_on_safety_violation) {
        std::cerr << "replica" << index_ << ": vertex " << to_string(v)
                  << " committed twice with different values: " << to_string(*graph_.proposal(v))
                  << " vs " << to_string(copy) << std::endl;
        std::abort();
      }
      return {};
    case BPaxosGraph::CommitResult::Added:
      break;
  }
  ctx.record(CommitEvent{index_, v, copy});
  recovery_attempts_.erase(v);

  if (config_.mutations.replica_skips_ordering) {
    std::vector<std::pair<VertexId, std::optional<Output>>> out;
    graph_.force_executed(v);
    execute_vertex(v, ctx, out);
    return out;
  }

  for (const auto& d : graph_.missing_dependencies(v)) arm_recovery(d, ctx);
  return execute_eligible(ctx);
}

void Replica::arm_recovery(VertexId v, Context& ctx) {
  if (recovery_attempts_.count(v)) return;
  recovery_attempts_.emplace(v, 0);
  ctx.set_timer(config_.recovery_timeout,
                kRecoveryTimer | (static_cast<std::uint64_t>(v.leader) << 32) | v.seq);
}

void Replica::recovery_tick(VertexId v, Context& ctx) {
  auto it = recovery_attempts_.find(v);
  if (it == recovery_attempts_.end() || graph_.committed(v)) {
    if (it != recovery_attempts_.end()) recovery_attempts_.erase(it);
    return;
  }
  if (!recovery_.active(v)) {
    recovery_.propose(v, Proposal::noop(), ctx);
  } else if (recovery_.chosen(v)) {
    recovery_.rebroadcast_commit(v, ctx);
  } else {
    recovery_.retry(v, ctx);
  }
  const std::uint32_t attempts = ++it->second;
  const Time delay = config_.recovery_timeout << std::min<std::uint32_t>(attempts, 6);
  ctx.set_timer(delay, kRecoveryTimer | (static_cast<std::uint64_t>(v.leader) << 32) | v.seq);
}

void Replica::on_message(const Address& from, const Message& msg, Context& ctx) {
  if (const auto* c = std::get_if<Commit>(&msg)) {
    commit(c->v, c->proposal, ctx);
    return;
  }
  recovery_.on_message(from, msg, ctx);
}

void Replica::on_timer(std::uint64_t token, Context& ctx) {
  if (token & kRecoveryTimer) {
    const VertexId v{static_cast<LeaderIndex>((token >> 32) & 0x7fffffffULL),
                     static_cast<Sequence>(token & 0xffffffffULL)};
    recovery_tick(v, ctx);
    return;
  }
  recovery_.on_timer(token, ctx);
}

}  // namespace bpaxos
