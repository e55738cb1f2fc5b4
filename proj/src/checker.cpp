#include "bpaxos/checker.hpp"

#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace bpaxos {

const char* verdict_name(Verdict::Kind kind) {
  switch (kind) {
    case Verdict::Kind::Ok: return "ok";
    case Verdict::Kind::Agreement: return "agreement";
    case Verdict::Kind::Nontriviality: return "nontriviality";
    case Verdict::Kind::DependencyInvariant: return "dependency-invariant";
    case Verdict::Kind::ConflictOrder: return "conflict-order";
    case Verdict::Kind::ExactlyOnce: return "exactly-once";
    case Verdict::Kind::ResponseMismatch: return "response-mismatch";
    case Verdict::Kind::StateDivergence: return "state-divergence";
  }
  return "?";
}

namespace {

const Proposal* decided_value(const Event& e) {
  if (const auto* c = std::get_if<ChosenEvent>(&e.body)) return &c->proposal;
  if (const auto* c = std::get_if<CommitEvent>(&e.body)) return &c->proposal;
  return nullptr;
}

VertexId decided_vertex(const Event& e) {
  if (const auto* c = std::get_if<ChosenEvent>(&e.body)) return c->v;
  return std::get<CommitEvent>(e.body).v;
}

Verdict violation(Verdict::Kind kind, std::string message, std::vector<Event> trace) {
  return Verdict{kind, std::move(message), std::move(trace)};
}

using ClientKey = std::pair<ClientId, std::uint64_t>;

}  // namespace

Verdict check_history(const History& history) {
  const auto& events = history.events;

  std::map<VertexId, std::size_t> decided;  // first decision event per vertex
  std::map<VertexId, std::vector<std::size_t>> proposed;
  std::map<std::uint32_t, std::vector<std::size_t>> executions;
  std::vector<std::size_t> completions;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (const auto* p = std::get_if<ProposeEvent>(&e.body)) {
      proposed[p->v].push_back(i);
    } else if (const Proposal* value = decided_value(e)) {
      const VertexId v = decided_vertex(e);
      auto [it, fresh] = decided.emplace(v, i);
      if (!fresh && *decided_value(events[it->second]) != *value) {
        return violation(Verdict::Kind::Agreement,
                         "vertex " + to_string(v) + " decided with two different values",
                         {events[it->second], e});
      }
    } else if (const auto* x = std::get_if<ExecuteEvent>(&e.body)) {
      executions[x->replica].push_back(i);
    } else if (std::holds_alternative<CompleteEvent>(e.body)) {
      completions.push_back(i);
    }
  }

  for (const auto& [v, idx] : decided) {
    const Proposal& value = *decided_value(events[idx]);
    bool found = false;
    for (std::size_t p : proposed[v]) {
      if (std::get<ProposeEvent>(events[p].body).proposal == value) found = true;
    }
    if (!found) {
      return violation(Verdict::Kind::Nontriviality,
                       "vertex " + to_string(v) + " decided a value that was never proposed",
                       {events[idx]});
    }
  }

  // Per-replica execution position of each vertex.
  std::map<std::uint32_t, std::map<VertexId, std::size_t>> position;
  for (const auto& [replica, list] : executions) {
    auto& pos = position[replica];
    for (std::size_t idx : list) {
      const auto& x = std::get<ExecuteEvent>(events[idx].body);
      pos.emplace(x.v, idx);
    }
  }

  // Key index over decided vertices: key -> vertex -> writes the key?
  std::unordered_map<std::string, std::map<VertexId, bool>> by_key;
  for (const auto& [v, idx] : decided) {
    for (const auto& c : decided_value(events[idx])->cmds) {
      if (is_noop(c)) continue;
      const auto& cmd = std::get<Command>(c);
      auto& slot = by_key[cmd.key()][v];
      slot = slot || cmd.is_write();
    }
  }

  for (const auto& [key, members] : by_key) {
    for (auto a = members.begin(); a != members.end(); ++a) {
      for (auto b = std::next(a); b != members.end(); ++b) {
        if (!a->second && !b->second) continue;
        const VertexId va = a->first;
        const VertexId vb = b->first;
        const Event& ea = events[decided.at(va)];
        const Event& eb = events[decided.at(vb)];
        if (!decided_value(ea)->deps.contains(vb) && !decided_value(eb)->deps.contains(va)) {
          return violation(Verdict::Kind::DependencyInvariant,
                           "conflicting vertices " + to_string(va) + " and " + to_string(vb) +
                               " do not depend on each other",
                           {ea, eb});
        }
        std::optional<std::pair<std::uint32_t, bool>> reference;
        for (const auto& [replica, pos] : position) {
          auto ia = pos.find(va);
          auto ib = pos.find(vb);
          if (ia == pos.end() || ib == pos.end()) continue;
          const bool a_first = ia->second < ib->second;
          if (!reference) {
            reference.emplace(replica, a_first);
            continue;
          }
          if (reference->second != a_first) {
            const auto& ref = position[reference->first];
            return violation(Verdict::Kind::ConflictOrder,
                             "replicas " + std::to_string(reference->first) + " and " +
                                 std::to_string(replica) + " executed " + to_string(va) + " and " +
                                 to_string(vb) + " in different orders",
                             {events[ref.at(va)], events[ref.at(vb)], events[ia->second],
                              events[ib->second]});
          }
        }
      }
    }
  }

  // Exactly-once: per replica, the first execution of a request applies it and
  // every later one is skipped. Also rebuild each replica's KV state.
  std::map<ClientKey, std::vector<std::size_t>> applied_outputs;
  std::map<std::set<VertexId>, std::pair<std::uint32_t, std::map<std::string, std::string>>> states;
  for (const auto& [replica, list] : executions) {
    std::map<ClientKey, std::size_t> first;
    std::map<std::string, std::string> kv;
    std::set<VertexId> executed;
    for (std::size_t idx : list) {
      const auto& x = std::get<ExecuteEvent>(events[idx].body);
      executed.insert(x.v);
      if (is_noop(x.cmd)) continue;
      const auto& cmd = std::get<Command>(x.cmd);
      const ClientKey key{cmd.client_id, cmd.client_seq};
      auto [it, fresh] = first.emplace(key, idx);
      if (fresh != x.applied) {
        std::vector<Event> trace{events[idx]};
        if (!fresh) trace.insert(trace.begin(), events[it->second]);
        return violation(Verdict::Kind::ExactlyOnce,
                         "replica " + std::to_string(replica) + (fresh ? " skipped " : " re-applied ") +
                             to_string(cmd),
                         trace);
      }
      if (!x.applied) continue;
      applied_outputs[key].push_back(idx);
      if (const auto* s = std::get_if<Set>(&cmd.op)) kv[s->key] = s->value;
    }
    auto [it, fresh] = states.emplace(executed, std::make_pair(replica, kv));
    if (!fresh && it->second.second != kv) {
      return violation(Verdict::Kind::StateDivergence,
                       "replicas " + std::to_string(it->second.first) + " and " +
                           std::to_string(replica) + " executed the same vertices but disagree on state",
                       {});
    }
  }

  for (std::size_t idx : completions) {
    const auto& c = std::get<CompleteEvent>(events[idx].body);
    bool matched = false;
    std::vector<Event> trace{events[idx]};
    for (std::size_t x : applied_outputs[{c.client, c.seq}]) {
      const auto& exec = std::get<ExecuteEvent>(events[x].body);
      trace.push_back(events[x]);
      if (exec.output && *exec.output == c.output) matched = true;
    }
    if (!matched) {
      return violation(Verdict::Kind::ResponseMismatch,
                       "client " + std::to_string(c.client) + " request " + std::to_string(c.seq) +
                           " answered with an output no replica produced",
                       trace);
    }
  }

  return Verdict{};
}

}  // namespace bpaxos
