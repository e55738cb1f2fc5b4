#include "bpaxos/modelcheck.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace bpaxos::model {

std::string to_string(const AbstractProposal& p) {
  std::ostringstream os;
  os << "<" << (p.cmd == kNoop ? std::string("noop") : "c" + std::to_string(p.cmd)) << "|{";
  bool first = true;
  for (std::uint32_t v = 0; v < 32; ++v) {
    if (!(p.deps >> v & 1U)) continue;
    os << (first ? "" : ",") << v;
    first = false;
  }
  os << "}>";
  return os.str();
}

namespace {

void put(std::string& out, std::uint32_t x) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>(x >> s));
}

void put(std::string& out, const std::optional<AbstractProposal>& p) {
  if (!p) {
    out.push_back('\0');
    return;
  }
  out.push_back('\1');
  put(out, static_cast<std::uint32_t>(p->cmd));
  put(out, p->deps);
}

}  // namespace

std::string AbstractState::encode() const {
  std::string out;
  for (const auto& g : dependency_graphs) {
    for (const auto& p : g) put(out, p);
  }
  put(out, next_vertex_id);
  for (const auto& c : proposed_commands) put(out, c ? static_cast<std::uint32_t>(*c) + 1 : 0U);
  for (const auto& ps : proposals) {
    put(out, static_cast<std::uint32_t>(ps.size()));
    for (const auto& p : ps) put(out, std::optional<AbstractProposal>(p));
  }
  for (const auto& p : chosen) put(out, p);
  return out;
}

bool ModelConfig::conflict(int a, int b) const {
  if (a == kNoop || b == kNoop) return false;
  return conflicts.count({a, b}) > 0;
}

std::set<std::pair<int, int>> ModelConfig::full_conflicts(std::uint32_t commands) {
  std::set<std::pair<int, int>> out;
  for (int a = 0; a < static_cast<int>(commands); ++a) {
    for (int b = 0; b < static_cast<int>(commands); ++b) out.emplace(a, b);
  }
  return out;
}

std::vector<std::uint32_t> ModelConfig::quorums_of_size(std::uint32_t nodes, std::uint32_t size) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1U << nodes); ++mask) {
    if (static_cast<std::uint32_t>(__builtin_popcount(mask)) == size) out.push_back(mask);
  }
  return out;
}

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::ProposeCommand: return "ProposeCommand(c" + std::to_string(a.cmd) + ")";
    case Action::Kind::DepServiceProcess:
      return "DepServiceProcess(d" + std::to_string(a.node) + ", v" + std::to_string(a.vertex) + ")";
    case Action::Kind::ConsensusProposeNoop: return "ConsensusProposeNoop(v" + std::to_string(a.vertex) + ")";
    case Action::Kind::ConsensusPropose: {
      std::string q;
      for (std::uint32_t d = 0; d < 32; ++d) {
        if (a.quorum >> d & 1U) q += (q.empty() ? "d" : ",d") + std::to_string(d);
      }
      return "ConsensusPropose(v" + std::to_string(a.vertex) + ", {" + q + "})";
    }
    case Action::Kind::ConsensusChoose:
      return "ConsensusChoose(v" + std::to_string(a.vertex) + ", " + to_string(a.value) + ")";
  }
  return "?";
}

const char* invariant_name(Invariant inv) {
  switch (inv) {
    case Invariant::ConsensusConsistency: return "ConsensusConsistency";
    case Invariant::DepServiceConflicts: return "DepServiceConflicts";
    case Invariant::Nontriviality: return "Nontriviality";
    case Invariant::ChosenConflicts: return "ChosenConflicts";
    case Invariant::NoNoopEverythingChosen: return "NoNoopEverythingChosen";
  }
  return "?";
}

AbstractState initial_state(const ModelConfig& config) {
  AbstractState s;
  s.dependency_graphs.assign(config.dep_nodes,
                             std::vector<std::optional<AbstractProposal>>(config.vertex_bound));
  s.proposed_commands.assign(config.vertex_bound, std::nullopt);
  s.proposals.assign(config.vertex_bound, {});
  s.chosen.assign(config.vertex_bound, std::nullopt);
  return s;
}

namespace {

bool quorum_replied(const AbstractState& s, std::uint32_t quorum, std::uint32_t v) {
  for (std::uint32_t d = 0; d < s.dependency_graphs.size(); ++d) {
    if ((quorum >> d & 1U) && !s.dependency_graphs[d][v]) return false;
  }
  return true;
}

AbstractProposal quorum_reply(const AbstractState& s, std::uint32_t quorum, std::uint32_t v) {
  AbstractProposal out;
  bool first = true;
  for (std::uint32_t d = 0; d < s.dependency_graphs.size(); ++d) {
    if (!(quorum >> d & 1U)) continue;
    const auto& r = *s.dependency_graphs[d][v];
    if (first) out.cmd = r.cmd;
    first = false;
    out.deps |= r.deps;
  }
  return out;
}

bool depends(const AbstractProposal& a, const AbstractProposal& b, std::uint32_t va, std::uint32_t vb) {
  return (b.deps >> va & 1U) || (a.deps >> vb & 1U);
}

std::optional<Invariant> check_state(const AbstractState& s, const ModelConfig& config) {
  const std::uint32_t n = config.vertex_bound;
  for (std::uint32_t v1 = 0; v1 < n; ++v1) {
    for (std::uint32_t v2 = 0; v2 < n; ++v2) {
      if (v1 == v2) continue;
      for (std::uint32_t q1 : config.quorums) {
        if (!quorum_replied(s, q1, v1)) continue;
        for (std::uint32_t q2 : config.quorums) {
          if (!quorum_replied(s, q2, v2)) continue;
          const auto p1 = quorum_reply(s, q1, v1);
          const auto p2 = quorum_reply(s, q2, v2);
          if (config.conflict(p1.cmd, p2.cmd) && !depends(p1, p2, v1, v2)) {
            return Invariant::DepServiceConflicts;
          }
        }
      }
    }
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    if (!s.chosen[v] || s.chosen[v]->cmd == kNoop) continue;
    const bool proposed = std::any_of(s.proposed_commands.begin(), s.proposed_commands.end(),
                                      [&](const auto& c) { return c && *c == s.chosen[v]->cmd; });
    if (!proposed) return Invariant::Nontriviality;
  }
  for (std::uint32_t v1 = 0; v1 < n; ++v1) {
    for (std::uint32_t v2 = 0; v2 < n; ++v2) {
      if (v1 == v2 || !s.chosen[v1] || !s.chosen[v2]) continue;
      if (config.conflict(s.chosen[v1]->cmd, s.chosen[v2]->cmd) &&
          !depends(*s.chosen[v1], *s.chosen[v2], v1, v2)) {
        return Invariant::ChosenConflicts;
      }
    }
  }
  return std::nullopt;
}

bool consistent_step(const AbstractState& from, const AbstractState& to) {
  for (std::size_t v = 0; v < from.chosen.size(); ++v) {
    if (from.chosen[v] && to.chosen[v] != from.chosen[v]) return false;
  }
  return true;
}

// Fairness corollary on a terminal state: no noop chosen => every command chosen.
bool fair_terminal(const AbstractState& s, const ModelConfig& config) {
  for (const auto& c : s.chosen) {
    if (c && c->cmd == kNoop) return true;
  }
  for (int cmd = 0; cmd < static_cast<int>(config.num_commands); ++cmd) {
    const bool found = std::any_of(s.chosen.begin(), s.chosen.end(),
                                   [&](const auto& c) { return c && c->cmd == cmd; });
    if (!found) return false;
  }
  return true;
}

}  // namespace

std::vector<std::pair<Action, AbstractState>> successors(const AbstractState& s, const ModelConfig& config) {
  std::vector<std::pair<Action, AbstractState>> out;
  const std::uint32_t n = config.vertex_bound;

  for (int cmd = 0; cmd < static_cast<int>(config.num_commands); ++cmd) {
    const bool used = std::any_of(s.proposed_commands.begin(), s.proposed_commands.end(),
                                  [&](const auto& c) { return c && *c == cmd; });
    if (used || s.next_vertex_id >= n) continue;
    AbstractState t = s;
    t.proposed_commands[t.next_vertex_id] = cmd;
    ++t.next_vertex_id;
    Action a{Action::Kind::ProposeCommand};
    a.cmd = cmd;
    out.emplace_back(a, std::move(t));
  }

  for (std::uint32_t d = 0; d < s.dependency_graphs.size(); ++d) {
    const auto& g = s.dependency_graphs[d];
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!s.proposed_commands[v] || g[v]) continue;
      const int cmd = *s.proposed_commands[v];
      AbstractProposal reply{cmd, 0};
      for (std::uint32_t u = 0; u < n; ++u) {
        if (g[u] && config.conflict(cmd, g[u]->cmd)) reply.deps |= 1U << u;
      }
      AbstractState t = s;
      t.dependency_graphs[d][v] = reply;
      Action a{Action::Kind::DepServiceProcess};
      a.node = d;
      a.vertex = v;
      out.emplace_back(a, std::move(t));
    }
  }

  for (std::uint32_t v = 0; v < n; ++v) {
    AbstractState t = s;
    t.proposals[v].insert(AbstractProposal{kNoop, 0});
    Action a{Action::Kind::ConsensusProposeNoop};
    a.vertex = v;
    out.emplace_back(a, std::move(t));
  }

  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t q : config.quorums) {
      if (!quorum_replied(s, q, v)) continue;
      AbstractState t = s;
      t.proposals[v].insert(quorum_reply(s, q, v));
      Action a{Action::Kind::ConsensusPropose};
      a.vertex = v;
      a.quorum = q;
      out.emplace_back(a, std::move(t));
    }
  }

  for (std::uint32_t v = 0; v < n; ++v) {
    if (s.proposals[v].empty() || s.chosen[v]) continue;
    for (const auto& p : s.proposals[v]) {
      AbstractState t = s;
      t.chosen[v] = p;
      Action a{Action::Kind::ConsensusChoose};
      a.vertex = v;
      a.value = p;
      out.emplace_back(a, std::move(t));
    }
  }
  return out;
}

Report explore(const ModelConfig& config) {
  Report report;
  std::vector<AbstractState> states;
  std::vector<std::optional<std::pair<std::size_t, Action>>> parent;
  std::unordered_map<std::string, std::size_t> seen;

  auto trace_to = [&](std::size_t idx) {
    std::vector<Action> actions;
    while (parent[idx]) {
      actions.push_back(parent[idx]->second);
      idx = parent[idx]->first;
    }
    std::reverse(actions.begin(), actions.end());
    return actions;
  };

  states.push_back(initial_state(config));
  parent.emplace_back(std::nullopt);
  seen.emplace(states[0].encode(), 0);
  std::deque<std::size_t> frontier{0};

  if (auto bad = check_state(states[0], config)) {
    report.violated = bad;
    report.states = 1;
    return report;
  }

  while (!frontier.empty()) {
    const std::size_t idx = frontier.front();
    frontier.pop_front();
    if (config.collect_chosen) report.chosen_assignments.insert(states[idx].chosen);

    auto next = successors(states[idx], config);
    bool terminal = true;
    for (auto& [action, t] : next) {
      ++report.transitions;
      if (!consistent_step(states[idx], t)) {
        report.violated = Invariant::ConsensusConsistency;
        report.counterexample = trace_to(idx);
        report.counterexample.push_back(action);
        report.states = states.size();
        return report;
      }
      if (t == states[idx]) continue;
      terminal = false;
      std::string key = t.encode();
      if (seen.count(key)) continue;
      if (states.size() >= config.max_states) {
        report.complete = false;
        continue;
      }
      const std::size_t id = states.size();
      seen.emplace(std::move(key), id);
      states.push_back(std::move(t));
      parent.emplace_back(std::make_pair(idx, action));
      if (auto bad = check_state(states[id], config)) {
        report.violated = bad;
        report.counterexample = trace_to(id);
        report.states = states.size();
        return report;
      }
      frontier.push_back(id);
    }
    if (terminal) {
      ++report.terminal_states;
      if (!fair_terminal(states[idx], config)) {
        report.violated = Invariant::NoNoopEverythingChosen;
        report.counterexample = trace_to(idx);
        report.states = states.size();
        return report;
      }
    }
  }
  report.states = states.size();
  return report;
}

std::string format_report(const Report& r) {
  std::ostringstream os;
  os << "states=" << r.states << "\n"
     << "transitions=" << r.transitions << "\n"
     << "terminal_states=" << r.terminal_states << "\n"
     << "complete=" << (r.complete ? "true" : "false") << "\n"
     << "verdict=" << (r.violated ? std::string("violation ") + invariant_name(*r.violated)
                                  : std::string(r.complete ? "ok" : "incomplete"))
     << "\n";
  if (r.violated) {
    os << "counterexample:\n";
    for (std::size_t i = 0; i < r.counterexample.size(); ++i) {
      os << "  " << i + 1 << ". " << to_string(r.counterexample[i]) << "\n";
    }
  }
  return os.str();
}

}  // namespace bpaxos::model
