#include "bpaxos/harness.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bpaxos/client.hpp"
#include "bpaxos/consensus.hpp"
#include "bpaxos/depservice.hpp"
#include "bpaxos/leader.hpp"
#include "bpaxos/replica.hpp"
#include "bpaxos/wire.hpp"

namespace bpaxos {

std::vector<std::pair<Address, std::unique_ptr<Role>>> build_cluster(const ClusterConfig& config) {
  std::vector<std::pair<Address, std::unique_ptr<Role>>> roles;
  for (std::uint32_t i = 0; i < config.num_leaders; ++i) {
    roles.emplace_back(Address{RoleKind::Leader, i}, std::make_unique<Leader>(i, config));
  }
  for (std::uint32_t i = 0; i < config.num_dep_nodes; ++i) {
    roles.emplace_back(Address{RoleKind::DepNode, i}, std::make_unique<DepNode>(i, config));
  }
  for (std::uint32_t i = 0; i < config.num_proposers; ++i) {
    roles.emplace_back(Address{RoleKind::Proposer, i}, std::make_unique<Proposer>(i, config));
  }
  for (std::uint32_t i = 0; i < config.num_acceptors; ++i) {
    roles.emplace_back(Address{RoleKind::Acceptor, i}, std::make_unique<Acceptor>(i, config));
  }
  for (std::uint32_t i = 0; i < config.num_replicas; ++i) {
    roles.emplace_back(Address{RoleKind::Replica, i}, std::make_unique<Replica>(i, config));
  }
  return roles;
}

Fault Fault::crash(Address node, Time at) {
  Fault f;
  f.kind = Kind::Crash;
  f.node = node;
  f.at = at;
  return f;
}

Fault Fault::partition(std::vector<Address> nodes, Time start, Time end) {
  Fault f;
  f.kind = Kind::Partition;
  f.nodes = std::move(nodes);
  f.at = start;
  f.until = end;
  return f;
}

Fault Fault::drop(LinkSpec link, double probability) {
  Fault f;
  f.kind = Kind::Drop;
  f.link = std::move(link);
  f.probability = probability;
  return f;
}

Fault Fault::duplicate(LinkSpec link, double probability) {
  Fault f = drop(std::move(link), probability);
  f.kind = Kind::Duplicate;
  return f;
}

namespace {

Address node_or_throw(const std::string& text, std::size_t line) {
  auto a = parse_address(text);
  if (!a) throw std::invalid_argument("line " + std::to_string(line) + ": unknown node '" + text + "'");
  return *a;
}

Time ms_or_throw(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double ms = std::stod(text, &used);
    if (used != text.size() || ms < 0) throw std::invalid_argument(text);
    return static_cast<Time>(ms * kMillisecond);
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line) + ": bad time '" + text + "'");
  }
}

double prob_or_throw(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double p = std::stod(text, &used);
    if (used != text.size() || p < 0 || p > 1) throw std::invalid_argument(text);
    return p;
  } catch (const std::exception&) {
    throw std::invalid_argument("line " + std::to_string(line) + ": bad probability '" + text + "'");
  }
}

LinkSpec link_or_throw(const std::string& text, std::size_t line) {
  LinkSpec link;
  if (text == "*") return link;
  const auto arrow = text.find("->");
  if (arrow == std::string::npos) {
    throw std::invalid_argument("line " + std::to_string(line) + ": link must be from->to or *");
  }
  const std::string from = text.substr(0, arrow);
  const std::string to = text.substr(arrow + 2);
  if (from != "*") link.from = node_or_throw(from, line);
  if (to != "*") link.to = node_or_throw(to, line);
  return link;
}

}  // namespace

std::vector<Fault> parse_fault_schedule(std::istream& in) {
  std::vector<Fault> faults;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (words.empty() || words[0][0] == '#') continue;
    const std::string& kind = words[0];
    auto want = [&](std::size_t n) {
      if (words.size() != n) {
        throw std::invalid_argument("line " + std::to_string(line) + ": '" + kind + "' takes " +
                                    std::to_string(n - 1) + " arguments");
      }
    };
    if (kind == "crash") {
      want(3);
      faults.push_back(Fault::crash(node_or_throw(words[1], line), ms_or_throw(words[2], line)));
    } else if (kind == "partition") {
      want(4);
      std::vector<Address> nodes;
      std::istringstream ns(words[1]);
      for (std::string n; std::getline(ns, n, ',');) nodes.push_back(node_or_throw(n, line));
      faults.push_back(Fault::partition(std::move(nodes), ms_or_throw(words[2], line),
                                        ms_or_throw(words[3], line)));
    } else if (kind == "drop") {
      want(3);
      faults.push_back(Fault::drop(link_or_throw(words[1], line), prob_or_throw(words[2], line)));
    } else if (kind == "duplicate") {
      want(3);
      faults.push_back(Fault::duplicate(link_or_throw(words[1], line), prob_or_throw(words[2], line)));
    } else {
      throw std::invalid_argument("line " + std::to_string(line) + ": unknown fault '" + kind + "'");
    }
  }
  return faults;
}

void SimConfig::validate() const {
  cluster.validate();
  if (min_delay < 0 || max_delay < min_delay) throw std::invalid_argument("bad delay range");
  if (drop_prob < 0 || drop_prob >= 1) throw std::invalid_argument("drop probability must be in [0, 1)");
  if (dup_prob < 0 || dup_prob > 1) throw std::invalid_argument("duplicate probability must be in [0, 1]");
  if (service_cost < 0) throw std::invalid_argument("service cost must be non-negative");
  if (coupled) {
    const std::uint32_t n = cluster.num_dep_nodes;
    if (cluster.num_leaders != n || cluster.num_proposers != n || cluster.num_replicas != n) {
      throw std::invalid_argument("coupled mode needs 2f+1 of every role");
    }
  }
}

std::uint64_t MessageCounts::total(RoleKind kind) const {
  std::uint64_t t = 0;
  for (const auto& [a, n] : sent) if (a.kind == kind) t += n;
  for (const auto& [a, n] : received) if (a.kind == kind) t += n;
  return t;
}

Ratio Ratio::of(std::int64_t n, std::int64_t d) {
  if (d == 0) return Ratio{0, 1};
  const std::int64_t g = std::gcd(n, d);
  return Ratio{n / g, d / g};
}

std::string to_string(const Ratio& r) {
  return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
}

RoleLoads message_counts(const SimResult& result, const ClusterConfig& cluster) {
  const auto commands = static_cast<std::int64_t>(result.completed_commands);
  auto load = [&](RoleKind kind, std::int64_t participants) {
    return Ratio::of(static_cast<std::int64_t>(result.counts.total(kind)), commands * participants);
  };
  RoleLoads loads;
  loads.leader = load(RoleKind::Leader, 1);
  loads.proposer = load(RoleKind::Proposer, 1);
  loads.dep_node = load(RoleKind::DepNode, cluster.num_dep_nodes);
  loads.acceptor = load(RoleKind::Acceptor, cluster.num_acceptors);
  loads.replica = load(RoleKind::Replica, cluster.num_replicas);
  return loads;
}

namespace {

class Simulator {
 public:
  Simulator(const SimConfig& config, const WorkloadSpec& workload, const std::vector<Fault>& faults)
      : config_(config), faults_(faults), net_rng_(config.seed) {
    auto roles = build_cluster(config.cluster);
    const std::uint32_t protocol_nodes = config.coupled ? config.cluster.num_dep_nodes : 0;
    for (std::uint32_t p = 0; p < protocol_nodes; ++p) physical_.push_back(Physical{config.service_cost, 0, std::nullopt});
    for (auto& [addr, role] : roles) {
      std::uint32_t phys;
      if (config.coupled) {
        phys = addr.index;
      } else {
        phys = static_cast<std::uint32_t>(physical_.size());
        physical_.push_back(Physical{config.service_cost, 0, std::nullopt});
      }
      add_node(addr, std::move(role), phys);
    }
    CommandGenerator generator(workload.conflict_rate, config.seed);
    for (std::uint32_t c = 0; c < workload.clients; ++c) {
      auto client = std::make_unique<ClosedLoopClient>(c, config.cluster, generator,
                                                        workload.commands_per_client);
      clients_.push_back(client.get());
      const auto phys = static_cast<std::uint32_t>(physical_.size());
      physical_.push_back(Physical{0, 0, std::nullopt});
      add_node(Address{RoleKind::Client, c}, std::move(client), phys);
    }
    for (const auto& f : faults_) {
      if (f.kind != Fault::Kind::Crash) continue;
      auto it = slots_by_address_.find(f.node);
      if (it == slots_by_address_.end()) {
        throw std::invalid_argument("crash fault names unknown node " + to_string(f.node));
      }
      auto& phys = physical_[nodes_[it->second].physical];
      phys.crash_at = phys.crash_at ? std::min(*phys.crash_at, f.at) : f.at;
    }
  }

  SimResult run() {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      NodeContext ctx(*this, i);
      nodes_[i].role->start(ctx);
    }
    std::optional<Time> finished_at;
    while (!queue_.empty()) {
      std::pop_heap(queue_.begin(), queue_.end(), Later{});
      QueuedEvent ev = std::move(queue_.back());
      queue_.pop_back();
      if (ev.time > config_.time_limit) break;
      if (finished_at && ev.time > *finished_at + config_.drain) break;
      now_ = ev.time;
      dispatch(std::move(ev));
      if (!finished_at && all_clients_done()) finished_at = now_;
    }
    result_.completed = all_clients_done();
    result_.end_time = now_;
    for (const auto* c : clients_) result_.completed_commands += c->completed();
    return std::move(result_);
  }

 private:
  struct Physical {
    Time cost = 0;
    Time busy_until = 0;
    std::optional<Time> crash_at;
  };

  struct Node {
    Address addr;
    std::unique_ptr<Role> role;
    std::uint32_t physical = 0;
    std::mt19937_64 rng;
  };

  enum class EventType { Arrive, Process, Timer };

  struct QueuedEvent {
    Time time = 0;
    std::uint64_t seq = 0;
    EventType type = EventType::Arrive;
    std::uint32_t node = 0;
    Address from;
    std::optional<Message> msg;
    std::uint64_t token = 0;
    bool local = false;  // sender shares the receiver's physical node
  };

  struct Later {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  class NodeContext : public Context {
   public:
    NodeContext(Simulator& sim, std::uint32_t node) : sim_(sim), node_(node) {}
    Time now() const override { return sim_.now_; }
    Address self() const override { return sim_.nodes_[node_].addr; }
    void send(const Address& to, Message msg) override { sim_.send(node_, to, std::move(msg)); }
    void set_timer(Time delay, std::uint64_t token) override {
      QueuedEvent ev;
      ev.time = sim_.now_ + std::max<Time>(delay, 0);
      ev.type = EventType::Timer;
      ev.node = node_;
      ev.token = token;
      sim_.push(std::move(ev));
    }
    std::uint64_t random(std::uint64_t bound) override {
      if (bound == 0) return 0;
      return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(sim_.nodes_[node_].rng);
    }
    void record(EventBody event) override { sim_.result_.history.add(sim_.now_, std::move(event)); }

   private:
    Simulator& sim_;
    std::uint32_t node_;
  };

  bool all_clients_done() const {
    return !clients_.empty() &&
           std::all_of(clients_.begin(), clients_.end(), [](const ClosedLoopClient* c) { return c->done(); });
  }

  void add_node(Address addr, std::unique_ptr<Role> role, std::uint32_t phys) {
    const std::uint64_t salt = (static_cast<std::uint64_t>(addr.kind) << 32) | addr.index;
    std::seed_seq seq{config_.seed, salt, std::uint64_t{0x62706178}};
    slots_by_address_.emplace(addr, static_cast<std::uint32_t>(nodes_.size()));
    nodes_.push_back(Node{addr, std::move(role), phys, std::mt19937_64(seq)});
  }

  void push(QueuedEvent ev) {
    ev.seq = next_seq_++;
    queue_.push_back(std::move(ev));
    std::push_heap(queue_.begin(), queue_.end(), Later{});
  }

  bool crashed(std::uint32_t node) const {
    const auto& p = physical_[nodes_[node].physical];
    return p.crash_at && *p.crash_at <= now_;
  }

  bool partitioned(const Address& a, const Address& b) const {
    for (const auto& f : faults_) {
      if (f.kind != Fault::Kind::Partition || now_ < f.at || now_ >= f.until) continue;
      const bool ia = std::find(f.nodes.begin(), f.nodes.end(), a) != f.nodes.end();
      const bool ib = std::find(f.nodes.begin(), f.nodes.end(), b) != f.nodes.end();
      if (ia != ib) return true;
    }
    return false;
  }

  bool coin(double p) {
    if (p <= 0) return false;
    return std::uniform_real_distribution<double>(0.0, 1.0)(net_rng_) < p;
  }

  Time sample_delay() {
    if (config_.max_delay == config_.min_delay) return config_.min_delay;
    return std::uniform_int_distribution<Time>(config_.min_delay, config_.max_delay)(net_rng_);
  }

  void send(std::uint32_t from_node, const Address& to, Message msg) {
    const Address from = nodes_[from_node].addr;
    ++result_.counts.sent[from];
    auto it = slots_by_address_.find(to);
    if (it == slots_by_address_.end()) return;
    const std::uint32_t to_node = it->second;

    if (config_.record_trace) {
      static const char* hex = "0123456789abcdef";
      std::string line = "t=" + std::to_string(now_) + " " + to_string(from) + "->" + to_string(to) + " ";
      for (std::uint8_t b : wire::encode_frame(from, msg)) {
        line.push_back(hex[b >> 4]);
        line.push_back(hex[b & 0xf]);
      }
      result_.trace.push_back(std::move(line));
    }

    if (partitioned(from, to)) return;
    bool drop = coin(config_.drop_prob);
    int copies = coin(config_.dup_prob) ? 2 : 1;
    for (const auto& f : faults_) {
      if (!f.link.matches(from, to)) continue;
      if (f.kind == Fault::Kind::Drop && coin(f.probability)) drop = true;
      if (f.kind == Fault::Kind::Duplicate && coin(f.probability)) copies = 2;
    }
    if (drop) return;

    // Remote messages occupy the sender for one service slot before leaving.
    const bool local = nodes_[from_node].physical == nodes_[to_node].physical;
    Time departure = now_;
    if (!local) {
      auto& phys = physical_[nodes_[from_node].physical];
      phys.busy_until = std::max(now_, phys.busy_until) + phys.cost;
      departure = phys.busy_until;
    }
    for (int c = 0; c < copies; ++c) {
      QueuedEvent ev;
      ev.time = departure + (local ? 0 : sample_delay());
      ev.local = local;
      ev.type = EventType::Arrive;
      ev.node = to_node;
      ev.from = from;
      ev.msg = (c + 1 == copies) ? std::move(msg) : msg;
      push(std::move(ev));
    }
  }

  void dispatch(QueuedEvent ev) {
    if (crashed(ev.node)) return;
    Node& node = nodes_[ev.node];
    switch (ev.type) {
      case EventType::Arrive: {
        auto& phys = physical_[node.physical];
        const Time start = std::max(now_, phys.busy_until);
        phys.busy_until = start + (ev.local ? 0 : phys.cost);
        ev.type = EventType::Process;
        ev.time = phys.busy_until;
        push(std::move(ev));
        break;
      }
      case EventType::Process: {
        ++result_.counts.received[node.addr];
        NodeContext ctx(*this, ev.node);
        node.role->on_message(ev.from, *ev.msg, ctx);
        break;
      }
      case EventType::Timer: {
        NodeContext ctx(*this, ev.node);
        node.role->on_timer(ev.token, ctx);
        break;
      }
    }
  }

  const SimConfig& config_;
  const std::vector<Fault>& faults_;
  std::mt19937_64 net_rng_;
  std::vector<Physical> physical_;
  std::vector<Node> nodes_;
  std::map<Address, std::uint32_t> slots_by_address_;
  std::vector<ClosedLoopClient*> clients_;
  std::vector<QueuedEvent> queue_;
  std::uint64_t next_seq_ = 0;
  Time now_ = 0;
  SimResult result_;
};

}  // namespace

SimResult run_simulation(const SimConfig& config, const WorkloadSpec& workload,
                         const std::vector<Fault>& faults) {
  config.validate();
  if (!(workload.conflict_rate >= 0.0 && workload.conflict_rate <= 1.0)) {
    throw std::invalid_argument("conflict rate must be in [0, 1]");
  }
  for (const auto& f : faults) {
    if (f.probability < 0 || f.probability > 1) throw std::invalid_argument("fault probability out of range");
  }
  Simulator sim(config, workload, faults);
  return sim.run();
}

}  // namespace bpaxos
