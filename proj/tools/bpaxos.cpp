// bpaxos: run clusters, benchmarks, fault-injected simulations and model checks.
//
// Exit codes: 0 ok, 1 invariant violation or counterexample, 2 usage or
// configuration error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bpaxos/bench.hpp"
#include "bpaxos/checker.hpp"
#include "bpaxos/harness.hpp"
#include "bpaxos/modelcheck.hpp"
#include "bpaxos/socket_transport.hpp"

using namespace bpaxos;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

Time ms(double v) { return static_cast<Time>(v * kMillisecond); }

struct CommonFlags {
  std::uint32_t clients = 10;
  double conflict_rate = 0.0;
  std::uint32_t batch_size = 1;
  double duration = 2.0;  // seconds
  std::uint32_t f = 1;
  std::uint32_t leaders = 2;
  std::uint32_t replicas = 2;
  bool thrifty = true;
  bool compact = true;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* app, CommonFlags& c) {
  app->add_option("--clients", c.clients, "closed-loop clients")->check(CLI::PositiveNumber);
  app->add_option("--conflict_rate", c.conflict_rate, "fraction of writes to the hot key")
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--batch_size", c.batch_size, "commands per vertex")->check(CLI::PositiveNumber);
  app->add_option("--duration", c.duration, "seconds (simulated under --transport sim)")
      ->check(CLI::PositiveNumber);
  app->add_option("--f", c.f, "tolerated failures")->check(CLI::PositiveNumber);
  app->add_option("--leaders", c.leaders, "leaders (and proposers)");
  app->add_option("--replicas", c.replicas, "replicas");
  app->add_option("--thrifty", c.thrifty, "contact only f+1 dependency nodes");
  app->add_option("--compact", c.compact, "compact per-leader dependency watermarks");
  app->add_option("--seed", c.seed, "random seed");
}

BenchConfig bench_config(const CommonFlags& c) {
  BenchConfig b;
  b.clients = c.clients;
  b.conflict_rate = c.conflict_rate;
  b.batch_size = c.batch_size;
  b.duration = static_cast<Time>(c.duration * kSecond);
  b.warmup = std::min<Time>(b.warmup, b.duration / 10);
  b.f = c.f;
  b.leaders = c.leaders;
  b.replicas = c.replicas;
  b.thrifty = c.thrifty;
  b.compact = c.compact;
  b.seed = c.seed;
  return b;
}

void print_loads(const RoleLoads& l) {
  std::cout << "load_leader=" << to_string(l.leader) << "\n"
            << "load_proposer=" << to_string(l.proposer) << "\n"
            << "load_dep_node=" << to_string(l.dep_node) << "\n"
            << "load_acceptor=" << to_string(l.acceptor) << "\n"
            << "load_replica=" << to_string(l.replica) << "\n";
}

void print_verdict(const Verdict& v) {
  std::cout << "verdict=" << verdict_name(v.kind) << "\n";
  if (v.ok()) return;
  std::cout << "message=" << v.message << "\n";
  for (const auto& e : v.trace) std::cout << "  " << to_string(e) << "\n";
}

Mutations parse_mutation(const std::string& name) {
  Mutations m;
  if (name.empty()) return m;
  if (name == "dep_quorum_one") m.dep_quorum_one = true;
  else if (name == "acceptor_ignores_promises") m.acceptor_ignores_promises = true;
  else if (name == "replica_skips_ordering") m.replica_skips_ordering = true;
  else if (name == "client_table_largest_only") m.client_table_largest_only = true;
  else throw std::invalid_argument("unknown mutation '" + name + "'");
  return m;
}

int cmd_bench(const CommonFlags& c, const std::string& transport, const std::string& config_id,
              bool coupled, bool header) {
  BenchConfig b = bench_config(c);
  b.transport = transport == "socket" ? Transport::Socket : Transport::Sim;
  b.coupled = coupled;
  BenchReport r = run_bench(b);
  if (header) std::cout << csv_header() << "\n";
  std::cout << csv_row(config_id, r) << "\n";
  if (!r.verdict.ok()) {
    std::cerr << "history check failed: " << verdict_name(r.verdict.kind) << ": " << r.verdict.message << "\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_run(const CommonFlags& c, std::uint64_t commands) {
  ClusterConfig cluster = bench_config(c).cluster();
  SocketCluster net(cluster, WorkloadSpec{c.clients, commands, c.conflict_rate}, c.seed);
  net.start();
  auto result = net.run(std::chrono::milliseconds(static_cast<std::int64_t>(c.duration * 1000)));
  std::cout << "completed=" << result.completed << "\n"
            << "all_done=" << (result.all_done ? "true" : "false") << "\n"
            << "seconds=" << result.seconds << "\n"
            << "p50_ms=" << percentile_ms(result.latencies, 50) << "\n"
            << "p99_ms=" << percentile_ms(result.latencies, 99) << "\n";
  const Verdict v = check_history(result.history);
  print_verdict(v);
  return v.ok() ? kExitOk : kExitViolation;
}

struct SimFlags {
  std::uint64_t commands = 20;
  std::string faults;
  double delay_min = 1.0;
  double delay_max = 1.0;
  double drop = 0.0;
  double dup = 0.0;
  bool coupled = false;
  std::string mutation;
  std::string history_out;
};

int cmd_sim(const CommonFlags& c, const SimFlags& s) {
  SimConfig sim;
  sim.seed = c.seed;
  sim.cluster = bench_config(c).cluster();
  sim.cluster.client_retry = 500 * kMillisecond;
  sim.cluster.mutations = parse_mutation(s.mutation);
  sim.cluster.abort_on_safety_violation = false;
  sim.min_delay = ms(s.delay_min);
  sim.max_delay = ms(s.delay_max);
  sim.drop_prob = s.drop;
  sim.dup_prob = s.dup;
  sim.coupled = s.coupled;
  sim.time_limit = static_cast<Time>(c.duration * kSecond);
  std::vector<Fault> faults;
  if (!s.faults.empty()) {
    std::ifstream in(s.faults);
    if (!in) throw std::invalid_argument("cannot open fault schedule " + s.faults);
    faults = parse_fault_schedule(in);
  }
  SimResult r = run_simulation(sim, WorkloadSpec{c.clients, s.commands, c.conflict_rate}, faults);
  if (!s.history_out.empty()) {
    std::ofstream out(s.history_out);
    out << r.history.serialize();
  }
  std::cout << "completed=" << r.completed_commands << "\n"
            << "all_done=" << (r.completed ? "true" : "false") << "\n"
            << "end_ms=" << static_cast<double>(r.end_time) / kMillisecond << "\n";
  print_loads(message_counts(r, sim.cluster));
  const Verdict v = check_history(r.history);
  print_verdict(v);
  return v.ok() ? kExitOk : kExitViolation;
}

struct CheckFlags {
  std::uint32_t commands = 2;
  std::string conflict = "full";
  std::vector<std::string> pairs;
  std::uint32_t dep_nodes = 3;
  std::uint32_t quorum = 2;
  std::uint32_t vertex_bound = 2;
  std::size_t max_states = 5'000'000;
};

int cmd_check(const CheckFlags& k) {
  model::ModelConfig m;
  m.num_commands = k.commands;
  m.dep_nodes = k.dep_nodes;
  m.vertex_bound = k.vertex_bound;
  m.max_states = k.max_states;
  if (k.quorum == 0 || k.quorum > k.dep_nodes) throw std::invalid_argument("quorum must be in [1, dep-nodes]");
  if (k.dep_nodes > 16 || k.vertex_bound > 16) throw std::invalid_argument("model too large");
  m.quorums = model::ModelConfig::quorums_of_size(k.dep_nodes, k.quorum);
  if (k.conflict == "full") {
    m.conflicts = model::ModelConfig::full_conflicts(k.commands);
  } else if (k.conflict == "custom") {
    for (const auto& p : k.pairs) {
      const auto colon = p.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("pair must look like a:b, got " + p);
      const int a = std::stoi(p.substr(0, colon));
      const int b = std::stoi(p.substr(colon + 1));
      if (a < 0 || b < 0 || a >= static_cast<int>(k.commands) || b >= static_cast<int>(k.commands)) {
        throw std::invalid_argument("pair " + p + " names an unknown command");
      }
      m.conflicts.insert({a, b});
      m.conflicts.insert({b, a});
    }
  } else if (k.conflict != "none") {
    throw std::invalid_argument("--conflict must be full, none or custom");
  }
  const model::Report r = model::explore(m);
  std::cout << model::format_report(r);
  if (r.violated) return kExitViolation;
  return r.complete ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BPaxos replication: clusters, benchmarks, simulations, model checks"};
  app.require_subcommand(1);
  // Config files are read by the root app; keys go under a [bench], [sim]
  // ... section. fallthrough lets --config appear after the subcommand.
  app.set_config("--config", "", "TOML/INI file supplying defaults; flags override it");
  app.fallthrough();

  CommonFlags run_flags, bench_flags, sim_flags;
  std::uint64_t run_commands = 100;
  auto* run = app.add_subcommand("run", "stand up a localhost TCP cluster and drive it with clients");
  add_common(run, run_flags);
  run->add_option("--commands", run_commands, "commands per client (0: until --duration)");

  std::string transport = "sim";
  std::string config_id = "run";
  bool coupled = false;
  bool header = true;
  auto* bench = app.add_subcommand("bench", "measure throughput and latency, print a CSV row");
  add_common(bench, bench_flags);
  bench->add_option("--transport", transport, "sim or socket")->check(CLI::IsMember({"sim", "socket"}));
  bench->add_option("--config_id", config_id, "first CSV column");
  bench->add_flag("--coupled", coupled, "co-locate one of every role per node (sim only)");
  bench->add_option("--header", header, "print the CSV header");

  SimFlags s;
  auto* sim = app.add_subcommand("sim", "run a deterministic simulation with an optional fault schedule");
  add_common(sim, sim_flags);
  sim->add_option("--commands", s.commands, "commands per client");
  sim->add_option("--faults", s.faults, "fault schedule file")->check(CLI::ExistingFile);
  sim->add_option("--delay_min", s.delay_min, "one-way delay lower bound, ms");
  sim->add_option("--delay_max", s.delay_max, "one-way delay upper bound, ms");
  sim->add_option("--drop", s.drop, "message drop probability")->check(CLI::Range(0.0, 0.99));
  sim->add_option("--dup", s.dup, "message duplication probability")->check(CLI::Range(0.0, 1.0));
  sim->add_flag("--coupled", s.coupled, "co-locate one of every role per node");
  sim->add_option("--mutation", s.mutation, "enable a deliberate protocol bug");
  sim->add_option("--history", s.history_out, "write the event history to this file");

  CheckFlags k;
  auto* check = app.add_subcommand("check", "explore the abstract protocol exhaustively");
  check->add_option("--commands", k.commands, "number of abstract commands")->check(CLI::Range(1, 8));
  check->add_option("--conflict", k.conflict, "full, none or custom");
  check->add_option("--pair", k.pairs, "conflicting pair a:b (with --conflict custom)");
  check->add_option("--dep-nodes,--dep_nodes", k.dep_nodes, "dependency service nodes");
  check->add_option("--quorum", k.quorum, "dependency service quorum size");
  check->add_option("--vertex-bound,--vertex_bound", k.vertex_bound, "number of vertex ids");
  check->add_option("--max-states,--max_states", k.max_states, "exploration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, run_commands);
    if (*bench) return cmd_bench(bench_flags, transport, config_id, coupled, header);
    if (*sim) return cmd_sim(sim_flags, s);
    if (*check) return cmd_check(k);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
