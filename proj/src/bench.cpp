#include "bpaxos/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bpaxos/socket_transport.hpp"

namespace bpaxos {

void BenchConfig::validate() const {
  if (clients == 0) throw std::invalid_argument("need at least one client");
  if (!(conflict_rate >= 0.0 && conflict_rate <= 1.0)) {
    throw std::invalid_argument("conflict rate must be in [0, 1]");
  }
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  if (duration <= 0) throw std::invalid_argument("duration must be positive");
  if (warmup < 0 || warmup >= duration) throw std::invalid_argument("warmup must be in [0, duration)");
  if (service_cost < 0 || link_delay < 0 || batch_flush < 0) {
    throw std::invalid_argument("times must be non-negative");
  }
  cluster().validate();
}

ClusterConfig BenchConfig::cluster() const {
  ClusterConfig c;
  c.f = f;
  c.num_leaders = leaders;
  c.num_proposers = proposers == 0 ? leaders : proposers;
  c.num_dep_nodes = 2 * f + 1;
  c.num_acceptors = 2 * f + 1;
  c.num_replicas = replicas;
  c.thrifty = thrifty;
  c.compact_deps = compact;
  c.batch_size = batch_size;
  c.batch_flush = batch_flush;
  c.client_retry = std::max<Time>(c.client_retry, duration);
  return c;
}

double percentile_ms(std::vector<Time> samples, double p) {
  if (samples.empty()) return 0.0;
  p = std::clamp(p, 0.0, 100.0);
  std::sort(samples.begin(), samples.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return static_cast<double>(samples[rank - 1]) / kMillisecond;
}

namespace {

// Completions inside [warmup, end) and their latencies.
void summarize(const History& history, Time warmup, Time end, BenchReport& report) {
  std::vector<Time> latencies;
  for (const auto& e : history.events) {
    if (e.time < warmup || e.time >= end) continue;
    if (const auto* c = std::get_if<CompleteEvent>(&e.body)) latencies.push_back(c->latency);
  }
  report.completed = latencies.size();
  report.throughput = static_cast<double>(latencies.size()) /
                      (static_cast<double>(end - warmup) / static_cast<double>(kSecond));
  report.p50_ms = percentile_ms(latencies, 50);
  report.p99_ms = percentile_ms(std::move(latencies), 99);
}

}  // namespace

BenchReport run_bench(const BenchConfig& config) {
  config.validate();
  BenchReport report;
  report.config = config;
  const ClusterConfig cluster = config.cluster();
  WorkloadSpec workload{config.clients, 0, config.conflict_rate};

  if (config.transport == Transport::Sim) {
    SimConfig sim;
    sim.seed = config.seed;
    sim.cluster = cluster;
    sim.min_delay = sim.max_delay = config.link_delay;
    sim.coupled = config.coupled;
    sim.service_cost = config.service_cost;
    sim.time_limit = config.duration;
    SimResult result = run_simulation(sim, workload);
    summarize(result.history, config.warmup, config.duration, report);
    report.loads = message_counts(result, cluster);
    report.verdict = check_history(result.history);
    return report;
  }

  if (config.coupled) throw std::invalid_argument("coupled mode is only modelled by the simulator");
  SocketCluster net(cluster, workload, config.seed);
  net.start();
  const auto limit = std::chrono::milliseconds(config.duration / kMillisecond);
  SocketRunResult result = net.run(limit);
  const auto end = static_cast<Time>(result.seconds * static_cast<double>(kSecond));
  summarize(result.history, config.warmup, std::max(end, config.warmup + 1), report);
  SimResult shaped;
  shaped.counts = result.counts;
  shaped.completed_commands = result.completed;
  report.loads = message_counts(shaped, cluster);
  report.verdict = check_history(result.history);
  return report;
}

std::string csv_header() { return "config_id,f,leaders,clients,conflict_rate,batch,throughput,p50_ms,p99_ms"; }

std::string csv_row(const std::string& config_id, const BenchReport& report) {
  const BenchConfig& c = report.config;
  std::ostringstream out;
  out << config_id << ',' << c.f << ',' << c.leaders << ',' << c.clients << ',' << c.conflict_rate << ','
      << c.batch_size << ',';
  out.setf(std::ios::fixed);
  out.precision(1);
  out << report.throughput << ',';
  out.precision(3);
  out << report.p50_ms << ',' << report.p99_ms;
  return out.str();
}

BottleneckModel bottleneck_model(std::uint32_t leaders, std::uint32_t n, std::uint32_t replicas) {
  if (leaders == 0 || n == 0) throw std::invalid_argument("need at least one leader and one node");
  const std::int64_t per_leader = 2 * static_cast<std::int64_t>(n) + replicas + 1;
  BottleneckModel m;
  m.bpaxos = Ratio::of(leaders, per_leader);
  m.single_leader = Ratio::of(1, 2 * static_cast<std::int64_t>(n) + 2);
  m.saturation_leaders = static_cast<std::uint32_t>((per_leader + 1) / 2);
  m.bpaxos_saturated = m.bpaxos.value() < 0.5 ? m.bpaxos : Ratio::of(1, 2);
  return m;
}

}  // namespace bpaxos
