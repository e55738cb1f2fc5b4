#pragma once

#include <cstdint>
#include <string>

#include "bpaxos/checker.hpp"
#include "bpaxos/harness.hpp"

namespace bpaxos {

enum class Transport { Sim, Socket };

struct BenchConfig {
  std::uint32_t clients = 10;
  double conflict_rate = 0.0;
  std::uint32_t batch_size = 1;
  Time duration = 2 * kSecond;
  Time warmup = 200 * kMillisecond;
  std::uint32_t f = 1;
  std::uint32_t leaders = 2;
  std::uint32_t proposers = 0;  // 0: one per leader
  std::uint32_t replicas = 2;
  bool thrifty = true;
  bool compact = true;
  bool coupled = false;
  std::uint64_t seed = 1;
  Transport transport = Transport::Sim;
  Time service_cost = 10;       // sim only
  Time link_delay = 250;        // sim only, one way
  Time batch_flush = 5 * kMillisecond;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
  ClusterConfig cluster() const;
};

// Throughput is commands per second of simulated time under the sim
// transport and of wall time under the socket transport.
struct BenchReport {
  double throughput = 0.0;
  double p50_ms = 0.0;
  double p99_ms = 0.0;
  std::uint64_t completed = 0;
  RoleLoads loads;
  Verdict verdict;  // sim transport only
  BenchConfig config;
};

BenchReport run_bench(const BenchConfig& config);

std::string csv_header();
std::string csv_row(const std::string& config_id, const BenchReport& report);

// Relative throughput under the message-count load model.
struct BottleneckModel {
  Ratio bpaxos;         // L / (2N + R + 1)
  Ratio single_leader;  // 1 / (2N + 2)
  // Smallest L at which the leader/proposer load (2N+R+1)/L drops to the
  // 2 messages per command every dependency node and acceptor handles.
  std::uint32_t saturation_leaders = 0;
  Ratio bpaxos_saturated;  // min(L / (2N+R+1), 1/2)
};

BottleneckModel bottleneck_model(std::uint32_t leaders, std::uint32_t n, std::uint32_t replicas);

// p in [0, 100], nearest-rank.
double percentile_ms(std::vector<Time> samples, double p);

}  // namespace bpaxos
