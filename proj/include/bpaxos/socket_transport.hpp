#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "bpaxos/harness.hpp"

namespace bpaxos {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SocketRunResult {
  History history;
  MessageCounts counts;
  std::uint64_t completed = 0;
  bool all_done = false;
  std::vector<Time> latencies;
  double seconds = 0.0;
};

// Runs every role and client of a cluster as its own node on localhost TCP:
// one processing thread per node, length-prefixed wire frames between nodes.
// Not deterministic.
class SocketCluster {
 public:
  SocketCluster(ClusterConfig config, WorkloadSpec workload, std::uint64_t seed);
  ~SocketCluster();

  SocketCluster(const SocketCluster&) = delete;
  SocketCluster& operator=(const SocketCluster&) = delete;

  // Binds every listener; throws TransportError on failure.
  void start();
  // Blocks until every client finished or `limit` elapsed, then shuts down.
  SocketRunResult run(std::chrono::milliseconds limit);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bpaxos
