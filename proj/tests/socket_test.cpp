#include <gtest/gtest.h>

#include "bpaxos/bench.hpp"
#include "bpaxos/checker.hpp"
#include "bpaxos/socket_transport.hpp"

using namespace bpaxos;

TEST(SocketCluster, BoundedWorkloadCompletesAndChecksOut) {
  ClusterConfig config;
  SocketCluster net(config, WorkloadSpec{4, 25, 0.2}, 3);
  net.start();
  const auto r = net.run(std::chrono::seconds(20));
  EXPECT_TRUE(r.all_done);
  EXPECT_EQ(r.completed, 100u);
  EXPECT_EQ(r.latencies.size(), 100u);
  const Verdict v = check_history(r.history);
  EXPECT_TRUE(v.ok()) << v.message;
}

TEST(SocketCluster, BatchingOverSockets) {
  ClusterConfig config;
  config.batch_size = 4;
  config.batch_flush = 2 * kMillisecond;
  config.compact_deps = true;
  SocketCluster net(config, WorkloadSpec{8, 10, 1.0}, 5);
  const auto r = net.run(std::chrono::seconds(20));
  EXPECT_TRUE(r.all_done);
  EXPECT_TRUE(check_history(r.history).ok());
}

TEST(SocketCluster, BenchOverSockets) {
  BenchConfig b;
  b.transport = Transport::Socket;
  b.clients = 4;
  b.duration = 400 * kMillisecond;
  b.warmup = 50 * kMillisecond;
  const auto r = run_bench(b);
  EXPECT_GT(r.completed, 0u);
  EXPECT_GT(r.throughput, 0.0);
  EXPECT_TRUE(r.verdict.ok()) << r.verdict.message;
}

TEST(SocketCluster, RejectsInvalidConfig) {
  ClusterConfig config;
  config.num_acceptors = 1;
  EXPECT_THROW(SocketCluster(config, WorkloadSpec{}, 1), std::invalid_argument);
}
