#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bpaxos/bench.hpp"
#include "bpaxos/workload.hpp"

using namespace bpaxos;

TEST(Workload, ZeroConflictRateNeverConflicts) {
  const auto streams = generate_workload(WorkloadConfig{8, 50, 0.0, 3});
  std::vector<Command> all;
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_FALSE(conflicts(all[i], all[j]));
  }
}

TEST(Workload, FullConflictRateWritesTheHotKey) {
  for (const auto& stream : generate_workload(WorkloadConfig{3, 20, 1.0, 3})) {
    for (const auto& c : stream) {
      EXPECT_TRUE(c.is_write());
      EXPECT_EQ(c.key(), kHotKey);
    }
  }
}

TEST(Workload, KeysAndValuesAreEightBytesAndSequencesStartAtOne) {
  const auto streams = generate_workload(WorkloadConfig{2, 30, 0.5, 9});
  for (std::size_t c = 0; c < streams.size(); ++c) {
    for (std::size_t i = 0; i < streams[c].size(); ++i) {
      const Command& x = streams[c][i];
      EXPECT_EQ(x.client_id, c);
      EXPECT_EQ(x.client_seq, i + 1);
      EXPECT_EQ(x.key().size(), 8u);
      if (const auto* s = std::get_if<Set>(&x.op)) EXPECT_EQ(s->value.size(), 8u);
    }
  }
  EXPECT_EQ(kHotKey.size(), 8u);
}

TEST(Workload, HotKeyFractionWithinThreeSigma) {
  const double r = 0.02;
  const int n = 10000;
  CommandGenerator g(r, 77);
  int hot = 0;
  for (int i = 1; i <= n; ++i) hot += g.next(i % 10, static_cast<std::uint64_t>(i)).key() == kHotKey;
  const double sigma = std::sqrt(n * r * (1 - r));
  EXPECT_LE(std::abs(hot - n * r), 3 * sigma);
}

TEST(Workload, DrawsDependOnlyOnSeedClientAndSequence) {
  CommandGenerator a(0.3, 5), b(0.3, 5);
  for (std::uint64_t s = 1; s < 50; ++s) EXPECT_EQ(a.next(2, s), b.next(2, s));
  EXPECT_THROW(CommandGenerator(1.2, 1), std::invalid_argument);
}

TEST(BottleneckModel, SubstitutedValues) {
  const auto m = bottleneck_model(1, 3, 2);
  EXPECT_EQ(m.bpaxos, Ratio::of(1, 9));
  EXPECT_EQ(m.single_leader, Ratio::of(1, 8));
  EXPECT_EQ(m.saturation_leaders, 5u);
  EXPECT_EQ(bottleneck_model(1, 3, 3).bpaxos, Ratio::of(1, 10));
}

TEST(BottleneckModel, ScalesWithLeadersUntilSaturation) {
  for (std::uint32_t n : {3u, 5u}) {
    for (std::uint32_t r : {2u, 3u}) {
      const auto base = bottleneck_model(1, n, r);
      for (std::uint32_t l = 1; l <= 8; ++l) {
        const auto m = bottleneck_model(l, n, r);
        EXPECT_EQ(m.bpaxos, Ratio::of(base.bpaxos.num * l, base.bpaxos.den));
        // Per-node leader load (2N+R+1)/L against the 2 messages every
        // dependency node and acceptor handles per command.
        const bool saturated = static_cast<double>(2 * n + r + 1) / l <= 2.0;
        EXPECT_EQ(saturated, l >= m.saturation_leaders);
        EXPECT_EQ(m.bpaxos_saturated.value(), std::min(m.bpaxos.value(), 0.5));
      }
    }
  }
}

TEST(BottleneckModel, MoreNodesLowerBothModels) {
  for (std::uint32_t n = 3; n < 9; n += 2) {
    EXPECT_LT(bottleneck_model(2, n + 2, 2).bpaxos.value(), bottleneck_model(2, n, 2).bpaxos.value());
    EXPECT_LT(bottleneck_model(2, n + 2, 2).single_leader.value(),
              bottleneck_model(2, n, 2).single_leader.value());
  }
}

TEST(Percentile, NearestRank) {
  EXPECT_DOUBLE_EQ(percentile_ms({}, 50), 0.0);
  std::vector<Time> xs;
  for (Time i = 1; i <= 100; ++i) xs.push_back(i * kMillisecond);
  EXPECT_DOUBLE_EQ(percentile_ms(xs, 50), 50.0);
  EXPECT_DOUBLE_EQ(percentile_ms(xs, 99), 99.0);
  EXPECT_DOUBLE_EQ(percentile_ms(xs, 100), 100.0);
  EXPECT_DOUBLE_EQ(percentile_ms({7000}, 1), 7.0);
}

TEST(Bench, CsvSchema) {
  EXPECT_EQ(csv_header(), "config_id,f,leaders,clients,conflict_rate,batch,throughput,p50_ms,p99_ms");
  BenchReport r;
  r.config.clients = 4;
  r.throughput = 1234.56;
  r.p50_ms = 1.5;
  r.p99_ms = 2.25;
  EXPECT_EQ(csv_row("x", r), "x,1,2,4,0,1,1234.6,1.500,2.250");
}

TEST(Bench, SimRunIsDeterministicAndChecked) {
  BenchConfig b;
  b.clients = 8;
  b.conflict_rate = 0.1;
  b.duration = 300 * kMillisecond;
  b.warmup = 50 * kMillisecond;
  const auto x = run_bench(b);
  const auto y = run_bench(b);
  EXPECT_TRUE(x.verdict.ok());
  EXPECT_GT(x.completed, 0u);
  EXPECT_EQ(csv_row("a", x), csv_row("a", y));
  EXPECT_LE(x.p50_ms, x.p99_ms);
}

TEST(Bench, DecoupledBeatsCoupledUnderLoad) {
  BenchConfig b;
  b.clients = 100;
  b.leaders = 3;
  b.replicas = 3;
  b.thrifty = false;
  b.compact = false;
  b.duration = 300 * kMillisecond;
  b.warmup = 100 * kMillisecond;
  const double decoupled = run_bench(b).throughput;
  b.coupled = true;
  const double coupled = run_bench(b).throughput;
  EXPECT_LT(coupled, decoupled);
}

TEST(Bench, ValidatesConfig) {
  BenchConfig b;
  b.clients = 0;
  EXPECT_THROW(run_bench(b), std::invalid_argument);
  b = BenchConfig{};
  b.conflict_rate = -0.1;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = BenchConfig{};
  b.batch_size = 0;
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b = BenchConfig{};
  b.leaders = 1;
  EXPECT_THROW(b.validate(), std::invalid_argument);
}
