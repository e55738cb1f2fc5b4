#include <gtest/gtest.h>

#include <sstream>

#include "bpaxos/checker.hpp"
#include "bpaxos/harness.hpp"

using namespace bpaxos;

namespace {

SimConfig quiet(std::uint32_t f = 1) {
  SimConfig s;
  s.cluster.f = f;
  s.cluster.num_dep_nodes = s.cluster.num_acceptors = 2 * f + 1;
  s.cluster.num_leaders = s.cluster.num_proposers = s.cluster.num_replicas = f + 1;
  return s;
}

std::vector<Time> latencies(const History& h) {
  std::vector<Time> out;
  for (const auto& e : h.events) {
    if (const auto* c = std::get_if<CompleteEvent>(&e.body)) out.push_back(c->latency);
  }
  return out;
}

}  // namespace

TEST(Simulation, SameSeedSameHistory) {
  SimConfig s = quiet();
  s.max_delay = 7 * kMillisecond;
  s.drop_prob = 0.05;
  s.dup_prob = 0.05;
  const WorkloadSpec w{4, 10, 0.3};
  const auto a = run_simulation(s, w);
  const auto b = run_simulation(s, w);
  EXPECT_EQ(a.history.serialize(), b.history.serialize());
  s.seed = 2;
  const auto c = run_simulation(s, w);
  EXPECT_NE(a.history.serialize(), c.history.serialize());
}

TEST(Simulation, UnloadedLatencyIsEightDelays) {
  for (std::uint32_t f : {1u, 2u}) {
    for (Time d : {Time{1000}, Time{2500}}) {
      SimConfig s = quiet(f);
      s.min_delay = s.max_delay = d;
      const auto r = run_simulation(s, WorkloadSpec{1, 5, 0.0});
      ASSERT_TRUE(r.completed);
      for (Time l : latencies(r.history)) EXPECT_EQ(l, 8 * d);
    }
  }
}

TEST(Simulation, FailureFreeMessageCountsMatchTheLoadModel) {
  for (std::uint32_t f : {1u, 2u}) {
    for (std::uint32_t replicas : {f + 1, f + 2}) {
      SimConfig s = quiet(f);
      s.cluster.num_replicas = replicas;
      const auto r = run_simulation(s, WorkloadSpec{3, 20, 0.0});
      ASSERT_TRUE(r.completed);
      const RoleLoads l = message_counts(r, s.cluster);
      const std::int64_t n = 2 * f + 1;
      EXPECT_EQ(l.leader, Ratio::of(2 * n + 2, 1));
      EXPECT_EQ(l.proposer, Ratio::of(2 * n + replicas + 1, 1));
      EXPECT_EQ(l.dep_node, Ratio::of(2, 1));
      EXPECT_EQ(l.acceptor, Ratio::of(2, 1));
      EXPECT_EQ(l.replica, Ratio::of(replicas + 1, replicas));
    }
  }
}

TEST(Simulation, LeaderCrashIsMaskedByClientRetry) {
  SimConfig s = quiet();
  s.cluster.client_retry = 100 * kMillisecond;
  const auto r = run_simulation(s, WorkloadSpec{4, 20, 0.5},
                                {Fault::crash(Address{RoleKind::Leader, 0}, 30 * kMillisecond)});
  EXPECT_TRUE(r.completed);
  EXPECT_TRUE(check_history(r.history).ok());
}

TEST(Simulation, ProposerCrashIsRecoveredByReplicas) {
  SimConfig s = quiet();
  s.cluster.client_retry = 100 * kMillisecond;
  s.cluster.recovery_timeout = 20 * kMillisecond;
  const auto r = run_simulation(s, WorkloadSpec{4, 20, 1.0},
                                {Fault::crash(Address{RoleKind::Proposer, 1}, 25 * kMillisecond)});
  EXPECT_TRUE(r.completed);
  EXPECT_TRUE(check_history(r.history).ok());
}

TEST(Simulation, PartitionHealsAndEveryCommandIsAnswered) {
  SimConfig s = quiet();
  s.max_delay = 3 * kMillisecond;
  const std::vector<Fault> faults{Fault::partition(
      {Address{RoleKind::Acceptor, 0}, Address{RoleKind::Acceptor, 1}}, 10 * kMillisecond, 300 * kMillisecond)};
  const auto r = run_simulation(s, WorkloadSpec{3, 10, 0.1}, faults);
  EXPECT_TRUE(r.completed);
  EXPECT_TRUE(check_history(r.history).ok());
}

TEST(Simulation, TraceRecordsWireFrames) {
  SimConfig s = quiet();
  s.record_trace = true;
  const auto r = run_simulation(s, WorkloadSpec{1, 1, 0.0});
  ASSERT_FALSE(r.trace.empty());
  EXPECT_NE(r.trace.front().find("client0->leader0"), std::string::npos);
}

TEST(Simulation, CoupledModeNeedsMatchingRoleCounts) {
  SimConfig s = quiet();
  s.coupled = true;
  EXPECT_THROW(run_simulation(s, WorkloadSpec{}), std::invalid_argument);
  s.cluster.num_leaders = s.cluster.num_proposers = s.cluster.num_replicas = 3;
  const auto r = run_simulation(s, WorkloadSpec{2, 5, 0.5});
  EXPECT_TRUE(r.completed);
}

TEST(Simulation, RejectsBadConfigs) {
  SimConfig s = quiet();
  s.cluster.num_acceptors = 2;
  EXPECT_THROW(run_simulation(s, WorkloadSpec{}), std::invalid_argument);
  s = quiet();
  s.drop_prob = 1.0;
  EXPECT_THROW(run_simulation(s, WorkloadSpec{}), std::invalid_argument);
  s = quiet();
  EXPECT_THROW(run_simulation(s, WorkloadSpec{1, 1, 1.5}), std::invalid_argument);
  EXPECT_THROW(run_simulation(s, WorkloadSpec{}, {Fault::crash(Address{RoleKind::Leader, 9}, 0)}),
               std::invalid_argument);
}

TEST(FaultSchedule, ParsesEveryKind) {
  std::istringstream in(
      "# comment\n"
      "crash leader0 150\n"
      "\n"
      "partition acceptor0,acceptor1 10 20.5\n"
      "drop leader1->dep2 0.25\n"
      "drop *->replica0 0.1\n"
      "duplicate * 0.05\n");
  const auto faults = parse_fault_schedule(in);
  ASSERT_EQ(faults.size(), 5u);
  EXPECT_EQ(faults[0].kind, Fault::Kind::Crash);
  EXPECT_EQ(faults[0].node, (Address{RoleKind::Leader, 0}));
  EXPECT_EQ(faults[0].at, 150 * kMillisecond);
  EXPECT_EQ(faults[1].nodes.size(), 2u);
  EXPECT_EQ(faults[1].until, 20500);
  EXPECT_EQ(faults[2].link.from, (Address{RoleKind::Leader, 1}));
  EXPECT_EQ(faults[2].link.to, (Address{RoleKind::DepNode, 2}));
  EXPECT_FALSE(faults[3].link.from);
  EXPECT_DOUBLE_EQ(faults[4].probability, 0.05);
}

TEST(FaultSchedule, ErrorsNameTheLine) {
  for (const char* text : {"crash leader0\n", "explode leader0 1\n", "drop leader0 0.1\n",
                           "crash nobody3 5\n", "drop * 1.5\n", "\ncrash leader0 -1\n"}) {
    std::istringstream in(text);
    try {
      parse_fault_schedule(in);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const std::invalid_argument& e) {
      EXPECT_NE(std::string(e.what()).find("line "), std::string::npos);
    }
  }
}

TEST(Ratio, Reduces) {
  EXPECT_EQ(Ratio::of(6, 4), (Ratio{3, 2}));
  EXPECT_EQ(to_string(Ratio::of(8, 1)), "8");
  EXPECT_EQ(to_string(Ratio::of(3, 2)), "3/2");
}
