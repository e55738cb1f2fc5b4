#include <gtest/gtest.h>

#include "bpaxos/leader.hpp"
#include "test_context.hpp"

using namespace bpaxos;
using bpaxos::testing::FakeContext;
using bpaxos::testing::get_cmd;
using bpaxos::testing::set_cmd;

namespace {

Address dep(std::uint32_t i) { return Address{RoleKind::DepNode, i}; }

}  // namespace

TEST(Leader, AssignsIncreasingIdsAndContactsEveryNode) {
  ClusterConfig config;
  Leader leader(1, config);
  FakeContext ctx(Address{RoleKind::Leader, 1});
  leader.on_message(Address{RoleKind::Client, 0}, ClientRequest{set_cmd(0, 1, "a", "1")}, ctx);
  leader.on_message(Address{RoleKind::Client, 0}, ClientRequest{set_cmd(0, 2, "a", "2")}, ctx);
  const auto reqs = ctx.sent_of<DepRequest>();
  ASSERT_EQ(reqs.size(), 6u);
  EXPECT_EQ(reqs[0].second.v, (VertexId{1, 0}));
  EXPECT_EQ(reqs[3].second.v, (VertexId{1, 1}));
  for (std::uint32_t d = 0; d < 3; ++d) EXPECT_EQ(reqs[d].first, dep(d));
  EXPECT_EQ(leader.next_seq(), 2u);
}

TEST(Leader, ProposesAfterExactlyQuorumReplies) {
  ClusterConfig config;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Command x = set_cmd(0, 1, "a", "1");
  const VertexId v = leader.assign_vertex_id({x}, ctx);

  EXPECT_FALSE(leader.on_dep_reply(0, DepReply{v, {x}, Deps::exact({{1, 0}})}, ctx));
  // A duplicate reply from the same node does not count twice.
  EXPECT_FALSE(leader.on_dep_reply(0, DepReply{v, {x}, Deps::exact({{1, 0}})}, ctx));
  auto req = leader.on_dep_reply(2, DepReply{v, {x}, Deps::exact({{1, 1}})}, ctx);
  ASSERT_TRUE(req);
  EXPECT_EQ(req->proposal.deps, Deps::exact({{1, 0}, {1, 1}}));
  EXPECT_EQ(req->proposal.cmds, std::vector<CmdOrNoop>{x});
  // The third reply arrives after the proposal went out and is ignored.
  EXPECT_FALSE(leader.on_dep_reply(1, DepReply{v, {x}, Deps::exact({{2, 0}})}, ctx));

  const auto proposes = ctx.sent_of<ProposeRequest>();
  ASSERT_EQ(proposes.size(), 1u);
  EXPECT_EQ(proposes[0].first, (Address{RoleKind::Proposer, designated_proposer(v, config.num_proposers)}));
}

TEST(Leader, DepQuorumOneMutationProposesEarly) {
  ClusterConfig config;
  config.mutations.dep_quorum_one = true;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Command x = get_cmd(0, 1, "a");
  const VertexId v = leader.assign_vertex_id({x}, ctx);
  EXPECT_TRUE(leader.on_dep_reply(1, DepReply{v, {x}, Deps::exact()}, ctx));
}

TEST(Leader, ThriftyContactsQuorumAndWidensOnTimeout) {
  ClusterConfig config;
  config.thrifty = true;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Command x = get_cmd(0, 1, "a");
  const VertexId v = leader.assign_vertex_id({x}, ctx);
  EXPECT_EQ(ctx.sent_of<DepRequest>().size(), config.quorum());
  ASSERT_EQ(ctx.timers.size(), 1u);
  const auto token = ctx.timers[0].second;
  leader.on_dep_reply(ctx.sent_of<DepRequest>()[0].first.index, DepReply{v, {x}, Deps::exact()}, ctx);
  ctx.clear();
  leader.on_timer(token, ctx);
  // One node already replied; the other two are asked now.
  EXPECT_EQ(ctx.sent_of<DepRequest>().size(), 2u);
}

TEST(Leader, CompactRepliesUnionPointwise) {
  ClusterConfig config;
  config.compact_deps = true;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Command x = set_cmd(0, 1, "a", "1");
  const VertexId v = leader.assign_vertex_id({x}, ctx);
  Deps a = Deps::compact(2), b = Deps::compact(2), want = Deps::compact(2);
  a.as_compact().watermark = {3, std::nullopt};
  b.as_compact().watermark = {1, 4};
  want.as_compact().watermark = {3, 4};
  leader.on_dep_reply(0, DepReply{v, {x}, a}, ctx);
  auto req = leader.on_dep_reply(1, DepReply{v, {x}, b}, ctx);
  ASSERT_TRUE(req);
  EXPECT_EQ(req->proposal.deps, want);
}

TEST(Leader, BatchesBySizeAndFlushTimer) {
  ClusterConfig config;
  config.batch_size = 3;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Address client{RoleKind::Client, 0};
  for (std::uint64_t s = 1; s <= 4; ++s) leader.on_message(client, ClientRequest{get_cmd(0, s, "k")}, ctx);
  auto reqs = ctx.sent_of<DepRequest>();
  ASSERT_EQ(reqs.size(), 3u);  // one vertex, three nodes
  EXPECT_EQ(reqs[0].second.cmds.size(), 3u);
  EXPECT_EQ(leader.buffered(), 1u);

  // Two flush timers were armed: the first belongs to the batch that filled
  // up and must not flush the new buffer early.
  ASSERT_EQ(ctx.timers.size(), 3u);  // flush, resend, flush
  ctx.sent.clear();
  leader.on_timer(ctx.timers[0].second, ctx);
  EXPECT_TRUE(ctx.sent_of<DepRequest>().empty());
  leader.on_timer(ctx.timers[2].second, ctx);
  reqs = ctx.sent_of<DepRequest>();
  ASSERT_EQ(reqs.size(), 3u);
  EXPECT_EQ(reqs[0].second.cmds.size(), 1u);
  EXPECT_EQ(leader.buffered(), 0u);
}

TEST(Leader, ResendOnlyAsksMissingNodes) {
  ClusterConfig config;
  Leader leader(0, config);
  FakeContext ctx(Address{RoleKind::Leader, 0});
  const Command x = get_cmd(0, 1, "a");
  const VertexId v = leader.assign_vertex_id({x}, ctx);
  leader.on_dep_reply(1, DepReply{v, {x}, Deps::exact()}, ctx);
  const auto token = ctx.timers.back().second;
  ctx.clear();
  leader.on_timer(token, ctx);
  const auto reqs = ctx.sent_of<DepRequest>();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].first, dep(0));
  EXPECT_EQ(reqs[1].first, dep(2));
}

TEST(Leader, ClientRetryMovesToTheNextProposer) {
  ClusterConfig config;
  config.num_proposers = 3;
  Leader leader(1, config);
  FakeContext ctx(Address{RoleKind::Leader, 1});
  const Address client{RoleKind::Client, 0};
  auto proposer_of_last = [&] {
    const auto reqs = ctx.sent_of<DepRequest>();
    const VertexId v = reqs.back().second.v;
    for (std::uint32_t d = 0; d < 2; ++d) leader.on_dep_reply(d, DepReply{v, {}, Deps::exact({})}, ctx);
    return ctx.sent_of<ProposeRequest>().back().first.index;
  };
  leader.on_message(client, ClientRequest{set_cmd(0, 1, "a", "1")}, ctx);
  EXPECT_EQ(proposer_of_last(), 1u);
  leader.on_message(client, ClientRequest{set_cmd(0, 1, "a", "1")}, ctx);
  EXPECT_EQ(proposer_of_last(), 2u);
  leader.on_message(client, ClientRequest{set_cmd(0, 2, "a", "2")}, ctx);
  EXPECT_EQ(proposer_of_last(), 2u);
  leader.on_message(client, ClientRequest{set_cmd(0, 2, "a", "2")}, ctx);
  EXPECT_EQ(proposer_of_last(), 0u);
}
