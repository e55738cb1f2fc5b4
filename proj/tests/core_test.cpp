#include <gtest/gtest.h>

#include <random>

#include "bpaxos/core.hpp"
#include "test_context.hpp"

using namespace bpaxos;
using bpaxos::testing::get_cmd;
using bpaxos::testing::set_cmd;

TEST(VertexId, OrdersBySequenceThenLeader) {
  EXPECT_LT((VertexId{1, 0}), (VertexId{0, 1}));
  EXPECT_LT((VertexId{0, 3}), (VertexId{2, 3}));
  EXPECT_EQ(vertex_id_order(VertexId{4, 4}, VertexId{4, 4}), std::strong_ordering::equal);
}

TEST(VertexId, EncodingIsTwoBigEndianWords) {
  const auto b = encode_vertex_id(VertexId{0x01020304, 0xa0b0c0d0});
  const std::array<std::uint8_t, 8> want{0x01, 0x02, 0x03, 0x04, 0xa0, 0xb0, 0xc0, 0xd0};
  EXPECT_EQ(b, want);
}

TEST(Fnv1a, PublishedTestVectors) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ULL);
  const std::uint8_t a[] = {'a'};
  EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cULL);
  const std::uint8_t foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  EXPECT_EQ(fnv1a64(foobar), 0x85944171f73967e8ULL);
}

TEST(Conflicts, KeyValueRelation) {
  EXPECT_TRUE(conflicts(set_cmd(1, 1, "a", "0"), set_cmd(2, 1, "a", "1")));
  EXPECT_TRUE(conflicts(set_cmd(1, 1, "a", "0"), get_cmd(2, 1, "a")));
  EXPECT_TRUE(conflicts(get_cmd(2, 1, "a"), set_cmd(1, 1, "a", "0")));
  EXPECT_FALSE(conflicts(get_cmd(1, 1, "a"), get_cmd(2, 1, "a")));
  EXPECT_FALSE(conflicts(set_cmd(1, 1, "a", "0"), set_cmd(1, 2, "b", "0")));
}

TEST(Conflicts, NoopConflictsWithNothing) {
  const CmdOrNoop w = set_cmd(1, 1, "a", "0");
  EXPECT_FALSE(conflicts(CmdOrNoop{Noop{}}, w));
  EXPECT_FALSE(conflicts(w, CmdOrNoop{Noop{}}));
  EXPECT_FALSE(conflicts(CmdOrNoop{Noop{}}, CmdOrNoop{Noop{}}));
}

TEST(Conflicts, RelationIsSymmetricOnRandomCommands) {
  std::mt19937 rng(3);
  auto draw = [&](std::uint64_t seq) -> Command {
    std::string key(1, static_cast<char>('a' + rng() % 3));
    if (rng() % 2) return get_cmd(1, seq, key);
    return set_cmd(1, seq, key, "v");
  };
  for (int i = 0; i < 500; ++i) {
    const Command x = draw(1), y = draw(2);
    EXPECT_EQ(conflicts(x, y), conflicts(y, x));
  }
}

TEST(Deps, UnionOfExactIsSetUnion) {
  const Deps a = Deps::exact({{0, 1}, {1, 2}});
  const Deps b = Deps::exact({{1, 2}, {2, 0}});
  EXPECT_EQ(union_deps(a, b), Deps::exact({{0, 1}, {1, 2}, {2, 0}}));
}

TEST(Deps, UnionOfCompactIsPointwiseMax) {
  Deps a = Deps::compact(3);
  a.as_compact().watermark = {1, std::nullopt, 4};
  Deps b = Deps::compact(3);
  b.as_compact().watermark = {3, 2, std::nullopt};
  Deps want = Deps::compact(3);
  want.as_compact().watermark = {3, 2, 4};
  EXPECT_EQ(union_deps(a, b), want);
}

TEST(Deps, UnionRejectsMixedVariants) {
  EXPECT_THROW(union_deps(Deps::exact(), Deps::compact(2)), std::invalid_argument);
  EXPECT_THROW(union_deps(Deps::compact(2), Deps::compact(3)), std::invalid_argument);
}

TEST(Deps, UnionIsCommutativeAndIdempotentOnCompact) {
  std::mt19937 rng(11);
  auto draw = [&] {
    Deps d = Deps::compact(4);
    for (auto& w : d.as_compact().watermark) {
      if (rng() % 3) w = rng() % 6;
    }
    return d;
  };
  for (int i = 0; i < 200; ++i) {
    const Deps a = draw(), b = draw();
    EXPECT_EQ(union_deps(a, b), union_deps(b, a));
    EXPECT_EQ(union_deps(a, a), a);
    // The union's expansion is exactly the union of the expansions.
    auto ea = expand_deps(a);
    const auto eb = expand_deps(b);
    ea.insert(eb.begin(), eb.end());
    EXPECT_EQ(expand_deps(union_deps(a, b)), ea);
  }
}

TEST(Deps, CompactExpansionAndMembership) {
  Deps d = Deps::compact(3);
  d.as_compact().watermark = {1, std::nullopt, 0};
  const std::set<VertexId> want{{0, 0}, {0, 1}, {2, 0}};
  EXPECT_EQ(expand_deps(d), want);
  EXPECT_TRUE(d.contains({0, 1}));
  EXPECT_FALSE(d.contains({0, 2}));
  EXPECT_FALSE(d.contains({1, 0}));
  EXPECT_FALSE(d.empty());
  EXPECT_TRUE(Deps::compact(3).empty());
}

TEST(Deps, DependenciesOfDropsSelf) {
  Proposal p{{set_cmd(1, 1, "a", "0")}, Deps::compact(2)};
  p.deps.as_compact().watermark = {2, 0};
  const auto deps = dependencies_of(VertexId{0, 2}, p);
  EXPECT_EQ(deps.count(VertexId{0, 2}), 0u);
  EXPECT_EQ(deps.size(), 3u);
}

TEST(Proposal, NoopDetection) {
  EXPECT_TRUE(Proposal::noop().is_noop());
  EXPECT_FALSE((Proposal{{set_cmd(1, 1, "a", "0")}, Deps{}}).is_noop());
}

TEST(Proposal, BatchesConflictWhenAnyPairDoes) {
  const Proposal a{{get_cmd(1, 1, "x"), set_cmd(1, 2, "y", "1")}, Deps{}};
  const Proposal b{{get_cmd(2, 1, "y")}, Deps{}};
  const Proposal c{{get_cmd(2, 1, "x")}, Deps{}};
  EXPECT_TRUE(conflicts(a, b));
  EXPECT_FALSE(conflicts(a, c));
  EXPECT_FALSE(conflicts(a, Proposal::noop()));
}

TEST(EscapeBytes, NonPrintableBytesAreHexEscaped) {
  EXPECT_EQ(escape_bytes(std::string("a\0b", 3)), "a\\x00b");
  EXPECT_EQ(escape_bytes("k=v"), "k\\x3dv");
}
