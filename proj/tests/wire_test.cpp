#include <gtest/gtest.h>

#include <random>

#include "bpaxos/wire.hpp"
#include "test_context.hpp"

using namespace bpaxos;
using bpaxos::testing::get_cmd;
using bpaxos::testing::set_cmd;

namespace {

Proposal compact_proposal() {
  Proposal p{{set_cmd(3, 9, std::string("k\0y", 3), "v"), Noop{}}, Deps::compact(3)};
  p.deps.as_compact().watermark = {5, std::nullopt, 0};
  return p;
}

std::vector<Message> samples() {
  const VertexId v{2, 77};
  const Proposal exact{{get_cmd(1, 2, "a")}, Deps::exact({{0, 1}, {1, 4}})};
  return {
      ClientRequest{set_cmd(1, 1, "hot-key!", "0000beef")},
      DepRequest{v, {get_cmd(1, 2, "a"), set_cmd(1, 3, "b", "")}},
      DepReply{v, {get_cmd(1, 2, "a")}, Deps::exact({{0, 0}})},
      ProposeRequest{v, compact_proposal()},
      Phase1a{v, 12},
      Phase1b{v, 12, std::nullopt, std::nullopt},
      Phase1b{v, 12, Round{3}, exact},
      Phase2a{v, 1ULL << 40, exact},
      Phase2b{v, 4},
      Nack{v, 4, 9},
      Commit{v, Proposal::noop()},
      ClientResponse{1, 2, Output::found("xyz")},
      ClientResponse{1, 3, Output::unavailable()},
  };
}

}  // namespace

TEST(Wire, EveryMessageRoundTrips) {
  for (const Message& m : samples()) {
    const auto bytes = wire::encode(m);
    EXPECT_EQ(bytes[0], m.index());
    EXPECT_EQ(wire::decode(bytes), m) << message_name(m);
  }
}

TEST(Wire, FrameCarriesLengthAndSender) {
  const Message m = Phase2b{{1, 2}, 3};
  const auto frame = wire::encode_frame(Address{RoleKind::Acceptor, 4}, m);
  ASSERT_GE(frame.size(), 4u);
  const std::uint32_t len = (std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) |
                            (std::uint32_t{frame[2]} << 8) | frame[3];
  EXPECT_EQ(len, frame.size() - 4);
  const auto decoded = wire::decode_frame_body({frame.data() + 4, len});
  EXPECT_EQ(decoded.from, (Address{RoleKind::Acceptor, 4}));
  EXPECT_EQ(decoded.msg, m);
}

TEST(Wire, PhaseTwoBIsFixedSize) {
  // tag + leader + seq + round
  EXPECT_EQ(wire::encode(Phase2b{{1, 2}, 3}).size(), 1u + 4 + 4 + 8);
}

TEST(Wire, TruncationsAreRejected) {
  for (const Message& m : samples()) {
    const auto bytes = wire::encode(m);
    for (std::size_t n = 0; n < bytes.size(); ++n) {
      EXPECT_THROW(wire::decode({bytes.data(), n}), wire::DecodeError) << message_name(m) << " cut at " << n;
    }
  }
}

TEST(Wire, TrailingBytesAreRejected) {
  auto bytes = wire::encode(Phase1a{{0, 0}, 0});
  bytes.push_back(0);
  EXPECT_THROW(wire::decode(bytes), wire::DecodeError);
}

TEST(Wire, UnknownTagIsRejected) {
  const std::vector<std::uint8_t> bytes{0xee};
  EXPECT_THROW(wire::decode(bytes), wire::DecodeError);
}

TEST(Wire, RandomGarbageNeverCrashes) {
  std::mt19937 rng(5);
  for (int i = 0; i < 5000; ++i) {
    std::vector<std::uint8_t> bytes(rng() % 40);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    if (!bytes.empty()) bytes[0] %= 12;
    try {
      (void)wire::decode(bytes);
    } catch (const wire::DecodeError&) {
    }
  }
}

TEST(Address, ParseAndPrint) {
  for (RoleKind k : {RoleKind::Client, RoleKind::Leader, RoleKind::DepNode, RoleKind::Proposer,
                     RoleKind::Acceptor, RoleKind::Replica}) {
    const Address a{k, 17};
    EXPECT_EQ(parse_address(to_string(a)), a);
  }
  EXPECT_EQ(to_string(Address{RoleKind::DepNode, 2}), "dep2");
  EXPECT_FALSE(parse_address("leader"));
  EXPECT_FALSE(parse_address("bogus3"));
  EXPECT_FALSE(parse_address("leader3x"));
}
