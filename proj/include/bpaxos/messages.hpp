#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bpaxos/core.hpp"

namespace bpaxos {

enum class RoleKind : std::uint8_t { Client, Leader, DepNode, Proposer, Acceptor, Replica };

const char* role_name(RoleKind kind);

struct Address {
  RoleKind kind = RoleKind::Client;
  std::uint32_t index = 0;

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

// "leader0", "dep2", "client7", ...
std::string to_string(const Address& a);
std::optional<Address> parse_address(const std::string& text);

using Round = std::uint64_t;

struct Output {
  enum class Kind : std::uint8_t { Ack, Value, NotFound, DuplicateUnavailable };
  Kind kind = Kind::Ack;
  std::string value;

  static Output ack() { return {Kind::Ack, {}}; }
  static Output found(std::string v) { return {Kind::Value, std::move(v)}; }
  static Output not_found() { return {Kind::NotFound, {}}; }
  static Output unavailable() { return {Kind::DuplicateUnavailable, {}}; }

  friend bool operator==(const Output&, const Output&) = default;
};

std::string to_string(const Output& o);

struct ClientRequest {
  Command cmd;
  friend bool operator==(const ClientRequest&, const ClientRequest&) = default;
};

struct DepRequest {
  VertexId v;
  std::vector<Command> cmds;
  friend bool operator==(const DepRequest&, const DepRequest&) = default;
};

struct DepReply {
  VertexId v;
  std::vector<Command> cmds;
  Deps deps;
  friend bool operator==(const DepReply&, const DepReply&) = default;
};

struct ProposeRequest {
  VertexId v;
  Proposal proposal;
  friend bool operator==(const ProposeRequest&, const ProposeRequest&) = default;
};

struct Phase1a {
  VertexId v;
  Round round = 0;
  friend bool operator==(const Phase1a&, const Phase1a&) = default;
};

struct Phase1b {
  VertexId v;
  Round round = 0;
  std::optional<Round> voted_round;
  std::optional<Proposal> voted_value;
  friend bool operator==(const Phase1b&, const Phase1b&) = default;
};

struct Phase2a {
  VertexId v;
  Round round = 0;
  Proposal value;
  friend bool operator==(const Phase2a&, const Phase2a&) = default;
};

struct Phase2b {
  VertexId v;
  Round round = 0;
  friend bool operator==(const Phase2b&, const Phase2b&) = default;
};

// `round` is the rejected round; `promised` is what the acceptor holds.
struct Nack {
  VertexId v;
  Round round = 0;
  Round promised = 0;
  friend bool operator==(const Nack&, const Nack&) = default;
};

struct Commit {
  VertexId v;
  Proposal proposal;
  friend bool operator==(const Commit&, const Commit&) = default;
};

struct ClientResponse {
  ClientId client_id = 0;
  std::uint64_t client_seq = 0;
  Output output;
  friend bool operator==(const ClientResponse&, const ClientResponse&) = default;
};

using Message = std::variant<ClientRequest, DepRequest, DepReply, ProposeRequest, Phase1a, Phase1b,
                             Phase2a, Phase2b, Nack, Commit, ClientResponse>;

const char* message_name(const Message& m);

}  // namespace bpaxos
