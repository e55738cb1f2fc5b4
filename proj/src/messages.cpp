#include "bpaxos/messages.hpp"

#include <array>
#include <cctype>
#include <stdexcept>

#include "bpaxos/role.hpp"

namespace bpaxos {

namespace {

constexpr std::array<const char*, 6> kRolePrefixes = {"client", "leader", "dep", "proposer",
                                                      "acceptor", "replica"};

}  // namespace

const char* role_name(RoleKind kind) { return kRolePrefixes[static_cast<std::size_t>(kind)]; }

std::string to_string(const Address& a) { return role_name(a.kind) + std::to_string(a.index); }

std::optional<Address> parse_address(const std::string& text) {
  std::size_t split = 0;
  while (split < text.size() && !std::isdigit(static_cast<unsigned char>(text[split]))) ++split;
  if (split == 0 || split == text.size()) return std::nullopt;
  const std::string prefix = text.substr(0, split);
  for (std::size_t k = 0; k < kRolePrefixes.size(); ++k) {
    if (prefix != kRolePrefixes[k]) continue;
    for (std::size_t i = split; i < text.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
    }
    return Address{static_cast<RoleKind>(k), static_cast<std::uint32_t>(std::stoul(text.substr(split)))};
  }
  return std::nullopt;
}

std::string to_string(const Output& o) {
  switch (o.kind) {
    case Output::Kind::Ack: return "ack";
    case Output::Kind::Value: return "value(" + escape_bytes(o.value) + ")";
    case Output::Kind::NotFound: return "notfound";
    case Output::Kind::DuplicateUnavailable: return "dup-unavailable";
  }
  return "?";
}

const char* message_name(const Message& m) {
  static constexpr std::array<const char*, std::variant_size_v<Message>> names = {
      "ClientRequest", "DepRequest", "DepReply", "ProposeRequest", "Phase1a", "Phase1b",
      "Phase2a",       "Phase2b",    "Nack",     "Commit",         "ClientResponse"};
  return names[m.index()];
}

void ClusterConfig::validate() const {
  const std::uint32_t n = 2 * f + 1;
  if (f == 0) throw std::invalid_argument("f must be at least 1");
  if (num_dep_nodes != n) throw std::invalid_argument("dependency service needs exactly 2f+1 nodes");
  if (num_acceptors != n) throw std::invalid_argument("consensus service needs exactly 2f+1 acceptors");
  if (num_leaders < f + 1) throw std::invalid_argument("need at least f+1 leaders");
  if (num_proposers < f + 1) throw std::invalid_argument("need at least f+1 proposers");
  if (num_replicas < f + 1) throw std::invalid_argument("need at least f+1 replicas");
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

}  // namespace bpaxos
