#include "bpaxos/workload.hpp"

#include <stdexcept>

namespace bpaxos {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex8(std::uint32_t x) {
  static const char* digits = "0123456789abcdef";
  std::string s(8, '0');
  for (int i = 7; i >= 0; --i) {
    s[i] = digits[x & 0xf];
    x >>= 4;
  }
  return s;
}

}  // namespace

std::string unique_key(ClientId client, std::uint64_t seq) {
  const std::uint64_t id = (client << 32) | (seq & 0xffffffffULL);
  std::string key(8, '\0');
  for (int i = 0; i < 8; ++i) key[i] = static_cast<char>(id >> (56 - 8 * i));
  return key;
}

CommandGenerator::CommandGenerator(double conflict_rate, std::uint64_t seed)
    : conflict_rate_(conflict_rate), seed_(seed) {
  if (!(conflict_rate >= 0.0 && conflict_rate <= 1.0)) {
    throw std::invalid_argument("conflict rate must be in [0, 1]");
  }
}

Command CommandGenerator::next(ClientId client, std::uint64_t seq) const {
  std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(client * 0x100000001b3ULL ^ seq)));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  Command c;
  c.client_id = client;
  c.client_seq = seq;
  if (coin(rng) < conflict_rate_) {
    c.op = Set{kHotKey, hex8(static_cast<std::uint32_t>(rng()))};
  } else {
    c.op = Get{unique_key(client, seq)};
  }
  return c;
}

std::vector<std::vector<Command>> generate_workload(const WorkloadConfig& config) {
  if (config.clients == 0) throw std::invalid_argument("need at least one client");
  CommandGenerator gen(config.conflict_rate, config.seed);
  std::vector<std::vector<Command>> streams(config.clients);
  for (ClientId c = 0; c < config.clients; ++c) {
    for (std::uint64_t s = 1; s <= config.commands_per_client; ++s) streams[c].push_back(gen.next(c, s));
  }
  return streams;
}

}  // namespace bpaxos
