#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bpaxos/core.hpp"

namespace bpaxos {

// Single hot key targeted by conflicting writes. Keys and values are 8 bytes.
inline const std::string kHotKey = "hot-key!";

// Draws commands for closed-loop clients: with probability `conflict_rate` a
// Set on the hot key, otherwise a Get on a key unique to the draw. A draw
// depends only on (seed, client, seq), never on scheduling.
class CommandGenerator {
 public:
  CommandGenerator(double conflict_rate, std::uint64_t seed);

  Command next(ClientId client, std::uint64_t seq) const;

  double conflict_rate() const { return conflict_rate_; }

 private:
  double conflict_rate_;
  std::uint64_t seed_;
};

struct WorkloadConfig {
  std::uint32_t clients = 1;
  std::uint64_t commands_per_client = 1;
  double conflict_rate = 0.0;
  std::uint64_t seed = 1;
};

// Per-client command streams; client_seq starts at 1.
std::vector<std::vector<Command>> generate_workload(const WorkloadConfig& config);

std::string unique_key(ClientId client, std::uint64_t seq);

}  // namespace bpaxos
