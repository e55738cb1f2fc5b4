#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bpaxos/history.hpp"
#include "bpaxos/role.hpp"

namespace bpaxos {

// Instantiates every protocol role (leaders, dependency nodes, proposers,
// acceptors, replicas) for a cluster.
std::vector<std::pair<Address, std::unique_ptr<Role>>> build_cluster(const ClusterConfig& config);

// A link between two logical nodes; an empty endpoint matches any node.
struct LinkSpec {
  std::optional<Address> from;
  std::optional<Address> to;

  bool matches(const Address& a, const Address& b) const {
    return (!from || *from == a) && (!to || *to == b);
  }
};

struct Fault {
  enum class Kind { Crash, Partition, Drop, Duplicate };

  Kind kind = Kind::Crash;
  Address node;                 // crash
  Time at = 0;                  // crash time, or partition start
  Time until = 0;               // partition end
  std::vector<Address> nodes;   // partition side
  LinkSpec link;                // drop / duplicate
  double probability = 0.0;

  static Fault crash(Address node, Time at);
  static Fault partition(std::vector<Address> nodes, Time start, Time end);
  static Fault drop(LinkSpec link, double probability);
  static Fault duplicate(LinkSpec link, double probability);
};

// One fault per line:
//   crash <node> <time_ms>
//   partition <node,node,...> <start_ms> <end_ms>
//   drop <link> <prob>          (link: from->to, either side may be *)
//   duplicate <link> <prob>
// Blank lines and lines starting with # are ignored. Throws
// std::invalid_argument naming the offending line.
std::vector<Fault> parse_fault_schedule(std::istream& in);

struct SimConfig {
  std::uint64_t seed = 1;
  ClusterConfig cluster;
  Time min_delay = 1 * kMillisecond;
  Time max_delay = 1 * kMillisecond;
  double drop_prob = 0.0;
  double dup_prob = 0.0;
  // One physical node per index hosts a leader, a dependency node, a
  // proposer, an acceptor and a replica.
  bool coupled = false;
  // Time a protocol node is busy per message it sends or receives over the
  // network. Messages between roles on one physical node are free.
  Time service_cost = 0;
  Time time_limit = 120 * kSecond;
  // Extra simulated time allowed after the last client finishes.
  Time drain = 2 * kSecond;
  bool record_trace = false;

  void validate() const;
};

struct WorkloadSpec {
  std::uint32_t clients = 1;
  std::uint64_t commands_per_client = 1;  // 0: unbounded, run to time_limit
  double conflict_rate = 0.0;
};

struct MessageCounts {
  std::map<Address, std::uint64_t> sent;
  std::map<Address, std::uint64_t> received;

  std::uint64_t total(RoleKind kind) const;  // sent + received over the role
};

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio of(std::int64_t n, std::int64_t d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

std::string to_string(const Ratio& r);

// Messages sent plus received per command at one node of each role.
struct RoleLoads {
  Ratio leader;
  Ratio proposer;
  Ratio dep_node;
  Ratio acceptor;
  Ratio replica;
};

struct SimResult {
  History history;
  MessageCounts counts;
  bool completed = false;  // every client finished its workload
  Time end_time = 0;
  std::uint64_t completed_commands = 0;
  std::vector<std::string> trace;  // wire frames as hex, when requested
};

// Deterministic: equal inputs produce byte-identical histories.
SimResult run_simulation(const SimConfig& config, const WorkloadSpec& workload,
                         const std::vector<Fault>& faults = {});

// Per-role load per command. A command involves one leader and one proposer,
// every dependency node and acceptor, and every replica.
RoleLoads message_counts(const SimResult& result, const ClusterConfig& cluster);

}  // namespace bpaxos
