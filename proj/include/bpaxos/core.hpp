#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bpaxos {

using LeaderIndex = std::uint32_t;
using Sequence = std::uint32_t;

// A vertex is named by the leader that created it and that leader's
// per-leader counter. Ordering is (seq, leader) so that vertices of different
// leaders interleave inside a strongly connected component.
struct VertexId {
  LeaderIndex leader = 0;
  Sequence seq = 0;

  friend bool operator==(const VertexId&, const VertexId&) = default;
  friend std::strong_ordering operator<=>(const VertexId& a, const VertexId& b) {
    if (auto c = a.seq <=> b.seq; c != 0) return c;
    return a.leader <=> b.leader;
  }
};

std::strong_ordering vertex_id_order(VertexId a, VertexId b);
std::string to_string(VertexId v);

// Two big-endian u32s: leader, then sequence.
std::array<std::uint8_t, 8> encode_vertex_id(VertexId v);
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t vertex_hash(VertexId v);

using ClientId = std::uint64_t;

struct Get {
  std::string key;
  friend bool operator==(const Get&, const Get&) = default;
};

struct Set {
  std::string key;
  std::string value;
  friend bool operator==(const Set&, const Set&) = default;
};

using KvOp = std::variant<Get, Set>;

struct Command {
  ClientId client_id = 0;
  std::uint64_t client_seq = 0;
  KvOp op;

  const std::string& key() const;
  bool is_write() const { return std::holds_alternative<Set>(op); }

  friend bool operator==(const Command&, const Command&) = default;
};

struct Noop {
  friend bool operator==(const Noop&, const Noop&) = default;
};

using CmdOrNoop = std::variant<Noop, Command>;

inline bool is_noop(const CmdOrNoop& x) { return std::holds_alternative<Noop>(x); }

// Single-key KV conflict relation: same key and at least one write. Noop
// conflicts with nothing.
bool conflicts(const Command& x, const Command& y);
bool conflicts(const CmdOrNoop& x, const CmdOrNoop& y);

std::string to_string(const Command& c);
std::string to_string(const CmdOrNoop& c);

struct ExactDeps {
  std::set<VertexId> ids;
  friend bool operator==(const ExactDeps&, const ExactDeps&) = default;
};

// watermark[i] = s means every (i, k) with k <= s is a dependency.
struct CompactDeps {
  std::vector<std::optional<Sequence>> watermark;
  friend bool operator==(const CompactDeps&, const CompactDeps&) = default;
};

class Deps {
 public:
  Deps() : rep_(ExactDeps{}) {}
  Deps(ExactDeps d) : rep_(std::move(d)) {}
  Deps(CompactDeps d) : rep_(std::move(d)) {}

  static Deps exact(std::set<VertexId> ids = {}) { return Deps(ExactDeps{std::move(ids)}); }
  static Deps compact(std::size_t num_leaders) {
    return Deps(CompactDeps{std::vector<std::optional<Sequence>>(num_leaders)});
  }

  bool is_exact() const { return std::holds_alternative<ExactDeps>(rep_); }
  bool is_compact() const { return !is_exact(); }
  const ExactDeps& as_exact() const { return std::get<ExactDeps>(rep_); }
  const CompactDeps& as_compact() const { return std::get<CompactDeps>(rep_); }
  ExactDeps& as_exact() { return std::get<ExactDeps>(rep_); }
  CompactDeps& as_compact() { return std::get<CompactDeps>(rep_); }

  bool contains(VertexId v) const;
  bool empty() const;

  friend bool operator==(const Deps&, const Deps&) = default;

 private:
  std::variant<ExactDeps, CompactDeps> rep_;
};

std::set<VertexId> expand_deps(const Deps& d);

// Throws std::invalid_argument on mixed variants or mismatched widths.
Deps union_deps(const Deps& a, const Deps& b);

std::string to_string(const Deps& d);

// A vertex's value. Unbatched vertices carry one entry; batches carry many.
struct Proposal {
  std::vector<CmdOrNoop> cmds;
  Deps deps;

  static Proposal noop() { return Proposal{{Noop{}}, Deps{}}; }
  bool is_noop() const;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

bool conflicts(const Proposal& a, const Proposal& b);

// Dependencies of v as used for execution: the expansion minus v itself.
std::set<VertexId> dependencies_of(VertexId v, const Proposal& p);

std::string to_string(const Proposal& p);

// Printable rendering of a byte string; non-printable bytes become \xNN.
std::string escape_bytes(const std::string& bytes);

}  // namespace bpaxos
