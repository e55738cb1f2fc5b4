#include "bpaxos/core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace bpaxos {

std::strong_ordering vertex_id_order(VertexId a, VertexId b) { return a <=> b; }

std::string to_string(VertexId v) {
  return std::to_string(v.leader) + "." + std::to_string(v.seq);
}

std::array<std::uint8_t, 8> encode_vertex_id(VertexId v) {
  std::array<std::uint8_t, 8> out{};
  for (int i = 0; i < 4; ++i) {
    out[i] = static_cast<std::uint8_t>(v.leader >> (24 - 8 * i));
    out[4 + i] = static_cast<std::uint8_t>(v.seq >> (24 - 8 * i));
  }
  return out;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t vertex_hash(VertexId v) {
  auto bytes = encode_vertex_id(v);
  return fnv1a64(bytes);
}

const std::string& Command::key() const {
  return std::visit([](const auto& o) -> const std::string& { return o.key; }, op);
}

bool conflicts(const Command& x, const Command& y) {
  return x.key() == y.key() && (x.is_write() || y.is_write());
}

bool conflicts(const CmdOrNoop& x, const CmdOrNoop& y) {
  if (is_noop(x) || is_noop(y)) return false;
  return conflicts(std::get<Command>(x), std::get<Command>(y));
}

std::string escape_bytes(const std::string& bytes) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    if (c >= 0x21 && c <= 0x7e && c != '\\' && c != '=') {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\x";
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

std::string to_string(const Command& c) {
  std::ostringstream os;
  os << "c" << c.client_id << "#" << c.client_seq << ":";
  if (const auto* s = std::get_if<Set>(&c.op)) {
    os << "set(" << escape_bytes(s->key) << "," << escape_bytes(s->value) << ")";
  } else {
    os << "get(" << escape_bytes(c.key()) << ")";
  }
  return os.str();
}

std::string to_string(const CmdOrNoop& c) {
  return is_noop(c) ? std::string("noop") : to_string(std::get<Command>(c));
}

bool Deps::contains(VertexId v) const {
  if (is_exact()) return as_exact().ids.count(v) > 0;
  const auto& w = as_compact().watermark;
  return v.leader < w.size() && w[v.leader] && v.seq <= *w[v.leader];
}

bool Deps::empty() const {
  if (is_exact()) return as_exact().ids.empty();
  const auto& w = as_compact().watermark;
  return std::none_of(w.begin(), w.end(), [](const auto& s) { return s.has_value(); });
}

std::set<VertexId> expand_deps(const Deps& d) {
  if (d.is_exact()) return d.as_exact().ids;
  std::set<VertexId> out;
  const auto& w = d.as_compact().watermark;
  for (LeaderIndex i = 0; i < w.size(); ++i) {
    if (!w[i]) continue;
    for (Sequence k = 0; k <= *w[i]; ++k) out.insert(VertexId{i, k});
  }
  return out;
}

Deps union_deps(const Deps& a, const Deps& b) {
  if (a.is_exact() != b.is_exact()) {
    throw std::invalid_argument("union_deps: mixed exact and compact dependency sets");
  }
  if (a.is_exact()) {
    auto ids = a.as_exact().ids;
    ids.insert(b.as_exact().ids.begin(), b.as_exact().ids.end());
    return Deps::exact(std::move(ids));
  }
  const auto& wa = a.as_compact().watermark;
  const auto& wb = b.as_compact().watermark;
  if (wa.size() != wb.size()) {
    throw std::invalid_argument("union_deps: compact watermark widths differ");
  }
  CompactDeps out{wa};
  for (std::size_t i = 0; i < wb.size(); ++i) {
    if (wb[i] && (!out.watermark[i] || *out.watermark[i] < *wb[i])) out.watermark[i] = wb[i];
  }
  return Deps(std::move(out));
}

std::string to_string(const Deps& d) {
  std::ostringstream os;
  if (d.is_exact()) {
    os << "{";
    bool first = true;
    for (const auto& v : d.as_exact().ids) {
      os << (first ? "" : ",") << to_string(v);
      first = false;
    }
    os << "}";
  } else {
    os << "[";
    const auto& w = d.as_compact().watermark;
    for (std::size_t i = 0; i < w.size(); ++i) {
      os << (i ? "," : "");
      if (w[i]) os << *w[i]; else os << "-";
    }
    os << "]";
  }
  return os.str();
}

bool Proposal::is_noop() const {
  return std::all_of(cmds.begin(), cmds.end(), [](const CmdOrNoop& c) { return bpaxos::is_noop(c); });
}

bool conflicts(const Proposal& a, const Proposal& b) {
  for (const auto& x : a.cmds) {
    for (const auto& y : b.cmds) {
      if (conflicts(x, y)) return true;
    }
  }
  return false;
}

std::set<VertexId> dependencies_of(VertexId v, const Proposal& p) {
  auto out = expand_deps(p.deps);
  out.erase(v);
  return out;
}

std::string to_string(const Proposal& p) {
  std::string out = "<";
  for (std::size_t i = 0; i < p.cmds.size(); ++i) {
    if (i) out += ";";
    out += to_string(p.cmds[i]);
  }
  return out + "|" + to_string(p.deps) + ">";
}

}  // namespace bpaxos
