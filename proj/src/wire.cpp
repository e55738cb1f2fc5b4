#include "bpaxos/wire.hpp"

#include <string>

namespace bpaxos::wire {

namespace {

class Writer {
 public:
  void u8(std::uint8_t x) { out_.push_back(x); }
  void u32(std::uint32_t x) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(x >> s));
  }
  void u64(std::uint64_t x) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(x >> s));
  }
  void bytes(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void vertex(VertexId v) {
    auto enc = encode_vertex_id(v);
    out_.insert(out_.end(), enc.begin(), enc.end());
  }
  void command(const Command& c) {
    u64(c.client_id);
    u64(c.client_seq);
    if (const auto* s = std::get_if<Set>(&c.op)) {
      u8(1);
      bytes(s->key);
      bytes(s->value);
    } else {
      u8(0);
      bytes(c.key());
    }
  }
  void commands(const std::vector<Command>& cs) {
    u32(static_cast<std::uint32_t>(cs.size()));
    for (const auto& c : cs) command(c);
  }
  void deps(const Deps& d) {
    if (d.is_exact()) {
      u8(0);
      u32(static_cast<std::uint32_t>(d.as_exact().ids.size()));
      for (const auto& v : d.as_exact().ids) vertex(v);
    } else {
      u8(1);
      const auto& w = d.as_compact().watermark;
      u32(static_cast<std::uint32_t>(w.size()));
      for (const auto& s : w) {
        u8(s ? 1 : 0);
        u32(s.value_or(0));
      }
    }
  }
  void proposal(const Proposal& p) {
    u32(static_cast<std::uint32_t>(p.cmds.size()));
    for (const auto& c : p.cmds) {
      if (is_noop(c)) {
        u8(0);
      } else {
        u8(1);
        command(std::get<Command>(c));
      }
    }
    deps(p.deps);
  }
  void output(const Output& o) {
    u8(static_cast<std::uint8_t>(o.kind));
    bytes(o.value);
  }

  void operator()(const ClientRequest& m) { command(m.cmd); }
  void operator()(const DepRequest& m) { vertex(m.v); commands(m.cmds); }
  void operator()(const DepReply& m) { vertex(m.v); commands(m.cmds); deps(m.deps); }
  void operator()(const ProposeRequest& m) { vertex(m.v); proposal(m.proposal); }
  void operator()(const Phase1a& m) { vertex(m.v); u64(m.round); }
  void operator()(const Phase1b& m) {
    vertex(m.v);
    u64(m.round);
    u8(m.voted_round ? 1 : 0);
    if (m.voted_round) {
      u64(*m.voted_round);
      proposal(m.voted_value.value_or(Proposal{}));
    }
  }
  void operator()(const Phase2a& m) { vertex(m.v); u64(m.round); proposal(m.value); }
  void operator()(const Phase2b& m) { vertex(m.v); u64(m.round); }
  void operator()(const Nack& m) { vertex(m.v); u64(m.round); u64(m.promised); }
  void operator()(const Commit& m) { vertex(m.v); proposal(m.proposal); }
  void operator()(const ClientResponse& m) { u64(m.client_id); u64(m.client_seq); output(m.output); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x = (x << 8) | in_[pos_++];
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x = (x << 8) | in_[pos_++];
    return x;
  }
  std::string bytes() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  VertexId vertex() {
    VertexId v;
    v.leader = u32();
    v.seq = u32();
    return v;
  }
  Command command() {
    Command c;
    c.client_id = u64();
    c.client_seq = u64();
    const std::uint8_t kind = u8();
    if (kind == 1) {
      Set s;
      s.key = bytes();
      s.value = bytes();
      c.op = std::move(s);
    } else if (kind == 0) {
      c.op = Get{bytes()};
    } else {
      throw DecodeError("bad op tag");
    }
    return c;
  }
  std::vector<Command> commands() {
    const std::uint32_t n = count();
    std::vector<Command> cs;
    cs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) cs.push_back(command());
    return cs;
  }
  Deps deps() {
    const std::uint8_t kind = u8();
    const std::uint32_t n = count();
    if (kind == 0) {
      std::set<VertexId> ids;
      for (std::uint32_t i = 0; i < n; ++i) ids.insert(vertex());
      return Deps::exact(std::move(ids));
    }
    if (kind != 1) throw DecodeError("bad deps tag");
    Deps d = Deps::compact(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      const bool present = u8() != 0;
      const std::uint32_t s = u32();
      if (present) d.as_compact().watermark[i] = s;
    }
    return d;
  }
  Proposal proposal() {
    Proposal p;
    const std::uint32_t n = count();
    for (std::uint32_t i = 0; i < n; ++i) {
      const std::uint8_t kind = u8();
      if (kind == 0) {
        p.cmds.emplace_back(Noop{});
      } else if (kind == 1) {
        p.cmds.emplace_back(command());
      } else {
        throw DecodeError("bad command tag");
      }
    }
    p.deps = deps();
    return p;
  }
  Output output() {
    const std::uint8_t kind = u8();
    if (kind > static_cast<std::uint8_t>(Output::Kind::DuplicateUnavailable)) {
      throw DecodeError("bad output tag");
    }
    return Output{static_cast<Output::Kind>(kind), bytes()};
  }

  Message message() {
    const std::uint8_t tag = u8();
    switch (tag) {
      case 0: return ClientRequest{command()};
      case 1: {
        auto v = vertex();
        return DepRequest{v, commands()};
      }
      case 2: {
        auto v = vertex();
        auto cs = commands();
        return DepReply{v, std::move(cs), deps()};
      }
      case 3: {
        auto v = vertex();
        return ProposeRequest{v, proposal()};
      }
      case 4: {
        auto v = vertex();
        return Phase1a{v, u64()};
      }
      case 5: {
        Phase1b m;
        m.v = vertex();
        m.round = u64();
        if (u8() != 0) {
          m.voted_round = u64();
          m.voted_value = proposal();
        }
        return m;
      }
      case 6: {
        auto v = vertex();
        auto r = u64();
        return Phase2a{v, r, proposal()};
      }
      case 7: {
        auto v = vertex();
        return Phase2b{v, u64()};
      }
      case 8: {
        auto v = vertex();
        auto r = u64();
        return Nack{v, r, u64()};
      }
      case 9: {
        auto v = vertex();
        return Commit{v, proposal()};
      }
      case 10: {
        ClientResponse m;
        m.client_id = u64();
        m.client_seq = u64();
        m.output = output();
        return m;
      }
      default: throw DecodeError("unknown message tag " + std::to_string(tag));
    }
  }

  void finish() const {
    if (pos_ != in_.size()) throw DecodeError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DecodeError("truncated message");
  }
  // A count can never exceed the remaining bytes, which bounds allocation on
  // hostile input.
  std::uint32_t count() {
    const std::uint32_t n = u32();
    if (n > in_.size() - pos_) throw DecodeError("count exceeds frame");
    return n;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(const Message& msg) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(msg.index()));
  std::visit(w, msg);
  return w.take();
}

Message decode(std::span<const std::uint8_t> body) {
  Reader r(body);
  Message m = r.message();
  r.finish();
  return m;
}

std::vector<std::uint8_t> encode_frame(const Address& from, const Message& msg) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(from.kind));
  w.u32(from.index);
  w.u8(static_cast<std::uint8_t>(msg.index()));
  std::visit(w, msg);
  auto body = w.take();
  std::vector<std::uint8_t> frame;
  frame.reserve(body.size() + 4);
  const auto len = static_cast<std::uint32_t>(body.size());
  for (int s = 24; s >= 0; s -= 8) frame.push_back(static_cast<std::uint8_t>(len >> s));
  frame.insert(frame.end(), body.begin(), body.end());
  return frame;
}

Frame decode_frame_body(std::span<const std::uint8_t> body) {
  Reader r(body);
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(RoleKind::Replica)) throw DecodeError("bad role tag");
  Address from{static_cast<RoleKind>(kind), r.u32()};
  Message m = r.message();
  r.finish();
  return Frame{from, std::move(m)};
}

}  // namespace bpaxos::wire
