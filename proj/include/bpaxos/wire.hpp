#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bpaxos/messages.hpp"

namespace bpaxos::wire {

// Layout of a message body: one tag byte (the Message variant index) followed
// by its fields, big-endian. Strings and lists are prefixed with a u32 count.
// A frame is a u32 big-endian body length followed by the body.

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode(const Message& msg);
Message decode(std::span<const std::uint8_t> body);

std::vector<std::uint8_t> encode_frame(const Address& from, const Message& msg);

struct Frame {
  Address from;
  Message msg;
};

// Decodes a frame body (everything after the length prefix).
Frame decode_frame_body(std::span<const std::uint8_t> body);

constexpr std::size_t kMaxFrameSize = 64u << 20;

}  // namespace bpaxos::wire
