#pragma once

#include <span>

#include "mpcsr/transport.hpp"

namespace mpcsr {

// Frame layout: u32 big-endian length, then `length` bytes of
//   u8 payload tag | u64le session | u64le seq | sender(2) | receiver(2) | body.
// Body integers are little-endian; ring elements are fixed-width u64le.
std::vector<u8> serialize_message(const Message& m);

// parses the frame content after the length prefix
Message parse_frame(std::span<const u8> frame);

inline constexpr u32 kMaxFrameBytes = 1u << 28;

}  // namespace mpcsr
