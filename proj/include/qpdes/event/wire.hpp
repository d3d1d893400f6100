#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qpdes/event/event.hpp"

namespace qpdes::wire {

/// Cross-worker event records, shared by every transport.
///
/// record   := u32 body_length, body
/// body     := u8 version(=1), i64 time_ps, u32 source, u64 seq, u32 target,
///             u32 dest_worker, str16 handler, u16 field_count, field*
/// field    := str16 name, u8 tag, value
/// value    := tag 0: i64 | tag 1: f64 | tag 2: str32 | tag 3: u64 hi, u64 lo
///           | tag 4: u32 n, n * (f64 re, f64 im)
///
/// All integers little-endian; f64 as IEEE-754 bits.
inline constexpr std::uint8_t kEventFormatVersion = 1;

void encode(const Event& e, std::string& out);
std::string encode(const Event& e);

/// Decodes one record from the front of `in` and advances it.
Event decode(std::string_view& in);
std::vector<Event> decode_all(std::string_view in);

}  // namespace qpdes::wire
