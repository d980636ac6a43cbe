#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wiplus/core/types.hpp"

namespace wiplus {

enum class TraceFormat { Csv, Binary };

inline constexpr std::string_view kTraceCsvHeader = "ticks,tx,rx,ed,idle,ack_fail";
inline constexpr std::string_view kTraceMagic = "WPL1";
inline constexpr std::size_t kTraceRecordBytes = 8 + 4 * 4 + 8;

// Binary layout: "WPL1", u64 record count, then fixed 32-byte records
// (ticks u64, tx/rx/ed/idle u32, ack_fail u64), all little-endian.
std::string encode_trace(std::span<const RegisterSnapshot> snapshots,
                         TraceFormat format = TraceFormat::Csv);

/// Detects the format from the leading bytes.
std::vector<RegisterSnapshot> decode_trace(std::string_view bytes);

std::vector<RegisterSnapshot> read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, std::span<const RegisterSnapshot> snapshots,
                      TraceFormat format = TraceFormat::Csv);

}  // namespace wiplus
