#include "wiplus/core/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wiplus/core/error.hpp"

namespace wiplus {
namespace {

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

void check_monotonic(const std::vector<RegisterSnapshot>& out) {
  const std::size_t n = out.size();
  if (n >= 2 && out[n - 1].timestamp_ticks <= out[n - 2].timestamp_ticks)
    throw Error(ErrorCode::NonMonotonicTimestamps, "record " + std::to_string(n - 1));
}

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T v{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end || field.empty())
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line) + ": bad field '" + std::string(field) + "'");
  return v;
}

std::vector<RegisterSnapshot> decode_csv(std::string_view bytes) {
  std::vector<RegisterSnapshot> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    const bool terminated = eol != std::string_view::npos;
    if (!terminated) eol = bytes.size();
    std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kTraceCsvHeader)
        throw Error(ErrorCode::MalformedHeader, "expected '" + std::string(kTraceCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      if (!terminated) break;
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": empty line");
    }

    std::string_view fields[6];
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      if (n == 6) throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": too many fields");
      fields[n++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n != 6)
      throw Error(ErrorCode::TruncatedRecord, "line " + std::to_string(line_no) + ": expected 6 fields");

    RegisterSnapshot s;
    s.timestamp_ticks = parse_field<std::uint64_t>(fields[0], line_no);
    s.tx_ticks = parse_field<std::uint32_t>(fields[1], line_no);
    s.rx_ticks = parse_field<std::uint32_t>(fields[2], line_no);
    s.ed_ticks = parse_field<std::uint32_t>(fields[3], line_no);
    s.idle_ticks = parse_field<std::uint32_t>(fields[4], line_no);
    s.ack_fail_total = parse_field<std::uint64_t>(fields[5], line_no);
    out.push_back(s);
    check_monotonic(out);
  }
  if (!header_seen) throw Error(ErrorCode::MalformedHeader, "empty trace");
  return out;
}

std::vector<RegisterSnapshot> decode_binary(std::string_view bytes) {
  constexpr std::size_t kHeader = 4 + 8;
  if (bytes.size() < kHeader) throw Error(ErrorCode::MalformedHeader, "binary header too short");
  const std::uint64_t count = get_le(bytes, 4, 8);
  const std::size_t payload = bytes.size() - kHeader;
  if (payload % kTraceRecordBytes != 0 || payload / kTraceRecordBytes != count)
    throw Error(ErrorCode::TruncatedRecord, "header announces " + std::to_string(count) +
                                                " records, payload holds " +
                                                std::to_string(payload / kTraceRecordBytes));
  std::vector<RegisterSnapshot> out;
  out.reserve(count);
  std::size_t pos = kHeader;
  for (std::uint64_t i = 0; i < count; ++i) {
    RegisterSnapshot s;
    s.timestamp_ticks = get_le(bytes, pos, 8);
    s.tx_ticks = static_cast<std::uint32_t>(get_le(bytes, pos + 8, 4));
    s.rx_ticks = static_cast<std::uint32_t>(get_le(bytes, pos + 12, 4));
    s.ed_ticks = static_cast<std::uint32_t>(get_le(bytes, pos + 16, 4));
    s.idle_ticks = static_cast<std::uint32_t>(get_le(bytes, pos + 20, 4));
    s.ack_fail_total = get_le(bytes, pos + 24, 8);
    pos += kTraceRecordBytes;
    out.push_back(s);
    check_monotonic(out);
  }
  return out;
}

}  // namespace

std::string encode_trace(std::span<const RegisterSnapshot> snapshots, TraceFormat format) {
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    if (snapshots[i].timestamp_ticks <= snapshots[i - 1].timestamp_ticks)
      throw Error(ErrorCode::NonMonotonicTimestamps, "record " + std::to_string(i));

  std::string out;
  if (format == TraceFormat::Binary) {
    out.reserve(12 + snapshots.size() * kTraceRecordBytes);
    out.append(kTraceMagic);
    put_le(out, snapshots.size(), 8);
    for (const auto& s : snapshots) {
      put_le(out, s.timestamp_ticks, 8);
      put_le(out, s.tx_ticks, 4);
      put_le(out, s.rx_ticks, 4);
      put_le(out, s.ed_ticks, 4);
      put_le(out, s.idle_ticks, 4);
      put_le(out, s.ack_fail_total, 8);
    }
    return out;
  }

  out.reserve(32 + snapshots.size() * 48);
  out.append(kTraceCsvHeader);
  out.push_back('\n');
  char buf[32];
  auto put = [&](auto v, char sep) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
    out.push_back(sep);
  };
  for (const auto& s : snapshots) {
    put(s.timestamp_ticks, ',');
    put(s.tx_ticks, ',');
    put(s.rx_ticks, ',');
    put(s.ed_ticks, ',');
    put(s.idle_ticks, ',');
    put(s.ack_fail_total, '\n');
  }
  return out;
}

std::vector<RegisterSnapshot> decode_trace(std::string_view bytes) {
  if (bytes.substr(0, kTraceMagic.size()) == kTraceMagic) return decode_binary(bytes);
  return decode_csv(bytes);
}

std::vector<RegisterSnapshot> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_trace(ss.str());
}

void write_trace_file(const std::string& path, std::span<const RegisterSnapshot> snapshots,
                      TraceFormat format) {
  const std::string bytes = encode_trace(snapshots, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace wiplus
