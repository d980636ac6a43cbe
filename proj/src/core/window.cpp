#include "wiplus/core/window.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "wiplus/core/error.hpp"

namespace wiplus {
namespace {

constexpr std::uint64_t kWrapSpan = std::uint64_t{1} << 32;

MacSample to_sample(const RegisterSnapshot& a, const RegisterSnapshot& b) {
  const std::uint64_t elapsed = b.timestamp_ticks - a.timestamp_ticks;
  const std::array<std::uint64_t, 4> deltas = {
      counter_delta(a.tx_ticks, b.tx_ticks), counter_delta(a.rx_ticks, b.rx_ticks),
      counter_delta(a.ed_ticks, b.ed_ticks), counter_delta(a.idle_ticks, b.idle_ticks)};

  std::array<int, 4> pct{};
  std::array<double, 4> residue{};  // rounded minus exact
  int sum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t d = std::min(deltas[i], elapsed);
    // half-up: floor((200 d + elapsed) / (2 elapsed))
    pct[i] = static_cast<int>((200 * d + elapsed) / (2 * elapsed));
    residue[i] = pct[i] - 100.0 * static_cast<double>(d) / static_cast<double>(elapsed);
    sum += pct[i];
  }
  while (sum > 101) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (residue[i] > residue[j]) j = i;
    --pct[j];
    residue[j] -= 1.0;
    --sum;
  }
  while (sum < 99) {
    std::size_t j = 0;
    for (std::size_t i = 1; i < 4; ++i)
      if (residue[i] < residue[j]) j = i;
    ++pct[j];
    residue[j] += 1.0;
    ++sum;
  }

  MacSample s;
  s.s_tx = pct[0];
  s.s_rx = pct[1];
  s.s_other = pct[2];
  s.s_idle = pct[3];
  s.s_ack_fail = static_cast<std::uint32_t>(b.ack_fail_total - a.ack_fail_total);
  return s;
}

}  // namespace

SampleWindow snapshots_to_window(std::span<const RegisterSnapshot> snapshots, double sample_rate_hz) {
  if (snapshots.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least two snapshots");
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");

  SampleWindow w;
  w.sample_rate_hz = sample_rate_hz;
  w.window_start_s = ticks_to_seconds(snapshots.front().timestamp_ticks);
  w.samples.reserve(snapshots.size() - 1);
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    const auto& a = snapshots[i - 1];
    const auto& b = snapshots[i];
    if (b.timestamp_ticks <= a.timestamp_ticks)
      throw Error(ErrorCode::NonMonotonicTimestamps, "snapshot " + std::to_string(i));
    if (b.timestamp_ticks - a.timestamp_ticks > kWrapSpan)
      throw Error(ErrorCode::WrapAmbiguity, "gap before snapshot " + std::to_string(i) +
                                                " exceeds one counter wrap");
    if (b.ack_fail_total < a.ack_fail_total)
      throw Error(ErrorCode::InvalidArgument, "ack_fail_total decreased at snapshot " + std::to_string(i));
    w.samples.push_back(to_sample(a, b));
  }
  return w;
}

}  // namespace wiplus
