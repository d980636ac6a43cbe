#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wiplus {

/// MAC state registers are clocked at 40 MHz.
inline constexpr double kTickRateHz = 40e6;
inline constexpr double kDefaultSampleRateHz = 2000.0;

inline std::uint64_t seconds_to_ticks(double s) {
  return static_cast<std::uint64_t>(s * kTickRateHz + 0.5);
}
inline double ticks_to_seconds(std::uint64_t ticks) {
  return static_cast<double>(ticks) / kTickRateHz;
}

/// One poll of the MAC state registers. The four dwell counters are raw
/// 32-bit hardware values and wrap; ack_fail_total is a logical 64-bit count.
struct RegisterSnapshot {
  std::uint64_t timestamp_ticks = 0;
  std::uint32_t tx_ticks = 0;
  std::uint32_t rx_ticks = 0;
  std::uint32_t ed_ticks = 0;
  std::uint32_t idle_ticks = 0;
  std::uint64_t ack_fail_total = 0;

  bool operator==(const RegisterSnapshot&) const = default;
};

/// Dwell time per MAC state in integer percent of one sample interval.
struct MacSample {
  int s_tx = 0;
  int s_rx = 0;
  int s_other = 0;
  int s_idle = 100;
  std::uint32_t s_ack_fail = 0;

  bool operator==(const MacSample&) const = default;
};

/// A block of consecutive samples. `covered` is empty when every sample
/// belongs to the window; otherwise it marks which samples carry data
/// (slotted per-link windows leave the other links' slots uncovered).
struct SampleWindow {
  std::vector<MacSample> samples;
  double sample_rate_hz = kDefaultSampleRateHz;
  double window_start_s = 0.0;
  std::vector<bool> covered;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
  bool is_covered(std::size_t i) const { return covered.empty() || covered[i]; }
  std::size_t covered_count() const;
};

struct FullLoad {
  bool operator==(const FullLoad&) const = default;
};

/// Each ON phase transmits a uniformly drawn fraction in [lo, hi] of its span.
struct UniformLoad {
  double lo = 0.3;
  double hi = 1.0;
  bool operator==(const UniformLoad&) const = default;
};

using OnLoad = std::variant<FullLoad, UniformLoad>;

struct LteuConfig {
  double csat_period_s = 0.080;
  double duty_cycle = 0.33;
  // Puncturing is disabled while puncture_len_s is zero.
  double puncture_period_s = 0.0;
  double puncture_len_s = 0.0;
  OnLoad on_load = FullLoad{};
  double tx_power_dbm = 24.0;
  // Start of the first ON phase relative to trace start.
  double phase_offset_s = 0.0;

  double on_duration_s() const { return duty_cycle * csat_period_s; }
  bool punctured() const { return puncture_len_s > 0.0; }
  /// Throws Error(InvalidConfig) when an invariant is violated.
  void validate() const;
};

enum class DetectionStatus { Detected, NoInterference, Aborted };
enum class AbortReason { None, InsufficientSamples, NoPeriodicSpectrum };

const char* to_string(DetectionStatus s);
const char* to_string(AbortReason r);

struct DetectionReport {
  DetectionStatus status = DetectionStatus::Aborted;
  AbortReason reason = AbortReason::None;
  double window_start_s = 0.0;
  double f0_hz = 0.0;
  std::vector<double> harmonics_hz;
  double t_on_s = 0.0;
  double airtime_estimate = 1.0;
  std::vector<double> burst_starts_s;
  std::optional<std::string> link;

  bool detected() const { return status == DetectionStatus::Detected; }
};

/// Round-robin slot plan used while links are measured separately.
struct SlotSchedule {
  double slot_len_s = 0.02;
  std::vector<std::string> assignment;

  void validate() const;
  std::size_t slot_index(double t_s) const;
  const std::string& link_at(double t_s) const;
  double slot_end(double t_s) const;
  /// Distinct links in order of first appearance.
  std::vector<std::string> links() const;
};

}  // namespace wiplus
