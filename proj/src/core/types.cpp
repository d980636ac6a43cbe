#include "wiplus/core/types.hpp"

#include <algorithm>
#include <cmath>

#include "wiplus/core/error.hpp"

namespace wiplus {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::WrapAmbiguity: return "WrapAmbiguity";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::UnknownLink: return "UnknownLink";
    case ErrorCode::InsufficientSlotCoverage: return "InsufficientSlotCoverage";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::InconsistentEstimate: return "InconsistentEstimate";
  }
  return "Unknown";
}

const char* to_string(DetectionStatus s) {
  switch (s) {
    case DetectionStatus::Detected: return "detected";
    case DetectionStatus::NoInterference: return "no_interference";
    case DetectionStatus::Aborted: return "aborted";
  }
  return "unknown";
}

const char* to_string(AbortReason r) {
  switch (r) {
    case AbortReason::None: return "none";
    case AbortReason::InsufficientSamples: return "insufficient_samples";
    case AbortReason::NoPeriodicSpectrum: return "no_periodic_spectrum";
  }
  return "unknown";
}

std::size_t SampleWindow::covered_count() const {
  if (covered.empty()) return samples.size();
  return static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
}

void LteuConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (!(csat_period_s > 0.0)) fail("csat period must be positive");
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) fail("duty cycle must lie in (0, 1]");
  if (puncture_len_s < 0.0) fail("puncture length must be non-negative");
  if (punctured()) {
    if (!(puncture_len_s < puncture_period_s)) fail("puncture length must be shorter than its period");
    if (puncture_period_s > on_duration_s() + 1e-12) fail("puncture period exceeds the ON phase");
  }
  if (const auto* u = std::get_if<UniformLoad>(&on_load)) {
    if (!(u->lo > 0.0 && u->lo <= u->hi && u->hi <= 1.0)) fail("uniform load needs 0 < lo <= hi <= 1");
  }
  if (!std::isfinite(phase_offset_s)) fail("phase offset must be finite");
}

void SlotSchedule::validate() const {
  if (!(slot_len_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "slot length must be positive");
  if (assignment.empty()) throw Error(ErrorCode::InvalidConfig, "slot assignment is empty");
}

std::size_t SlotSchedule::slot_index(double t_s) const {
  // Tick arithmetic keeps boundaries exact (0.15 / 0.05 is not 3 in doubles).
  if (t_s <= 0.0) return 0;
  const std::uint64_t len = std::max<std::uint64_t>(1, seconds_to_ticks(slot_len_s));
  return static_cast<std::size_t>(seconds_to_ticks(t_s) / len);
}

const std::string& SlotSchedule::link_at(double t_s) const {
  return assignment[slot_index(t_s) % assignment.size()];
}

double SlotSchedule::slot_end(double t_s) const {
  const std::uint64_t len = std::max<std::uint64_t>(1, seconds_to_ticks(slot_len_s));
  return ticks_to_seconds((slot_index(t_s) + 1) * len);
}

std::vector<std::string> SlotSchedule::links() const {
  std::vector<std::string> out;
  for (const auto& l : assignment) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

}  // namespace wiplus
