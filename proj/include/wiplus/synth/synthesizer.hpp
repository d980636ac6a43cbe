#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wiplus/core/types.hpp"
#include "wiplus/synth/timeline.hpp"

namespace wiplus::synth {

/// How LTE-U energy reaches the WiFi link.
enum class Regime {
  Strong,  // above the ED threshold at the AP: the AP defers
  Medium,  // below ED but corrupting frames on air
  Weak,    // no effect
};

const char* to_string(Regime r);
Regime parse_regime(const std::string& s);

struct Saturated {};
struct PoissonLoad {
  double rate_hz = 500.0;
};
using WifiLoad = std::variant<Saturated, PoissonLoad>;

struct SynthScenario {
  Regime regime = Regime::Strong;
  WifiLoad wifi_load = Saturated{};
  double mean_frame_airtime_s = 1.5e-3;  // data + SIFS + ACK
  double ack_airtime_s = 60e-6;          // tail of the frame airtime spent on SIFS + ACK
  double backoff_mean_s = 100e-6;
  int max_retries = 3;
  // Chance that a frame overlapping LTE-U energy is lost (1 = always).
  double overlap_loss_probability = 1.0;
  // Independent per-frame loss unrelated to LTE-U.
  double background_loss_probability = 0.0;
  std::optional<SlotSchedule> schedule;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

struct LinkTruth {
  std::string link;
  Regime regime = Regime::Weak;
  double airtime = 1.0;
};

struct GroundTruth {
  LteuTimeline timeline;
  double effective_duty = 0.0;
  std::vector<LinkTruth> links;

  const LinkTruth& link(const std::string& name) const;
};

struct SynthTrace {
  std::vector<RegisterSnapshot> snapshots;
  std::vector<std::string> sample_links;  // link served at each sample start; empty when unslotted
  GroundTruth truth;
};

inline constexpr const char* kDefaultLink = "A";

/// Fraction of time a link in `regime` can complete frames, by enumerating
/// 4 us slots. A slot is lost while LTE-U radiates (Strong/Medium) and also
/// inside an idle gap too short to hold one frame.
double true_airtime(Regime regime, const LteuTimeline& timeline, double frame_airtime_s,
                    double overlap_loss_probability = 1.0);

/// Tick-resolution emulation of one AP serving a single saturated or Poisson
/// downlink, sampled at sample_rate_hz.
SynthTrace synthesize_trace(const SynthScenario& scenario, const LteuTimeline& timeline,
                            double sample_rate_hz = kDefaultSampleRateHz);

/// Same emulation, but the AP serves each link only inside its own slots.
/// Frames never straddle a slot boundary. Throws Error(UnknownLink) when the
/// schedule names a link without a scenario.
SynthTrace synthesize_slotted_trace(const std::map<std::string, SynthScenario>& scenarios,
                                    const SlotSchedule& schedule, const LteuTimeline& timeline,
                                    double sample_rate_hz, std::uint64_t seed);

}  // namespace wiplus::synth
