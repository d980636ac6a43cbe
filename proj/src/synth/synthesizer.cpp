#include "wiplus/synth/synthesizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "wiplus/core/error.hpp"
#include "wiplus/core/random.hpp"

namespace wiplus::synth {
namespace {

using Tick = std::uint64_t;
constexpr Tick kForever = std::numeric_limits<Tick>::max();
constexpr Tick kSlotTicks = 160;  // 4 us

enum class MacState : std::size_t { Tx = 0, Rx = 1, Ed = 2, Idle = 3 };

struct TickInterval {
  Tick begin;
  Tick end;
};

std::vector<TickInterval> to_ticks(const LteuTimeline& tl) {
  std::vector<TickInterval> out;
  out.reserve(tl.on_intervals.size());
  for (const auto& iv : tl.on_intervals) {
    const Tick b = seconds_to_ticks(iv.start_s);
    const Tick e = seconds_to_ticks(iv.end_s);
    if (e > b) out.push_back({b, e});
  }
  return out;
}

/// Accumulates MAC dwell time and emits a register snapshot at every sample boundary.
class CounterRecorder {
 public:
  CounterRecorder(Tick period, std::size_t n_samples, Rng& rng)
      : period_(period), end_(period * n_samples), next_(period) {
    // Registers start wherever the hardware left them.
    for (auto& o : offsets_) o = static_cast<std::uint32_t>(rng());
    ack_total_ = rng() % 1000000;
    snapshots_.reserve(n_samples + 1);
    emit();
  }

  Tick end() const { return end_; }

  void add(MacState state, Tick end) {
    end = std::min(end, end_);
    while (now_ < end) {
      const Tick upto = std::min(end, next_);
      totals_[static_cast<std::size_t>(state)] += upto - now_;
      now_ = upto;
      if (now_ == next_) {
        emit();
        next_ += period_;
      }
    }
  }

  void ack_fail(Tick t) {
    if (t < end_) ++ack_total_;
  }

  std::vector<RegisterSnapshot> take() { return std::move(snapshots_); }

 private:
  void emit() {
    RegisterSnapshot s;
    s.timestamp_ticks = now_;
    s.tx_ticks = offsets_[0] + static_cast<std::uint32_t>(totals_[0]);
    s.rx_ticks = offsets_[1] + static_cast<std::uint32_t>(totals_[1]);
    s.ed_ticks = offsets_[2] + static_cast<std::uint32_t>(totals_[2]);
    s.idle_ticks = offsets_[3] + static_cast<std::uint32_t>(totals_[3]);
    s.ack_fail_total = ack_total_;
    snapshots_.push_back(s);
  }

  Tick period_;
  Tick end_;
  Tick now_ = 0;
  Tick next_;
  std::array<std::uint32_t, 4> offsets_{};
  std::array<Tick, 4> totals_{};
  std::uint64_t ack_total_ = 0;
  std::vector<RegisterSnapshot> snapshots_;
};

/// Energy lookups for monotonically advancing time.
class EnergyCursor {
 public:
  explicit EnergyCursor(std::vector<TickInterval> intervals) : iv_(std::move(intervals)) {}

  bool active(Tick t) {
    seek(t);
    return c_ < iv_.size() && iv_[c_].begin <= t;
  }
  Tick active_until(Tick t) {
    seek(t);
    return iv_[c_].end;
  }
  Tick next_start(Tick t) {
    seek(t);
    if (c_ >= iv_.size()) return kForever;
    return std::max(iv_[c_].begin, t);
  }
  bool overlaps(Tick b, Tick e) {
    seek(b);
    return c_ < iv_.size() && iv_[c_].begin < e;
  }

 private:
  void seek(Tick t) {
    while (c_ < iv_.size() && iv_[c_].end <= t) ++c_;
  }
  std::vector<TickInterval> iv_;
  std::size_t c_ = 0;
};

struct LinkRuntime {
  std::string name;
  const SynthScenario* scenario;
  Tick frame = 0;
  Tick ack = 0;
  int retries = 0;
  bool saturated = true;
  std::uint64_t pending = 0;
  Tick next_arrival = kForever;
  double arrival_rate_hz = 0.0;
};

class MacEmulator {
 public:
  MacEmulator(std::vector<LinkRuntime> links, std::vector<std::size_t> slot_links, Tick slot_ticks,
              const LteuTimeline& timeline, Tick period, std::size_t n_samples, Rng& rng)
      : links_(std::move(links)),
        slot_links_(std::move(slot_links)),
        slot_ticks_(slot_ticks),
        energy_(to_ticks(timeline)),
        rec_(period, n_samples, rng),
        rng_(rng) {
    for (auto& l : links_)
      if (!l.saturated) l.next_arrival = draw_exp(1.0 / l.arrival_rate_hz);
  }

  std::vector<RegisterSnapshot> run() {
    const Tick end = rec_.end();
    while (t_ < end) step();
    return rec_.take();
  }

 private:
  bool slotted() const { return slot_links_.size() > 1; }

  std::size_t link_at(Tick t) const {
    if (!slotted()) return slot_links_.empty() ? 0 : slot_links_.front();
    return slot_links_[(t / slot_ticks_) % slot_links_.size()];
  }
  Tick slot_end(Tick t) const { return slotted() ? (t / slot_ticks_ + 1) * slot_ticks_ : kForever; }

  Tick draw_exp(double mean_s) {
    std::exponential_distribution<double> d(1.0 / mean_s);
    return std::max<Tick>(1, seconds_to_ticks(d(rng_)));
  }

  void pull_arrivals() {
    for (auto& l : links_) {
      if (l.saturated) continue;
      while (l.next_arrival <= t_) {
        ++l.pending;
        l.next_arrival += draw_exp(1.0 / l.arrival_rate_hz);
      }
    }
  }

  // Idle time; a sensing (Strong) link sees LTE-U energy as OTHER_BUSY.
  void wait_until(Tick until, bool sensing) {
    while (t_ < until) {
      if (sensing && energy_.active(t_)) {
        const Tick e = std::min(until, energy_.active_until(t_));
        rec_.add(MacState::Ed, e);
        t_ = e;
      } else {
        const Tick e = sensing ? std::min(until, energy_.next_start(t_)) : until;
        rec_.add(MacState::Idle, e);
        t_ = e;
      }
    }
  }

  // Backoff counts down only while the medium looks idle.
  void backoff(Tick ticks, bool sensing, Tick limit) {
    Tick remaining = ticks;
    while (remaining > 0 && t_ < limit) {
      if (sensing && energy_.active(t_)) {
        wait_until(std::min(limit, energy_.active_until(t_)), sensing);
        continue;
      }
      const Tick free_until = sensing ? energy_.next_start(t_) : kForever;
      const Tick e = std::min({limit, t_ + remaining, free_until});
      rec_.add(MacState::Idle, e);
      remaining -= e - t_;
      t_ = e;
    }
  }

  void step() {
    pull_arrivals();
    auto& link = links_[link_at(t_)];
    const SynthScenario& sc = *link.scenario;
    const bool sensing = sc.regime == Regime::Strong;
    const Tick slot_limit = slot_end(t_);
    const Tick end = rec_.end();

    if (!link.saturated && link.pending == 0) {
      wait_until(std::min({slot_limit, link.next_arrival, end}), sensing);
      return;
    }

    backoff(draw_exp(sc.backoff_mean_s), sensing, std::min(slot_limit, end));
    if (t_ >= end || t_ >= slot_limit) return;
    if (sensing && energy_.active(t_)) return;
    if (t_ + link.frame > slot_limit) {
      wait_until(std::min(slot_limit, end), sensing);
      return;
    }

    const Tick data_end = t_ + link.frame - link.ack;
    const Tick frame_end = t_ + link.frame;
    bool lost = false;
    if (sc.regime != Regime::Weak && energy_.overlaps(t_, frame_end))
      lost = sc.overlap_loss_probability >= 1.0 || uniform01(rng_) < sc.overlap_loss_probability;
    if (sc.background_loss_probability > 0.0 && uniform01(rng_) < sc.background_loss_probability)
      lost = true;

    rec_.add(MacState::Tx, data_end);
    t_ = data_end;
    if (lost) {
      wait_until(frame_end, sensing);  // ACK timeout
      rec_.ack_fail(frame_end);
      if (++link.retries > sc.max_retries) finish_frame(link);
    } else {
      rec_.add(MacState::Rx, frame_end);
      t_ = frame_end;
      finish_frame(link);
    }
  }

  void finish_frame(LinkRuntime& link) {
    link.retries = 0;
    if (!link.saturated) --link.pending;
  }

  std::vector<LinkRuntime> links_;
  std::vector<std::size_t> slot_links_;
  Tick slot_ticks_;
  EnergyCursor energy_;
  CounterRecorder rec_;
  Rng& rng_;
  Tick t_ = 0;
};

LinkRuntime make_runtime(const std::string& name, const SynthScenario& sc) {
  sc.validate();
  LinkRuntime l;
  l.name = name;
  l.scenario = &sc;
  l.frame = std::max<Tick>(2, seconds_to_ticks(sc.mean_frame_airtime_s));
  l.ack = std::min(seconds_to_ticks(sc.ack_airtime_s), l.frame - 1);
  if (const auto* p = std::get_if<PoissonLoad>(&sc.wifi_load)) {
    l.saturated = false;
    l.arrival_rate_hz = p->rate_hz;
  }
  return l;
}

SynthTrace run_emulation(const std::vector<std::pair<std::string, const SynthScenario*>>& links,
                         const std::optional<SlotSchedule>& schedule, const LteuTimeline& timeline,
                         double sample_rate_hz, std::uint64_t seed) {
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (timeline.duration_s < 1.0 / sample_rate_hz)
    throw Error(ErrorCode::InvalidArgument, "timeline shorter than one sample");

  const Tick period = seconds_to_ticks(1.0 / sample_rate_hz);
  const auto n_samples = static_cast<std::size_t>(seconds_to_ticks(timeline.duration_s) / period);

  std::vector<LinkRuntime> runtimes;
  for (const auto& [name, sc] : links) runtimes.push_back(make_runtime(name, *sc));

  std::vector<std::size_t> slot_links;
  Tick slot_ticks = kForever;
  if (schedule) {
    schedule->validate();
    slot_ticks = std::max<Tick>(1, seconds_to_ticks(schedule->slot_len_s));
    for (const auto& name : schedule->assignment) {
      auto it = std::find_if(runtimes.begin(), runtimes.end(), [&](const LinkRuntime& l) { return l.name == name; });
      if (it == runtimes.end()) throw Error(ErrorCode::UnknownLink, "no scenario for link '" + name + "'");
      slot_links.push_back(static_cast<std::size_t>(it - runtimes.begin()));
    }
    if (schedule->links().size() == 1) slot_links.resize(1);
  } else {
    slot_links.push_back(0);
  }

  Rng rng(seed);
  MacEmulator mac(runtimes, slot_links, slot_ticks, timeline, period, n_samples, rng);

  SynthTrace out;
  out.snapshots = mac.run();
  if (slot_links.size() > 1) {
    out.sample_links.reserve(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
      const Tick t = period * k;
      out.sample_links.push_back(runtimes[slot_links[(t / slot_ticks) % slot_links.size()]].name);
    }
  }

  out.truth.timeline = timeline;
  out.truth.effective_duty = timeline.effective_duty();
  for (const auto& [name, sc] : links)
    out.truth.links.push_back({name, sc->regime,
                               true_airtime(sc->regime, timeline, sc->mean_frame_airtime_s,
                                            sc->overlap_loss_probability)});
  return out;
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Strong: return "strong";
    case Regime::Medium: return "medium";
    case Regime::Weak: return "weak";
  }
  return "unknown";
}

Regime parse_regime(const std::string& s) {
  if (s == "strong") return Regime::Strong;
  if (s == "medium") return Regime::Medium;
  if (s == "weak") return Regime::Weak;
  throw Error(ErrorCode::InvalidConfig, "unknown regime '" + s + "'");
}

void SynthScenario::validate() const {
  if (!(mean_frame_airtime_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "frame airtime must be positive");
  if (!(ack_airtime_s >= 0.0 && ack_airtime_s < mean_frame_airtime_s))
    throw Error(ErrorCode::InvalidConfig, "ack airtime must be shorter than the frame");
  if (!(backoff_mean_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "backoff mean must be positive");
  if (max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max retries must be non-negative");
  if (!(overlap_loss_probability >= 0.0 && overlap_loss_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "overlap loss probability outside [0, 1]");
  if (!(background_loss_probability >= 0.0 && background_loss_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "background loss probability outside [0, 1]");
  if (const auto* p = std::get_if<PoissonLoad>(&wifi_load); p && !(p->rate_hz > 0.0))
    throw Error(ErrorCode::InvalidConfig, "poisson rate must be positive");
}

const LinkTruth& GroundTruth::link(const std::string& name) const {
  for (const auto& l : links)
    if (l.link == name) return l;
  throw Error(ErrorCode::UnknownLink, "no ground truth for link '" + name + "'");
}

double true_airtime(Regime regime, const LteuTimeline& timeline, double frame_airtime_s,
                    double overlap_loss_probability) {
  if (regime == Regime::Weak) return 1.0;

  // Whole CSAT periods only, so a window edge does not bias the per-period share.
  Tick horizon = seconds_to_ticks(timeline.duration_s);
  if (timeline.config.csat_period_s > 0.0) {
    const Tick period = seconds_to_ticks(timeline.config.csat_period_s);
    if (period > 0 && horizon >= period) horizon = (horizon / period) * period;
  }
  const Tick n_slots = horizon / kSlotTicks;
  if (n_slots == 0) return 1.0;

  // Energy plus every interior gap too short for one frame.
  const Tick frame = seconds_to_ticks(frame_airtime_s);
  std::vector<TickInterval> blocked;
  for (const auto& iv : to_ticks(timeline)) {
    if (!blocked.empty() && iv.begin - blocked.back().end < frame)
      blocked.back().end = iv.end;
    else
      blocked.push_back(iv);
  }

  Tick lost = 0;
  std::size_t c = 0;
  for (Tick i = 0; i < n_slots; ++i) {
    const Tick b = i * kSlotTicks;
    const Tick e = b + kSlotTicks;
    while (c < blocked.size() && blocked[c].end <= b) ++c;
    if (c < blocked.size() && blocked[c].begin < e) ++lost;
  }
  const double blocked_share = static_cast<double>(lost) / static_cast<double>(n_slots);
  if (regime == Regime::Medium) return 1.0 - overlap_loss_probability * blocked_share;
  return 1.0 - blocked_share;
}

SynthTrace synthesize_trace(const SynthScenario& scenario, const LteuTimeline& timeline, double sample_rate_hz) {
  std::optional<SlotSchedule> schedule = scenario.schedule;
  if (schedule && schedule->links().size() > 1)
    throw Error(ErrorCode::InvalidArgument, "multi-link schedules need synthesize_slotted_trace");
  return run_emulation({{kDefaultLink, &scenario}}, std::nullopt, timeline, sample_rate_hz, scenario.rng_seed);
}

SynthTrace synthesize_slotted_trace(const std::map<std::string, SynthScenario>& scenarios,
                                    const SlotSchedule& schedule, const LteuTimeline& timeline,
                                    double sample_rate_hz, std::uint64_t seed) {
  schedule.validate();
  std::vector<std::pair<std::string, const SynthScenario*>> links;
  for (const auto& name : schedule.links()) {
    auto it = scenarios.find(name);
    if (it == scenarios.end()) throw Error(ErrorCode::UnknownLink, "no scenario for link '" + name + "'");
    links.emplace_back(name, &it->second);
  }
  return run_emulation(links, schedule, timeline, sample_rate_hz, seed);
}

}  // namespace wiplus::synth
