#include "wiplus/coexsim/coexsim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wiplus/core/error.hpp"

namespace wiplus::coexsim {
namespace {

PathDraw draw_path(Rng& rng, const RadioParams& p) {
  PathDraw d;
  d.los = uniform01(rng) < p.los_probability;
  std::normal_distribution<double> shadow(0.0, d.los ? p.shadow_sigma_los_db : p.shadow_sigma_nlos_db);
  d.shadow_db = shadow(rng);
  return d;
}

std::uint64_t period_ticks(const RadioParams& p) { return seconds_to_ticks(p.csat_period_s); }

MonteCarloResult summarise(std::vector<DropRow> rows) {
  MonteCarloResult out;
  double se = 0.0;
  for (const auto& r : rows) {
    const double pp = 100.0 * r.error;
    se += pp * pp;
    ++out.label_counts[r.label];
    const auto bin = static_cast<long>(std::floor((pp + 100.0) / 5.0));
    ++out.histogram[static_cast<std::size_t>(std::clamp(bin, 0L, 40L))];
  }
  out.rmse_pp = rows.empty() ? 0.0 : std::sqrt(se / static_cast<double>(rows.size()));
  out.rows = std::move(rows);
  return out;
}

std::vector<DropRow> simulate_drop(const MonteCarloConfig& cfg, const RadioParams& params, std::size_t drop) {
  Rng rng(derive_seed(cfg.seed, drop));
  const Scenario s = place_scenario(cfg.n_stas, rng, params, cfg.lteu_enabled);
  const std::uint64_t period = period_ticks(params);
  const auto on = static_cast<std::uint64_t>(std::llround(s.duty_cycle * static_cast<double>(period)));
  std::vector<DropRow> rows;
  rows.reserve(cfg.n_stas);
  for (std::size_t w = 0; w < cfg.n_stas; ++w) {
    const LinkPowers lp = link_powers(s, w);
    DropRow r;
    r.drop = drop;
    r.sta = w;
    r.duty = s.duty_cycle;
    r.c_dl = effective_airtime_closed_form(lp, Direction::Downlink, period, on, params, cfg.ack).fraction();
    r.c_ul = effective_airtime_closed_form(lp, Direction::Uplink, period, on, params, cfg.ack).fraction();
    r.predicted = predict_ul(r.c_dl);
    r.error = r.predicted - r.c_ul;
    if (r.error > 0.0)
      r.label = lp.lteu_at_sta >= params.ed_threshold_dbm ? ErrorLabel::OverestimateExposedTerminal
                                                          : ErrorLabel::OverestimateUlCorruption;
    else if (r.error < 0.0)
      r.label = ErrorLabel::Underestimate;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

const char* to_string(RateModel m) { return m == RateModel::Quantized ? "quantized" : "margin"; }
const char* to_string(AckPolicy p) { return p == AckPolicy::BaseRate ? "base" : "matched"; }
const char* to_string(PowerProfile p) { return p == PowerProfile::Symmetric ? "symmetric" : "lteuforum"; }

const char* to_string(ErrorLabel l) {
  switch (l) {
    case ErrorLabel::None: return "none";
    case ErrorLabel::OverestimateExposedTerminal: return "overestimate_exposed_terminal";
    case ErrorLabel::OverestimateUlCorruption: return "overestimate_ul_corruption";
    case ErrorLabel::Underestimate: return "underestimate";
  }
  return "unknown";
}

AckPolicy parse_ack_policy(const std::string& s) {
  if (s == "base") return AckPolicy::BaseRate;
  if (s == "matched") return AckPolicy::MatchedRate;
  throw Error(ErrorCode::InvalidConfig, "ack policy must be base or matched, got '" + s + "'");
}

PowerProfile parse_power_profile(const std::string& s) {
  if (s == "symmetric") return PowerProfile::Symmetric;
  if (s == "lteuforum") return PowerProfile::LteuForum;
  throw Error(ErrorCode::InvalidConfig, "power profile must be symmetric or lteuforum, got '" + s + "'");
}

RateModel parse_rate_model(const std::string& s) {
  if (s == "quantized") return RateModel::Quantized;
  if (s == "margin") return RateModel::Margin;
  throw Error(ErrorCode::InvalidConfig, "rate model must be quantized or margin, got '" + s + "'");
}

void RadioParams::validate() const {
  if (!(ed_threshold_dbm < 0.0)) throw Error(ErrorCode::InvalidConfig, "ED threshold must be below 0 dBm");
  if (!(max_duty > 0.0 && max_duty <= 1.0)) throw Error(ErrorCode::InvalidConfig, "max duty outside (0, 1]");
  if (!(csat_period_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "CSAT period must be positive");
  if (!(bandwidth_mhz > 0.0) || !(center_freq_mhz > 0.0))
    throw Error(ErrorCode::InvalidConfig, "frequency and bandwidth must be positive");
  if (rate_snr_db.empty() || !std::is_sorted(rate_snr_db.begin(), rate_snr_db.end()))
    throw Error(ErrorCode::InvalidConfig, "rate table must be non-empty and ascending");
  if (!(los_probability >= 0.0 && los_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "LOS probability outside [0, 1]");
  if (!(min_sta_distance_m > 0.0 && min_sta_distance_m <= max_sta_distance_m))
    throw Error(ErrorCode::InvalidConfig, "STA distance range invalid");
  if (!(lteu_box_m > 0.0)) throw Error(ErrorCode::InvalidConfig, "LTE-U box must be positive");
}

double RadioParams::noise_dbm() const { return -174.0 + 10.0 * std::log10(bandwidth_mhz * 1e6) + noise_figure_db; }

RadioParams apply_profile(RadioParams params, PowerProfile profile) {
  if (profile == PowerProfile::Symmetric) {
    params.sta_tx_dbm = params.ap_tx_dbm;
    params.sta_gain_dbi = params.ap_gain_dbi;
  }
  return params;
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Scenario place_scenario(std::size_t n_stas, Rng& rng, const RadioParams& params, bool with_lteu) {
  if (n_stas == 0) throw Error(ErrorCode::InvalidArgument, "need at least one STA");
  params.validate();
  Scenario s;
  s.params = params;
  const double half = params.lteu_box_m / 2.0;
  const Vec2 lteu{(2.0 * uniform01(rng) - 1.0) * half, (2.0 * uniform01(rng) - 1.0) * half};
  if (with_lteu) s.lteu_pos = lteu;
  s.lteu_ap = draw_path(rng, params);
  s.duty_cycle = params.max_duty * (1.0 - uniform01(rng));  // (0, max_duty]

  const double r2_lo = params.min_sta_distance_m * params.min_sta_distance_m;
  const double r2_hi = params.max_sta_distance_m * params.max_sta_distance_m;
  for (std::size_t w = 0; w < n_stas; ++w) {
    // Area-uniform in the annulus.
    const double r = std::sqrt(r2_lo + (r2_hi - r2_lo) * uniform01(rng));
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    s.sta_positions.push_back({r * std::cos(th), r * std::sin(th)});
    s.ap_sta.push_back(draw_path(rng, params));
    s.lteu_sta.push_back(draw_path(rng, params));
  }
  return s;
}

double path_loss_db(double d_m, bool los, double freq_mhz, bool cross_system, double wall_loss_db) {
  const double d = std::max(1.0, d_m);
  const double base = los ? 18.7 * std::log10(d) + 46.8 : 36.8 * std::log10(d) + 43.8;
  return base + 20.0 * std::log10(freq_mhz / 5000.0) + (cross_system ? wall_loss_db : 0.0);
}

double rx_power_dbm(double tx_dbm, double gains_dbi, double pl_db, double shadow_db) {
  return tx_dbm + gains_dbi - pl_db - shadow_db;
}

double db_sum(double a_dbm, double b_dbm) {
  const double hi = std::max(a_dbm, b_dbm), lo = std::min(a_dbm, b_dbm);
  if (std::isinf(lo) && lo < 0.0) return hi;
  return hi + 10.0 * std::log10(1.0 + std::pow(10.0, (lo - hi) / 10.0));
}

LinkPowers link_powers(const Scenario& s, std::size_t sta) {
  const RadioParams& p = s.params;
  if (sta >= s.sta_positions.size()) throw Error(ErrorCode::InvalidArgument, "STA index out of range");
  LinkPowers lp;
  lp.noise = p.noise_dbm();
  const PathDraw& as = s.ap_sta[sta];
  const double pl = path_loss_db(distance(s.ap_pos, s.sta_positions[sta]), as.los, p.center_freq_mhz);
  lp.dl_signal = rx_power_dbm(p.ap_tx_dbm, p.ap_gain_dbi + p.sta_gain_dbi, pl, as.shadow_db);
  lp.ul_signal = rx_power_dbm(p.sta_tx_dbm, p.sta_gain_dbi + p.ap_gain_dbi, pl, as.shadow_db);
  if (s.lteu_pos) {
    const double pl_ap =
        path_loss_db(distance(*s.lteu_pos, s.ap_pos), s.lteu_ap.los, p.center_freq_mhz, true, p.wall_loss_db);
    const double pl_sta = path_loss_db(distance(*s.lteu_pos, s.sta_positions[sta]), s.lteu_sta[sta].los,
                                       p.center_freq_mhz, true, p.wall_loss_db);
    lp.lteu_at_ap = rx_power_dbm(p.lteu_tx_dbm, p.lteu_gain_dbi + p.ap_gain_dbi, pl_ap, s.lteu_ap.shadow_db);
    lp.lteu_at_sta = rx_power_dbm(p.lteu_tx_dbm, p.lteu_gain_dbi + p.sta_gain_dbi, pl_sta, s.lteu_sta[sta].shadow_db);
  }
  return lp;
}

double data_threshold_db(double snr_db, const RadioParams& p) {
  const double target = snr_db - p.psi_db;
  if (p.rate_model == RateModel::Margin) return target;
  const auto it = std::upper_bound(p.rate_snr_db.begin(), p.rate_snr_db.end(), target);
  return it == p.rate_snr_db.begin() ? p.rate_snr_db.front() : *std::prev(it);
}

int slot_indicator(const LinkPowers& lp, Direction dir, bool lteu_on, const RadioParams& p, AckPolicy ack) {
  if (!lteu_on) return 1;
  const bool dl = dir == Direction::Downlink;
  const double i_tx = dl ? lp.lteu_at_ap : lp.lteu_at_sta;
  const double i_rx = dl ? lp.lteu_at_sta : lp.lteu_at_ap;
  const double s_fwd = dl ? lp.dl_signal : lp.ul_signal;
  const double s_rev = dl ? lp.ul_signal : lp.dl_signal;

  if (i_tx >= p.ed_threshold_dbm) return 0;  // carrier sense defers
  const double sinr_data = s_fwd - db_sum(lp.noise, i_rx);
  if (sinr_data < data_threshold_db(s_fwd - lp.noise, p)) return 0;
  const double sinr_ack = s_rev - db_sum(lp.noise, i_tx);
  const double ack_needed = ack == AckPolicy::BaseRate ? p.phi_db : data_threshold_db(s_rev - lp.noise, p);
  if (sinr_ack < ack_needed) return 0;
  return 1;
}

Airtime effective_airtime(const LinkPowers& lp, Direction dir, std::uint64_t period_ticks, std::uint64_t on_ticks,
                          const RadioParams& p, AckPolicy ack) {
  Airtime a;
  for (std::uint64_t start = 0; start < period_ticks; start += kSlotTicks) {
    const bool on = start < on_ticks;
    a.usable += static_cast<std::uint64_t>(slot_indicator(lp, dir, on, p, ack));
    ++a.total;
  }
  return a;
}

Airtime effective_airtime_closed_form(const LinkPowers& lp, Direction dir, std::uint64_t period_ticks,
                                      std::uint64_t on_ticks, const RadioParams& p, AckPolicy ack) {
  Airtime a;
  a.total = (period_ticks + kSlotTicks - 1) / kSlotTicks;
  const std::uint64_t on_slots = std::min(a.total, (on_ticks + kSlotTicks - 1) / kSlotTicks);
  a.usable = a.total - (slot_indicator(lp, dir, true, p, ack) == 0 ? on_slots : 0);
  return a;
}

double predict_ul(double c_dl) { return c_dl; }

synth::Regime classify_downlink(const LinkPowers& lp, const RadioParams& p, AckPolicy ack) {
  if (lp.lteu_at_ap >= p.ed_threshold_dbm) return synth::Regime::Strong;
  if (slot_indicator(lp, Direction::Downlink, true, p, ack) == 0) return synth::Regime::Medium;
  return synth::Regime::Weak;
}

MonteCarloResult run_monte_carlo_serial(const MonteCarloConfig& cfg) {
  if (cfg.n_drops == 0) throw Error(ErrorCode::InvalidArgument, "need at least one drop");
  const RadioParams params = apply_profile(cfg.params, cfg.profile);
  std::vector<DropRow> rows;
  rows.reserve(cfg.n_drops * cfg.n_stas);
  for (std::size_t d = 0; d < cfg.n_drops; ++d) {
    auto drop_rows = simulate_drop(cfg, params, d);
    rows.insert(rows.end(), drop_rows.begin(), drop_rows.end());
  }
  return summarise(std::move(rows));
}

MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg) {
  if (cfg.n_drops == 0) throw Error(ErrorCode::InvalidArgument, "need at least one drop");
  const RadioParams params = apply_profile(cfg.params, cfg.profile);
  params.validate();
  std::vector<DropRow> rows(cfg.n_drops * cfg.n_stas);
  const auto n = static_cast<long>(cfg.n_drops);
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    const auto drop = static_cast<std::size_t>(d);
    const auto drop_rows = simulate_drop(cfg, params, drop);
    std::copy(drop_rows.begin(), drop_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(drop * cfg.n_stas));
  }
  return summarise(std::move(rows));
}

Scenario triangle_scenario(double side_m, const RadioParams& params) {
  params.validate();
  Scenario s;
  s.params = params;
  s.params.wall_loss_db = 0.0;
  s.sta_positions = {{side_m, 0.0}};
  s.lteu_pos = Vec2{side_m / 2.0, side_m * std::sqrt(3.0) / 2.0};
  s.ap_sta = {PathDraw{true, 0.0}};
  s.lteu_sta = {PathDraw{true, 0.0}};
  s.lteu_ap = PathDraw{true, 0.0};
  s.duty_cycle = 0.33;
  return s;
}

}  // namespace wiplus::coexsim
