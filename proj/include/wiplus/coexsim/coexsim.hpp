#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wiplus/core/random.hpp"
#include "wiplus/synth/synthesizer.hpp"

namespace wiplus::coexsim {

/// How the data-frame SINR requirement follows the interference-free SNR.
enum class RateModel {
  Quantized,  // requirement of the fastest rate whose threshold is <= SNR - psi
  Margin,     // SNR - psi itself
};
enum class AckPolicy { BaseRate, MatchedRate };
enum class PowerProfile { Symmetric, LteuForum };
enum class Direction { Downlink, Uplink };

const char* to_string(RateModel m);
const char* to_string(AckPolicy p);
const char* to_string(PowerProfile p);
AckPolicy parse_ack_policy(const std::string& s);
PowerProfile parse_power_profile(const std::string& s);
RateModel parse_rate_model(const std::string& s);

struct RadioParams {
  double center_freq_mhz = 5180.0;
  double bandwidth_mhz = 20.0;
  double lteu_tx_dbm = 24.0;
  double lteu_gain_dbi = 5.0;
  double ap_tx_dbm = 24.0;
  double ap_gain_dbi = 5.0;
  double sta_tx_dbm = 18.0;
  double sta_gain_dbi = 0.0;
  double noise_figure_db = 9.0;
  double ed_threshold_dbm = -62.0;
  double max_duty = 0.5;
  double csat_period_s = 0.080;
  double psi_db = 3.0;
  double phi_db = 5.0;
  // 802.11a 6..54 Mb/s
  std::vector<double> rate_snr_db = {5, 6, 9, 11, 15, 18, 20, 25};
  RateModel rate_model = RateModel::Quantized;
  double los_probability = 0.5;
  double shadow_sigma_los_db = 3.5;
  double shadow_sigma_nlos_db = 3.1;
  double wall_loss_db = 12.0;
  double min_sta_distance_m = 3.0;
  double max_sta_distance_m = 50.0;
  double lteu_box_m = 120.0;

  void validate() const;
  double noise_dbm() const;
};

/// Symmetric copies the AP's power and gain to the STAs.
RadioParams apply_profile(RadioParams params, PowerProfile profile);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};
double distance(Vec2 a, Vec2 b);

/// LOS flag and shadowing for one radio path, fixed for the drop.
struct PathDraw {
  bool los = true;
  double shadow_db = 0.0;
};

struct Scenario {
  Vec2 ap_pos;
  std::vector<Vec2> sta_positions;
  std::optional<Vec2> lteu_pos;
  std::vector<PathDraw> ap_sta;    // shared by both directions
  std::vector<PathDraw> lteu_sta;
  PathDraw lteu_ap;
  double duty_cycle = 0.0;
  RadioParams params;
};

Scenario place_scenario(std::size_t n_stas, Rng& rng, const RadioParams& params, bool with_lteu = true);

/// Indoor-office LOS/NLOS model; cross_system adds the wall loss.
double path_loss_db(double d_m, bool los, double freq_mhz, bool cross_system = false, double wall_loss_db = 12.0);
double rx_power_dbm(double tx_dbm, double gains_dbi, double pl_db, double shadow_db);
double db_sum(double a_dbm, double b_dbm);

/// Received powers for the AP <-> STA w pair (dBm). LTE-U terms are -inf without a BS.
struct LinkPowers {
  double dl_signal = 0.0;  // AP -> STA
  double ul_signal = 0.0;  // STA -> AP
  double lteu_at_ap = -INFINITY;
  double lteu_at_sta = -INFINITY;
  double noise = 0.0;
};

LinkPowers link_powers(const Scenario& s, std::size_t sta);

/// Minimum data SINR for a link with interference-free SNR `snr_db`.
double data_threshold_db(double snr_db, const RadioParams& p);

/// 1 when the slot is usable in `dir`, 0 when LTE-U blocks it: carrier sense
/// at the transmitter, a corrupted data frame at the receiver, or a lost ACK.
int slot_indicator(const LinkPowers& lp, Direction dir, bool lteu_on, const RadioParams& p, AckPolicy ack);

/// Usable and total 4 us slots over one CSAT period.
struct Airtime {
  std::uint64_t usable = 0;
  std::uint64_t total = 0;
  double fraction() const { return total ? static_cast<double>(usable) / static_cast<double>(total) : 1.0; }
  bool operator==(const Airtime&) const = default;
};

inline constexpr std::uint64_t kSlotTicks = 160;  // 4 us at 40 MHz

/// Enumerates the slots of one period with the ON phase [0, on_ticks).
Airtime effective_airtime(const LinkPowers& lp, Direction dir, std::uint64_t period_ticks, std::uint64_t on_ticks,
                          const RadioParams& p, AckPolicy ack);
/// Closed form of the same quantity: all ON-touching slots lost when the ON test blocks.
Airtime effective_airtime_closed_form(const LinkPowers& lp, Direction dir, std::uint64_t period_ticks,
                                      std::uint64_t on_ticks, const RadioParams& p, AckPolicy ack);

/// UL airtime predicted from the DL measurement (identity).
double predict_ul(double c_dl);

/// Regime of a downlink as seen by the AP.
synth::Regime classify_downlink(const LinkPowers& lp, const RadioParams& p, AckPolicy ack);

enum class ErrorLabel { None, OverestimateExposedTerminal, OverestimateUlCorruption, Underestimate };
const char* to_string(ErrorLabel l);

struct DropRow {
  std::size_t drop = 0;
  std::size_t sta = 0;
  double duty = 0.0;
  double c_dl = 1.0;
  double c_ul = 1.0;
  double predicted = 1.0;
  double error = 0.0;
  ErrorLabel label = ErrorLabel::None;
};

struct MonteCarloConfig {
  std::size_t n_drops = 5000;
  std::size_t n_stas = 5;
  AckPolicy ack = AckPolicy::BaseRate;
  PowerProfile profile = PowerProfile::LteuForum;
  std::uint64_t seed = 1;
  bool lteu_enabled = true;
  RadioParams params;
};

struct MonteCarloResult {
  std::vector<DropRow> rows;
  double rmse_pp = 0.0;
  std::map<ErrorLabel, std::size_t> label_counts;
  // 5 pp bins over [-100, 100]; bin i covers [-100 + 5i, -95 + 5i).
  std::array<std::size_t, 41> histogram{};
};

/// Drop d uses Rng(derive_seed(seed, d)); serial and parallel runs agree exactly.
MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg);
MonteCarloResult run_monte_carlo_serial(const MonteCarloConfig& cfg);

/// Fixed geometry for power sweeps: AP, STA and LTE-U BS on an equilateral
/// triangle with side `side_m`, all paths LOS, no shadowing, no wall.
Scenario triangle_scenario(double side_m, const RadioParams& params);

}  // namespace wiplus::coexsim
