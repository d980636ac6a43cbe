#include "wiplus/io/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wiplus/core/error.hpp"

namespace wiplus::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return true;
}

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p = {
      {"exp1-csat80-duty33",
       "duration_s = 10\n"
       "lteu.csat_period_s = 0.080\n"
       "lteu.duty_cycle = 0.33\n"
       "lteu.puncture_period_s = 0.020\n"
       "lteu.puncture_len_s = 0.001\n"
       "lteu.load = full\n"
       "wifi.regime = strong\n"
       "wifi.load = saturated\n"},
      {"exp2-csat160-var",
       "duration_s = 10\n"
       "lteu.csat_period_s = 0.160\n"
       "lteu.duty_cycle = 0.33\n"
       "lteu.puncture_period_s = 0.020\n"
       "lteu.puncture_len_s = 0.001\n"
       "lteu.load = uniform\n"
       "lteu.load_lo = 0.3\n"
       "lteu.load_hi = 1.0\n"
       "wifi.regime = strong\n"
       "wifi.load = saturated\n"},
  };
  return p;
}

// Reads the per-link keys under `prefix` ("wifi." or "link.<name>.") into `s`.
void read_link_keys(const KeyValueConfig& kv, const std::string& prefix, synth::SynthScenario& s) {
  if (auto v = kv.get_string(prefix + "regime")) s.regime = synth::parse_regime(*v);
  if (auto v = kv.get_string(prefix + "load")) {
    if (*v == "saturated")
      s.wifi_load = synth::Saturated{};
    else if (*v == "poisson")
      s.wifi_load = synth::PoissonLoad{};
    else
      throw Error(ErrorCode::InvalidConfig, prefix + "load must be saturated or poisson, got '" + *v + "'");
  }
  if (auto v = kv.get_double(prefix + "poisson_rate_hz")) {
    if (!std::holds_alternative<synth::PoissonLoad>(s.wifi_load))
      throw Error(ErrorCode::InvalidConfig, prefix + "poisson_rate_hz needs load = poisson");
    std::get<synth::PoissonLoad>(s.wifi_load).rate_hz = *v;
  }
  if (auto v = kv.get_double(prefix + "frame_airtime_s")) s.mean_frame_airtime_s = *v;
  if (auto v = kv.get_double(prefix + "ack_airtime_s")) s.ack_airtime_s = *v;
  if (auto v = kv.get_double(prefix + "backoff_mean_s")) s.backoff_mean_s = *v;
  if (auto v = kv.get_int(prefix + "max_retries")) s.max_retries = static_cast<int>(*v);
  if (auto v = kv.get_double(prefix + "overlap_loss_probability")) s.overlap_loss_probability = *v;
  if (auto v = kv.get_double(prefix + "background_loss_probability")) s.background_loss_probability = *v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigParse, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigParse, where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw Error(ErrorCode::ConfigParse, where + ": invalid key '" + key + "'");
    if (value.empty()) throw Error(ErrorCode::ConfigParse, where + ": empty value for '" + key + "'");
    if (kv.entries_.count(key))
      throw Error(ErrorCode::ConfigParse, where + ": duplicate key '" + key + "' (first at " +
                                              kv.entries_[key].where + ")");
    kv.entries_[key] = Entry{value, where};
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) { return parse(read_file(path), path); }

void KeyValueConfig::merge_defaults(const KeyValueConfig& defaults) {
  for (const auto& [k, e] : defaults.entries_) entries_.emplace(k, e);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = Entry{value, "<override>"};
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void KeyValueConfig::fail(const Entry& e, const std::string& key, const std::string& what) const {
  throw Error(ErrorCode::ConfigParse, e.where + ": '" + key + "' " + what + ", got '" + e.value + "'");
}

std::optional<std::string> KeyValueConfig::get_string(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  double v = 0.0;
  const char* end = e->value.data() + e->value.size();
  const auto [p, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || p != end) fail(*e, key, "must be a number");
  return v;
}

std::optional<std::int64_t> KeyValueConfig::get_int(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  std::int64_t v = 0;
  const char* end = e->value.data() + e->value.size();
  const auto [p, ec] = std::from_chars(e->value.data(), end, v);
  if (ec != std::errc() || p != end) fail(*e, key, "must be an integer");
  return v;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  if (e->value == "true" || e->value == "1") return true;
  if (e->value == "false" || e->value == "0") return false;
  fail(*e, key, "must be true or false");
}

std::optional<std::vector<std::string>> KeyValueConfig::get_list(const std::string& key) const {
  const Entry* e = find(key);
  if (!e) return std::nullopt;
  std::vector<std::string> out;
  std::istringstream in(e->value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(*e, key, "has an empty list item");
    out.push_back(item);
  }
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.rfind(prefix, 0) == 0; ++it)
    out.push_back(it->first);
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [k, e] : entries_)
    if (!used_.count(k)) throw Error(ErrorCode::ConfigParse, e.where + ": unknown key '" + k + "'");
}

std::vector<std::string> synth_preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

std::string synth_preset(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
  return it->second;
}

SynthConfig synth_config_from(KeyValueConfig kv) {
  if (auto p = kv.get_string("preset")) kv.merge_defaults(KeyValueConfig::parse(synth_preset(*p), "preset " + *p));

  SynthConfig c;
  if (auto v = kv.get_double("duration_s")) c.duration_s = *v;
  if (auto v = kv.get_double("sample_rate_hz")) c.sample_rate_hz = *v;
  if (auto v = kv.get_int("seed")) c.seed = static_cast<std::uint64_t>(*v);

  LteuConfig& l = c.lteu;
  if (auto v = kv.get_double("lteu.csat_period_s")) l.csat_period_s = *v;
  if (auto v = kv.get_double("lteu.duty_cycle")) l.duty_cycle = *v;
  if (auto v = kv.get_double("lteu.puncture_period_s")) l.puncture_period_s = *v;
  if (auto v = kv.get_double("lteu.puncture_len_s")) l.puncture_len_s = *v;
  if (auto v = kv.get_double("lteu.tx_power_dbm")) l.tx_power_dbm = *v;
  if (auto v = kv.get_double("lteu.phase_offset_s")) l.phase_offset_s = *v;
  const auto lo = kv.get_double("lteu.load_lo");
  const auto hi = kv.get_double("lteu.load_hi");
  const std::string load = kv.get_string("lteu.load").value_or("full");
  if (load == "full") {
    if (lo || hi) throw Error(ErrorCode::InvalidConfig, "lteu.load_lo/load_hi need lteu.load = uniform");
    l.on_load = FullLoad{};
  } else if (load == "uniform") {
    l.on_load = UniformLoad{lo.value_or(0.3), hi.value_or(1.0)};
  } else {
    throw Error(ErrorCode::InvalidConfig, "lteu.load must be full or uniform, got '" + load + "'");
  }
  l.validate();

  synth::SynthScenario base;
  read_link_keys(kv, "wifi.", base);

  if (auto assignment = kv.get_list("slots.assignment")) {
    SlotSchedule sched;
    sched.assignment = *assignment;
    sched.slot_len_s = kv.get_double("slots.len_s").value_or(sched.slot_len_s);
    sched.validate();
    for (const auto& name : sched.links()) {
      synth::SynthScenario s = base;
      read_link_keys(kv, "link." + name + ".", s);
      s.validate();
      c.links[name] = s;
    }
    c.schedule = sched;
  } else {
    if (kv.get_double("slots.len_s")) throw Error(ErrorCode::InvalidConfig, "slots.len_s needs slots.assignment");
    base.validate();
    c.links[synth::kDefaultLink] = base;
  }
  // Anything left under link.* names a link outside the schedule.
  kv.reject_unused();
  if (!(c.duration_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "duration_s must be positive");
  if (!(c.sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidConfig, "sample_rate_hz must be positive");
  return c;
}

SynthConfig load_synth_config(const std::string& path) { return synth_config_from(KeyValueConfig::load(path)); }

SynthConfig synth_config_from_preset(const std::string& name) {
  return synth_config_from(KeyValueConfig::parse("preset = " + name, "--preset"));
}

synth::SynthTrace run_synth(const SynthConfig& config) {
  Rng timeline_rng(derive_seed(config.seed, 0));
  const auto timeline = synth::build_lteu_timeline(config.lteu, config.duration_s, timeline_rng);
  const std::uint64_t emu_seed = derive_seed(config.seed, 1);
  if (config.schedule)
    return synth::synthesize_slotted_trace(config.links, *config.schedule, timeline, config.sample_rate_hz, emu_seed);
  synth::SynthScenario s = config.links.begin()->second;
  s.rng_seed = emu_seed;
  return synth::synthesize_trace(s, timeline, config.sample_rate_hz);
}

SimConfig sim_config_from(KeyValueConfig kv) {
  SimConfig c;
  auto& mc = c.mc;
  if (auto v = kv.get_int("sim.drops")) {
    if (*v < 1) throw Error(ErrorCode::InvalidConfig, "sim.drops must be at least 1");
    mc.n_drops = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_int("sim.stas")) {
    if (*v < 1) throw Error(ErrorCode::InvalidConfig, "sim.stas must be at least 1");
    mc.n_stas = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_string("sim.ack")) mc.ack = coexsim::parse_ack_policy(*v);
  if (auto v = kv.get_string("sim.profile")) mc.profile = coexsim::parse_power_profile(*v);
  if (auto v = kv.get_int("sim.seed")) mc.seed = static_cast<std::uint64_t>(*v);
  if (auto v = kv.get_bool("sim.lteu_enabled")) mc.lteu_enabled = *v;

  auto& p = mc.params;
  const std::pair<const char*, double*> doubles[] = {
      {"radio.center_freq_mhz", &p.center_freq_mhz},
      {"radio.bandwidth_mhz", &p.bandwidth_mhz},
      {"radio.lteu_tx_dbm", &p.lteu_tx_dbm},
      {"radio.lteu_gain_dbi", &p.lteu_gain_dbi},
      {"radio.ap_tx_dbm", &p.ap_tx_dbm},
      {"radio.ap_gain_dbi", &p.ap_gain_dbi},
      {"radio.sta_tx_dbm", &p.sta_tx_dbm},
      {"radio.sta_gain_dbi", &p.sta_gain_dbi},
      {"radio.noise_figure_db", &p.noise_figure_db},
      {"radio.ed_threshold_dbm", &p.ed_threshold_dbm},
      {"radio.max_duty", &p.max_duty},
      {"radio.csat_period_s", &p.csat_period_s},
      {"radio.psi_db", &p.psi_db},
      {"radio.phi_db", &p.phi_db},
      {"radio.los_probability", &p.los_probability},
      {"radio.shadow_sigma_los_db", &p.shadow_sigma_los_db},
      {"radio.shadow_sigma_nlos_db", &p.shadow_sigma_nlos_db},
      {"radio.wall_loss_db", &p.wall_loss_db},
      {"radio.min_sta_distance_m", &p.min_sta_distance_m},
      {"radio.max_sta_distance_m", &p.max_sta_distance_m},
      {"radio.lteu_box_m", &p.lteu_box_m},
  };
  for (const auto& [key, field] : doubles)
    if (auto v = kv.get_double(key)) *field = *v;
  if (auto v = kv.get_string("radio.rate_model")) p.rate_model = coexsim::parse_rate_model(*v);
  if (auto v = kv.get_list("radio.rate_snr_db")) {
    p.rate_snr_db.clear();
    for (const auto& item : *v) {
      KeyValueConfig one = KeyValueConfig::parse("x = " + item, "radio.rate_snr_db");
      p.rate_snr_db.push_back(*one.get_double("x"));
    }
  }
  kv.reject_unused();
  p.validate();
  return c;
}

SimConfig load_sim_config(const std::string& path) { return sim_config_from(KeyValueConfig::load(path)); }

}  // namespace wiplus::io
