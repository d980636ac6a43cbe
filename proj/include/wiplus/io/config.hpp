#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wiplus/coexsim/coexsim.hpp"
#include "wiplus/core/types.hpp"
#include "wiplus/synth/synthesizer.hpp"

namespace wiplus::io {

/// Flat `key = value` file. `#` starts a comment; blank lines are ignored.
/// Typed getters record which keys were read so leftovers can be rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Copies every key of `defaults` that this config does not set.
  void merge_defaults(const KeyValueConfig& defaults);
  void set(const std::string& key, const std::string& value);

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;

  /// Keys starting with `prefix`, in sorted order.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;
  /// Throws ConfigParse naming the first key no getter asked for.
  void reject_unused() const;

 private:
  struct Entry {
    std::string value;
    std::string where;  // origin:line
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) const;

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

/// A single-link or slotted synthesis run.
struct SynthConfig {
  LteuConfig lteu;
  double duration_s = 10.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  std::uint64_t seed = 1;
  // One entry per link; a single "A" when unslotted.
  std::map<std::string, synth::SynthScenario> links;
  std::optional<SlotSchedule> schedule;
};

struct SimConfig {
  coexsim::MonteCarloConfig mc;
};

std::vector<std::string> synth_preset_names();
/// Preset text in the config syntax; throws InvalidArgument for unknown names.
std::string synth_preset(const std::string& name);

/// Reads a synth config. A `preset = name` key pulls that preset's values in
/// underneath the file's own keys.
SynthConfig synth_config_from(KeyValueConfig kv);
SynthConfig load_synth_config(const std::string& path);
SynthConfig synth_config_from_preset(const std::string& name);

/// Builds the timeline from Rng(derive_seed(seed, 0)) and runs the emulation
/// with derive_seed(seed, 1), slotted when the config has a schedule.
synth::SynthTrace run_synth(const SynthConfig& config);

SimConfig sim_config_from(KeyValueConfig kv);
SimConfig load_sim_config(const std::string& path);

}  // namespace wiplus::io
