#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wiplus/coexsim/coexsim.hpp"
#include "wiplus/core/types.hpp"
#include "wiplus/synth/synthesizer.hpp"

namespace wiplus::io {

using Json = nlohmann::ordered_json;

/// {status, reason, window_start_s, f0_hz, harmonics_hz, t_on_ms, airtime, burst_starts_ms, link}
Json report_to_json(const DetectionReport& r);
Json truth_to_json(const synth::GroundTruth& t);
Json sim_summary_to_json(const coexsim::MonteCarloResult& r, const coexsim::MonteCarloConfig& c);

/// drop,sta,duty,c_dl,c_ul,predicted,error,label sorted by (drop, sta).
std::string sim_rows_csv(const coexsim::MonteCarloResult& r);

/// Digest and provenance of one command run; written next to its outputs.
struct RunManifest {
  std::string command;
  std::string config;  // config path or preset name; empty when unused
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> argv;
  std::map<std::string, std::string> inputs;   // path -> sha256 hex
  std::map<std::string, std::string> outputs;  // path -> sha256 hex
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);
void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace wiplus::io
