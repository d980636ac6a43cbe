#include "wiplus/io/json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "wiplus/core/error.hpp"

namespace wiplus::io {
namespace {

Json ms_list(const std::vector<double>& seconds) {
  Json a = Json::array();
  for (double s : seconds) a.push_back(1e3 * s);
  return a;
}

// Shortest round-trip formatting, so CSV output is stable and lossless.
std::string num(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

Json report_to_json(const DetectionReport& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["reason"] = r.reason == AbortReason::None ? Json(nullptr) : Json(to_string(r.reason));
  j["window_start_s"] = r.window_start_s;
  j["f0_hz"] = r.f0_hz;
  j["harmonics_hz"] = r.harmonics_hz;
  j["t_on_ms"] = 1e3 * r.t_on_s;
  j["airtime"] = r.airtime_estimate;
  j["burst_starts_ms"] = ms_list(r.burst_starts_s);
  j["link"] = r.link ? Json(*r.link) : Json(nullptr);
  return j;
}

Json truth_to_json(const synth::GroundTruth& t) {
  const LteuConfig& c = t.timeline.config;
  Json cfg;
  cfg["csat_period_s"] = c.csat_period_s;
  cfg["duty_cycle"] = c.duty_cycle;
  cfg["puncture_period_s"] = c.puncture_period_s;
  cfg["puncture_len_s"] = c.puncture_len_s;
  if (const auto* u = std::get_if<UniformLoad>(&c.on_load))
    cfg["on_load"] = {{"model", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
  else
    cfg["on_load"] = {{"model", "full"}};
  cfg["tx_power_dbm"] = c.tx_power_dbm;
  cfg["phase_offset_s"] = c.phase_offset_s;

  Json j;
  j["duration_s"] = t.timeline.duration_s;
  j["effective_duty"] = t.effective_duty;
  j["lteu"] = cfg;
  Json links = Json::array();
  for (const auto& l : t.links)
    links.push_back({{"link", l.link}, {"regime", synth::to_string(l.regime)}, {"airtime", l.airtime}});
  j["links"] = links;
  Json on = Json::array();
  for (const auto& iv : t.timeline.on_intervals) on.push_back({iv.start_s, iv.end_s});
  j["on_intervals_s"] = on;
  return j;
}

Json sim_summary_to_json(const coexsim::MonteCarloResult& r, const coexsim::MonteCarloConfig& c) {
  Json j;
  j["rmse_pp"] = r.rmse_pp;
  j["n"] = r.rows.size();
  j["policy"] = coexsim::to_string(c.ack);
  j["profile"] = coexsim::to_string(c.profile);
  j["drops"] = c.n_drops;
  j["stas"] = c.n_stas;
  j["seed"] = c.seed;
  Json labels = Json::object();
  for (auto l : {coexsim::ErrorLabel::None, coexsim::ErrorLabel::OverestimateExposedTerminal,
                 coexsim::ErrorLabel::OverestimateUlCorruption, coexsim::ErrorLabel::Underestimate}) {
    const auto it = r.label_counts.find(l);
    labels[coexsim::to_string(l)] = it == r.label_counts.end() ? 0 : it->second;
  }
  j["labels"] = labels;
  Json hist = Json::array();
  for (std::size_t i = 0; i < r.histogram.size(); ++i)
    hist.push_back({{"lo_pp", -100.0 + 5.0 * static_cast<double>(i)}, {"count", r.histogram[i]}});
  j["histogram"] = hist;
  return j;
}

std::string sim_rows_csv(const coexsim::MonteCarloResult& r) {
  std::vector<const coexsim::DropRow*> rows;
  for (const auto& row : r.rows) rows.push_back(&row);
  std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) {
    return a->drop != b->drop ? a->drop < b->drop : a->sta < b->sta;
  });
  std::string out = "drop,sta,duty,c_dl,c_ul,predicted,error,label\n";
  for (const auto* row : rows) {
    out += std::to_string(row->drop) + ',' + std::to_string(row->sta) + ',' + num(row->duty) + ',' + num(row->c_dl) +
           ',' + num(row->c_ul) + ',' + num(row->predicted) + ',' + num(row->error) + ',' +
           coexsim::to_string(row->label) + '\n';
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_text_file(path)); }

Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["argv"] = m.argv;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.at("version").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::string& path, const RunManifest& m) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  const std::string text = read_text_file(path);
  const Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ConfigParse, path + ": not valid JSON");
  return manifest_from_json(j);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidArgument, path + ": cannot write file");
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, path + ": write failed");
}

}  // namespace wiplus::io
