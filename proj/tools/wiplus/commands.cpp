#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

#include "wiplus/coexsim/coexsim.hpp"
#include "wiplus/core/error.hpp"
#include "wiplus/core/trace_io.hpp"
#include "wiplus/core/window.hpp"
#include "wiplus/detect/detector.hpp"
#include "wiplus/io/config.hpp"
#include "wiplus/io/json.hpp"

namespace wiplus::cli {
namespace {

struct Outputs {
  std::vector<std::string> files;
};

std::string manifest_path_for(const std::string& primary, const std::string& override_path) {
  return override_path.empty() ? primary + ".manifest.json" : override_path;
}

void finish_manifest(io::RunManifest m, const std::vector<std::string>& args, const std::vector<std::string>& inputs,
                     const std::vector<std::string>& outputs, const std::string& path) {
  m.version = WIPLUS_VERSION;
  m.argv = args;
  for (const auto& f : inputs) m.inputs[f] = io::sha256_file(f);
  for (const auto& f : outputs) m.outputs[f] = io::sha256_file(f);
  io::write_manifest(path, m);
}

// ---- synth ----

struct SynthArgs {
  std::string config, preset, out, truth, format = "csv", manifest;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
};

int cmd_synth(const SynthArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  io::SynthConfig cfg = a.config.empty() ? io::synth_config_from_preset(a.preset) : io::load_synth_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.duration) {
    if (!(*a.duration > 0.0)) throw Error(ErrorCode::InvalidArgument, "--duration must be positive");
    cfg.duration_s = *a.duration;
  }
  const auto trace = io::run_synth(cfg);
  write_trace_file(a.out, trace.snapshots, a.format == "binary" ? TraceFormat::Binary : TraceFormat::Csv);
  std::vector<std::string> outputs{a.out};
  if (!a.truth.empty()) {
    io::write_text_file(a.truth, io::truth_to_json(trace.truth).dump(2) + "\n");
    outputs.push_back(a.truth);
  }
  io::RunManifest m;
  m.command = "synth";
  m.config = a.config.empty() ? "preset:" + a.preset : a.config;
  m.seed = cfg.seed;
  finish_manifest(m, args, a.config.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.config}, outputs,
                  manifest_path_for(a.out, a.manifest));
  out << "wrote " << trace.snapshots.size() << " snapshots to " << a.out << "\n";
  return kExitOk;
}

// ---- detect ----

struct DetectArgs {
  std::string trace, json, manifest;
  double rate = kDefaultSampleRateHz;
  double window = 1.0;
  std::uint64_t seed = 1;
  double slot_len = 0.0;
  std::vector<std::string> assignment;
};

int cmd_detect(const DetectArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (!(a.rate > 0.0) || !(a.window > 0.0)) throw Error(ErrorCode::InvalidArgument, "--rate and --window must be positive");
  const auto snapshots = read_trace_file(a.trace);
  const SampleWindow full = snapshots_to_window(snapshots, a.rate);
  const auto len = static_cast<std::size_t>(std::llround(a.window * a.rate));
  if (len < 2) throw Error(ErrorCode::InvalidArgument, "--window holds fewer than two samples");
  const auto windows = detect::split_window(full, len);
  if (windows.empty())
    throw Error(ErrorCode::InvalidArgument, "trace holds " + std::to_string(full.samples.size()) +
                                                " samples, fewer than one window of " + std::to_string(len));

  std::vector<DetectionReport> reports;
  if (a.assignment.empty()) {
    reports = detect::detect_batch(windows, a.seed);
  } else {
    SlotSchedule sched;
    sched.slot_len_s = a.slot_len;
    sched.assignment = a.assignment;
    sched.validate();
    for (std::size_t i = 0; i < windows.size(); ++i) {
      std::vector<std::string> labels;
      labels.reserve(len);
      for (std::size_t k = 0; k < len; ++k)
        labels.push_back(sched.link_at(ticks_to_seconds(snapshots[i * len + k].timestamp_ticks)));
      Rng rng(derive_seed(a.seed, i));
      for (auto& [link, r] : detect::detect_per_link(windows[i], labels, sched, rng)) reports.push_back(r);
    }
  }

  std::string text;
  bool any = false;
  for (const auto& r : reports) {
    text += io::report_to_json(r).dump() + "\n";
    any = any || r.detected();
  }
  if (a.json.empty() || a.json == "-") {
    out << text;
  } else {
    io::write_text_file(a.json, text);
    io::RunManifest m;
    m.command = "detect";
    m.seed = a.seed;
    finish_manifest(m, args, {a.trace}, {a.json}, manifest_path_for(a.json, a.manifest));
  }
  return any ? kExitOk : kExitNoDetection;
}

// ---- sweep ----

struct SweepArgs {
  std::string preset = "fig7", powers = "15..-33", out, manifest;
  double step = 2.0;
  std::size_t seeds = 5;
  std::uint64_t seed = 1;
  double duration = 10.0;
  double side = 20.0;
};

std::vector<double> parse_powers(const std::string& range, double step) {
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw Error(ErrorCode::InvalidArgument, "bad power value '" + s + "'");
    return v;
  };
  const auto dots = range.find("..");
  if (dots == std::string::npos) return {num(range)};
  const double from = num(range.substr(0, dots)), to = num(range.substr(dots + 2));
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "--step must be positive");
  std::vector<double> out;
  const double dir = to >= from ? 1.0 : -1.0;
  const auto n = static_cast<long>(std::floor(std::abs(to - from) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(from + dir * step * static_cast<double>(i));
  return out;
}

// Testbed analog: AP, STA and LTE-U BS on a triangle, WiFi at 15 dBm.
coexsim::RadioParams fig7_radio() {
  coexsim::RadioParams p;
  p.center_freq_mhz = 5240.0;
  p.ap_tx_dbm = 15.0;
  p.sta_tx_dbm = 15.0;
  p.rate_model = coexsim::RateModel::Margin;
  return p;
}

int cmd_sweep(const SweepArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  if (a.preset != "fig7") throw Error(ErrorCode::InvalidArgument, "unknown sweep preset '" + a.preset + "'");
  if (a.seeds == 0) throw Error(ErrorCode::InvalidArgument, "--seeds must be at least 1");
  const auto powers = parse_powers(a.powers, a.step);
  const coexsim::RadioParams radio = fig7_radio();
  const io::SynthConfig base = io::synth_config_from_preset("exp1-csat80-duty33");

  struct Cell {
    std::vector<double> estimates;
    double truth = 1.0;
    std::size_t detected = 0;
  };
  std::vector<synth::Regime> regimes;
  for (double p : powers) {
    coexsim::Scenario s = coexsim::triangle_scenario(a.side, radio);
    s.params.lteu_tx_dbm = p;
    regimes.push_back(coexsim::classify_downlink(coexsim::link_powers(s, 0), s.params, coexsim::AckPolicy::BaseRate));
  }

  const std::size_t jobs = powers.size() * a.seeds;
  std::vector<Cell> cells(jobs);
  std::vector<std::string> failures(jobs);
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < static_cast<long>(jobs); ++j) {
    const auto job = static_cast<std::size_t>(j);
    try {
      io::SynthConfig cfg = base;
      cfg.duration_s = a.duration;
      cfg.seed = derive_seed(a.seed, job % a.seeds);
      cfg.lteu.tx_power_dbm = powers[job / a.seeds];
      cfg.links.begin()->second.regime = regimes[job / a.seeds];
      const auto trace = io::run_synth(cfg);
      const auto windows = detect::split_window(snapshots_to_window(trace.snapshots, cfg.sample_rate_hz),
                                                static_cast<std::size_t>(cfg.sample_rate_hz));
      Cell& c = cells[job];
      c.truth = trace.truth.links.front().airtime;
      for (const auto& r : detect::detect_batch_serial(windows, cfg.seed)) {
        c.estimates.push_back(r.detected() ? r.airtime_estimate : 1.0);
        c.detected += r.detected();
      }
    } catch (const std::exception& e) {
      failures[job] = e.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw Error(ErrorCode::InvalidArgument, f);

  std::ostringstream csv;
  csv << "power_dbm,regime,mean_airtime,std_airtime,truth,windows,detected\n";
  for (std::size_t p = 0; p < powers.size(); ++p) {
    std::vector<double> all;
    double truth = 0.0;
    std::size_t detected = 0;
    for (std::size_t s = 0; s < a.seeds; ++s) {
      const Cell& c = cells[p * a.seeds + s];
      all.insert(all.end(), c.estimates.begin(), c.estimates.end());
      truth += c.truth / static_cast<double>(a.seeds);
      detected += c.detected;
    }
    double mean = 0.0, var = 0.0;
    for (double v : all) mean += v / static_cast<double>(all.size());
    for (double v : all) var += (v - mean) * (v - mean);
    const double sd = all.size() > 1 ? std::sqrt(var / static_cast<double>(all.size() - 1)) : 0.0;
    char line[160];
    std::snprintf(line, sizeof line, "%g,%s,%.6f,%.6f,%.6f,%zu,%zu\n", powers[p], synth::to_string(regimes[p]), mean,
                  sd, truth, all.size(), detected);
    csv << line;
  }
  if (a.out.empty() || a.out == "-") {
    out << csv.str();
  } else {
    io::write_text_file(a.out, csv.str());
    io::RunManifest m;
    m.command = "sweep";
    m.config = "preset:" + a.preset;
    m.seed = a.seed;
    finish_manifest(m, args, {}, {a.out}, manifest_path_for(a.out, a.manifest));
  }
  return kExitOk;
}

// ---- sim ----

struct SimArgs {
  std::string config, ack, profile, csv, summary, manifest;
  std::optional<std::size_t> drops, stas;
  std::optional<std::uint64_t> seed;
};

int cmd_sim(const SimArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  io::SimConfig cfg = a.config.empty() ? io::SimConfig{} : io::load_sim_config(a.config);
  auto& mc = cfg.mc;
  if (a.drops) mc.n_drops = *a.drops;
  if (a.stas) mc.n_stas = *a.stas;
  if (a.seed) mc.seed = *a.seed;
  if (!a.ack.empty()) mc.ack = coexsim::parse_ack_policy(a.ack);
  if (!a.profile.empty()) mc.profile = coexsim::parse_power_profile(a.profile);
  if (mc.n_drops == 0 || mc.n_stas == 0) throw Error(ErrorCode::InvalidArgument, "--drops and --stas must be at least 1");

  const auto result = coexsim::run_monte_carlo(mc);
  const std::string summary = io::sim_summary_to_json(result, mc).dump(2) + "\n";
  std::vector<std::string> outputs;
  if (!a.csv.empty()) {
    io::write_text_file(a.csv, io::sim_rows_csv(result));
    outputs.push_back(a.csv);
  }
  if (a.summary.empty() || a.summary == "-") {
    out << summary;
  } else {
    io::write_text_file(a.summary, summary);
    outputs.insert(outputs.begin(), a.summary);
  }
  if (!outputs.empty()) {
    io::RunManifest m;
    m.command = "sim";
    m.config = a.config;
    m.seed = mc.seed;
    finish_manifest(m, args, a.config.empty() ? std::vector<std::string>{} : std::vector<std::string>{a.config},
                    outputs, manifest_path_for(outputs.front(), a.manifest));
  }
  return kExitOk;
}

// ---- replay ----

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  const io::RunManifest m = io::read_manifest(manifest_path);
  if (m.argv.empty() || m.argv.front() == "replay") throw Error(ErrorCode::InvalidArgument, "manifest has no command");
  for (const auto& [path, digest] : m.inputs)
    if (io::sha256_file(path) != digest) {
      err << "input changed since the run: " << path << "\n";
      return kExitError;
    }
  std::ostringstream sink;
  const int code = run(m.argv, sink, err);
  if (code == kExitError) return code;
  bool same = true;
  for (const auto& [path, digest] : m.outputs) {
    const bool ok = io::sha256_file(path) == digest;
    out << (ok ? "match    " : "MISMATCH ") << path << "\n";
    same = same && ok;
  }
  return same ? kExitOk : kExitError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LTE-U interference detection from WiFi MAC counters"};
  app.require_subcommand(1);
  app.set_version_flag("--version", WIPLUS_VERSION);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Synthesize a register trace and its ground truth");
  auto* src = synth->add_option_group("source");
  src->add_option("--config", sa.config, "Scenario config file")->check(CLI::ExistingFile);
  src->add_option("--preset", sa.preset, "Built-in scenario")
      ->check(CLI::IsMember(io::synth_preset_names()));
  src->require_option(1);
  synth->add_option("--out", sa.out, "Trace output path")->required();
  synth->add_option("--truth", sa.truth, "Ground-truth JSON path");
  synth->add_option("--seed", sa.seed, "Override the config seed");
  synth->add_option("--duration", sa.duration, "Override the trace length in seconds");
  synth->add_option("--format", sa.format, "Trace format")->check(CLI::IsMember({"csv", "binary"}));
  synth->add_option("--manifest", sa.manifest, "Manifest path (default <out>.manifest.json)");

  DetectArgs da;
  auto* det = app.add_subcommand("detect", "Run detection on a trace, one JSON report per window");
  det->add_option("--trace", da.trace, "Trace file (CSV or binary)")->required();
  det->add_option("--rate", da.rate, "Sampling rate in Hz");
  det->add_option("--window", da.window, "Window length in seconds");
  det->add_option("--json", da.json, "NDJSON output path (default stdout)");
  det->add_option("--seed", da.seed, "Clustering seed");
  auto* slot = det->add_option("--slot-len", da.slot_len, "Slot length in seconds for per-link detection");
  det->add_option("--assignment", da.assignment, "Slot owners in order, e.g. A,B")->delimiter(',')->needs(slot);
  det->add_option("--manifest", da.manifest, "Manifest path (default <json>.manifest.json)");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Sweep LTE-U power and tabulate detected airtime");
  sweep->add_option("--preset", wa.preset, "Sweep preset");
  sweep->add_option("--powers", wa.powers, "Power range FROM..TO in dBm, or a single value");
  sweep->add_option("--step", wa.step, "Power step in dB");
  sweep->add_option("--seeds", wa.seeds, "Traces per power");
  sweep->add_option("--seed", wa.seed, "Base seed");
  sweep->add_option("--duration", wa.duration, "Trace length in seconds");
  sweep->add_option("--side", wa.side, "Triangle side in meters");
  sweep->add_option("--out", wa.out, "CSV output path (default stdout)");
  sweep->add_option("--manifest", wa.manifest, "Manifest path (default <out>.manifest.json)");

  SimArgs ma;
  auto* sim = app.add_subcommand("sim", "Monte Carlo UL prediction error under LTE-U");
  sim->add_option("--config", ma.config, "Simulation config file")->check(CLI::ExistingFile);
  sim->add_option("--drops", ma.drops, "Number of drops");
  sim->add_option("--stas", ma.stas, "STAs per drop");
  sim->add_option("--ack", ma.ack, "ACK rate policy")->check(CLI::IsMember({"base", "matched"}));
  sim->add_option("--profile", ma.profile, "Power profile")->check(CLI::IsMember({"symmetric", "lteuforum"}));
  sim->add_option("--seed", ma.seed, "Base seed");
  sim->add_option("--csv", ma.csv, "Per-drop CSV path");
  sim->add_option("--summary", ma.summary, "Summary JSON path (default stdout)");
  sim->add_option("--manifest", ma.manifest, "Manifest path (default <summary>.manifest.json)");

  std::string manifest;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output digests");
  replay->add_option("manifest", manifest, "Manifest file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << WIPLUS_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Help for a subcommand arrives the same way.
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (synth->parsed()) return cmd_synth(sa, args, out);
    if (det->parsed()) return cmd_detect(da, args, out);
    if (sweep->parsed()) return cmd_sweep(wa, args, out);
    if (sim->parsed()) return cmd_sim(ma, args, out);
    return cmd_replay(manifest, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace wiplus::cli
