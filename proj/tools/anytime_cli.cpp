// Command-line front end: calibrate tables, generate scenes, run single
// experiments, sweep deadline grids, and diff reports.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anytime/calibration.hpp"
#include "anytime/evaluation.hpp"
#include "anytime/pipeline.hpp"
#include "anytime/scenegen.hpp"
#include "anytime/sim_config.hpp"

namespace {

using namespace anytime;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// "1,2,3" -> seeds; "a.jsonl,b.jsonl" -> loaded scenes. No mixing.
struct SceneSet {
  std::vector<std::uint64_t> seeds;
  std::vector<Scene> loaded;
};

SceneSet parse_scenes(const std::string& arg) {
  SceneSet set;
  for (const std::string& tok : split_list(arg)) {
    if (all_digits(tok))
      set.seeds.push_back(std::stoull(tok));
    else
      set.loaded.push_back(load_scene(tok));
  }
  if (!set.seeds.empty() && !set.loaded.empty())
    throw std::runtime_error("--scenes: mix of seeds and files is not supported");
  return set;
}

SimConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return SimConfig{};
  return load_sim_config(path);
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split_list(s)) out.push_back(std::stod(tok));
  return out;
}

std::vector<Policy> parse_policies(const std::string& s) {
  std::vector<Policy> out;
  for (const std::string& tok : split_list(s)) out.push_back(policy_from_name(tok));
  return out;
}

std::string guess_format(const std::string& format, const std::string& out_path) {
  if (!format.empty()) return format;
  if (out_path.size() >= 5 && out_path.substr(out_path.size() - 5) == ".json")
    return "json";
  return "csv";
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Deadline-aware anytime detection scheduling testbed"};
  app.require_subcommand(1);

  // calibrate ----------------------------------------------------------
  auto* cal = app.add_subcommand("calibrate", "Measure latency/accuracy tables");
  std::string cal_config, cal_out;
  std::uint64_t cal_seed = 0;
  cal->add_option("--config", cal_config,
                  "JSON: {R, H, runs_per_cell, scene_seeds, seed, sim:{...}}");
  cal->add_option("--out", cal_out, "Output tables JSON")->required();
  cal->add_option("--seed", cal_seed, "Override the calibration seed");

  // scenegen -----------------------------------------------------------
  auto* gen = app.add_subcommand("scenegen", "Generate a synthetic scene");
  std::string gen_spec, gen_out;
  std::uint64_t gen_seed = 0;
  double gen_period = 0.0, gen_duration = 0.0;
  gen->add_option("--spec", gen_spec, "Sim config JSON; its scene block is used");
  gen->add_option("--out", gen_out, "Output scene JSONL")->required();
  gen->add_option("--seed", gen_seed, "Scene seed");
  gen->add_option("--period-ms", gen_period, "Frame period override");
  gen->add_option("--duration-s", gen_duration, "Duration override");

  // run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "One policy at one deadline");
  std::string run_tables, run_scenes = "1", run_policy = "ours", run_out,
              run_format, run_config;
  double run_deadline = 100.0, run_period = 0.0;
  std::uint64_t run_seed = 1;
  run->add_option("--tables", run_tables, "Calibration tables JSON")->required();
  run->add_option("--scenes", run_scenes, "Comma list of seeds or .jsonl files");
  run->add_option("--policy", run_policy, "Scheduling policy name");
  run->add_option("--deadline-ms", run_deadline, "Frame deadline");
  run->add_option("--period-ms", run_period, "Frame period (default: derived)");
  run->add_option("--seed", run_seed, "Master seed");
  run->add_option("--out", run_out, "Report path");
  run->add_option("--format", run_format, "csv|json (default from --out suffix)");
  run->add_option("--config", run_config, "Sim config JSON overrides");

  // sweep ----------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "Policies x deadlines grid");
  std::string sw_tables, sw_scenes = "1,2,3,4,5", sw_policies, sw_deadlines,
              sw_out, sw_format, sw_config;
  double sw_period = 0.0;
  std::uint64_t sw_seed = 1;
  unsigned sw_workers = 0;
  sweep->add_option("--tables", sw_tables, "Calibration tables JSON")->required();
  sweep->add_option("--scenes", sw_scenes, "Comma list of seeds or .jsonl files");
  sweep->add_option("--policy", sw_policies,
                    "Comma list of policies (default: all)");
  sweep->add_option("--deadline-ms", sw_deadlines,
                    "Comma list of deadlines (default: 50..140 step 10)");
  sweep->add_option("--period-ms", sw_period, "Period override for every cell");
  sweep->add_option("--seed", sw_seed, "Master seed");
  sweep->add_option("--out", sw_out, "Report path (default: CSV to stdout)");
  sweep->add_option("--format", sw_format, "csv|json (default from --out suffix)");
  sweep->add_option("--config", sw_config, "Sim config JSON overrides");
  sweep->add_option("--workers", sw_workers, "Sweep cell parallelism");

  // compare ----------------------------------------------------------
  auto* cmp = app.add_subcommand("compare", "Diff two JSON reports");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("first", cmp_a, "Report A (JSON)")->required();
  cmp->add_option("second", cmp_b, "Report B (JSON)")->required();
  cmp->add_option("--out", cmp_out, "Write the diff here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (*cal) {
    SimConfig sim;
    CalibConfig cfg;
    if (!cal_config.empty()) {
      std::ifstream in(cal_config);
      if (!in) throw std::runtime_error("cannot open: " + cal_config);
      nlohmann::json j = nlohmann::json::parse(in);
      if (j.contains("sim")) sim = sim_config_from_json_text(j.at("sim").dump());
      cfg.R = j.value("R", sim.R);
      cfg.H = j.value("H", sim.H);
      cfg.runs_per_cell = j.value("runs_per_cell", cfg.runs_per_cell);
      cfg.seed = j.value("seed", cfg.seed);
      if (j.contains("scene_seeds"))
        cfg.scene_seeds = j.at("scene_seeds").get<std::vector<std::uint64_t>>();
    } else {
      cfg.R = sim.R;
      cfg.H = sim.H;
    }
    if (cal->count("--seed")) cfg.seed = cal_seed;
    const CalibTables tables = calibrate(sim, cfg);
    save_tables(tables, cal_out);
    std::cout << "wrote " << cal_out << " (" << tables.num_blocks << "x"
              << tables.num_heads << " cells)\n";
    return 0;
  }

  if (*gen) {
    SimConfig sim = load_config_or_default(gen_spec);
    SceneSpec spec = sim.scene;
    if (gen->count("--seed")) spec.seed = gen_seed;
    if (gen_period > 0.0) spec.frame_period_ms = gen_period;
    if (gen_duration > 0.0) spec.duration_s = gen_duration;
    const Scene scene = generate_scene(spec);
    save_scene(scene, gen_out);
    std::cout << "wrote " << gen_out << " (" << scene.frames.size() << " frames)\n";
    return 0;
  }

  if (*run || *sweep) {
    const bool single = run->parsed();
    const std::string tables_path = single ? run_tables : sw_tables;
    const CalibTables tables = load_tables(tables_path);
    const SimConfig sim = load_config_or_default(single ? run_config : sw_config);
    const SceneSet scenes = parse_scenes(single ? run_scenes : sw_scenes);

    SweepOptions opt;
    opt.master_seed = single ? run_seed : sw_seed;
    if (!scenes.seeds.empty()) opt.scene_seeds = scenes.seeds;
    if (!scenes.loaded.empty()) opt.fixed_scenes = &scenes.loaded;
    if (single) {
      opt.policies = {policy_from_name(run_policy)};
      opt.deadlines_ms = {run_deadline};
      opt.period_override_ms = run_period;
    } else {
      if (!sw_policies.empty()) opt.policies = parse_policies(sw_policies);
      if (!sw_deadlines.empty()) opt.deadlines_ms = parse_doubles(sw_deadlines);
      opt.period_override_ms = sw_period;
      opt.workers = sw_workers;
    }

    const SweepReport report = run_sweep(sim, tables, opt);
    const std::string out_path = single ? run_out : sw_out;
    if (!out_path.empty()) {
      save_report(report, out_path,
                  guess_format(single ? run_format : sw_format, out_path));
      std::cout << "wrote " << out_path << " (" << report.cells.size() << " cells)\n";
    } else {
      std::cout << report_to_csv(report);
    }
    return 0;
  }

  if (*cmp) {
    const std::string diff = compare_reports(load_report(cmp_a), load_report(cmp_b));
    if (!cmp_out.empty()) {
      std::ofstream out(cmp_out);
      if (!out) throw std::runtime_error("cannot open for writing: " + cmp_out);
      out << diff;
      std::cout << "wrote " << cmp_out << "\n";
    } else {
      std::cout << diff;
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
