#include "anytime/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "anytime/evaluation.hpp"
#include "anytime/pipeline.hpp"
#include "anytime/rng.hpp"
#include "anytime/scenegen.hpp"
#include "anytime/scheduler.hpp"
#include "anytime/sim_config.hpp"

namespace anytime {

void validate_tables(const CalibTables& t) {
  const int R = t.num_blocks, H = t.num_heads;
  if (R < 1 || H < 1) throw std::runtime_error("tables: R and H must be >= 1");
  const std::size_t cells = static_cast<std::size_t>(R) * H;
  if (t.wcet_ms.size() != cells || t.accuracy_pct.size() != cells)
    throw std::runtime_error("tables: matrix size does not match R x H");

  double max_acc = 0.0;
  for (int r = 1; r <= R; ++r) {
    for (int h = 1; h <= H; ++h) {
      const double w = t.wcet(r, h), a = t.accuracy(r, h);
      if (!(w > 0.0)) throw std::runtime_error("tables: wcet must be positive");
      if (!(a >= 0.0 && a <= 100.0))
        throw std::runtime_error("tables: accuracy must be in [0, 100]");
      if (h > 1 && !(w > t.wcet(r, h - 1)))
        throw std::runtime_error("tables: wcet not strictly increasing along row");
      if (r > 1 && !(w > t.wcet(r - 1, h)))
        throw std::runtime_error("tables: wcet not strictly increasing along column");
      max_acc = std::max(max_acc, a);
    }
  }
  if (std::abs(max_acc - 100.0) > 1e-6)
    throw std::runtime_error("tables: accuracy max must be 100.0");
}

CalibTables mark_executable(CalibTables t) {
  const int R = t.num_blocks, H = t.num_heads;
  for (int r = 1; r <= R; ++r) {
    for (int h = 1; h <= H; ++h) {
      bool dominated = false;
      for (int h2 = 1; h2 <= H && !dominated; ++h2) {
        const double w = t.wcet(R, h2), a = t.accuracy(R, h2);
        dominated = w <= t.wcet(r, h) && a >= t.accuracy(r, h) &&
                    (w < t.wcet(r, h) || a > t.accuracy(r, h));
      }
      t.executable[t.idx(r, h)] = dominated ? 0 : 1;
    }
  }
  return t;
}

namespace {

// accuracy desc, then wcet asc, then blocks asc.
bool better(const ConfigChoice& a, const ConfigChoice& b) {
  if (a.accuracy_pct != b.accuracy_pct) return a.accuracy_pct > b.accuracy_pct;
  if (a.wcet_ms != b.wcet_ms) return a.wcet_ms < b.wcet_ms;
  return a.blocks < b.blocks;
}

bool cheaper(const ConfigChoice& a, const ConfigChoice& b) {
  if (a.wcet_ms != b.wcet_ms) return a.wcet_ms < b.wcet_ms;
  return a.blocks < b.blocks;
}

}  // namespace

ConfigChoice best_config(const CalibTables& t, double remaining_ms) {
  ConfigChoice best, cheapest;
  bool have_best = false, have_cheapest = false;
  for (int r = 1; r <= t.num_blocks; ++r) {
    for (int h = 1; h <= t.num_heads; ++h) {
      if (!t.is_executable(r, h)) continue;
      const ConfigChoice c{r, h, false, t.wcet(r, h), t.accuracy(r, h)};
      if (!have_cheapest || cheaper(c, cheapest)) {
        cheapest = c;
        have_cheapest = true;
      }
      if (c.wcet_ms <= remaining_ms && (!have_best || better(c, best))) {
        best = c;
        have_best = true;
      }
    }
  }
  if (!have_cheapest)
    throw std::invalid_argument("best_config: executable mask not computed");
  if (have_best) return best;
  cheapest.infeasible = true;
  return cheapest;
}

ConfigChoice best_full_head_config(const CalibTables& t, double remaining_ms) {
  const int H = t.num_heads;
  ConfigChoice best, cheapest;
  bool have_best = false;
  for (int r = 1; r <= t.num_blocks; ++r) {
    const ConfigChoice c{r, H, false, t.wcet(r, H), t.accuracy(r, H)};
    if (r == 1 || cheaper(c, cheapest)) cheapest = c;
    if (c.wcet_ms <= remaining_ms && (!have_best || better(c, best))) {
      best = c;
      have_best = true;
    }
  }
  if (have_best) return best;
  cheapest.infeasible = true;
  return cheapest;
}

std::string tables_to_json_text(const CalibTables& t) {
  nlohmann::ordered_json j;
  j["R"] = t.num_blocks;
  j["H"] = t.num_heads;
  auto rows = [&](const std::vector<double>& m) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (int r = 0; r < t.num_blocks; ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int h = 0; h < t.num_heads; ++h)
        row.push_back(m[static_cast<std::size_t>(r) * t.num_heads + h]);
      out.push_back(std::move(row));
    }
    return out;
  };
  j["wcet"] = rows(t.wcet_ms);
  j["accuracy"] = rows(t.accuracy_pct);
  return j.dump(2) + "\n";
}

CalibTables tables_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("tables: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("R") || !j.contains("H") ||
      !j.contains("wcet") || !j.contains("accuracy"))
    throw std::runtime_error("tables: expected object with R, H, wcet, accuracy");

  CalibTables t;
  try {
    t.num_blocks = j.at("R").get<int>();
    t.num_heads = j.at("H").get<int>();
    if (t.num_blocks < 1 || t.num_heads < 1)
      throw std::runtime_error("tables: R and H must be >= 1");
    auto read = [&](const char* key, std::vector<double>& m) {
      const auto& rows = j.at(key);
      if (!rows.is_array() || static_cast<int>(rows.size()) != t.num_blocks)
        throw std::runtime_error(std::string("tables: ") + key + " row count != R");
      for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != t.num_heads)
          throw std::runtime_error(std::string("tables: ") + key + " column count != H");
        for (const auto& v : row) m.push_back(v.get<double>());
      }
    };
    read("wcet", t.wcet_ms);
    read("accuracy", t.accuracy_pct);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("tables: malformed field: ") + e.what());
  }
  t.executable.assign(t.wcet_ms.size(), 0);
  validate_tables(t);
  return mark_executable(std::move(t));
}

void save_tables(const CalibTables& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("tables: cannot open for writing: " + path);
  out << tables_to_json_text(t);
  if (!out) throw std::runtime_error("tables: write failed: " + path);
}

CalibTables load_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("tables: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return tables_from_json_text(ss.str());
}

CalibTables calibrate(const SimConfig& sim, const std::vector<Scene>& scenes,
                      const CalibConfig& cfg) {
  if (scenes.empty()) throw std::invalid_argument("calibrate: scene list is empty");
  if (cfg.runs_per_cell < 1)
    throw std::invalid_argument("calibrate: runs_per_cell must be >= 1");
  if (cfg.R < 1 || cfg.R > static_cast<int>(sim.timing.per_block_ms.size()))
    throw std::invalid_argument("calibrate: R out of range of the timing model");
  if (cfg.H < 1 || cfg.H > static_cast<int>(sim.timing.per_head_ms.size()))
    throw std::invalid_argument("calibrate: H out of range of the timing model");

  CalibTables t(cfg.R, cfg.H);
  std::vector<double> raw_acc(t.wcet_ms.size(), 0.0);

  // Cells run sequentially: the latency measurement of one cell must not be
  // perturbed by co-running cells.
  for (int r = 1; r <= cfg.R; ++r) {
    for (int h = 1; h <= cfg.H; ++h) {
      double worst = 0.0, acc_sum = 0.0;
      std::int64_t frames = 0;
      for (int pass = 0; pass < cfg.runs_per_cell; ++pass) {
        // Per-(cell, pass) stream: results do not depend on cell order.
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(r),
                         static_cast<std::uint64_t>(h),
                         static_cast<std::uint64_t>(pass)));
        int cursor = 1;
        for (const Scene& scene : scenes) {
          for (const SceneFrame& frame : scene.frames) {
            auto [heads, next] = select_heads_round_robin(cursor, h, cfg.H);
            cursor = next;
            // Unbounded deadline, no clamp: this run defines the bound.
            const double exec = sample_exec_latency(sim.timing, r, h, nullptr, rng);
            const auto dets =
                draw_detections(frame.gt, frame.pose, r, heads, sim.detector, rng);
            worst = std::max(worst, exec);
            acc_sum += score_frame(dets, frame.gt, sim.match_radius_m).f1;
            ++frames;
          }
        }
      }
      t.set_wcet(r, h, worst);
      raw_acc[t.idx(r, h)] = acc_sum / static_cast<double>(frames);
    }
  }

  const double max_raw = *std::max_element(raw_acc.begin(), raw_acc.end());
  if (!(max_raw > 0.0))
    throw std::runtime_error("calibrate: no detection signal in calibration scenes");
  for (std::size_t i = 0; i < raw_acc.size(); ++i)
    t.accuracy_pct[i] = raw_acc[i] / max_raw * 100.0;

  t = mark_executable(std::move(t));
  validate_tables(t);
  return t;
}

CalibTables calibrate(const SimConfig& sim, const CalibConfig& cfg) {
  std::vector<Scene> scenes;
  scenes.reserve(cfg.scene_seeds.size());
  for (std::uint64_t s : cfg.scene_seeds) {
    SceneSpec spec = sim.scene;
    spec.seed = s;
    scenes.push_back(generate_scene(spec));
  }
  return calibrate(sim, scenes, cfg);
}

}  // namespace anytime
