#include "anytime/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace anytime {

FrameScore score_frame(const std::vector<Box3D>& detections,
                       const std::vector<Box3D>& gt, double match_radius_m) {
  FrameScore s;
  s.gt_count = static_cast<int>(gt.size());
  s.det_count = static_cast<int>(detections.size());
  if (gt.empty() && detections.empty()) {
    s.precision = s.recall = s.f1 = 1.0;  // nothing to find, nothing invented
    return s;
  }

  std::map<int, std::vector<std::size_t>> gt_by_group;
  for (std::size_t i = 0; i < gt.size(); ++i)
    gt_by_group[gt[i].class_group].push_back(i);

  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (detections[a].confidence != detections[b].confidence)
      return detections[a].confidence > detections[b].confidence;
    return a < b;  // equal confidence: input order decides, deterministically
  });

  std::vector<char> used(gt.size(), 0);
  int matched = 0;
  for (std::size_t di : order) {
    const Box3D& d = detections[di];
    const auto it = gt_by_group.find(d.class_group);
    if (it == gt_by_group.end()) continue;
    double best_dist = match_radius_m;
    std::size_t best = gt.size();
    for (std::size_t gi : it->second) {
      if (used[gi]) continue;
      const double dist = std::hypot(d.center[0] - gt[gi].center[0],
                                     d.center[1] - gt[gi].center[1]);
      if (dist < best_dist || (dist == best_dist && best == gt.size())) {
        best_dist = dist;
        best = gi;
      }
    }
    if (best < gt.size()) {
      used[best] = 1;
      ++matched;
    }
  }

  s.matched = matched;
  s.precision = s.det_count > 0 ? static_cast<double>(matched) / s.det_count : 1.0;
  s.recall = s.gt_count > 0 ? static_cast<double>(matched) / s.gt_count : 1.0;
  const double pr = s.precision + s.recall;
  s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

double period_for_deadline(double deadline_ms) {
  return deadline_ms > 100.0 ? 150.0 : 100.0;
}

namespace {

std::string config_key(const Schedule& s) {
  std::string key = "r" + std::to_string(s.num_blocks) + "h" +
                    std::to_string(s.heads.size());
  if (s.infeasible) key += "!";
  return key;
}

SweepCell run_cell(const SimConfig& cfg, const CalibTables& tables, Policy policy,
                   double deadline_ms, double period_ms, const SweepOptions& opt) {
  SweepCell cell;
  cell.policy = policy;
  cell.deadline_ms = deadline_ms;
  cell.period_ms = period_ms;

  const std::size_t scene_count =
      opt.fixed_scenes ? opt.fixed_scenes->size() : opt.scene_seeds.size();
  double f1_sum = 0.0, elapsed_sum = 0.0, overhead_sum = 0.0;
  std::int64_t missed = 0, frames = 0;

  for (std::size_t si = 0; si < scene_count; ++si) {
    Scene generated;
    const Scene* scene = nullptr;
    std::uint64_t scene_tag = 0;
    if (opt.fixed_scenes) {
      scene = &(*opt.fixed_scenes)[si];
      scene_tag = si;
    } else {
      SceneSpec spec = cfg.scene;
      spec.seed = opt.scene_seeds[si];
      spec.frame_period_ms = period_ms;
      generated = generate_scene(spec);
      scene = &generated;
      scene_tag = opt.scene_seeds[si];
    }
    const std::uint64_t run_seed =
        mix_seed(opt.master_seed, hash_str(policy_name(policy)),
                 std::bit_cast<std::uint64_t>(deadline_ms), scene_tag);
    const std::vector<FrameResult> results =
        run_scene(*scene, deadline_ms, policy, &tables, cfg, run_seed);
    for (std::size_t k = 0; k < results.size(); ++k) {
      const FrameResult& fr = results[k];
      const std::vector<Box3D> merged = merge_detections(fr.fresh, fr.projected);
      f1_sum += score_frame(merged, scene->frames[k].gt, cfg.match_radius_m).f1;
      elapsed_sum += fr.elapsed_ms;
      overhead_sum += fr.overhead_ms;
      if (fr.missed) ++missed;
      ++cell.config_histogram[config_key(fr.schedule)];
      ++frames;
    }
  }

  cell.frames = frames;
  if (frames > 0) {
    cell.mean_f1 = f1_sum / static_cast<double>(frames);
    cell.miss_rate = static_cast<double>(missed) / static_cast<double>(frames);
    cell.mean_elapsed_ms = elapsed_sum / static_cast<double>(frames);
    cell.mean_overhead_ms = overhead_sum / static_cast<double>(frames);
  }
  return cell;
}

}  // namespace

SweepReport run_sweep(const SimConfig& cfg, const CalibTables& tables,
                      const SweepOptions& opt) {
  if (opt.policies.empty()) throw std::invalid_argument("sweep: no policies");
  if (opt.deadlines_ms.empty()) throw std::invalid_argument("sweep: no deadlines");
  if (!opt.fixed_scenes && opt.scene_seeds.empty())
    throw std::invalid_argument("sweep: no scenes");
  if (opt.fixed_scenes && opt.fixed_scenes->empty())
    throw std::invalid_argument("sweep: fixed scene list is empty");
  for (double d : opt.deadlines_ms)
    if (!(d > 0.0)) throw std::invalid_argument("sweep: deadlines must be positive");

  struct CellSpec {
    Policy policy;
    double deadline;
    double period;
  };
  std::vector<CellSpec> specs;
  for (Policy p : opt.policies) {
    for (double d : opt.deadlines_ms) {
      double period = opt.period_override_ms > 0.0 ? opt.period_override_ms
                                                   : period_for_deadline(d);
      if (opt.fixed_scenes) period = (*opt.fixed_scenes)[0].period_ms;
      specs.push_back({p, d, period});
    }
  }

  SweepReport report;
  report.master_seed = opt.master_seed;
  report.cells.resize(specs.size());

  // Work-stealing over preallocated slots: the report layout is fixed up
  // front, so thread scheduling cannot reorder anything.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1))
      report.cells[i] = run_cell(cfg, tables, specs[i].policy, specs[i].deadline,
                                 specs[i].period, opt);
  };
  unsigned workers = opt.workers ? opt.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(specs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

namespace {

std::vector<const SweepCell*> sorted_cells(const SweepReport& r) {
  std::vector<const SweepCell*> cells;
  cells.reserve(r.cells.size());
  for (const SweepCell& c : r.cells) cells.push_back(&c);
  std::sort(cells.begin(), cells.end(), [](const SweepCell* a, const SweepCell* b) {
    const auto an = policy_name(a->policy), bn = policy_name(b->policy);
    if (an != bn) return an < bn;
    if (a->deadline_ms != b->deadline_ms) return a->deadline_ms > b->deadline_ms;
    return a->period_ms < b->period_ms;
  });
  return cells;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_csv(const SweepReport& r) {
  std::string out = "policy,deadline_ms,period_ms,mean_f1,miss_rate,mean_elapsed_ms\n";
  for (const SweepCell* c : sorted_cells(r)) {
    out += std::string(policy_name(c->policy)) + "," + fmt(c->deadline_ms) + "," +
           fmt(c->period_ms) + "," + fmt(c->mean_f1) + "," + fmt(c->miss_rate) +
           "," + fmt(c->mean_elapsed_ms) + "\n";
  }
  return out;
}

std::string report_to_json_text(const SweepReport& r) {
  nlohmann::ordered_json j;
  j["master_seed"] = r.master_seed;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const SweepCell* c : sorted_cells(r)) {
    nlohmann::ordered_json jc;
    jc["policy"] = std::string(policy_name(c->policy));
    jc["deadline_ms"] = c->deadline_ms;
    jc["period_ms"] = c->period_ms;
    jc["mean_f1"] = c->mean_f1;
    jc["miss_rate"] = c->miss_rate;
    jc["mean_elapsed_ms"] = c->mean_elapsed_ms;
    jc["mean_overhead_ms"] = c->mean_overhead_ms;
    jc["frames"] = c->frames;
    jc["config_histogram"] = c->config_histogram;  // std::map: keys sorted
    cells.push_back(std::move(jc));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

SweepReport report_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("report: malformed JSON: ") + e.what());
  }
  SweepReport r;
  try {
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (const auto& jc : j.at("cells")) {
      SweepCell c;
      c.policy = policy_from_name(jc.at("policy").get<std::string>());
      c.deadline_ms = jc.at("deadline_ms").get<double>();
      c.period_ms = jc.at("period_ms").get<double>();
      c.mean_f1 = jc.at("mean_f1").get<double>();
      c.miss_rate = jc.at("miss_rate").get<double>();
      c.mean_elapsed_ms = jc.at("mean_elapsed_ms").get<double>();
      c.mean_overhead_ms = jc.value("mean_overhead_ms", 0.0);
      c.frames = jc.value("frames", std::int64_t{0});
      if (jc.contains("config_histogram"))
        for (const auto& [k, v] : jc.at("config_histogram").items())
          c.config_histogram[k] = v.get<std::int64_t>();
      r.cells.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("report: malformed field: ") + e.what());
  }
  return r;
}

void save_report(const SweepReport& r, const std::string& path,
                 const std::string& format) {
  std::string body;
  if (format == "csv")
    body = report_to_csv(r);
  else if (format == "json")
    body = report_to_json_text(r);
  else
    throw std::invalid_argument("report: format must be csv or json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("report: cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("report: write failed: " + path);
}

SweepReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("report: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json_text(ss.str());
}

std::string compare_reports(const SweepReport& a, const SweepReport& b) {
  auto key = [](const SweepCell& c) {
    return std::string(policy_name(c.policy)) + "@" + fmt(c.deadline_ms) + "/" +
           fmt(c.period_ms);
  };
  std::map<std::string, const SweepCell*> bm;
  for (const SweepCell& c : b.cells) bm[key(c)] = &c;

  std::ostringstream out;
  out << "cell, mean_f1 a->b (delta), miss_rate a->b, mean_elapsed_ms a->b\n";
  std::map<std::string, const SweepCell*> am;
  for (const SweepCell& c : a.cells) am[key(c)] = &c;
  for (const auto& [k, ca] : am) {
    const auto it = bm.find(k);
    if (it == bm.end()) {
      out << k << ", only in first report\n";
      continue;
    }
    const SweepCell* cb = it->second;
    out << k << ", " << fmt(ca->mean_f1) << " -> " << fmt(cb->mean_f1) << " ("
        << fmt(cb->mean_f1 - ca->mean_f1) << "), " << fmt(ca->miss_rate) << " -> "
        << fmt(cb->miss_rate) << ", " << fmt(ca->mean_elapsed_ms) << " -> "
        << fmt(cb->mean_elapsed_ms) << "\n";
  }
  for (const auto& [k, cb] : bm)
    if (!am.count(k)) out << k << ", only in second report\n";
  return out.str();
}

}  // namespace anytime
