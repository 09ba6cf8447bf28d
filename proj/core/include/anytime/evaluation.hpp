#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "anytime/pipeline.hpp"

namespace anytime {

struct FrameScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int matched = 0;
  int gt_count = 0;
  int det_count = 0;
};

// Greedy center-distance matching per class group: detections in confidence
// order (ties to the lower index) each take the nearest unmatched gt of the
// same group within match_radius_m, 2D. Empty gt and empty detections score
// a perfect 1.0; a missed frame therefore scores 0 whenever anything was
// there to detect.
FrameScore score_frame(const std::vector<Box3D>& detections,
                       const std::vector<Box3D>& gt, double match_radius_m = 2.0);

struct SweepCell {
  Policy policy = Policy::kOurs;
  double deadline_ms = 0.0;
  double period_ms = 0.0;
  double mean_f1 = 0.0;
  double miss_rate = 0.0;
  double mean_elapsed_ms = 0.0;
  double mean_overhead_ms = 0.0;
  std::int64_t frames = 0;
  // "r{blocks}h{heads}" -> frames; "!" suffix marks best-effort frames where
  // nothing fit the budget.
  std::map<std::string, std::int64_t> config_histogram;

  bool operator==(const SweepCell&) const = default;
};

struct SweepReport {
  std::uint64_t master_seed = 0;
  std::vector<SweepCell> cells;

  bool operator==(const SweepReport&) const = default;
};

// Tight deadlines pair with the faster frame period, relaxed ones with the
// slower: deadline > 100 ms -> 150 ms period, otherwise 100 ms.
double period_for_deadline(double deadline_ms);

struct SweepOptions {
  std::vector<Policy> policies = all_policies();
  std::vector<double> deadlines_ms{50, 60, 70, 80, 90, 100, 110, 120, 130, 140};
  std::vector<std::uint64_t> scene_seeds{1, 2, 3, 4, 5};
  double period_override_ms = 0.0;  // 0: derive from the deadline
  std::uint64_t master_seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
  // Run these scenes as-is instead of generating from scene_seeds. Borrowed,
  // not owned; must outlive the sweep.
  const std::vector<Scene>* fixed_scenes = nullptr;
};

// Every (policy, deadline) cell over all scenes. Cells are independent and
// run concurrently; each scene run's seed is derived from (master seed,
// policy, deadline, scene), so results do not depend on execution order.
SweepReport run_sweep(const SimConfig& cfg, const CalibTables& tables,
                      const SweepOptions& opt);

// CSV columns: policy,deadline_ms,period_ms,mean_f1,miss_rate,mean_elapsed_ms.
// Rows sorted by policy ascending, deadline descending; all numbers printed
// %.6f so identical runs emit identical bytes.
std::string report_to_csv(const SweepReport& r);

// JSON carries everything the CSV omits (overheads, frame counts, config
// histograms) and round-trips exactly.
std::string report_to_json_text(const SweepReport& r);
SweepReport report_from_json_text(const std::string& text);

// format is "csv" or "json".
void save_report(const SweepReport& r, const std::string& path,
                 const std::string& format);
SweepReport load_report(const std::string& path);

// Cell-by-cell textual diff of two reports, matched on (policy, deadline,
// period).
std::string compare_reports(const SweepReport& a, const SweepReport& b);

}  // namespace anytime
