#pragma once

#include <cstdint>
#include <vector>

#include "anytime/calibration.hpp"
#include "anytime/geometry.hpp"
#include "anytime/rng.hpp"
#include "anytime/scenegen.hpp"
#include "anytime/scheduler.hpp"
#include "anytime/sim_config.hpp"

namespace anytime {

// Per-frame output. A missed deadline counts as a detection with no
// results: fresh/projected are emptied in the scored output, while
// elapsed_ms keeps the real (uncapped) cost of the frame.
struct FrameResult {
  std::vector<Box3D> fresh;
  std::vector<Box3D> projected;
  Schedule schedule;
  double elapsed_ms = 0.0;
  double overhead_ms = 0.0;  // sync + sched + proj charges this frame
  bool missed = false;
  double timestamp = 0.0;
};

// Swaps in the policy's fixed per-frame charges: the aged-confidence policy
// keeps the model's values, round-robin and the gt-aware policy schedule for
// free, the score-sum policy pays for its all-head peek (4.25 sched / 2.55
// proj), the stage-only policy projects nothing, and raw baselines carry no
// scheduling machinery at all.
TimingModel apply_policy_overheads(TimingModel t, Policy p);

// One post-sync execution-latency draw for configuration (r, n_heads):
// jitter * cumulative cost. When tables are given the sample is clamped to
// the calibrated cell — the measurement defines the bound, the run honors
// it. Calibration itself passes null.
double sample_exec_latency(const TimingModel& t, int r, int n_heads,
                           const CalibTables* tables, Rng& rng);

// Stochastic detections for the gt objects whose class group is in `heads`;
// objects of skipped heads are never detected fresh. Detected boxes keep the
// gt size/yaw/velocity, get position noise and a range-dependent confidence,
// and snapshot the frame's poses.
std::vector<Box3D> draw_detections(const std::vector<Box3D>& gt,
                                   const PoseContext& pose, int r,
                                   const std::vector<int>& heads,
                                   const DetectorModel& model, Rng& rng);

struct DetectionOutput {
  std::vector<Box3D> detections;
  double exec_ms = 0.0;
};

// sample_exec_latency + draw_detections with the draw order the pipeline
// uses (latency first).
DetectionOutput simulate_detector(const std::vector<Box3D>& gt,
                                  const PoseContext& pose, int r,
                                  const std::vector<int>& heads,
                                  const DetectorModel& model,
                                  const TimingModel& timing,
                                  const CalibTables* tables, Rng& rng);

// Concatenation; no deduplication because fresh and projected come from
// disjoint head sets by construction. Throws std::invalid_argument when the
// head sources overlap.
std::vector<Box3D> merge_detections(const std::vector<Box3D>& fresh,
                                    const std::vector<Box3D>& projected);

struct HeadCacheEntry {
  bool valid = false;
  std::int64_t frame_index = -1;  // frame on which the head last executed
  PoseContext ctx;                // poses at that execution
  std::vector<Box3D> boxes;
};

// Last completed detections per head; entry h changes only on frames where
// head h executed (and finished before the deadline).
struct HeadCache {
  std::vector<HeadCacheEntry> entries;  // size H+1, slot 0 unused
};

// One pipeline instance owns the scheduling state, projection cache and rng
// stream of a single scene run; nothing is shared across instances, so
// independent runs may execute concurrently.
class DetectorSim {
 public:
  // tables may be null only for the fixed baselines.
  DetectorSim(const SimConfig& cfg, Policy policy, const CalibTables* tables,
              std::uint64_t seed);

  // Frame loop: pc-transform + sync, phase-1/phase-2 scheduling against the
  // remaining budget, detector execution, projection of skipped heads'
  // cached boxes, merge and deadline accounting.
  FrameResult run_frame(const SceneFrame& frame, double deadline_ms);

  const SchedulerState& scheduler_state() const { return sched_; }
  const HeadCache& cache() const { return cache_; }
  const TimingModel& timing() const { return cfg_.timing; }

 private:
  SimConfig cfg_;
  Policy policy_;
  const CalibTables* tables_;
  Rng rng_;
  SchedulerState sched_;
  HeadCache cache_;
  std::int64_t frame_idx_ = 0;
};

// All frames of the scene in order through one DetectorSim instance.
// Deterministic for a fixed seed.
std::vector<FrameResult> run_scene(const Scene& scene, double deadline_ms,
                                   Policy policy, const CalibTables* tables,
                                   const SimConfig& cfg, std::uint64_t seed);

}  // namespace anytime
