#include "anytime/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

namespace anytime {

TimingModel apply_policy_overheads(TimingModel t, Policy p) {
  switch (p) {
    case Policy::kOurs:
      break;  // the model's defaults are this policy's charges
    case Policy::kRoundRobin:
    case Policy::kNearOptimal:
      t.overhead_sched_ms = 0.0;
      break;
    case Policy::kClsScrSum:
      t.overhead_sched_ms = 4.25;  // all-head score peek is paid here
      t.overhead_proj_ms = 2.55;
      break;
    case Policy::kMultiStage:
      t.overhead_sched_ms = 0.0;
      t.overhead_proj_ms = 0.0;  // every head runs, nothing to project
      break;
    case Policy::kBaseline1:
    case Policy::kBaseline2:
    case Policy::kBaseline3:
      t.overhead_sync_ms = 0.0;
      t.overhead_sched_ms = 0.0;
      t.overhead_proj_ms = 0.0;
      break;
  }
  return t;
}

double sample_exec_latency(const TimingModel& t, int r, int n_heads,
                           const CalibTables* tables, Rng& rng) {
  if (r < 1 || r > static_cast<int>(t.per_block_ms.size()))
    throw std::invalid_argument("sample_exec_latency: r out of range");
  if (n_heads < 1 || n_heads > static_cast<int>(t.per_head_ms.size()))
    throw std::invalid_argument("sample_exec_latency: head count out of range");
  const double mean = t.block_cost(r) + t.head_cost(n_heads);
  double sample = rng.uniform(t.jitter_lo, t.jitter_hi) * mean;
  if (tables) sample = std::min(sample, tables->wcet(r, n_heads));
  return sample;
}

namespace {

double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// The hidden visibility draw of one object for the epoch containing t. Keyed
// on the object's (constant, effectively unique) velocity so it is stable
// across frames and identical for every policy looking at the same scene;
// the per-object phase staggers epoch flips.
double visibility_draw(const Box3D& g, double t, const DetectorModel& m) {
  const std::uint64_t ident =
      mix64(std::bit_cast<std::uint64_t>(g.vx) ^
            mix64(std::bit_cast<std::uint64_t>(g.vy) ^ m.rng_seed));
  const double phase = to_unit(mix64(ident)) * m.visibility_hold_s;
  const auto epoch =
      static_cast<std::uint64_t>(std::floor((t + phase) / m.visibility_hold_s));
  return to_unit(mix64(ident ^ mix64(epoch + 0x9e3779b97f4a7c15ULL)));
}

}  // namespace

std::vector<Box3D> draw_detections(const std::vector<Box3D>& gt,
                                   const PoseContext& pose, int r,
                                   const std::vector<int>& heads,
                                   const DetectorModel& model, Rng& rng) {
  if (r < 1 || r > static_cast<int>(model.detect_prob.size()))
    throw std::invalid_argument("draw_detections: r out of range");
  int max_idx = 0;
  for (int h : heads) max_idx = std::max(max_idx, h);
  for (const Box3D& b : gt) max_idx = std::max(max_idx, b.class_group);
  std::vector<char> sel(static_cast<std::size_t>(max_idx) + 1, 0);
  for (int h : heads) {
    if (h < 1) throw std::invalid_argument("draw_detections: head index < 1");
    sel[h] = 1;
  }

  std::vector<Box3D> out;
  for (const Box3D& g : gt) {
    if (!sel[g.class_group]) continue;  // skipped head: never detected fresh
    if (visibility_draw(g, pose.timestamp, model) >= model.prob(r)) continue;
    Box3D d = g;
    const double sigma = model.sigma(r);
    d.center[0] += rng.normal(0.0, sigma);
    d.center[1] += rng.normal(0.0, sigma);
    d.center[2] += rng.normal(0.0, sigma);
    const double range = std::hypot(g.center[0], g.center[1]);
    d.confidence = std::clamp(
        model.base(r) - model.conf_range_slope * range +
            rng.normal(0.0, model.conf_noise_sigma),
        model.conf_floor, 1.0);
    d.detected_at = pose.timestamp;
    d.det_ego_pose = pose.ego_pose;
    d.det_lidar_pose = pose.lidar_pose;
    if (d.confidence < model.score_threshold) continue;  // draws still consumed
    out.push_back(d);
  }
  return out;
}

DetectionOutput simulate_detector(const std::vector<Box3D>& gt,
                                  const PoseContext& pose, int r,
                                  const std::vector<int>& heads,
                                  const DetectorModel& model,
                                  const TimingModel& timing,
                                  const CalibTables* tables, Rng& rng) {
  DetectionOutput out;
  out.exec_ms =
      sample_exec_latency(timing, r, static_cast<int>(heads.size()), tables, rng);
  out.detections = draw_detections(gt, pose, r, heads, model, rng);
  return out;
}

std::vector<Box3D> merge_detections(const std::vector<Box3D>& fresh,
                                    const std::vector<Box3D>& projected) {
  std::set<int> a, b;
  for (const Box3D& x : fresh) a.insert(x.class_group);
  for (const Box3D& x : projected) b.insert(x.class_group);
  for (int g : a)
    if (b.count(g))
      throw std::invalid_argument(
          "merge_detections: head " + std::to_string(g) +
          " appears in both fresh and projected results");
  std::vector<Box3D> out = fresh;
  out.insert(out.end(), projected.begin(), projected.end());
  return out;
}

namespace {

int baseline_blocks(Policy p) {
  switch (p) {
    case Policy::kBaseline1: return 1;
    case Policy::kBaseline2: return 2;
    case Policy::kBaseline3: return 3;
    default: return 0;
  }
}

}  // namespace

DetectorSim::DetectorSim(const SimConfig& cfg, Policy policy,
                         const CalibTables* tables, std::uint64_t seed)
    : cfg_(cfg), policy_(policy), tables_(tables), rng_(mix64(seed)) {
  cfg_.timing = apply_policy_overheads(cfg_.timing, policy);
  validate_sim_config(cfg_);
  const int fixed_r = baseline_blocks(policy);
  if (fixed_r == 0) {
    if (!tables_)
      throw std::invalid_argument("pipeline: this policy requires calibration tables");
    if (tables_->num_blocks != cfg_.R || tables_->num_heads != cfg_.H)
      throw std::invalid_argument("pipeline: table dimensions differ from sim config");
  } else if (fixed_r > cfg_.R) {
    throw std::invalid_argument("pipeline: baseline block count exceeds R");
  }
  sched_.head_state = make_head_state(cfg_.H, cfg_.frame_limit);
  cache_.entries.assign(static_cast<std::size_t>(cfg_.H) + 1, HeadCacheEntry{});
}

FrameResult DetectorSim::run_frame(const SceneFrame& frame, double deadline_ms) {
  if (!(deadline_ms > 0.0))
    throw std::invalid_argument("run_frame: deadline must be positive");
  const int H = cfg_.H;
  const TimingModel& tm = cfg_.timing;

  const double pc = rng_.triangular(tm.pc_min_ms, tm.pc_mode_ms, tm.pc_max_ms);
  const double jitter = rng_.uniform(tm.jitter_lo, tm.jitter_hi);
  const double overhead =
      tm.overhead_sync_ms + tm.overhead_sched_ms + tm.overhead_proj_ms;

  // All fixed charges come off the budget before the table lookup, so a
  // feasible phase-1 pick implies the whole frame fits.
  const double remaining = deadline_ms - pc - overhead;

  FrameContext ctx;
  ctx.gt_present = gt_heads_present(frame, H);
  std::vector<Box3D> peek_candidates;
  bool have_peek = false;
  if (policy_ == Policy::kClsScrSum) {
    // The peek draws candidates for every head once; the executed heads'
    // detections are filtered from the same draw so the scores it ranked on
    // are the scores it gets.
    ctx.score_peek = [&](int r) {
      std::vector<int> all;
      all.reserve(static_cast<std::size_t>(H));
      for (int h = 1; h <= H; ++h) all.push_back(h);
      peek_candidates = draw_detections(frame.gt, frame.pose, r, all, cfg_.detector, rng_);
      have_peek = true;
      std::vector<double> sums(static_cast<std::size_t>(H) + 1, 0.0);
      for (const Box3D& b : peek_candidates) sums[b.class_group] += b.confidence;
      return sums;
    };
  }

  const Schedule schedule = schedule_frame(policy_, tables_, sched_, remaining, ctx);
  const int r = schedule.num_blocks;
  const int n = static_cast<int>(schedule.heads.size());
  std::vector<char> selected(static_cast<std::size_t>(H) + 1, 0);
  for (int h : schedule.heads) selected[h] = 1;

  std::vector<Box3D> fresh;
  if (have_peek) {
    for (const Box3D& b : peek_candidates)
      if (selected[b.class_group]) fresh.push_back(b);
  } else {
    fresh = draw_detections(frame.gt, frame.pose, r, schedule.heads, cfg_.detector, rng_);
  }

  const double mean_exec = tm.block_cost(r) + tm.head_cost(n);
  double scale = jitter;
  if (tables_) scale = std::min(scale, tables_->wcet(r, n) / mean_exec);
  const double exec = scale * mean_exec;
  const double total = pc + overhead + exec;
  const bool missed = total > deadline_ms + 1e-9;

  // Skipped heads are served from the cache, re-expressed in this frame.
  // Cost-wise that is the flat proj charge; the boxes themselves are exact.
  std::vector<Box3D> projected;
  if (!missed) {
    const Pose lidar_in_global = compose(frame.pose.ego_pose, frame.pose.lidar_pose);
    for (int h = 1; h <= H; ++h) {
      if (selected[h]) continue;
      const HeadCacheEntry& e = cache_.entries[h];
      if (!e.valid) continue;
      const std::int64_t age = frame_idx_ - e.frame_index;
      if (age > cfg_.max_projection_age_frames) continue;  // expired track
      const BatchProjection proj = project_batch(e.boxes, frame.pose);
      for (Box3D b : proj.boxes) {
        const Vec3 g = apply(lidar_in_global, b.center);
        if (std::hypot(g[0] - frame.pose.ego_pose.x, g[1] - frame.pose.ego_pose.y) >
            cfg_.scene.fov_radius_m)
          continue;  // drifted out of view, like the objects themselves do
        if (cfg_.decay_projected_confidence)
          b.confidence *=
              std::pow(cfg_.projected_confidence_decay, static_cast<double>(age));
        projected.push_back(b);
      }
    }
  }

  // Heads whose results landed before the deadline update the cache and the
  // aging state; on a missed frame that may be only a prefix of the
  // selection (heads run in ascending index order after the blocks).
  std::vector<int> completed;
  if (!missed) {
    completed = schedule.heads;
  } else {
    for (std::size_t k = 0; k < schedule.heads.size(); ++k) {
      const double done_at =
          pc + overhead + scale * (tm.block_cost(r) + tm.head_cost(static_cast<int>(k) + 1));
      if (done_at <= deadline_ms + 1e-9) completed.push_back(schedule.heads[k]);
    }
  }

  std::vector<std::vector<Box3D>> by_head(static_cast<std::size_t>(H) + 1);
  std::vector<std::vector<double>> scores(static_cast<std::size_t>(H) + 1);
  for (const Box3D& b : fresh) {
    by_head[b.class_group].push_back(b);
    scores[b.class_group].push_back(b.confidence);
  }
  for (int h : completed)
    cache_.entries[h] = HeadCacheEntry{true, frame_idx_, frame.pose, by_head[h]};
  sched_.head_state = update_head_state(std::move(sched_.head_state), completed, scores);
  ++frame_idx_;

  FrameResult res;
  res.schedule = schedule;
  res.elapsed_ms = total;
  res.overhead_ms = overhead;
  res.missed = missed;
  res.timestamp = frame.timestamp;
  if (!missed) {
    res.fresh = std::move(fresh);
    res.projected = std::move(projected);
  }
  return res;
}

std::vector<FrameResult> run_scene(const Scene& scene, double deadline_ms,
                                   Policy policy, const CalibTables* tables,
                                   const SimConfig& cfg, std::uint64_t seed) {
  if (scene.num_heads != cfg.H)
    throw std::invalid_argument("run_scene: scene head count differs from sim config");
  SimConfig local = cfg;
  local.scene.fov_radius_m = scene.fov_radius_m;  // the scene's geometry wins
  DetectorSim sim(local, policy, tables, seed);
  std::vector<FrameResult> out;
  out.reserve(scene.frames.size());
  for (const SceneFrame& f : scene.frames) out.push_back(sim.run_frame(f, deadline_ms));
  return out;
}

}  // namespace anytime
