// Microbenchmarks for the hot paths: batch projection, the two scheduling
// phases, frame scoring, and a full simulated frame.

#include <benchmark/benchmark.h>

#include <vector>

#include "anytime/calibration.hpp"
#include "anytime/evaluation.hpp"
#include "anytime/geometry.hpp"
#include "anytime/pipeline.hpp"
#include "anytime/rng.hpp"
#include "anytime/scheduler.hpp"
#include "anytime/sim_config.hpp"

namespace {

using namespace anytime;

const char* kFixture = ANYTIME_DATA_DIR "/reference_tables.json";

Pose random_pose(Rng& rng) {
  return Pose{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0),
              rng.uniform(-2.0, 2.0), rng.uniform(-kPi, kPi)};
}

std::vector<Box3D> make_boxes(std::size_t n, Rng& rng) {
  std::vector<Box3D> boxes(n);
  for (Box3D& b : boxes) {
    b.center = {rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0), 0.5};
    b.yaw = rng.uniform(-kPi, kPi);
    b.vx = rng.uniform(-5.0, 5.0);
    b.vy = rng.uniform(-5.0, 5.0);
    b.detected_at = 0.0;
    b.det_ego_pose = random_pose(rng);
    b.det_lidar_pose = random_pose(rng);
  }
  return boxes;
}

void BM_project_batch(benchmark::State& state) {
  Rng rng(7);
  const std::vector<Box3D> boxes = make_boxes(1000, rng);
  const PoseContext now{random_pose(rng), random_pose(rng), 1.5};
  const unsigned workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(project_batch(boxes, now, workers));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(boxes.size()));
}
BENCHMARK(BM_project_batch)->Arg(1)->Arg(4);

void BM_best_config(benchmark::State& state) {
  const CalibTables tables = load_tables(kFixture);
  Rng rng(11);
  std::vector<double> budgets(512);
  for (double& b : budgets) b = rng.uniform(0.0, 160.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_config(tables, budgets[i]));
    i = (i + 1) % budgets.size();
  }
}
BENCHMARK(BM_best_config);

void BM_select_heads_ours(benchmark::State& state) {
  Rng rng(13);
  HeadState s = make_head_state(6, 5);
  for (int h = 1; h <= 6; ++h) {
    s.ages[h] = rng.uniform_int(1, 9);
    s.aged_conf[h] = rng.uniform(HeadState::kEps, 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_heads_ours(s, 3));
}
BENCHMARK(BM_select_heads_ours);

void BM_score_frame(benchmark::State& state) {
  Rng rng(17);
  std::vector<Box3D> gt = make_boxes(60, rng);
  for (std::size_t i = 0; i < gt.size(); ++i)
    gt[i].class_group = static_cast<int>(i % 6) + 1;
  std::vector<Box3D> dets = gt;
  for (Box3D& d : dets) {
    d.center[0] += rng.uniform(-0.5, 0.5);
    d.center[1] += rng.uniform(-0.5, 0.5);
    d.confidence = rng.uniform(0.1, 1.0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(score_frame(dets, gt));
}
BENCHMARK(BM_score_frame);

void BM_run_frame(benchmark::State& state) {
  const SimConfig cfg;
  const CalibTables tables = load_tables(kFixture);
  SceneSpec spec = cfg.scene;
  spec.seed = 3;
  const Scene scene = generate_scene(spec);
  DetectorSim sim(cfg, Policy::kOurs, &tables, 21);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.run_frame(scene.frames[i], 100.0));
    i = (i + 1) % scene.frames.size();
  }
}
BENCHMARK(BM_run_frame);

}  // namespace

BENCHMARK_MAIN();
