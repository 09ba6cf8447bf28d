#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anytime/geometry.hpp"

namespace anytime {

// Knobs for one synthetic drive. Defaults give four well-populated object
// groups and two sparse ones that are empty part of the time — the mix that
// separates gt-aware, confidence-aware and blind head-selection policies.
struct SceneSpec {
  double duration_s = 20.0;
  double frame_period_ms = 100.0;
  int num_heads = 6;  // class groups == detection heads
  // Inclusive [min, max] live-object counts per group; the generator spawns
  // up to min immediately and drifts within the range afterwards.
  std::vector<std::pair<int, int>> objects_per_group{
      {3, 5}, {3, 5}, {3, 5}, {3, 5}, {0, 1}, {0, 1}};
  double spawn_rate_per_s = 0.2;    // per open slot
  double despawn_rate_per_s = 0.02;  // per live object
  // [min, max] speeds per group, m/s.
  std::vector<std::pair<double, double>> speed_range_per_group{
      {0.5, 1.5}, {1.0, 3.0}, {2.0, 5.0}, {3.0, 8.0}, {2.0, 6.0}, {3.0, 9.0}};
  double fov_radius_m = 60.0;  // objects outside this radius of ego are gone
  double ego_speed_min = 3.0;  // m/s
  double ego_speed_max = 8.0;
  double ego_max_yaw_rate = 0.15;  // rad/s
  double ego_leg_duration_s = 4.0; // how long each constant-velocity leg lasts
  std::uint64_t seed = 1;

  bool operator==(const SceneSpec&) const = default;
};

struct SceneFrame {
  double timestamp = 0.0;
  PoseContext pose;
  std::vector<Box3D> gt;

  bool operator==(const SceneFrame&) const = default;
};

struct Scene {
  std::vector<SceneFrame> frames;
  double period_ms = 100.0;
  double fov_radius_m = 60.0;
  int num_heads = 6;

  bool operator==(const Scene&) const = default;
};

// Fully determined by its SceneSpec (same input -> bit-identical scene). Objects
// move with constant global velocity from spawn, so their position at any
// frame is exactly spawn + v * dt; the ego follows piecewise-constant
// velocity legs with bounded yaw rate.
Scene generate_scene(const SceneSpec& spec);

// True at index h iff some ground-truth object of class group h is in the
// frame. Indexed 1..H (slot 0 unused).
std::vector<bool> gt_heads_present(const SceneFrame& frame, int num_heads);

// JSON lines: a meta line first, then one frame per line. Round-trips
// bit-exactly (doubles survive the JSON trip unchanged).
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);
std::string scene_to_jsonl(const Scene& scene);
Scene scene_from_jsonl(const std::string& text);

}  // namespace anytime
