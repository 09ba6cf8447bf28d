#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace anytime {

inline constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;

// Wraps an angle to (-pi, pi].
double normalize_yaw(double a);

// Rigid transform restricted to rotation about the vertical axis: full SE(2)
// plus an additive z offset. Enough for ground vehicles and keeps every
// projection hand-checkable against a 2D homogeneous matrix.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;  // radians, counterclockwise, kept in (-pi, pi]

  bool operator==(const Pose&) const = default;
};

// Transform equivalent to applying b first, then a. Associative.
Pose compose(const Pose& a, const Pose& b);

// compose(p, inverse(p)) == identity (within fp error).
Pose inverse(const Pose& p);

// Maps a point from p's local frame into the parent frame. Both parameters
// pass by value: Vec3 is a std::array, so reference parameters would let ADL
// prefer std::apply for non-const or rvalue arguments.
Vec3 apply(Pose p, Vec3 local);

// Detected or ground-truth object. Center/yaw live in the lidar frame of the
// frame it was detected in; the pose snapshot below is what lets a later
// frame re-express it.
struct Box3D {
  Vec3 center{0.0, 0.0, 0.0};
  Vec3 size{1.0, 1.0, 1.0};  // l, w, h; all > 0
  double yaw = 0.0;
  double vx = 0.0;  // global frame, m/s
  double vy = 0.0;
  int class_group = 1;       // 1-based head index, in [1, H]
  double confidence = 1.0;   // [0, 1]
  double detected_at = 0.0;  // simulation clock, seconds
  Pose det_ego_pose;         // ego-in-global at detection time
  Pose det_lidar_pose;       // lidar-in-ego extrinsic at detection time

  bool operator==(const Box3D&) const = default;
};

// Throws std::invalid_argument when size/confidence/class_group are out of
// range. Used when ingesting boxes from files.
void validate_box(const Box3D& b, int num_heads);

// The per-frame poses a projection needs.
struct PoseContext {
  Pose ego_pose;    // ego-in-global
  Pose lidar_pose;  // lidar-in-ego
  double timestamp = 0.0;

  bool operator==(const PoseContext&) const = default;
};

// Re-expresses a past detection in the lidar frame of `current`:
//   detection lidar -> detection ego -> global, drift by velocity * dt in
//   global, then global -> current ego -> current lidar.
// Size, class, confidence and (global) velocity are untouched; the pose
// snapshot and detected_at are advanced to `current` so projections chain.
// Throws std::invalid_argument when current.timestamp < box.detected_at.
Box3D project_box(const Box3D& box, const PoseContext& current);

struct BatchProjection {
  std::vector<Box3D> boxes;
  std::size_t skipped = 0;  // inputs project_box rejected
};

// Elementwise project_box with order preserved; rejected boxes are dropped
// and counted. workers > 1 fans out over contiguous chunks; the result is
// identical to the sequential mapping either way.
BatchProjection project_batch(const std::vector<Box3D>& boxes,
                              const PoseContext& current,
                              unsigned workers = 1);

}  // namespace anytime
