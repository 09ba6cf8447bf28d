#include "anytime/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

namespace anytime {

double normalize_yaw(double a) {
  a = std::fmod(a, 2.0 * kPi);  // (-2pi, 2pi)
  if (a <= -kPi) {
    a += 2.0 * kPi;
  } else if (a > kPi) {
    a -= 2.0 * kPi;
  }
  return a;
}

Pose compose(const Pose& a, const Pose& b) {
  const double c = std::cos(a.yaw), s = std::sin(a.yaw);
  return Pose{a.x + c * b.x - s * b.y,
              a.y + s * b.x + c * b.y,
              a.z + b.z,
              normalize_yaw(a.yaw + b.yaw)};
}

Pose inverse(const Pose& p) {
  const double c = std::cos(p.yaw), s = std::sin(p.yaw);
  return Pose{-(c * p.x + s * p.y),
              -(-s * p.x + c * p.y),
              -p.z,
              normalize_yaw(-p.yaw)};
}

Vec3 apply(Pose p, Vec3 v) {
  const double c = std::cos(p.yaw), s = std::sin(p.yaw);
  return Vec3{p.x + c * v[0] - s * v[1], p.y + s * v[0] + c * v[1], p.z + v[2]};
}

void validate_box(const Box3D& b, int num_heads) {
  if (!(b.size[0] > 0.0 && b.size[1] > 0.0 && b.size[2] > 0.0))
    throw std::invalid_argument("box size components must be positive");
  if (!(b.confidence >= 0.0 && b.confidence <= 1.0))
    throw std::invalid_argument("box confidence must be in [0, 1]");
  if (b.class_group < 1 || b.class_group > num_heads)
    throw std::invalid_argument("box class_group out of range");
}

Box3D project_box(const Box3D& box, const PoseContext& current) {
  const double dt = current.timestamp - box.detected_at;
  if (dt < 0.0)
    throw std::invalid_argument("project_box: current frame precedes detection");

  // Detection lidar frame -> global.
  const Pose det_lidar_in_global = compose(box.det_ego_pose, box.det_lidar_pose);
  Vec3 g = apply(det_lidar_in_global, box.center);
  const double gyaw = det_lidar_in_global.yaw + box.yaw;

  // Constant-velocity drift over the staleness interval.
  g[0] += box.vx * dt;
  g[1] += box.vy * dt;

  // Global -> current lidar frame.
  const Pose to_local = inverse(compose(current.ego_pose, current.lidar_pose));

  Box3D out = box;
  out.center = apply(to_local, g);
  out.yaw = normalize_yaw(gyaw + to_local.yaw);
  out.detected_at = current.timestamp;
  out.det_ego_pose = current.ego_pose;
  out.det_lidar_pose = current.lidar_pose;
  return out;
}

BatchProjection project_batch(const std::vector<Box3D>& boxes,
                              const PoseContext& current,
                              unsigned workers) {
  // Slots keep results in input order no matter how work is split.
  std::vector<std::optional<Box3D>> slots(boxes.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      try {
        slots[i] = project_box(boxes[i], current);
      } catch (const std::invalid_argument&) {
        slots[i] = std::nullopt;
      }
    }
  };

  if (workers <= 1 || boxes.size() < 2 * workers) {
    work(0, boxes.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (boxes.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = static_cast<std::size_t>(w) * chunk;
      if (lo >= boxes.size()) break;
      pool.emplace_back(work, lo, std::min(boxes.size(), lo + chunk));
    }
    for (auto& t : pool) t.join();
  }

  BatchProjection out;
  out.boxes.reserve(boxes.size());
  for (auto& s : slots) {
    if (s)
      out.boxes.push_back(*s);
    else
      ++out.skipped;
  }
  return out;
}

}  // namespace anytime
