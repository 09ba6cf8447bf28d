#include "anytime/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "anytime/rng.hpp"

namespace anytime {

namespace {

struct LiveObject {
  int group = 1;
  double spawn_t = 0.0;
  Vec3 spawn_pos{0.0, 0.0, 0.0};  // global
  double vx = 0.0, vy = 0.0;      // global, constant for the whole lifetime
  double yaw = 0.0;               // global, constant (faces its velocity)
  Vec3 size{1.0, 1.0, 1.0};

  // Exact linear motion: position is always spawn + v * dt, never an
  // accumulated integration, so downstream projection oracles are exact.
  Vec3 pos_at(double t) const {
    const double dt = t - spawn_t;
    return {spawn_pos[0] + vx * dt, spawn_pos[1] + vy * dt, spawn_pos[2]};
  }
};

void check_spec(const SceneSpec& spec) {
  if (!(spec.duration_s > 0.0)) throw std::invalid_argument("scene: duration must be > 0");
  if (!(spec.frame_period_ms > 0.0))
    throw std::invalid_argument("scene: frame period must be > 0");
  if (!(spec.fov_radius_m > 0.0)) throw std::invalid_argument("scene: radius must be > 0");
  if (spec.num_heads < 1) throw std::invalid_argument("scene: num_heads must be >= 1");
  if (static_cast<int>(spec.objects_per_group.size()) != spec.num_heads ||
      static_cast<int>(spec.speed_range_per_group.size()) != spec.num_heads)
    throw std::invalid_argument("scene: per-group vectors must have num_heads entries");
}

LiveObject spawn_object(int group, double t, const Pose& ego, const SceneSpec& spec,
                        Rng& rng) {
  LiveObject o;
  o.group = group;
  o.spawn_t = t;
  const double radius = rng.uniform(5.0, 0.8 * spec.fov_radius_m);
  const double angle = rng.uniform(0.0, 2.0 * kPi);
  const auto& [spd_lo, spd_hi] = spec.speed_range_per_group[group - 1];
  const double speed = rng.uniform(spd_lo, spd_hi);
  const double heading = rng.uniform(0.0, 2.0 * kPi);
  o.vx = speed * std::cos(heading);
  o.vy = speed * std::sin(heading);
  o.yaw = normalize_yaw(heading);
  const double g = static_cast<double>(group);
  const double jitter = rng.uniform(0.9, 1.1);
  o.size = {(0.5 + 0.8 * g) * jitter, (0.4 + 0.35 * g) * jitter,
            (1.2 + 0.25 * g) * jitter};
  o.spawn_pos = {ego.x + radius * std::cos(angle), ego.y + radius * std::sin(angle),
                 o.size[2] * 0.5};
  return o;
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  check_spec(spec);
  Rng rng(mix64(spec.seed));
  const double dt = spec.frame_period_ms / 1000.0;
  const auto frame_count =
      static_cast<std::size_t>(std::llround(spec.duration_s * 1000.0 / spec.frame_period_ms));

  Scene scene;
  scene.period_ms = spec.frame_period_ms;
  scene.fov_radius_m = spec.fov_radius_m;
  scene.num_heads = spec.num_heads;
  scene.frames.reserve(frame_count);

  const Pose lidar_ext{1.2, 0.0, 1.8, 0.0};  // lidar-in-ego, fixed rig
  Pose ego;                                  // starts at the global origin
  double ego_speed = 0.0, ego_yaw_rate = 0.0;
  long leg = -1;

  std::vector<LiveObject> live;
  // Initial population: anywhere within each group's range.
  for (int g = 1; g <= spec.num_heads; ++g) {
    const auto& [lo, hi] = spec.objects_per_group[g - 1];
    const int count = rng.uniform_int(lo, hi);
    for (int i = 0; i < count; ++i) live.push_back(spawn_object(g, 0.0, ego, spec, rng));
  }

  for (std::size_t k = 0; k < frame_count; ++k) {
    const double t = static_cast<double>(k) * dt;

    // Piecewise-constant ego velocity, redrawn at leg boundaries.
    const long this_leg = static_cast<long>(t / spec.ego_leg_duration_s);
    if (this_leg != leg) {
      leg = this_leg;
      ego_speed = rng.uniform(spec.ego_speed_min, spec.ego_speed_max);
      ego_yaw_rate = rng.uniform(-spec.ego_max_yaw_rate, spec.ego_max_yaw_rate);
    }
    if (k > 0) {
      ego.yaw = normalize_yaw(ego.yaw + ego_yaw_rate * dt);
      ego.x += std::cos(ego.yaw) * ego_speed * dt;
      ego.y += std::sin(ego.yaw) * ego_speed * dt;
    }

    if (k > 0) {
      // Random despawns, then field-of-view exits. Order matters for the
      // rng stream, so it is fixed.
      std::vector<LiveObject> kept;
      kept.reserve(live.size());
      for (const LiveObject& o : live)
        if (!rng.bernoulli(spec.despawn_rate_per_s * dt)) kept.push_back(o);
      live.swap(kept);
    }
    std::erase_if(live, [&](const LiveObject& o) {
      const Vec3 p = o.pos_at(t);
      return std::hypot(p[0] - ego.x, p[1] - ego.y) > spec.fov_radius_m;
    });

    // Spawns: groups are topped up to their minimum and drift toward the
    // maximum at the spawn rate.
    std::vector<int> count(static_cast<std::size_t>(spec.num_heads) + 1, 0);
    for (const LiveObject& o : live) ++count[o.group];
    for (int g = 1; g <= spec.num_heads; ++g) {
      const auto& [lo, hi] = spec.objects_per_group[g - 1];
      while (count[g] < lo) {
        live.push_back(spawn_object(g, t, ego, spec, rng));
        ++count[g];
      }
      if (count[g] < hi &&
          rng.bernoulli(std::min(1.0, spec.spawn_rate_per_s * dt * (hi - count[g])))) {
        live.push_back(spawn_object(g, t, ego, spec, rng));
        ++count[g];
      }
    }

    SceneFrame frame;
    frame.timestamp = t;
    frame.pose = PoseContext{ego, lidar_ext, t};
    const Pose lidar_in_global = compose(ego, lidar_ext);
    const Pose to_lidar = inverse(lidar_in_global);
    std::stable_sort(live.begin(), live.end(),
                     [](const LiveObject& a, const LiveObject& b) { return a.group < b.group; });
    for (const LiveObject& o : live) {
      Box3D b;
      b.center = apply(to_lidar, o.pos_at(t));
      b.size = o.size;
      b.yaw = normalize_yaw(o.yaw - lidar_in_global.yaw);
      b.vx = o.vx;
      b.vy = o.vy;
      b.class_group = o.group;
      b.confidence = 1.0;
      b.detected_at = t;
      b.det_ego_pose = ego;
      b.det_lidar_pose = lidar_ext;
      frame.gt.push_back(b);
    }
    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

std::vector<bool> gt_heads_present(const SceneFrame& frame, int num_heads) {
  std::vector<bool> present(static_cast<std::size_t>(num_heads) + 1, false);
  for (const Box3D& b : frame.gt)
    if (b.class_group >= 1 && b.class_group <= num_heads) present[b.class_group] = true;
  return present;
}

namespace {

nlohmann::ordered_json pose_to_json(const Pose& p) {
  return nlohmann::ordered_json::array({p.x, p.y, p.z, p.yaw});
}

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error("scene: pose must be [x, y, z, yaw]");
  return Pose{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
              j[3].get<double>()};
}

}  // namespace

std::string scene_to_jsonl(const Scene& scene) {
  std::string out;
  nlohmann::ordered_json meta;
  meta["type"] = "scene_meta";
  meta["period_ms"] = scene.period_ms;
  meta["fov_radius_m"] = scene.fov_radius_m;
  meta["num_heads"] = scene.num_heads;
  out += meta.dump();
  out += '\n';
  for (const SceneFrame& f : scene.frames) {
    nlohmann::ordered_json j;
    j["t"] = f.timestamp;
    j["ego"] = pose_to_json(f.pose.ego_pose);
    j["lidar"] = pose_to_json(f.pose.lidar_pose);
    nlohmann::ordered_json gt = nlohmann::ordered_json::array();
    for (const Box3D& b : f.gt) {
      nlohmann::ordered_json o;
      o["c"] = nlohmann::ordered_json::array({b.center[0], b.center[1], b.center[2]});
      o["s"] = nlohmann::ordered_json::array({b.size[0], b.size[1], b.size[2]});
      o["yaw"] = b.yaw;
      o["v"] = nlohmann::ordered_json::array({b.vx, b.vy});
      o["g"] = b.class_group;
      o["conf"] = b.confidence;
      o["t"] = b.detected_at;
      o["ego"] = pose_to_json(b.det_ego_pose);
      o["lid"] = pose_to_json(b.det_lidar_pose);
      gt.push_back(std::move(o));
    }
    j["gt"] = std::move(gt);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Scene scene_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Scene scene;
  bool have_meta = false;
  double prev_t = 0.0;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      if (!have_meta) {
        if (!j.is_object() || j.value("type", "") != "scene_meta")
          throw std::runtime_error("scene: first line must be a scene_meta object");
        scene.period_ms = j.at("period_ms").get<double>();
        scene.fov_radius_m = j.at("fov_radius_m").get<double>();
        scene.num_heads = j.at("num_heads").get<int>();
        if (!(scene.period_ms > 0.0) || !(scene.fov_radius_m > 0.0) ||
            scene.num_heads < 1)
          throw std::runtime_error("scene: invalid meta values");
        have_meta = true;
        continue;
      }
      SceneFrame f;
      f.timestamp = j.at("t").get<double>();
      f.pose.ego_pose = pose_from_json(j.at("ego"));
      f.pose.lidar_pose = pose_from_json(j.at("lidar"));
      f.pose.timestamp = f.timestamp;
      for (const auto& o : j.at("gt")) {
        Box3D b;
        const auto& c = o.at("c");
        const auto& s = o.at("s");
        b.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
        b.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
        b.yaw = o.at("yaw").get<double>();
        b.vx = o.at("v").at(0).get<double>();
        b.vy = o.at("v").at(1).get<double>();
        b.class_group = o.at("g").get<int>();
        b.confidence = o.at("conf").get<double>();
        b.detected_at = o.at("t").get<double>();
        b.det_ego_pose = pose_from_json(o.at("ego"));
        b.det_lidar_pose = pose_from_json(o.at("lid"));
        validate_box(b, scene.num_heads);
        f.gt.push_back(b);
      }
      if (!scene.frames.empty() && !(f.timestamp > prev_t))
        throw std::runtime_error("scene: timestamps must strictly increase");
      prev_t = f.timestamp;
      scene.frames.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("scene: malformed JSON line: ") + e.what());
  }
  if (!have_meta) throw std::runtime_error("scene: missing scene_meta line");
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("scene: cannot open for writing: " + path);
  out << scene_to_jsonl(scene);
  if (!out) throw std::runtime_error("scene: write failed: " + path);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scene: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_jsonl(ss.str());
}

}  // namespace anytime
