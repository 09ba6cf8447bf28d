#include "anytime/sim_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace anytime {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::runtime_error(std::string("sim config: ") + msg);
}

template <class T>
void get_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void get_pairs_if(const nlohmann::json& j, const char* key,
                  std::vector<std::pair<T, T>>& out) {
  if (!j.contains(key)) return;
  out.clear();
  for (const auto& e : j.at(key)) {
    if (!e.is_array() || e.size() != 2)
      throw std::runtime_error(std::string("sim config: ") + key +
                               " entries must be [lo, hi]");
    out.emplace_back(e.at(0).get<T>(), e.at(1).get<T>());
  }
}

}  // namespace

void validate_sim_config(const SimConfig& cfg) {
  require(cfg.R >= 1 && cfg.H >= 1, "R and H must be >= 1");
  const auto& t = cfg.timing;
  require(t.pc_min_ms > 0.0 && t.pc_min_ms <= t.pc_mode_ms && t.pc_mode_ms <= t.pc_max_ms,
          "pc transform distribution needs 0 < min <= mode <= max");
  require(static_cast<int>(t.per_block_ms.size()) >= cfg.R,
          "per_block_ms shorter than R");
  require(static_cast<int>(t.per_head_ms.size()) >= cfg.H, "per_head_ms shorter than H");
  for (std::size_t i = 0; i < t.per_block_ms.size(); ++i)
    require(t.per_block_ms[i] > 0.0 && (i == 0 || t.per_block_ms[i] > t.per_block_ms[i - 1]),
            "per_block_ms must be positive and strictly increasing");
  for (std::size_t i = 0; i < t.per_head_ms.size(); ++i)
    require(t.per_head_ms[i] > 0.0 && (i == 0 || t.per_head_ms[i] > t.per_head_ms[i - 1]),
            "per_head_ms must be positive and strictly increasing");
  require(t.jitter_lo > 0.0 && t.jitter_lo <= t.jitter_hi, "jitter range invalid");
  require(t.overhead_sync_ms >= 0.0 && t.overhead_sched_ms >= 0.0 &&
              t.overhead_proj_ms >= 0.0,
          "overheads must be >= 0");

  const auto& d = cfg.detector;
  require(static_cast<int>(d.detect_prob.size()) >= cfg.R &&
              static_cast<int>(d.pos_noise_sigma.size()) >= cfg.R &&
              static_cast<int>(d.conf_base.size()) >= cfg.R,
          "detector vectors shorter than R");
  for (std::size_t i = 0; i < d.detect_prob.size(); ++i) {
    require(d.detect_prob[i] >= 0.0 && d.detect_prob[i] <= 1.0 &&
                (i == 0 || d.detect_prob[i] >= d.detect_prob[i - 1]),
            "detect_prob must be nondecreasing probabilities");
    if (i < d.conf_base.size())
      require(d.conf_base[i] >= 0.0 && d.conf_base[i] <= 1.0 &&
                  (i == 0 || d.conf_base[i] >= d.conf_base[i - 1]),
              "conf_base must be nondecreasing in [0, 1]");
    if (i < d.pos_noise_sigma.size())
      require(d.pos_noise_sigma[i] >= 0.0 &&
                  (i == 0 || d.pos_noise_sigma[i] <= d.pos_noise_sigma[i - 1]),
              "pos_noise_sigma must be nonincreasing and >= 0");
  }
  require(d.conf_noise_sigma >= 0.0 && d.conf_floor >= 0.0 && d.score_threshold >= 0.0,
          "detector noise parameters must be >= 0");
  require(d.visibility_hold_s > 0.0, "visibility_hold_s must be > 0");

  require(cfg.scene.num_heads == cfg.H, "scene num_heads must equal H");
  require(cfg.frame_limit >= 1, "frame_limit must be >= 1");
  require(cfg.match_radius_m > 0.0, "match_radius_m must be > 0");
  require(cfg.max_projection_age_frames >= 1, "max_projection_age_frames must be >= 1");
  require(cfg.projected_confidence_decay > 0.0 && cfg.projected_confidence_decay <= 1.0,
          "projected_confidence_decay must be in (0, 1]");
}

std::string sim_config_to_json_text(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["R"] = cfg.R;
  j["H"] = cfg.H;
  {
    nlohmann::ordered_json t;
    t["pc_min_ms"] = cfg.timing.pc_min_ms;
    t["pc_mode_ms"] = cfg.timing.pc_mode_ms;
    t["pc_max_ms"] = cfg.timing.pc_max_ms;
    t["per_block_ms"] = cfg.timing.per_block_ms;
    t["per_head_ms"] = cfg.timing.per_head_ms;
    t["jitter_lo"] = cfg.timing.jitter_lo;
    t["jitter_hi"] = cfg.timing.jitter_hi;
    t["overhead_sync_ms"] = cfg.timing.overhead_sync_ms;
    t["overhead_sched_ms"] = cfg.timing.overhead_sched_ms;
    t["overhead_proj_ms"] = cfg.timing.overhead_proj_ms;
    j["timing"] = std::move(t);
  }
  {
    nlohmann::ordered_json d;
    d["detect_prob"] = cfg.detector.detect_prob;
    d["pos_noise_sigma"] = cfg.detector.pos_noise_sigma;
    d["conf_base"] = cfg.detector.conf_base;
    d["conf_range_slope"] = cfg.detector.conf_range_slope;
    d["conf_noise_sigma"] = cfg.detector.conf_noise_sigma;
    d["conf_floor"] = cfg.detector.conf_floor;
    d["score_threshold"] = cfg.detector.score_threshold;
    d["visibility_hold_s"] = cfg.detector.visibility_hold_s;
    d["rng_seed"] = cfg.detector.rng_seed;
    j["detector"] = std::move(d);
  }
  {
    nlohmann::ordered_json s;
    s["duration_s"] = cfg.scene.duration_s;
    s["frame_period_ms"] = cfg.scene.frame_period_ms;
    s["num_heads"] = cfg.scene.num_heads;
    s["objects_per_group"] = cfg.scene.objects_per_group;
    s["spawn_rate_per_s"] = cfg.scene.spawn_rate_per_s;
    s["despawn_rate_per_s"] = cfg.scene.despawn_rate_per_s;
    s["speed_range_per_group"] = cfg.scene.speed_range_per_group;
    s["fov_radius_m"] = cfg.scene.fov_radius_m;
    s["ego_speed_min"] = cfg.scene.ego_speed_min;
    s["ego_speed_max"] = cfg.scene.ego_speed_max;
    s["ego_max_yaw_rate"] = cfg.scene.ego_max_yaw_rate;
    s["ego_leg_duration_s"] = cfg.scene.ego_leg_duration_s;
    s["seed"] = cfg.scene.seed;
    j["scene"] = std::move(s);
  }
  j["frame_limit"] = cfg.frame_limit;
  j["match_radius_m"] = cfg.match_radius_m;
  j["max_projection_age_frames"] = cfg.max_projection_age_frames;
  j["decay_projected_confidence"] = cfg.decay_projected_confidence;
  j["projected_confidence_decay"] = cfg.projected_confidence_decay;
  return j.dump(2) + "\n";
}

SimConfig sim_config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("sim config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("sim config: expected a JSON object");

  SimConfig cfg;  // file keys override these defaults
  try {
    get_if(j, "R", cfg.R);
    get_if(j, "H", cfg.H);
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      get_if(t, "pc_min_ms", cfg.timing.pc_min_ms);
      get_if(t, "pc_mode_ms", cfg.timing.pc_mode_ms);
      get_if(t, "pc_max_ms", cfg.timing.pc_max_ms);
      get_if(t, "per_block_ms", cfg.timing.per_block_ms);
      get_if(t, "per_head_ms", cfg.timing.per_head_ms);
      get_if(t, "jitter_lo", cfg.timing.jitter_lo);
      get_if(t, "jitter_hi", cfg.timing.jitter_hi);
      get_if(t, "overhead_sync_ms", cfg.timing.overhead_sync_ms);
      get_if(t, "overhead_sched_ms", cfg.timing.overhead_sched_ms);
      get_if(t, "overhead_proj_ms", cfg.timing.overhead_proj_ms);
    }
    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      get_if(d, "detect_prob", cfg.detector.detect_prob);
      get_if(d, "pos_noise_sigma", cfg.detector.pos_noise_sigma);
      get_if(d, "conf_base", cfg.detector.conf_base);
      get_if(d, "conf_range_slope", cfg.detector.conf_range_slope);
      get_if(d, "conf_noise_sigma", cfg.detector.conf_noise_sigma);
      get_if(d, "conf_floor", cfg.detector.conf_floor);
      get_if(d, "score_threshold", cfg.detector.score_threshold);
      get_if(d, "visibility_hold_s", cfg.detector.visibility_hold_s);
      get_if(d, "rng_seed", cfg.detector.rng_seed);
    }
    if (j.contains("scene")) {
      const auto& s = j.at("scene");
      get_if(s, "duration_s", cfg.scene.duration_s);
      get_if(s, "frame_period_ms", cfg.scene.frame_period_ms);
      get_if(s, "num_heads", cfg.scene.num_heads);
      get_pairs_if<int>(s, "objects_per_group", cfg.scene.objects_per_group);
      get_if(s, "spawn_rate_per_s", cfg.scene.spawn_rate_per_s);
      get_if(s, "despawn_rate_per_s", cfg.scene.despawn_rate_per_s);
      get_pairs_if<double>(s, "speed_range_per_group", cfg.scene.speed_range_per_group);
      get_if(s, "fov_radius_m", cfg.scene.fov_radius_m);
      get_if(s, "ego_speed_min", cfg.scene.ego_speed_min);
      get_if(s, "ego_speed_max", cfg.scene.ego_speed_max);
      get_if(s, "ego_max_yaw_rate", cfg.scene.ego_max_yaw_rate);
      get_if(s, "ego_leg_duration_s", cfg.scene.ego_leg_duration_s);
      get_if(s, "seed", cfg.scene.seed);
    }
    get_if(j, "frame_limit", cfg.frame_limit);
    get_if(j, "match_radius_m", cfg.match_radius_m);
    get_if(j, "max_projection_age_frames", cfg.max_projection_age_frames);
    get_if(j, "decay_projected_confidence", cfg.decay_projected_confidence);
    get_if(j, "projected_confidence_decay", cfg.projected_confidence_decay);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("sim config: malformed field: ") + e.what());
  }
  validate_sim_config(cfg);
  return cfg;
}

void save_sim_config(const SimConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("sim config: cannot open for writing: " + path);
  out << sim_config_to_json_text(cfg);
  if (!out) throw std::runtime_error("sim config: write failed: " + path);
}

SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sim config: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return sim_config_from_json_text(ss.str());
}

}  // namespace anytime
