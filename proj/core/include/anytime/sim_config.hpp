#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anytime/scenegen.hpp"

namespace anytime {

// Latency model of the simulated detector. Costs are cumulative: running r
// blocks costs per_block_ms[r-1], running h heads costs per_head_ms[h-1],
// and one frame's post-sync execution is their sum scaled by a uniform
// jitter draw. At runtime the sample is clamped to the calibrated bound for
// the executed configuration, so measured tables are honored by
// construction.
struct TimingModel {
  // Point-cloud transform latency, triangular(min, mode, max).
  double pc_min_ms = 24.61;
  double pc_mode_ms = 26.64;
  double pc_max_ms = 28.40;
  std::vector<double> per_block_ms{7.0, 23.0, 46.4};
  std::vector<double> per_head_ms{10.0, 21.1, 31.9, 41.5, 51.5, 61.5};
  double jitter_lo = 0.98;  // relative, applied to the cumulative cost
  double jitter_hi = 1.00;
  // Fixed per-frame charges. sched/proj defaults are for the aged-confidence
  // policy; other policies override them (see pipeline).
  double overhead_sync_ms = 0.5;
  double overhead_sched_ms = 1.0;
  double overhead_proj_ms = 1.1;

  double block_cost(int r) const { return per_block_ms[static_cast<std::size_t>(r) - 1]; }
  double head_cost(int n) const { return per_head_ms[static_cast<std::size_t>(n) - 1]; }

  bool operator==(const TimingModel&) const = default;
};

// Stochastic stand-in for the network's detection quality. Indexed by block
// count r (1-based via the helpers): deeper backbones detect more reliably,
// place boxes tighter, and score higher.
//
// Whether a given object is detected at all is a persistent property, not a
// per-frame coin flip: real misses (occlusion, range, point sparsity) stay
// missed until the scene changes around the object. Each object therefore
// holds one hidden draw u for visibility_hold_s at a time and is detected at
// block count r iff u < detect_prob[r]; the per-frame marginal is still
// exactly detect_prob[r], and deeper backbones see supersets of what
// shallower ones see.
struct DetectorModel {
  std::vector<double> detect_prob{0.70, 0.85, 0.95};
  std::vector<double> pos_noise_sigma{0.6, 0.4, 0.25};  // meters, per axis
  std::vector<double> conf_base{0.6, 0.75, 0.9};
  double conf_range_slope = 0.005;  // confidence lost per meter of 2D range
  double conf_noise_sigma = 0.05;
  double conf_floor = 0.05;
  double score_threshold = 0.1;   // detections below this are dropped
  double visibility_hold_s = 2.0;  // lifetime of one hidden visibility draw
  std::uint64_t rng_seed = 1;      // default master seed when none is given

  double prob(int r) const { return detect_prob[static_cast<std::size_t>(r) - 1]; }
  double sigma(int r) const { return pos_noise_sigma[static_cast<std::size_t>(r) - 1]; }
  double base(int r) const { return conf_base[static_cast<std::size_t>(r) - 1]; }

  bool operator==(const DetectorModel&) const = default;
};

// Everything a simulation run needs besides the calibration tables.
struct SimConfig {
  int R = 3;  // block counts available
  int H = 6;  // detection heads
  TimingModel timing;
  DetectorModel detector;
  SceneSpec scene;  // template; per-run seed/period are overridden
  int frame_limit = 5;
  double match_radius_m = 2.0;
  // Cached detections older than this are not projected anymore; under any
  // anytime policy heads re-run within frame_limit + H frames, so this only
  // guards pathological configurations.
  int max_projection_age_frames = 22;
  // Optional confidence decay of projected boxes per frame of staleness.
  bool decay_projected_confidence = false;
  double projected_confidence_decay = 0.95;

  bool operator==(const SimConfig&) const = default;
};

// Throws std::runtime_error when vector lengths or orderings are broken
// (detect_prob/conf_base must be nondecreasing in r, pos_noise_sigma
// nonincreasing, costs positive and strictly increasing).
void validate_sim_config(const SimConfig& cfg);

// JSON (de)serialization. Loading applies the file's keys over the defaults,
// so partial override files are fine.
std::string sim_config_to_json_text(const SimConfig& cfg);
SimConfig sim_config_from_json_text(const std::string& text);
void save_sim_config(const SimConfig& cfg, const std::string& path);
SimConfig load_sim_config(const std::string& path);

}  // namespace anytime
