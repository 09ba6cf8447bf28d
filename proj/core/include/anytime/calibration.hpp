#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anytime {

struct SimConfig;  // sim_config.hpp
struct Scene;      // scenegen.hpp

// Paired latency/accuracy lookup over (block count r, head count h)
// configurations, plus the executable-cell mask phase-1 scheduling draws
// from. Immutable once built; accessors are 1-based to match how the
// configurations are written everywhere ((r, h) with r in [1, R]).
struct CalibTables {
  int num_blocks = 0;  // R
  int num_heads = 0;   // H
  std::vector<double> wcet_ms;       // R*H, row-major
  std::vector<double> accuracy_pct;  // R*H, row-major, global max == 100
  std::vector<char> executable;      // R*H; derived, never persisted

  CalibTables() = default;
  CalibTables(int R, int H)
      : num_blocks(R),
        num_heads(H),
        wcet_ms(static_cast<std::size_t>(R) * H, 0.0),
        accuracy_pct(static_cast<std::size_t>(R) * H, 0.0),
        executable(static_cast<std::size_t>(R) * H, 0) {}

  double wcet(int r, int h) const { return wcet_ms[idx(r, h)]; }
  double accuracy(int r, int h) const { return accuracy_pct[idx(r, h)]; }
  bool is_executable(int r, int h) const { return executable[idx(r, h)] != 0; }
  void set_wcet(int r, int h, double v) { wcet_ms[idx(r, h)] = v; }
  void set_accuracy(int r, int h, double v) { accuracy_pct[idx(r, h)] = v; }

  std::size_t idx(int r, int h) const {
    return static_cast<std::size_t>(r - 1) * num_heads + (h - 1);
  }

  bool operator==(const CalibTables&) const = default;
};

// Throws std::runtime_error when the matrices violate the table contract:
// positive wcet strictly increasing along rows and columns, accuracy within
// [0, 100] with global max 100.
void validate_tables(const CalibTables& t);

// Recomputes the executable mask. A configuration is dropped only when a
// full-depth configuration (max block count) is at least as fast and at
// least as accurate, strictly better in one. Anchoring dominance on the
// deepest row keeps cheap shallow configurations available as deadline
// fallbacks instead of letting mid-depth cells prune them away.
CalibTables mark_executable(CalibTables t);

struct ConfigChoice {
  int blocks = 0;
  int heads = 0;            // head count, not a head set
  bool infeasible = false;  // true: nothing fit, this is the cheapest cell
  double wcet_ms = 0.0;
  double accuracy_pct = 0.0;

  bool operator==(const ConfigChoice&) const = default;
};

// Highest-accuracy executable cell with wcet <= remaining_ms; ties prefer
// smaller wcet, then fewer blocks. When nothing fits, returns the
// minimum-wcet executable cell tagged infeasible so callers can still run
// best-effort.
ConfigChoice best_config(const CalibTables& t, double remaining_ms);

// Same lookup restricted to the full-head column (h == H), mask ignored:
// used by the stage-only policy that always runs every head.
ConfigChoice best_full_head_config(const CalibTables& t, double remaining_ms);

// JSON object {R, H, wcet: [[...]], accuracy: [[...]]}. The executable mask
// is always recomputed on load, never trusted from disk.
void save_tables(const CalibTables& t, const std::string& path);
CalibTables load_tables(const std::string& path);
CalibTables tables_from_json_text(const std::string& text);
std::string tables_to_json_text(const CalibTables& t);

struct CalibConfig {
  int R = 3;
  int H = 6;
  int runs_per_cell = 3;  // passes over the calibration scene set
  std::vector<std::uint64_t> scene_seeds{101, 102, 103, 104, 105};
  std::uint64_t seed = 1;  // master seed for the measurement draws
};

// Builds the tables by measuring the simulated detector: every (r, h) cell
// is run over all calibration frames with an unbounded deadline, rotating
// the h-head subset round-robin so the accuracy estimate reflects an
// average subset. wcet is the worst observed post-sync latency; accuracy is
// the mean detection score normalized so the global max is 100.
CalibTables calibrate(const SimConfig& sim, const std::vector<Scene>& scenes,
                      const CalibConfig& cfg);

// Convenience: generates the calibration scenes from cfg.scene_seeds using
// the sim's scene template, then calibrates.
CalibTables calibrate(const SimConfig& sim, const CalibConfig& cfg);

}  // namespace anytime
