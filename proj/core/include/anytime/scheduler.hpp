#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "anytime/calibration.hpp"

namespace anytime {

enum class Policy {
  kOurs,         // two-phase: table lookup + aged-confidence head selection
  kRoundRobin,   // table lookup + heads in cyclic order
  kClsScrSum,    // table lookup + current-frame score-sum priorities
  kNearOptimal,  // table lookup + ground-truth-aware head selection
  kMultiStage,   // table lookup over the full-head column only
  kBaseline1,    // fixed: 1 block, all heads, no scheduling
  kBaseline2,    // fixed: 2 blocks, all heads
  kBaseline3,    // fixed: 3 blocks, all heads
};

// Throws std::invalid_argument for unknown names.
Policy policy_from_name(std::string_view name);
std::string_view policy_name(Policy p);
std::vector<Policy> all_policies();

// Per-head scheduling state. Vectors are sized H+1 with slot 0 unused so
// heads index as 1..H, matching how configurations are written everywhere.
struct HeadState {
  static constexpr double kEps = 0.01;        // aged-confidence floor
  static constexpr double kScoreNorm = 10.0;  // confidence-sum normalizer

  int H = 0;
  int frame_limit = 5;     // age beyond which priority is forced to max
  double max_score = 1.0;  // aged-confidence ceiling, the forced priority
  std::vector<int> ages;          // each >= 1 (1 == ran last frame)
  std::vector<double> aged_conf;  // each in [kEps, 1]

  bool operator==(const HeadState&) const = default;
};

// All heads start at age 1 with floor confidence; nothing is known yet.
HeadState make_head_state(int H, int frame_limit = 5);

// Bookkeeping after a frame: heads that ran get age 1 and an aged
// confidence of clamp(sum(their scores) / kScoreNorm, kEps, 1); everyone
// else just gets older. prev_scores is indexed 1..H; only entries for heads
// in prev_heads are read.
HeadState update_head_state(HeadState state, const std::vector<int>& prev_heads,
                            const std::vector<std::vector<double>>& prev_scores);

// Priority = age * aged_conf, overridden to age * max_score once a head is
// overdue (age > frame_limit) so nothing starves. Returns the n highest
// priorities via a max heap, ties to the lower head index, ascending order.
std::vector<int> select_heads_ours(const HeadState& state, int n);

// n consecutive head indices (mod H) starting at cursor; returns the
// selection and the advanced cursor.
std::pair<std::vector<int>, int> select_heads_round_robin(int cursor, int n, int H);

// Like select_heads_ours but ranks on this frame's score sums (same
// normalization, same overdue override) instead of remembered confidence.
// score_sums is indexed 1..H and must cover every head — this policy pays
// for peeking at all of them.
std::vector<int> select_heads_cls_scr_sum(const std::vector<double>& score_sums,
                                          const HeadState& state, int n);

// Heads with ground truth first (by age desc, then index), then the rest by
// the same order if n is not filled.
std::vector<int> select_heads_near_optimal(const std::vector<bool>& gt_present,
                                           const HeadState& state, int n);

struct Schedule {
  int num_blocks = 0;
  std::vector<int> heads;   // ascending, distinct, 1-based
  bool infeasible = false;  // phase 1 found nothing that fits; best effort

  bool operator==(const Schedule&) const = default;
};

// Everything phase 2 may look at. gt_present is indexed 1..H. score_peek is
// only invoked by the score-sum policy; it receives the chosen block count
// and must return per-head confidence sums indexed 1..H.
struct FrameContext {
  std::vector<bool> gt_present;
  std::function<std::vector<double>(int r)> score_peek;
};

// Mutable scheduling state owned by one pipeline instance.
struct SchedulerState {
  HeadState head_state;
  int rr_cursor = 1;
};

// Phase 1 picks (blocks, head count) from the tables given the remaining
// budget; phase 2 picks which heads. The multistage policy restricts phase 1
// to the full-head column; fixed baselines ignore the budget and tables
// entirely. Tables may be null only for baselines.
Schedule schedule_frame(Policy policy, const CalibTables* tables,
                        SchedulerState& state, double remaining_ms,
                        const FrameContext& ctx);

}  // namespace anytime
