#include "anytime/scheduler.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace anytime {

Policy policy_from_name(std::string_view name) {
  if (name == "ours") return Policy::kOurs;
  if (name == "round_robin") return Policy::kRoundRobin;
  if (name == "cls_scr_sum") return Policy::kClsScrSum;
  if (name == "near_optimal") return Policy::kNearOptimal;
  if (name == "multistage") return Policy::kMultiStage;
  if (name == "baseline1") return Policy::kBaseline1;
  if (name == "baseline2") return Policy::kBaseline2;
  if (name == "baseline3") return Policy::kBaseline3;
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::kOurs: return "ours";
    case Policy::kRoundRobin: return "round_robin";
    case Policy::kClsScrSum: return "cls_scr_sum";
    case Policy::kNearOptimal: return "near_optimal";
    case Policy::kMultiStage: return "multistage";
    case Policy::kBaseline1: return "baseline1";
    case Policy::kBaseline2: return "baseline2";
    case Policy::kBaseline3: return "baseline3";
  }
  return "unknown";
}

std::vector<Policy> all_policies() {
  return {Policy::kOurs,       Policy::kRoundRobin, Policy::kClsScrSum,
          Policy::kNearOptimal, Policy::kMultiStage, Policy::kBaseline1,
          Policy::kBaseline2,  Policy::kBaseline3};
}

HeadState make_head_state(int H, int frame_limit) {
  if (H < 1) throw std::invalid_argument("head state: H must be >= 1");
  if (frame_limit < 1) throw std::invalid_argument("head state: frame_limit must be >= 1");
  HeadState s;
  s.H = H;
  s.frame_limit = frame_limit;
  s.ages.assign(static_cast<std::size_t>(H) + 1, 1);
  s.aged_conf.assign(static_cast<std::size_t>(H) + 1, HeadState::kEps);
  return s;
}

HeadState update_head_state(HeadState state, const std::vector<int>& prev_heads,
                            const std::vector<std::vector<double>>& prev_scores) {
  std::vector<char> ran(static_cast<std::size_t>(state.H) + 1, 0);
  for (int h : prev_heads) {
    if (h < 1 || h > state.H)
      throw std::invalid_argument("update_head_state: head index out of range");
    ran[h] = 1;
  }
  for (int h = 1; h <= state.H; ++h) {
    if (ran[h]) {
      double sum = 0.0;
      if (h < static_cast<int>(prev_scores.size()))
        for (double s : prev_scores[h]) sum += s;
      state.aged_conf[h] =
          std::clamp(sum / HeadState::kScoreNorm, HeadState::kEps, state.max_score);
      state.ages[h] = 1;  // not 0: age * conf must never pin a head at zero
    } else {
      ++state.ages[h];
    }
  }
  return state;
}

namespace {

void check_n(int n, int H) {
  if (n < 1 || n > H) throw std::invalid_argument("head selection: n out of range");
}

// Overdue heads jump to the ceiling so nothing starves.
double priority_of(int age, double conf, int frame_limit, double max_score) {
  return age * (age > frame_limit ? max_score : conf);
}

struct Pri {
  double p;
  int h;
};
struct PriLess {
  bool operator()(const Pri& a, const Pri& b) const {
    if (a.p != b.p) return a.p < b.p;
    return a.h > b.h;  // equal priority: lower head index pops first
  }
};

// Max heap over the 1-based priority vector; result ascending.
std::vector<int> top_n(const std::vector<double>& pri, int n) {
  std::priority_queue<Pri, std::vector<Pri>, PriLess> heap;
  for (int h = 1; h < static_cast<int>(pri.size()); ++h) heap.push({pri[h], h});
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.push_back(heap.top().h);
    heap.pop();
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<int> select_heads_ours(const HeadState& state, int n) {
  check_n(n, state.H);
  std::vector<double> pri(static_cast<std::size_t>(state.H) + 1, -1.0);
  for (int h = 1; h <= state.H; ++h)
    pri[h] = priority_of(state.ages[h], state.aged_conf[h], state.frame_limit,
                         state.max_score);
  return top_n(pri, n);
}

std::pair<std::vector<int>, int> select_heads_round_robin(int cursor, int n, int H) {
  check_n(n, H);
  const int c = ((cursor - 1) % H + H) % H;  // 0-based start
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back((c + i) % H + 1);
  std::sort(out.begin(), out.end());
  return {out, (c + n) % H + 1};
}

std::vector<int> select_heads_cls_scr_sum(const std::vector<double>& score_sums,
                                          const HeadState& state, int n) {
  check_n(n, state.H);
  if (static_cast<int>(score_sums.size()) < state.H + 1)
    throw std::invalid_argument("cls_scr_sum: score sums must cover every head");
  std::vector<double> pri(static_cast<std::size_t>(state.H) + 1, -1.0);
  for (int h = 1; h <= state.H; ++h) {
    const double conf = std::clamp(score_sums[h] / HeadState::kScoreNorm,
                                   HeadState::kEps, state.max_score);
    pri[h] = priority_of(state.ages[h], conf, state.frame_limit, state.max_score);
  }
  return top_n(pri, n);
}

std::vector<int> select_heads_near_optimal(const std::vector<bool>& gt_present,
                                           const HeadState& state, int n) {
  check_n(n, state.H);
  if (static_cast<int>(gt_present.size()) < state.H + 1)
    throw std::invalid_argument("near_optimal: gt presence must cover every head");
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(state.H));
  for (int h = 1; h <= state.H; ++h) order.push_back(h);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (gt_present[a] != gt_present[b]) return gt_present[a];  // annotated first
    if (state.ages[a] != state.ages[b]) return state.ages[a] > state.ages[b];
    return a < b;
  });
  order.resize(static_cast<std::size_t>(n));
  std::sort(order.begin(), order.end());
  return order;
}

Schedule schedule_frame(Policy policy, const CalibTables* tables,
                        SchedulerState& state, double remaining_ms,
                        const FrameContext& ctx) {
  const int H = state.head_state.H;
  auto all_heads = [H] {
    std::vector<int> v;
    v.reserve(static_cast<std::size_t>(H));
    for (int h = 1; h <= H; ++h) v.push_back(h);
    return v;
  };

  switch (policy) {
    case Policy::kBaseline1: return {1, all_heads(), false};
    case Policy::kBaseline2: return {2, all_heads(), false};
    case Policy::kBaseline3: return {3, all_heads(), false};
    default: break;
  }

  if (!tables)
    throw std::invalid_argument("schedule_frame: policy requires calibration tables");
  if (tables->num_heads != H)
    throw std::invalid_argument("schedule_frame: table H differs from state H");

  if (policy == Policy::kMultiStage) {
    const ConfigChoice c = best_full_head_config(*tables, remaining_ms);
    return {c.blocks, all_heads(), c.infeasible};
  }

  const ConfigChoice c = best_config(*tables, remaining_ms);
  std::vector<int> heads;
  switch (policy) {
    case Policy::kOurs:
      heads = select_heads_ours(state.head_state, c.heads);
      break;
    case Policy::kRoundRobin: {
      auto [sel, cur] = select_heads_round_robin(state.rr_cursor, c.heads, H);
      heads = std::move(sel);
      state.rr_cursor = cur;
      break;
    }
    case Policy::kClsScrSum: {
      if (!ctx.score_peek)
        throw std::invalid_argument("schedule_frame: cls_scr_sum needs score_peek");
      heads = select_heads_cls_scr_sum(ctx.score_peek(c.blocks), state.head_state,
                                       c.heads);
      break;
    }
    case Policy::kNearOptimal:
      heads = select_heads_near_optimal(ctx.gt_present, state.head_state, c.heads);
      break;
    default:
      break;  // handled above
  }
  return {c.blocks, heads, c.infeasible};
}

}  // namespace anytime
