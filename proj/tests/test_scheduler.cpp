#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <stdexcept>
#include <vector>

#include "anytime/calibration.hpp"
#include "anytime/rng.hpp"
#include "anytime/scheduler.hpp"
#include "oracles.hpp"

using namespace anytime;

namespace {

const char* kFixture = ANYTIME_DATA_DIR "/reference_tables.json";

HeadState state_with(std::vector<int> ages, std::vector<double> conf,
                     int frame_limit) {
  HeadState s = make_head_state(static_cast<int>(ages.size()), frame_limit);
  for (std::size_t h = 0; h < ages.size(); ++h) {
    s.ages[h + 1] = ages[h];
    s.aged_conf[h + 1] = conf[h];
  }
  return s;
}

}  // namespace

TEST_CASE("policy names round-trip; unknown names are rejected") {
  for (Policy p : all_policies()) CHECK(policy_from_name(policy_name(p)) == p);
  CHECK(policy_from_name("ours") == Policy::kOurs);
  CHECK(policy_from_name("round_robin") == Policy::kRoundRobin);
  CHECK(policy_from_name("cls_scr_sum") == Policy::kClsScrSum);
  CHECK(policy_from_name("near_optimal") == Policy::kNearOptimal);
  CHECK(policy_from_name("multistage") == Policy::kMultiStage);
  CHECK(policy_from_name("baseline1") == Policy::kBaseline1);
  CHECK(policy_from_name("baseline3") == Policy::kBaseline3);
  CHECK_THROWS_AS(policy_from_name("optimal"), std::invalid_argument);
}

TEST_CASE("fresh head state: everything young and at the floor") {
  const HeadState s = make_head_state(6);
  REQUIRE(s.H == 6);
  for (int h = 1; h <= 6; ++h) {
    CHECK(s.ages[h] == 1);
    CHECK(s.aged_conf[h] == HeadState::kEps);
  }
  CHECK_THROWS_AS(make_head_state(0), std::invalid_argument);
}

TEST_CASE("head-state update: ran vs skipped vs empty-handed") {
  HeadState s = make_head_state(6);
  std::vector<std::vector<double>> scores(7);
  scores[2] = {0.5, 0.5};  // sum 1.0, normalized by 10
  scores[3] = {};          // ran but found nothing

  s = update_head_state(std::move(s), {2, 3}, scores);
  CHECK(s.aged_conf[2] == doctest::Approx(0.1));
  CHECK(s.ages[2] == 1);
  CHECK(s.aged_conf[3] == HeadState::kEps);  // clamped at the floor
  CHECK(s.ages[3] == 1);
  CHECK(s.ages[4] == 2);  // skipped: one frame older
  CHECK(s.aged_conf[4] == HeadState::kEps);

  // Confidence sums clamp at the ceiling too.
  scores[1] = std::vector<double>(30, 0.9);
  s = update_head_state(std::move(s), {1}, scores);
  CHECK(s.aged_conf[1] == 1.0);

  CHECK_THROWS_AS(update_head_state(make_head_state(6), {7}, {}),
                  std::invalid_argument);
}

TEST_CASE("aged-confidence selection: worked examples") {
  // Everything tied: the lowest indices win.
  CHECK(select_heads_ours(state_with({1, 1, 1, 1}, {0.5, 0.5, 0.5, 0.5}, 25), 2) ==
        std::vector<int>{1, 2});

  // Hand-computed products 0.6, 0.9, 1.0 pick heads 3 then 2.
  CHECK(select_heads_ours(state_with({3, 1, 2}, {0.2, 0.9, 0.5}, 25), 2) ==
        std::vector<int>{2, 3});

  // Over the frame limit the ceiling kicks in: 30 x 1.0 dwarfs everything.
  CHECK(select_heads_ours(state_with({30, 1, 1}, {0.01, 0.9, 0.9}, 25), 1) ==
        std::vector<int>{1});

  CHECK_THROWS_AS(select_heads_ours(make_head_state(6), 0), std::invalid_argument);
  CHECK_THROWS_AS(select_heads_ours(make_head_state(6), 7), std::invalid_argument);
}

TEST_CASE("aged-confidence selection matches exhaustive top-n") {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const int H = rng.uniform_int(1, 8);
    HeadState s = make_head_state(H, 5);
    for (int h = 1; h <= H; ++h) {
      s.ages[h] = rng.uniform_int(1, 12);  // half the range is over the limit
      s.aged_conf[h] = rng.uniform(HeadState::kEps, 1.0);
    }
    const int n = rng.uniform_int(1, H);

    std::vector<double> pri(static_cast<std::size_t>(H) + 1, 0.0);
    for (int h = 1; h <= H; ++h)
      pri[h] = s.ages[h] * (s.ages[h] > s.frame_limit ? s.max_score : s.aged_conf[h]);
    CHECK(select_heads_ours(s, n) == oracle::top_n(pri, n));
  }
}

TEST_CASE("round-robin selection wraps and covers") {
  auto [a, ca] = select_heads_round_robin(1, 2, 6);
  CHECK(a == std::vector<int>{1, 2});
  CHECK(ca == 3);

  auto [b, cb] = select_heads_round_robin(6, 2, 6);
  CHECK(b == std::vector<int>{1, 6});  // wraps; reported in ascending order
  CHECK(cb == 2);

  // Three n=2 rounds cover every head exactly once.
  std::multiset<int> seen;
  int cursor = 1;
  for (int round = 0; round < 3; ++round) {
    auto [sel, next] = select_heads_round_robin(cursor, 2, 6);
    seen.insert(sel.begin(), sel.end());
    cursor = next;
  }
  CHECK(seen == std::multiset<int>{1, 2, 3, 4, 5, 6});
  CHECK(cursor == 1);
}

TEST_CASE("score-sum selection ranks on the current frame") {
  HeadState s = make_head_state(6, 25);

  std::vector<double> equal(7, 0.3);
  CHECK(select_heads_cls_scr_sum(equal, s, 3) == std::vector<int>{1, 2, 3});

  std::vector<double> sums{0.0, 0.0, 5.0, 1.0, 0.0, 0.0, 0.0};
  CHECK(select_heads_cls_scr_sum(sums, s, 1) == std::vector<int>{2});

  // An overdue head is forced in no matter how weak its current score is.
  s.ages[5] = 30;
  s.frame_limit = 5;
  const auto sel = select_heads_cls_scr_sum(sums, s, 1);
  CHECK(sel == std::vector<int>{5});

  CHECK_THROWS_AS(select_heads_cls_scr_sum({0.0, 1.0}, s, 1), std::invalid_argument);
}

TEST_CASE("ground-truth-aware selection: annotated heads first") {
  HeadState s = make_head_state(6, 5);
  std::vector<bool> gt(7, false);

  gt[2] = gt[5] = true;
  CHECK(select_heads_near_optimal(gt, s, 2) == std::vector<int>{2, 5});

  gt.assign(7, false);
  gt[3] = true;
  HeadState aged = state_with({1, 1, 4, 1, 1, 1}, std::vector<double>(6, 0.5), 5);
  CHECK(select_heads_near_optimal(gt, aged, 2) == std::vector<int>{1, 3});

  gt.assign(7, false);  // nothing annotated: fall back to the oldest heads
  HeadState old2 = state_with({1, 7, 1, 1, 9, 1}, std::vector<double>(6, 0.5), 5);
  CHECK(select_heads_near_optimal(gt, old2, 2) == std::vector<int>{2, 5});
}

TEST_CASE("gt-aware selection never strands an annotated head") {
  Rng rng(99);
  for (int i = 0; i < 500; ++i) {
    const int H = 6;
    HeadState s = make_head_state(H, 5);
    std::vector<bool> gt(static_cast<std::size_t>(H) + 1, false);
    for (int h = 1; h <= H; ++h) {
      s.ages[h] = rng.uniform_int(1, 10);
      gt[h] = rng.bernoulli(0.5);
    }
    const int n = rng.uniform_int(1, H);
    const std::vector<int> sel = select_heads_near_optimal(gt, s, n);
    std::vector<char> in(static_cast<std::size_t>(H) + 1, 0);
    for (int h : sel) in[h] = 1;
    bool unselected_present = false;
    for (int h = 1; h <= H; ++h)
      if (gt[h] && !in[h]) unselected_present = true;
    if (unselected_present)  // then every selected head must be annotated
      for (int h : sel) CHECK(gt[h]);
  }
}

TEST_CASE("frame scheduling composes phase 1 and phase 2") {
  const CalibTables tables = load_tables(kFixture);
  FrameContext ctx;
  ctx.gt_present.assign(7, false);

  SchedulerState st;
  st.head_state = state_with({3, 1, 2, 1, 1, 1}, {0.2, 0.9, 0.5, 0.01, 0.01, 0.01}, 25);

  // 70 ms of budget buys (2 blocks, 3 heads); the aged-confidence pick at
  // n = 3 is exactly its top three priorities.
  const Schedule ours = schedule_frame(Policy::kOurs, &tables, st, 70.0, ctx);
  CHECK(ours.num_blocks == 2);
  CHECK(ours.heads.size() == 3);
  CHECK(ours.heads == select_heads_ours(st.head_state, 3));
  CHECK_FALSE(ours.infeasible);

  // The stage-only policy always runs every head; 95 ms only fits depth 2.
  SchedulerState ms;
  ms.head_state = make_head_state(6);
  const Schedule stage = schedule_frame(Policy::kMultiStage, &tables, ms, 95.0, ctx);
  CHECK(stage.num_blocks == 2);
  CHECK(stage.heads == std::vector<int>{1, 2, 3, 4, 5, 6});

  // Fixed baselines ignore the budget and need no tables.
  SchedulerState b3;
  b3.head_state = make_head_state(6);
  const Schedule fixed = schedule_frame(Policy::kBaseline3, nullptr, b3, 1.0, ctx);
  CHECK(fixed.num_blocks == 3);
  CHECK(fixed.heads == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK_FALSE(fixed.infeasible);

  // Below every bound the schedule is tagged best-effort.
  SchedulerState tight;
  tight.head_state = make_head_state(6);
  const Schedule effort = schedule_frame(Policy::kOurs, &tables, tight, 10.0, ctx);
  CHECK(effort.infeasible);
  CHECK(effort.num_blocks == 1);
  CHECK(effort.heads.size() == 1);

  SchedulerState s2;
  s2.head_state = make_head_state(6);
  CHECK_THROWS_AS(schedule_frame(Policy::kOurs, nullptr, s2, 70.0, ctx),
                  std::invalid_argument);
}

TEST_CASE("round-robin scheduling advances its cursor across frames") {
  const CalibTables tables = load_tables(kFixture);
  FrameContext ctx;
  ctx.gt_present.assign(7, false);
  SchedulerState st;
  st.head_state = make_head_state(6);

  const Schedule first = schedule_frame(Policy::kRoundRobin, &tables, st, 70.0, ctx);
  CHECK(first.heads == std::vector<int>{1, 2, 3});
  CHECK(st.rr_cursor == 4);
  const Schedule second = schedule_frame(Policy::kRoundRobin, &tables, st, 70.0, ctx);
  CHECK(second.heads == std::vector<int>{4, 5, 6});
  CHECK(st.rr_cursor == 1);
}

TEST_CASE("score-sum scheduling requests the peek with the chosen depth") {
  const CalibTables tables = load_tables(kFixture);
  FrameContext ctx;
  ctx.gt_present.assign(7, false);
  int peeked_r = 0;
  ctx.score_peek = [&](int r) {
    peeked_r = r;
    return std::vector<double>{0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0};
  };
  SchedulerState st;
  st.head_state = make_head_state(6);

  const Schedule s = schedule_frame(Policy::kClsScrSum, &tables, st, 70.0, ctx);
  CHECK(peeked_r == 2);
  CHECK(s.num_blocks == 2);
  // Head 4 is the only nonzero sum; 1 and 2 fill the rest by index.
  CHECK(s.heads == std::vector<int>{1, 2, 4});

  FrameContext no_peek;
  no_peek.gt_present.assign(7, false);
  SchedulerState st2;
  st2.head_state = make_head_state(6);
  CHECK_THROWS_AS(schedule_frame(Policy::kClsScrSum, &tables, st2, 70.0, no_peek),
                  std::invalid_argument);
}

TEST_CASE("no head outlives frame_limit + H frames of neglect") {
  // Adversarial confidences: head 1 pinned at the floor, the rest high, so
  // only the aging override can save it. The bound must hold for any n.
  Rng rng(123);
  HeadState s = make_head_state(6, 5);
  std::vector<std::vector<double>> scores(7);
  for (int h = 1; h <= 6; ++h) scores[h] = {9.9};  // near-ceiling when run
  scores[1] = {};                                  // head 1 stays at eps

  for (int frame = 0; frame < 2000; ++frame) {
    const int n = rng.uniform_int(1, 6);
    const std::vector<int> sel = select_heads_ours(s, n);
    s = update_head_state(std::move(s), sel, scores);
    for (int h = 1; h <= 6; ++h) CHECK(s.ages[h] <= 5 + 6);
  }
}

TEST_CASE("scheduling is a pure function of its inputs") {
  const CalibTables tables = load_tables(kFixture);
  FrameContext ctx;
  ctx.gt_present = {false, true, false, true, false, false, true};
  for (Policy p : {Policy::kOurs, Policy::kNearOptimal, Policy::kMultiStage}) {
    SchedulerState a, b;
    a.head_state = state_with({2, 5, 1, 7, 3, 1}, {0.3, 0.1, 0.9, 0.2, 0.6, 0.4}, 5);
    b.head_state = a.head_state;
    const Schedule sa = schedule_frame(p, &tables, a, 88.0, ctx);
    const Schedule sb = schedule_frame(p, &tables, b, 88.0, ctx);
    CHECK(sa == sb);
  }
}
