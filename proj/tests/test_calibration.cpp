#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "anytime/calibration.hpp"
#include "anytime/rng.hpp"
#include "anytime/sim_config.hpp"
#include "oracles.hpp"

using namespace anytime;

namespace {

const char* kFixture = ANYTIME_DATA_DIR "/reference_tables.json";

CalibTables reference() { return load_tables(kFixture); }

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string("anytime_calib_") + stem + ".json");
}

}  // namespace

TEST_CASE("reference fixture loads and validates") {
  const CalibTables t = reference();
  REQUIRE(t.num_blocks == 3);
  REQUIRE(t.num_heads == 6);
  CHECK(t.wcet(1, 1) == 30.9);
  CHECK(t.wcet(2, 4) == 76.8);
  CHECK(t.wcet(3, 6) == 107.9);
  CHECK(t.accuracy(3, 6) == 100.0);
  CHECK_NOTHROW(validate_tables(t));
}

TEST_CASE("executable mask reproduces the 3/5/6 pattern") {
  const CalibTables t = reference();
  int per_row[4] = {0, 0, 0, 0};
  for (int r = 1; r <= 3; ++r)
    for (int h = 1; h <= 6; ++h)
      if (t.is_executable(r, h)) ++per_row[r];
  CHECK(per_row[1] == 3);
  CHECK(per_row[2] == 5);
  CHECK(per_row[3] == 6);

  // The exact cells, not just the counts.
  for (int h = 1; h <= 6; ++h) {
    CHECK(t.is_executable(1, h) == (h <= 3));
    CHECK(t.is_executable(2, h) == (h <= 5));
    CHECK(t.is_executable(3, h));
  }

  // (1,4) loses to the full-depth (3,1): slower and less accurate.
  CHECK(t.wcet(1, 4) == 62.1);
  CHECK(t.accuracy(1, 4) == 74.4);
  CHECK(t.wcet(3, 1) == 61.8);
  CHECK(t.accuracy(3, 1) == 79.8);
  CHECK_FALSE(t.is_executable(1, 4));

  const std::vector<char> ref = oracle::executable_mask(t);
  for (int r = 1; r <= 3; ++r)
    for (int h = 1; h <= 6; ++h)
      CHECK(t.is_executable(r, h) == (ref[t.idx(r, h)] != 0));
}

TEST_CASE("a lone cell is always executable") {
  CalibTables t(1, 1);
  t.set_wcet(1, 1, 10.0);
  t.set_accuracy(1, 1, 100.0);
  t = mark_executable(std::move(t));
  CHECK(t.is_executable(1, 1));
}

TEST_CASE("best_config worked examples") {
  const CalibTables t = reference();

  const ConfigChoice a = best_config(t, 70.0);
  CHECK(a.blocks == 2);
  CHECK(a.heads == 3);
  CHECK(a.accuracy_pct == 82.1);
  CHECK_FALSE(a.infeasible);

  const ConfigChoice b = best_config(t, 120.0);
  CHECK(b.blocks == 3);
  CHECK(b.heads == 6);
  CHECK_FALSE(b.infeasible);

  // Nothing fits under 25 ms; fall back to the cheapest cell, flagged.
  const ConfigChoice c = best_config(t, 25.0);
  CHECK(c.blocks == 1);
  CHECK(c.heads == 1);
  CHECK(c.infeasible);
}

TEST_CASE("best_config equals the exhaustive scan on random budgets") {
  const CalibTables t = reference();
  Rng rng(57);
  for (int i = 0; i < 1000; ++i) {
    const double rem = rng.uniform(0.0, 160.0);
    const ConfigChoice lib = best_config(t, rem);
    const ConfigChoice ref = oracle::best_config(t, rem);
    CHECK(lib == ref);
    CHECK(t.is_executable(lib.blocks, lib.heads));
    if (!lib.infeasible) CHECK(lib.wcet_ms <= rem);
  }
}

TEST_CASE("best_full_head_config ignores the mask") {
  const CalibTables t = reference();
  // (2,6) is not executable, but the stage-only policy may still pick it.
  CHECK_FALSE(t.is_executable(2, 6));
  const ConfigChoice a = best_full_head_config(t, 95.0);
  CHECK(a.blocks == 2);
  CHECK(a.heads == 6);
  CHECK_FALSE(a.infeasible);

  const ConfigChoice b = best_full_head_config(t, 60.0);
  CHECK(b.blocks == 1);
  CHECK(b.heads == 6);
  CHECK(b.infeasible);  // cheapest full-head row still does not fit
}

TEST_CASE("table files round-trip and reject broken input") {
  const CalibTables t = reference();
  const auto path = temp_file("roundtrip");
  save_tables(t, path.string());
  const CalibTables back = load_tables(path.string());
  CHECK(back == t);
  std::filesystem::remove(path);

  // Accuracy must peak at exactly 100.
  std::string text = tables_to_json_text(t);
  CHECK_THROWS_AS(tables_from_json_text(
                      [&] {
                        std::string s = text;
                        const auto pos = s.find("100.0");
                        s.replace(pos, 5, "99.0");
                        return s;
                      }()),
                  std::runtime_error);

  // wcet must strictly increase along each row.
  CalibTables bad = t;
  bad.set_wcet(1, 2, bad.wcet(1, 1));
  CHECK_THROWS_AS(tables_from_json_text(tables_to_json_text(bad)),
                  std::runtime_error);

  CHECK_THROWS_AS(tables_from_json_text("{\"R\": 2}"), std::runtime_error);
  CHECK_THROWS_AS(tables_from_json_text("not json"), std::runtime_error);
  CHECK_THROWS_AS(
      tables_from_json_text(
          "{\"R\":2,\"H\":1,\"wcet\":[[1.0]],\"accuracy\":[[100.0]]}"),
      std::runtime_error);
  CHECK_THROWS_AS(load_tables("/nonexistent/tables.json"), std::runtime_error);
}

TEST_CASE("calibration of a single-cell simulator normalizes to 100") {
  SimConfig sim;
  sim.R = 1;
  sim.H = 1;
  sim.scene.num_heads = 1;
  sim.scene.objects_per_group = {{3, 5}};
  sim.scene.speed_range_per_group = {{0.5, 1.5}};
  sim.scene.duration_s = 5.0;

  CalibConfig cfg;
  cfg.R = 1;
  cfg.H = 1;
  cfg.runs_per_cell = 1;
  cfg.scene_seeds = {101};

  const CalibTables t = calibrate(sim, cfg);
  REQUIRE(t.num_blocks == 1);
  REQUIRE(t.num_heads == 1);
  CHECK(t.accuracy(1, 1) == 100.0);
  CHECK(t.is_executable(1, 1));
  CHECK(t.wcet(1, 1) > 0.0);
}

TEST_CASE("calibration produces monotone bounds, deterministically") {
  SimConfig sim;
  sim.scene.duration_s = 5.0;  // keep the unit test quick

  CalibConfig cfg;
  cfg.runs_per_cell = 1;
  cfg.scene_seeds = {101, 102};
  cfg.seed = 9;

  const CalibTables t = calibrate(sim, cfg);
  REQUIRE(t.num_blocks == 3);
  REQUIRE(t.num_heads == 6);
  CHECK_NOTHROW(validate_tables(t));  // includes strict wcet monotonicity
  CHECK(t.accuracy(3, 6) == 100.0);

  // Sampled bounds stay within the timing model's envelope.
  for (int r = 1; r <= 3; ++r)
    for (int h = 1; h <= 6; ++h) {
      const double mean =
          sim.timing.block_cost(r) + sim.timing.head_cost(h);
      CHECK(t.wcet(r, h) <= mean);
      CHECK(t.wcet(r, h) >= sim.timing.jitter_lo * mean);
    }

  const CalibTables again = calibrate(sim, cfg);
  CHECK(again == t);

  CalibConfig other = cfg;
  other.seed = 10;
  CHECK(calibrate(sim, other) != t);
}

TEST_CASE("calibration rejects unusable inputs") {
  SimConfig sim;
  CalibConfig cfg;
  cfg.scene_seeds = {};
  CHECK_THROWS_AS(calibrate(sim, cfg), std::invalid_argument);

  cfg = CalibConfig{};
  cfg.runs_per_cell = 0;
  CHECK_THROWS_AS(calibrate(sim, cfg), std::invalid_argument);

  cfg = CalibConfig{};
  cfg.R = 4;  // timing model only knows 3 block counts
  CHECK_THROWS_AS(calibrate(sim, cfg), std::invalid_argument);
}
