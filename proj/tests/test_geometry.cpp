#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "anytime/geometry.hpp"
#include "anytime/rng.hpp"
#include "oracles.hpp"

using namespace anytime;

namespace {

Pose random_pose(Rng& rng) {
  return Pose{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0),
              rng.uniform(-3.0, 3.0), rng.uniform(-kPi, kPi)};
}

Box3D random_box(Rng& rng) {
  Box3D b;
  b.center = {rng.uniform(-40.0, 40.0), rng.uniform(-40.0, 40.0),
              rng.uniform(-2.0, 2.0)};
  b.size = {rng.uniform(0.5, 5.0), rng.uniform(0.5, 3.0), rng.uniform(0.8, 4.0)};
  b.yaw = rng.uniform(-kPi, kPi);
  b.vx = rng.uniform(-10.0, 10.0);
  b.vy = rng.uniform(-10.0, 10.0);
  b.class_group = rng.uniform_int(1, 6);
  b.confidence = rng.uniform(0.0, 1.0);
  b.detected_at = rng.uniform(0.0, 10.0);
  b.det_ego_pose = random_pose(rng);
  b.det_lidar_pose = random_pose(rng);
  return b;
}

void check_close(const Vec3& a, const Vec3& b, double tol) {
  CHECK(std::abs(a[0] - b[0]) <= tol);
  CHECK(std::abs(a[1] - b[1]) <= tol);
  CHECK(std::abs(a[2] - b[2]) <= tol);
}

double yaw_diff(double a, double b) { return std::abs(normalize_yaw(a - b)); }

}  // namespace

TEST_CASE("yaw normalization lands in (-pi, pi]") {
  CHECK(normalize_yaw(0.0) == 0.0);
  CHECK(normalize_yaw(kPi) == doctest::Approx(kPi));
  CHECK(normalize_yaw(-kPi) == doctest::Approx(kPi));  // closed at +pi only
  CHECK(normalize_yaw(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(normalize_yaw(2.0 * kPi) == doctest::Approx(0.0));
  CHECK(normalize_yaw(-7.0 * kPi) == doctest::Approx(kPi));
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_yaw(rng.uniform(-50.0, 50.0));
    CHECK(a > -kPi);
    CHECK(a <= kPi);
  }
}

TEST_CASE("compose: identity, inverse, worked example") {
  const Pose p{3.0, -2.0, 1.0, 0.7};
  CHECK(compose(Pose{}, p) == p);

  const Pose round = compose(p, inverse(p));
  CHECK(std::abs(round.x) <= 1e-9);
  CHECK(std::abs(round.y) <= 1e-9);
  CHECK(std::abs(round.z) <= 1e-9);
  CHECK(std::abs(round.yaw) <= 1e-9);

  // Translate by 10 in x, then a +90 degree turn: (1,0,0) ends up at (10,1,0).
  const Pose t10{10.0, 0.0, 0.0, 0.0};
  const Pose rot{0.0, 0.0, 0.0, kPi / 2.0};
  check_close(apply(compose(t10, rot), Vec3{1.0, 0.0, 0.0}), Vec3{10.0, 1.0, 0.0},
              1e-12);
}

TEST_CASE("compose is associative and matches the matrix oracle") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    const Pose ab_c = compose(compose(a, b), c);
    const Pose a_bc = compose(a, compose(b, c));
    CHECK(std::abs(ab_c.x - a_bc.x) <= 1e-9);
    CHECK(std::abs(ab_c.y - a_bc.y) <= 1e-9);
    CHECK(std::abs(ab_c.z - a_bc.z) <= 1e-9);
    CHECK(yaw_diff(ab_c.yaw, a_bc.yaw) <= 1e-9);

    const Vec3 v{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0),
                 rng.uniform(-2.0, 2.0)};
    const Vec3 lib = apply(compose(a, b), v);
    const Vec3 ref = oracle::mat_apply(
        oracle::mat_mul(oracle::mat_from_pose(a), oracle::mat_from_pose(b)), v);
    check_close(lib, ref, 1e-9);
  }
}

TEST_CASE("box validation rejects out-of-range fields") {
  Box3D b;
  CHECK_NOTHROW(validate_box(b, 6));
  Box3D bad = b;
  bad.size[1] = 0.0;
  CHECK_THROWS_AS(validate_box(bad, 6), std::invalid_argument);
  bad = b;
  bad.confidence = 1.5;
  CHECK_THROWS_AS(validate_box(bad, 6), std::invalid_argument);
  bad = b;
  bad.class_group = 0;
  CHECK_THROWS_AS(validate_box(bad, 6), std::invalid_argument);
  bad = b;
  bad.class_group = 7;
  CHECK_THROWS_AS(validate_box(bad, 6), std::invalid_argument);
}

TEST_CASE("projection: identity chain is exact to 1e-9") {
  Box3D b;
  b.center = {4.0, -3.0, 0.5};
  b.yaw = 0.3;
  b.detected_at = 2.0;
  b.det_ego_pose = Pose{12.0, 7.0, 0.0, 0.4};
  b.det_lidar_pose = Pose{1.2, 0.0, 1.8, 0.0};
  PoseContext now{b.det_ego_pose, b.det_lidar_pose, 5.0};  // dt = 3, v = 0

  const Box3D out = project_box(b, now);
  check_close(out.center, b.center, 1e-9);
  CHECK(yaw_diff(out.yaw, b.yaw) <= 1e-9);
  CHECK(out.size == b.size);
  CHECK(out.class_group == b.class_group);
  CHECK(out.confidence == b.confidence);
  CHECK(out.detected_at == 5.0);
}

TEST_CASE("projection: worked examples") {
  // Ego advanced +10 m in global x; a static box seen at lidar (20,0,0)
  // is now 10 m ahead.
  Box3D b;
  b.center = {20.0, 0.0, 0.0};
  b.detected_at = 0.0;
  PoseContext now{Pose{10.0, 0.0, 0.0, 0.0}, Pose{}, 1.0};
  check_close(project_box(b, now).center, Vec3{10.0, 0.0, 0.0}, 1e-6);

  // Ego turned +90 degrees in place; a box dead ahead at 10 m moves to the
  // right side, and its yaw (relative heading) drops by the same 90 degrees.
  Box3D c;
  c.center = {10.0, 0.0, 0.0};
  c.yaw = 0.2;
  c.detected_at = 0.0;
  PoseContext turned{Pose{0.0, 0.0, 0.0, kPi / 2.0}, Pose{}, 1.0};
  const Box3D cout = project_box(c, turned);
  check_close(cout.center, Vec3{0.0, -10.0, 0.0}, 1e-6);
  CHECK(yaw_diff(cout.yaw, 0.2 - kPi / 2.0) <= 1e-6);

  // Identity poses, moving object: only the velocity drift applies.
  Box3D d;
  d.center = {5.0, 0.0, 0.0};
  d.vx = 2.0;
  d.detected_at = 0.0;
  PoseContext later{Pose{}, Pose{}, 0.5};
  check_close(project_box(d, later).center, Vec3{6.0, 0.0, 0.0}, 1e-6);
}

TEST_CASE("projection rejects frames older than the detection") {
  Box3D b;
  b.detected_at = 2.0;
  PoseContext past{Pose{}, Pose{}, 1.0};
  CHECK_THROWS_AS(project_box(b, past), std::invalid_argument);
}

TEST_CASE("projection matches the homogeneous-matrix oracle") {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    Box3D b = random_box(rng);
    PoseContext cur{random_pose(rng), random_pose(rng),
                    b.detected_at + rng.uniform(0.0, 5.0)};
    const Box3D lib = project_box(b, cur);
    const oracle::ProjectedBox ref = oracle::project_box(b, cur);
    check_close(lib.center, ref.center, 1e-6);
    CHECK(yaw_diff(lib.yaw, ref.yaw) <= 1e-6);
    CHECK(lib.size == b.size);  // size never touched
    CHECK(lib.vx == b.vx);
    CHECK(lib.vy == b.vy);
  }
}

TEST_CASE("projection round-trips and composes across frames") {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    Box3D b = random_box(rng);
    b.vx = b.vy = 0.0;  // round trip is only exact for static boxes
    PoseContext fa{random_pose(rng), random_pose(rng), b.detected_at};
    b.det_ego_pose = fa.ego_pose;
    b.det_lidar_pose = fa.lidar_pose;
    PoseContext fb{random_pose(rng), random_pose(rng), b.detected_at + 1.0};
    PoseContext fc{random_pose(rng), random_pose(rng), b.detected_at + 2.0};

    // Timestamps must be monotone, so "back to frame a" means a's poses at a
    // later time; a static box reads the same there.
    PoseContext fa_again{fa.ego_pose, fa.lidar_pose, b.detected_at + 2.0};
    const Box3D back = project_box(project_box(b, fb), fa_again);
    check_close(back.center, b.center, 1e-6);
    CHECK(yaw_diff(back.yaw, b.yaw) <= 1e-6);

    const Box3D chained = project_box(project_box(b, fb), fc);
    const Box3D direct = project_box(b, fc);
    check_close(chained.center, direct.center, 1e-6);
    CHECK(yaw_diff(chained.yaw, direct.yaw) <= 1e-6);
  }
}

TEST_CASE("project_batch equals the sequential mapping") {
  CHECK(project_batch({}, PoseContext{}).boxes.empty());

  Rng rng(41);
  std::vector<Box3D> boxes;
  for (int i = 0; i < 1000; ++i) {
    Box3D b = random_box(rng);
    b.detected_at = rng.uniform(0.0, 4.0);
    boxes.push_back(b);
  }
  PoseContext cur{random_pose(rng), random_pose(rng), 4.0};

  const BatchProjection seq = project_batch(boxes, cur, 1);
  const BatchProjection par = project_batch(boxes, cur, 4);
  REQUIRE(seq.boxes.size() == par.boxes.size());
  CHECK(seq.skipped == par.skipped);
  for (std::size_t i = 0; i < seq.boxes.size(); ++i)
    CHECK(seq.boxes[i] == par.boxes[i]);  // bit-identical, same arithmetic

  std::size_t k = 0;
  for (const Box3D& b : boxes) {
    if (b.detected_at > cur.timestamp) continue;
    const Box3D ref = project_box(b, cur);
    CHECK(seq.boxes[k] == ref);
    ++k;
  }
  CHECK(k == seq.boxes.size());
}

TEST_CASE("project_batch drops future-dated boxes and counts them") {
  Box3D ok;
  ok.detected_at = 1.0;
  Box3D future;
  future.detected_at = 9.0;
  PoseContext cur{Pose{}, Pose{}, 2.0};
  const BatchProjection out = project_batch({ok, future, ok}, cur);
  CHECK(out.boxes.size() == 2);
  CHECK(out.skipped == 1);
}
