#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "frontflow/flow.hpp"
#include "support.hpp"

using namespace frontflow;
using testsupport::make_params;
using testsupport::phase_transition_params;

namespace {

PairMatrix mat(std::vector<std::vector<double>> rows) {
  PairMatrix m(int(rows.size()), int(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t k = 0; k < rows[i].size(); ++k) m.at(int(i), int(k)) = rows[i][k];
  return m;
}

}  // namespace

TEST_CASE("field_at: worked instances") {
  const ValidatedParams pt = phase_transition_params();

  auto [f1, v1] = field_at(pt, mat({{2.0, 1.0}}));
  CHECK(f1.is_interior());
  CHECK(v1.at(0, 0) == -2.0);
  CHECK(v1.at(0, 1) == -0.5);

  auto [f2, v2] = field_at(pt, mat({{0.0, 0.5}}));
  CHECK(f2 == Face::from_blocked(0b1, 0b01));
  CHECK(v2.at(0, 0) == 0.0);
  CHECK(v2.at(0, 1) == 0.5);

  // the corner is non-ergodic: field comes from the minimal outgoing face
  auto [f3, v3] = field_at(pt, mat({{0.0, 0.0}}));
  CHECK(f3.is_origin(1, 2));
  CHECK(v3.at(0, 0) == 0.0);
  CHECK(v3.at(0, 1) == 0.5);
}

TEST_CASE("field_at rejects points off the manifold") {
  const ValidatedParams p =
      make_params({1.0, 0.5}, {1.0, 1.0}, {-1.0, -0.25}, {1.0, 1.0});
  PairMatrix x = mat({{1.0, 2.0}, {3.0, 1.0}});  // x11+x22 != x12+x21
  CHECK_THROWS_AS(field_at(p, x), NotOnManifold);
}

TEST_CASE("integrate_flow: worked trace with two segments") {
  const ValidatedParams pt = phase_transition_params();
  const Trajectory traj = integrate_flow(pt, mat({{2.0, 1.0}}));

  CHECK(traj.status == FlowStatus::OnFinalFace);
  REQUIRE(traj.segments.size() == 2);
  CHECK(traj.segments[0].face.is_interior());
  CHECK(traj.segments[0].duration == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(traj.segments[0].velocity.at(0, 0) == -2.0);
  CHECK(traj.segments[0].velocity.at(0, 1) == -0.5);

  CHECK(traj.segments[1].face == Face::from_blocked(0b1, 0b01));
  CHECK(std::isinf(traj.segments[1].duration));
  CHECK(traj.segments[1].velocity.at(0, 1) == 0.5);
  CHECK(traj.segments[1].t_start == Catch::Approx(1.0).epsilon(1e-12));

  CHECK(traj.final_point.at(0, 0) == 0.0);
  CHECK(traj.final_point.at(0, 1) == Catch::Approx(0.5).epsilon(1e-12));

  REQUIRE(traj.chain_hit_times.size() == 1);
  CHECK(traj.chain_hit_times[0] == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("integrate_flow: worked trace with three segments") {
  const ValidatedParams pt = phase_transition_params();
  const Trajectory traj = integrate_flow(pt, mat({{3.0, 0.5}}));

  CHECK(traj.status == FlowStatus::OnFinalFace);
  REQUIRE(traj.segments.size() == 3);

  CHECK(traj.segments[0].face.is_interior());
  CHECK(traj.segments[0].duration == Catch::Approx(1.0).epsilon(1e-12));

  // after one unit: (1, 0); slide along the d12 = 0 face into the corner
  CHECK(traj.segments[1].face == Face::from_blocked(0b1, 0b10));
  CHECK(traj.segments[1].velocity.at(0, 0) == Catch::Approx(-1.75).epsilon(1e-12));
  CHECK(traj.segments[1].velocity.at(0, 1) == 0.0);
  CHECK(traj.segments[1].duration == Catch::Approx(1.0 / 1.75).epsilon(1e-12));

  // the corner pushes out along the final face
  CHECK(traj.segments[2].face == Face::from_blocked(0b1, 0b01));
  CHECK(traj.segments[2].velocity.at(0, 1) == 0.5);
  CHECK(std::isinf(traj.segments[2].duration));

  CHECK(traj.final_time == Catch::Approx(1.0 + 1.0 / 1.75).epsilon(1e-12));
}

TEST_CASE("integrate_flow: four-segment trace through a non-ergodic face") {
  // One minus type against three plus types; the middle of the trajectory
  // crosses the non-ergodic face {1}x{1,3}, whose outgoing face releases the
  // third gap again before the final face {1}x{3} is reached.
  const ValidatedParams p =
      make_params({1.0}, {1.0}, {-3.0, -2.0, -0.1}, {1.0, 1.0, 1.0});
  const Trajectory traj = integrate_flow(p, mat({{4.0, 3.0, 1.0}}));

  CHECK(traj.status == FlowStatus::OnFinalFace);
  REQUIRE(traj.segments.size() == 4);

  CHECK(traj.segments[0].face.is_interior());
  CHECK(traj.segments[0].duration == Catch::Approx(10.0 / 11.0).epsilon(1e-12));

  CHECK(traj.segments[1].face == Face::from_blocked(0b1, 0b100));
  CHECK(traj.segments[1].velocity.at(0, 0) == Catch::Approx(-3.45).epsilon(1e-12));
  CHECK(traj.segments[1].velocity.at(0, 1) == Catch::Approx(-2.45).epsilon(1e-12));
  CHECK(traj.segments[1].duration == Catch::Approx(80.0 / 759.0).epsilon(1e-9));

  // zeros {d11, d13} form a non-ergodic face; its outgoing face keeps only d11
  CHECK(traj.segments[2].face == Face::from_blocked(0b1, 0b001));
  CHECK(traj.segments[2].velocity.at(0, 1) == Catch::Approx(-1.0).epsilon(1e-12));
  CHECK(traj.segments[2].velocity.at(0, 2) == Catch::Approx(0.9).epsilon(1e-12));
  CHECK(traj.segments[2].duration == Catch::Approx(1.0 / 69.0).epsilon(1e-9));

  CHECK(traj.segments[3].face == Face::from_blocked(0b1, 0b011));
  CHECK(traj.segments[3].velocity.at(0, 2) ==
        Catch::Approx(-0.1 + 4.0 / 3.0).epsilon(1e-12));
  CHECK(std::isinf(traj.segments[3].duration));

  CHECK(traj.final_time == Catch::Approx(71.0 / 69.0).epsilon(1e-9));
  CHECK(traj.final_point.at(0, 2) == Catch::Approx(3.0 / 230.0).margin(1e-9));

  REQUIRE(traj.chain_hit_times.size() == 2);
  CHECK(traj.chain_hit_times[0] == Catch::Approx(770.0 / 759.0).epsilon(1e-9));
  CHECK(traj.chain_hit_times[1] == Catch::Approx(71.0 / 69.0).epsilon(1e-9));
}

TEST_CASE("integrate_flow: single segment straight to the origin") {
  const ValidatedParams p = make_params({2.0}, {1.0}, {-1.0}, {1.0});
  PairMatrix x0(1, 1);
  x0.at(0, 0) = 6.0;
  const Trajectory traj = integrate_flow(p, x0);
  CHECK(traj.status == FlowStatus::AtOrigin);
  REQUIRE(traj.segments.size() == 1);
  CHECK(traj.segments[0].velocity.at(0, 0) == -3.0);
  CHECK(traj.final_time == Catch::Approx(2.0).epsilon(1e-12));
  CHECK(traj.final_point.at(0, 0) == 0.0);
}

TEST_CASE("flow_point_at walks the segments") {
  const ValidatedParams pt = phase_transition_params();
  const Trajectory traj = integrate_flow(pt, mat({{2.0, 1.0}}));
  const PairMatrix at_half = flow_point_at(traj, 0.5);
  CHECK(at_half.at(0, 0) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(at_half.at(0, 1) == Catch::Approx(0.75).epsilon(1e-12));
  const PairMatrix at_two = flow_point_at(traj, 2.0);
  CHECK(at_two.at(0, 0) == 0.0);
  CHECK(at_two.at(0, 1) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trajectories terminate correctly on random instances") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    const ValidatedParams p = testsupport::random_generic_instance(rng, 4, 4);
    const PairMatrix x0 = testsupport::random_x0(rng, p.L(), p.K());
    const Trajectory traj = integrate_flow(p, x0);
    const FinalFace fin = final_face(p);

    if (fin.at_origin) {
      CHECK(traj.status == FlowStatus::AtOrigin);
    } else {
      CHECK(traj.status == FlowStatus::OnFinalFace);
      const FlowSegment& last = traj.segments.back();
      for (int i = 0; i < p.L(); ++i)
        for (int k = 0; k < p.K(); ++k)
          if (!fin.face.pair_blocked(i, k)) CHECK(last.velocity.at(i, k) > 0.0);
    }
    CHECK(int(traj.segments.size()) <= 4 * p.K() * p.L());

    // conservation at every segment endpoint
    for (const FlowSegment& seg : traj.segments) CHECK(on_manifold(seg.start));
    CHECK(on_manifold(traj.final_point));

    // segments join continuously (modulo the zero snap)
    for (size_t s = 0; s + 1 < traj.segments.size(); ++s) {
      const FlowSegment& cur = traj.segments[s];
      const FlowSegment& next = traj.segments[s + 1];
      CHECK(next.t_start == Catch::Approx(cur.t_start + cur.duration).margin(1e-12));
      for (int j = 0; j < cur.start.size(); ++j) {
        const double end = cur.start.data()[j] + cur.velocity.data()[j] * cur.duration;
        CHECK(std::abs(next.start.data()[j] - end) <= 1e-8 * (1.0 + std::abs(end)));
      }
    }

    // chain closures entered at nondecreasing times
    double prev = 0.0;
    for (double t : traj.chain_hit_times) {
      if (std::isnan(t)) continue;
      CHECK(t >= prev);
      prev = t;
    }
    // terminal chain face is reached exactly when the trajectory terminates
    CHECK_FALSE(std::isnan(traj.chain_hit_times.back()));
  }
}

TEST_CASE("flow is positively homogeneous in the initial point") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const ValidatedParams p = testsupport::random_generic_instance(rng, 3, 3);
    const PairMatrix x0 = testsupport::random_x0(rng, p.L(), p.K());
    PairMatrix scaled = x0;
    const double c = 3.5;
    scaled *= c;

    const Trajectory a = integrate_flow(p, x0);
    const Trajectory b = integrate_flow(p, scaled);
    CHECK(a.status == b.status);
    REQUIRE(a.segments.size() == b.segments.size());
    for (size_t s = 0; s < a.segments.size(); ++s) {
      CHECK(a.segments[s].face == b.segments[s].face);
      if (std::isfinite(a.segments[s].duration))
        CHECK(b.segments[s].duration ==
              Catch::Approx(c * a.segments[s].duration).margin(1e-9));
    }
  }
}

TEST_CASE("segment budget is reported, not thrown") {
  const ValidatedParams pt = phase_transition_params();
  FlowLimits limits;
  limits.max_time = 0.25;  // stop mid-first-segment
  const Trajectory traj = integrate_flow(pt, mat({{2.0, 1.0}}), limits);
  CHECK(traj.status == FlowStatus::BudgetExhausted);
  CHECK(traj.final_time == 0.25);
  CHECK(traj.final_point.at(0, 0) == Catch::Approx(1.5).epsilon(1e-12));
}
