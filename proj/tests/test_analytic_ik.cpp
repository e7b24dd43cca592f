#include <doctest.h>

#include <set>

#include "ikform/analytic_ik.hpp"
#include "ikform/formulation.hpp"
#include "support.hpp"

using namespace ikform;
using ikform::test::Gen;

namespace {

double min_probe(const IKResult& r) {
  double m = std::numeric_limits<double>::infinity();
  for (double d : r.probes) m = std::min(m, d);
  return m;
}

/// Roundtrip error of q through match + evaluate, or a negative value when q is not invertible.
double roundtrip_error(const AnalyticIKMap& map, const std::vector<double>& q) {
  MatchedGuess m;
  try {
    m = match_initial_guess(q, map);
  } catch (const SingularConfiguration&) {
    return -1.0;
  }
  const auto ik = map.evaluate(m.pose, m.free, m.branch);
  return test::max_angle_diff(ik.q, q);
}

}  // namespace

TEST_SUITE("analytic_ik") {
  TEST_CASE("straight planar arm") {
    const auto chain = PlanarChain::uniform(3);
    const Pose2 target{1.0, 0.0, 0.0};
    // With the default clip margin the straight arm sits just outside the open domain, so the
    // tail joints are only near zero (within about 2 acos(1 - 1e-6)).
    const auto r = planar3r_ik(Pose2{}, target, chain.link_length, Branch{+1});
    for (double q : r.q) CHECK(std::abs(q) < 3e-3);
    CHECK(r.clipped);
    const auto exact = planar3r_ik(Pose2{}, target, chain.link_length, Branch{+1}, 0.0);
    for (double q : exact.q) CHECK(std::abs(q) < 1e-6);
  }

  TEST_CASE("unreachable planar target is clipped with a negative probe") {
    const auto r = planar3r_ik(Pose2{}, Pose2{2.0, 0.0, 0.0}, 1.0 / 3.0, Branch{+1}, 0.0);
    REQUIRE(r.probes.size() == 1);
    CHECK(r.probes[0] == doctest::Approx(-5.25));
    CHECK(r.clipped);
    for (double q : r.q) CHECK(std::isfinite(q));
  }

  TEST_CASE("planar prefix that points away makes the tail unreachable") {
    const PlanarIKMap map(PlanarChain::uniform(4));
    const std::vector<double> pose{1.0, 0.0, 0.0}, free{M_PI};
    const auto r = map.evaluate(pose, free, Branch{+1});
    CHECK(min_probe(r) < 0.0);
    CHECK(r.clipped);
  }

  TEST_CASE("arccos probes") {
    auto p = arccos_probes(0.5, 0.0);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(1.5));
    p = arccos_probes(1.2, 0.0);
    CHECK(p[0] == doctest::Approx(-0.2));
    CHECK(p[1] == doctest::Approx(2.2));
    p = arccos_probes(-1.0, 0.0);
    CHECK(p[0] == doctest::Approx(2.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }

  TEST_CASE("planar roundtrip on random configurations") {
    Gen g(41);
    for (int n : {3, 4, 6, 10}) {
      const PlanarIKMap map(PlanarChain::uniform(n));
      int checked = 0;
      for (int trial = 0; trial < 300; ++trial) {
        const auto q = g.angles(n);
        const double err = roundtrip_error(map, q);
        if (err < 0.0) continue;
        ++checked;
        CHECK(err < 1e-8);
      }
      CHECK(checked > 280);
    }
  }

  TEST_CASE("SRS roundtrip on random configurations") {
    Gen g(42);
    for (int extra : {0, 2, 4}) {
      const SrsChainIKMap map(scaled_arm(extra));
      int checked = 0;
      for (int trial = 0; trial < 300; ++trial) {
        const auto q = g.angles(map.num_joints());
        const double err = roundtrip_error(map, q);
        if (err < 0.0) continue;
        ++checked;
        CHECK(err < 1e-8);
      }
      CHECK(checked > 280);
    }
  }

  TEST_CASE("IK reaches the requested pose") {
    Gen g(43);
    const SrsChainIKMap map(scaled_arm(2));
    for (int trial = 0; trial < 100; ++trial) {
      const auto q = g.angles(map.num_joints());
      const auto pose = map.pose_of(q);
      const auto free = g.angles(map.free_dim());
      for (const auto& b : map.branches()) {
        const auto ik = map.evaluate(pose, free, b);
        if (ik.clipped) continue;
        const Pose3 reached = map.chain().forward(std::span<const double>(ik.q));
        const Pose3 want = pose_from_params(pose[0], pose[1], pose[2], pose[3], pose[4], pose[5]);
        CHECK(pose_distance(reached, want) < 1e-9);
      }
    }
  }

  TEST_CASE("SRS at and beyond full extension") {
    const SrsChainIKMap map(scaled_arm(0));
    const std::vector<double> zero(7, 0.0);
    const auto pose = map.pose_of(zero);
    const std::vector<double> psi{0.0};
    const auto ik = map.evaluate(pose, psi, Branch{+1, +1, +1});
    CHECK(std::abs(ik.q[3]) < 3e-3);
    CHECK(min_probe(ik) > -1e-5);

    // Push the target 10% past the reach of the shoulder.
    const double shoulder = map.geometry().d_bs;
    auto far = pose;
    far[2] = shoulder + 1.1 * (pose[2] - shoulder);
    const auto out = map.evaluate(far, psi, Branch{+1, +1, +1});
    CHECK(min_probe(out) < 0.0);
    CHECK(out.clipped);
    for (double q : out.q) CHECK(std::isfinite(q));
  }

  TEST_CASE("fully extended arm cannot be matched") {
    const SrsChainIKMap map(scaled_arm(0));
    const std::vector<double> zero(7, 0.0);
    CHECK_THROWS_AS(match_initial_guess(zero, map), SingularConfiguration);
  }

  TEST_CASE("wrist center on the shoulder is singular") {
    const SrsChainIKMap map(scaled_arm(0));
    const auto& g = map.geometry();
    const std::vector<double> pose{0.0, 0.0, g.d_bs + g.d_wf, 0.0, 0.0, 0.0};
    const std::vector<double> psi{0.0};
    CHECK_THROWS_AS(map.evaluate(pose, psi, Branch{+1, +1, +1}), SingularConfiguration);
  }

  TEST_CASE("branches partition the solutions") {
    CHECK(Branch::all(3).size() == 8);
    std::set<std::string> labels;
    for (const auto& b : Branch::all(3)) labels.insert(b.label());
    CHECK(labels.size() == 8);
    CHECK_THROWS_AS(Branch({0, 1}), std::invalid_argument);

    Gen g(44);
    const PlanarIKMap map(PlanarChain::uniform(3));
    for (int trial = 0; trial < 100; ++trial) {
      const auto q = g.angles(3);
      if (std::abs(std::sin(q[1])) < 0.05) continue;
      const auto m = match_initial_guess(q, map);
      const auto same = map.evaluate(m.pose, m.free, m.branch);
      const auto other = map.evaluate(m.pose, m.free, Branch{-m.branch[0]});
      CHECK(test::max_angle_diff(same.q, q) < 1e-8);
      // The elbow angle flips sign between the two branches.
      CHECK(std::abs(std::remainder(other.q[1] + q[1], 2 * M_PI)) < 1e-8);
      CHECK(m.branch[0] == (std::sin(q[1]) > 0 ? 1 : -1));
    }
  }

  TEST_CASE("map dimensions") {
    const PlanarIKMap planar(PlanarChain::uniform(6));
    CHECK(planar.free_dim() == 3);
    CHECK(planar.pose_dim() == 3);
    const SrsChainIKMap srs(scaled_arm(4));
    CHECK(srs.free_dim() == 5);
    CHECK(srs.pose_dim() == 6);
    CHECK(srs.branch_size() == 3);
    CHECK_THROWS(SrsChainIKMap(to_spatial(PlanarChain::uniform(7))));
  }
}
