#include <doctest.h>

#include "ikform/kinematics.hpp"
#include "support.hpp"

using namespace ikform;
using ikform::test::Gen;

namespace {

double pose_gap(const Pose3& p, const Eigen::Isometry3d& ref) {
  return (test::to_eigen(p).matrix() - ref.matrix()).cwiseAbs().maxCoeff();
}

KinematicChain random_chain(Gen& g, int n) {
  std::vector<DHLink> links(n);
  for (auto& l : links) l = {g.uniform(-0.5, 0.5), g.angle(), g.uniform(-0.5, 0.5)};
  const Pose3 base{test::from_eigen(g.rotation()), {g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)}};
  return KinematicChain(links, std::vector<double>(n, -M_PI), std::vector<double>(n, M_PI), base);
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("single DH link transforms") {
    const DHLink l{0.0, 0.0, 1.0};
    const Pose3 p = dh_transform(l, 0.0);
    CHECK(p.position.x == doctest::Approx(1.0));
    CHECK(pose_gap(dh_transform(l, M_PI / 2), test::dh_reference(l, M_PI / 2)) < 1e-15);

    Gen g(31);
    for (int i = 0; i < 100; ++i) {
      const DHLink r{g.uniform(-1, 1), g.angle(), g.uniform(-1, 1)};
      const double th = g.angle();
      CHECK(pose_gap(dh_transform(r, th), test::dh_reference(r, th)) < 1e-14);
    }
  }

  TEST_CASE("chain FK matches the product of reference link transforms") {
    Gen g(32);
    for (int trial = 0; trial < 100; ++trial) {
      const auto chain = random_chain(g, g.integer(1, 12));
      const auto q = g.angles(chain.num_joints());
      CHECK(pose_gap(chain.forward(std::span<const double>(q)), test::fk_reference(chain, q)) < 1e-12);
    }
  }

  TEST_CASE("moving the base moves the end effector rigidly") {
    Gen g(33);
    for (int trial = 0; trial < 50; ++trial) {
      auto chain = random_chain(g, 6);
      const auto q = g.angles(6);
      chain.set_base(Pose3::identity());
      const Pose3 local = chain.forward(std::span<const double>(q));
      const Pose3 base{test::from_eigen(g.rotation()), {g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)}};
      chain.set_base(base);
      CHECK(pose_distance(chain.forward(std::span<const double>(q)), compose(base, local)) < 1e-12);
    }
  }

  TEST_CASE("planar FK examples") {
    const auto c1 = PlanarChain::uniform(3);
    const std::vector<double> zero{0.0, 0.0, 0.0};
    CHECK(c1.link_length == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(PlanarChain::uniform(2), std::invalid_argument);
    const Pose2 p1 = planar_fk(c1, std::span<const double>(zero));
    CHECK(p1.x == doctest::Approx(1.0));
    CHECK(p1.y == doctest::Approx(0.0));
    CHECK(p1.theta == doctest::Approx(0.0));

    const auto c4 = PlanarChain::uniform(4);
    const std::vector<double> q{M_PI / 2, 0, 0, 0};
    const Pose2 p4 = planar_fk(c4, std::span<const double>(q));
    CHECK(p4.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p4.y == doctest::Approx(1.0));
    CHECK(p4.theta == doctest::Approx(M_PI / 2));
  }

  TEST_CASE("planar FK matches the angle-sum reference") {
    Gen g(34);
    for (int trial = 0; trial < 200; ++trial) {
      auto chain = PlanarChain::uniform(5, 2 * M_PI, Pose2{g.uniform(-1, 1), g.uniform(-1, 1), g.angle()});
      const auto q = g.angles(5);
      const Pose2 got = planar_fk(chain, std::span<const double>(q));
      const Pose2 ref = test::planar_reference(chain, q);
      CHECK(std::abs(got.x - ref.x) < 1e-12);
      CHECK(std::abs(got.y - ref.y) < 1e-12);
      CHECK(test::angle_diff(got.theta, ref.theta) < 1e-12);
    }
  }

  TEST_CASE("planar and spatial descriptions agree") {
    Gen g(35);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = g.integer(3, 10);
      const auto planar = PlanarChain::uniform(n, 2 * M_PI, Pose2{g.uniform(-1, 1), g.uniform(-1, 1), g.angle()});
      const auto spatial = to_spatial(planar);
      const auto q = g.angles(n);
      const Pose2 p = planar_fk(planar, std::span<const double>(q));
      const Pose3 s = spatial.forward(std::span<const double>(q));
      CHECK(std::abs(s.position.x - p.x) < 1e-12);
      CHECK(std::abs(s.position.y - p.y) < 1e-12);
      CHECK(std::abs(s.position.z) < 1e-12);
      CHECK(test::angle_diff(std::atan2(s.rotation(1, 0), s.rotation(0, 0)), p.theta) < 1e-12);
    }
  }

  TEST_CASE("Jacobians match central differences") {
    Gen g(36);
    const double h = 1e-6;
    const auto arm = scaled_arm(4);
    for (int trial = 0; trial < 30; ++trial) {
      const auto q = g.angles(arm.num_joints());
      const auto base = pose_params(arm.forward(std::span<const double>(q)));
      if (std::abs(std::abs(base[4]) - M_PI / 2) < 0.05) continue;
      const Eigen::MatrixXd j = jacobian(arm, q);
      REQUIRE(j.rows() == 6);
      REQUIRE(j.cols() == static_cast<Eigen::Index>(arm.num_joints()));
      for (std::size_t c = 0; c < q.size(); ++c) {
        auto qp = q, qm = q;
        qp[c] += h;
        qm[c] -= h;
        const auto fp = pose_params(arm.forward(std::span<const double>(qp)));
        const auto fm = pose_params(arm.forward(std::span<const double>(qm)));
        for (int r = 0; r < 6; ++r) {
          const double fd = r < 3 ? (fp[r] - fm[r]) / (2 * h) : std::remainder(fp[r] - fm[r], 2 * M_PI) / (2 * h);
          CHECK(std::abs(j(r, static_cast<Eigen::Index>(c)) - fd) < 1e-6);
        }
      }
    }

    const auto planar = PlanarChain::uniform(6);
    const auto q = g.angles(6);
    const Eigen::MatrixXd jp = jacobian(planar, q);
    REQUIRE(jp.rows() == 3);
    for (std::size_t c = 0; c < q.size(); ++c) {
      auto qp = q, qm = q;
      qp[c] += h;
      qm[c] -= h;
      const Pose2 a = test::planar_reference(planar, qp), b = test::planar_reference(planar, qm);
      CHECK(std::abs(jp(0, c) - (a.x - b.x) / (2 * h)) < 1e-7);
      CHECK(std::abs(jp(1, c) - (a.y - b.y) / (2 * h)) < 1e-7);
      CHECK(jp(2, c) == doctest::Approx(1.0));
    }
  }

  TEST_CASE("scaled arm layout") {
    const auto arm = scaled_arm(2);
    CHECK(arm.num_joints() == 9);
    CHECK(arm.links()[0].d == doctest::Approx(1.0 / 5.0));
    CHECK(arm.total_length() == doctest::Approx(1.0));
    CHECK(scaled_arm(0).num_joints() == 7);
    CHECK_THROWS_AS(scaled_arm(3), std::invalid_argument);
    CHECK_THROWS_AS(scaled_arm(-2), std::invalid_argument);
    for (double lo : arm.lower_limits()) CHECK(lo == doctest::Approx(-M_PI));
  }

  TEST_CASE("end effector stays within the total link length of the base") {
    Gen g(37);
    for (int extra : {0, 4, 8}) {
      const auto arm = scaled_arm(extra);
      for (int trial = 0; trial < 200; ++trial) {
        const auto q = g.angles(arm.num_joints());
        const Pose3 p = arm.forward(std::span<const double>(q));
        CHECK(norm(p.position) <= arm.total_length() + 1e-12);
      }
    }
  }

  TEST_CASE("joint count is checked") {
    const auto arm = scaled_arm(0);
    const std::vector<double> q(6, 0.0);
    CHECK_THROWS_AS(arm.forward(std::span<const double>(q)), std::invalid_argument);
  }

  TEST_CASE("chain JSON roundtrip") {
    const auto arm = scaled_arm(4);
    const auto back = chain_from_json(chain_to_json(arm));
    REQUIRE(back.num_joints() == arm.num_joints());
    Gen g(38);
    const auto q = g.angles(arm.num_joints());
    CHECK(pose_distance(back.forward(std::span<const double>(q)), arm.forward(std::span<const double>(q))) < 1e-14);
  }
}
