#include <doctest.h>

#include "ikform/constraints.hpp"
#include "support.hpp"

using namespace ikform;
using ikform::test::Gen;

namespace {

using P = Point2<double>;

/// Same-side test via cross products, independent of the slack computation.
bool inside_triangle_reference(const P& p, const P& a, const P& b, const P& c) {
  auto cross = [](const P& o, const P& u, const P& v) {
    return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0]);
  };
  const double d1 = cross(a, b, p), d2 = cross(b, c, p), d3 = cross(c, a, p);
  const bool neg = d1 < 0 || d2 < 0 || d3 < 0;
  const bool pos = d1 > 0 || d2 > 0 || d3 > 0;
  return !(neg && pos);
}

P random_point(Gen& g, double r = 1.0) { return {g.uniform(-r, r), g.uniform(-r, r)}; }

}  // namespace

TEST_SUITE("constraints") {
  TEST_CASE("sphere-box signed distance") {
    const BoxObstacle box{{0, 0, 0}, {1, 1, 1}};
    CHECK(sphere_box_sdf<double>({2, 0, 0}, 0.5, box) == doctest::Approx(0.5));
    CHECK(sphere_box_sdf<double>({0, 0, 0}, 0.5, box) == doctest::Approx(-1.5));
    CHECK(sphere_box_sdf<double>({2, 2, 2}, 0.1, box) == doctest::Approx(std::sqrt(3.0) - 0.1));
  }

  TEST_CASE("sphere-sphere signed distance") {
    CHECK(sphere_sphere_sdf<double>({0, 0, 0}, 0.5, {2, 0, 0}, 0.5) == doctest::Approx(1.0));
    CHECK(sphere_sphere_sdf<double>({0, 0, 0}, 1.0, {1, 0, 0}, 0.5) == doctest::Approx(-0.5));
  }

  TEST_CASE("sphere-box distance is 1-Lipschitz in the center") {
    Gen g(51);
    const BoxObstacle box{{0.2, -0.1, 0.3}, {0.4, 0.2, 0.6}};
    for (int i = 0; i < 2000; ++i) {
      const Vec3<double> a{g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-2, 2)};
      const Vec3<double> b{g.uniform(-2, 2), g.uniform(-2, 2), g.uniform(-2, 2)};
      const double gap = std::abs(sphere_box_sdf(a, 0.1, box) - sphere_box_sdf(b, 0.1, box));
      CHECK(gap <= norm(a - b) + 1e-12);
    }
  }

  TEST_CASE("collision residuals") {
    const std::vector<Pose3> frames{Pose3::identity()};
    Scene empty;
    CHECK(min_distance_residuals(std::span<const Pose3>(frames), empty).empty());

    Scene s;
    s.spheres.push_back({0, {0, 0, 0}, 0.5});
    s.boxes.push_back({{3, 0, 0}, {1, 1, 1}});
    const auto far = min_distance_residuals(std::span<const Pose3>(frames), s);
    REQUIRE(far.size() == 1);
    CHECK(far[0] == doctest::Approx(1.5 - s.d_min));

    s.boxes[0].center = {1.5, 0, 0};
    const auto touching = min_distance_residuals(std::span<const Pose3>(frames), s);
    CHECK(touching[0] == doctest::Approx(-0.001));
  }

  TEST_CASE("joint-centering cost and log barrier") {
    const std::vector<double> q{1.0, 2.0}, nom{0.0, 0.0};
    CHECK(joint_centering_cost(std::span<const double>(q), Eigen::MatrixXd::Identity(2, 2),
                               std::span<const double>(nom)) == doctest::Approx(5.0));
    Eigen::MatrixXd w(2, 2);
    w << 2, 1, 1, 3;
    CHECK(joint_centering_cost(std::span<const double>(q), w, std::span<const double>(nom)) ==
          doctest::Approx(2 + 2 * 2 + 3 * 4));
    CHECK(log_barrier(1.0, 0.1) == doctest::Approx(0.0));
    CHECK(log_barrier(std::exp(1.0), 1.0) == doctest::Approx(-1.0));
    CHECK(log_barrier(-1.0, 1.0) == doctest::Approx(-std::log(1e-6)));
    CHECK_THROWS_AS(log_barrier(1.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("triangle slack at the centroid of the unit right triangle") {
    const P a{0, 0}, b{1, 0}, c{0, 1}, p{1.0 / 3, 1.0 / 3};
    CHECK(triangle_slack(p, a, b, c) == doctest::Approx(std::sqrt(2.0) / 6));
    CHECK(triangle_slack(p, a, c, b) < 0.0);
    CHECK(containment_margin(p, a, c, b) == doctest::Approx(std::sqrt(2.0) / 6));
  }

  TEST_CASE("reversing the winding negates each edge slack") {
    Gen g(52);
    for (int i = 0; i < 1000; ++i) {
      const P p = random_point(g, 2), v1 = random_point(g), v2 = random_point(g), v3 = random_point(g);
      if (std::abs(detail::twice_area(v1, v2, v3)) < 1e-6) continue;
      const auto s = triangle_edge_slacks(p, v1, v2, v3);     // s12, s23, s31
      const auto r = triangle_edge_slacks(p, v1, v3, v2);     // s13, s32, s21
      CHECK(std::abs(r[0] + s[2]) < 1e-12);
      CHECK(std::abs(r[1] + s[1]) < 1e-12);
      CHECK(std::abs(r[2] + s[0]) < 1e-12);
    }
  }

  TEST_CASE("degenerate triangles are rejected") {
    CHECK_THROWS_AS(triangle_slack(P{0, 0}, P{0, 0}, P{1, 1}, P{2, 2}), std::invalid_argument);
    const std::vector<P> line{{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(stability_margin_hard(P{0, 0}, std::span<const P>(line)), std::invalid_argument);
  }

  TEST_CASE("containment margin agrees with the same-side reference") {
    Gen g(53);
    for (int i = 0; i < 5000; ++i) {
      const P p = random_point(g, 1.5), a = random_point(g), b = random_point(g), c = random_point(g);
      if (std::abs(detail::twice_area(a, b, c)) < 1e-3) continue;
      const double m = containment_margin(p, a, b, c);
      if (std::abs(m) < 1e-9) continue;
      CHECK((m > 0) == inside_triangle_reference(p, a, b, c));
    }
  }

  TEST_CASE("duplicated unit square") {
    const std::vector<P> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}, {1, 0}, {1, 1}, {0, 1}};
    const auto span = std::span<const P>(sq);
    // Every triangle on the corners has a diagonal through the center, so the center is
    // contained with a hard margin of exactly zero.
    CHECK(std::abs(stability_margin_hard(P{0.5, 0.5}, span)) < 1e-15);
    CHECK(stability_margin_hard(P{0.5, 0.3}, span) == doctest::Approx(0.2 / std::sqrt(2.0)));
    CHECK(stability_margin(P{0.5, 0.3}, span) > 0.0);
    CHECK(stability_margin_hard(P{2.0, 0.5}, span) < 0.0);
    CHECK(stability_margin(P{2.0, 0.5}, span) < 0.0);
  }

  TEST_CASE("smoothed margin is a lower bound within log(m)/beta of the hard margin") {
    Gen g(54);
    for (int i = 0; i < 200; ++i) {
      std::vector<P> pts(6);
      for (auto& p : pts) p = random_point(g);
      const P q = random_point(g, 1.2);
      const double hard = stability_margin_hard(q, std::span<const P>(pts));
      const double soft = stability_margin(q, std::span<const P>(pts));
      CHECK(soft <= hard + 1e-12);
      CHECK(soft >= hard - std::log(120.0) / kStabilityTemperature - 1e-12);
    }
  }

  TEST_CASE("convex weights reproduce a point exactly") {
    const std::vector<P> tri{{0, 0}, {2, 0}, {0, 2}};
    const std::vector<double> lambda{0.5, 0.25, 0.25};
    const auto r = stability_equality_residuals(P{0.5, 0.5}, std::span<const P>(tri), std::span<const double>(lambda));
    for (double v : r) CHECK(std::abs(v) < 1e-15);
    const auto off = stability_equality_residuals(P{1, 1}, std::span<const P>(tri), std::span<const double>(lambda));
    CHECK(off[1] == doctest::Approx(-0.5));
  }

  TEST_CASE("slacks are invariant under rigid motions") {
    Gen g(55);
    for (int i = 0; i < 500; ++i) {
      const P p = random_point(g, 2), a = random_point(g), b = random_point(g), c = random_point(g);
      if (std::abs(detail::twice_area(a, b, c)) < 1e-4) continue;
      const double th = g.angle(), tx = g.uniform(-3, 3), ty = g.uniform(-3, 3);
      auto move = [&](const P& v) -> P {
        return {std::cos(th) * v[0] - std::sin(th) * v[1] + tx, std::sin(th) * v[0] + std::cos(th) * v[1] + ty};
      };
      CHECK(std::abs(triangle_slack(p, a, b, c) - triangle_slack(move(p), move(a), move(b), move(c))) < 1e-12);
    }
  }

  TEST_CASE("hard margin is 1-Lipschitz in the query point") {
    Gen g(56);
    for (int i = 0; i < 300; ++i) {
      std::vector<P> pts(8);
      for (auto& p : pts) p = random_point(g);
      const P a = random_point(g, 1.5), b = random_point(g, 1.5);
      const double gap = std::abs(stability_margin_hard(a, std::span<const P>(pts)) -
                                  stability_margin_hard(b, std::span<const P>(pts)));
      CHECK(gap <= std::hypot(a[0] - b[0], a[1] - b[1]) + 1e-12);
    }
  }

  TEST_CASE("convex hull and hull distance") {
    const std::vector<P> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}};
    const auto hull = convex_hull(pts);
    CHECK(hull.size() == 4);
    CHECK(hull_signed_distance(P{0.5, 0.5}, hull) == doctest::Approx(0.5));
    CHECK(hull_signed_distance(P{0.5, 0.1}, hull) == doctest::Approx(0.1));
    CHECK(hull_signed_distance(P{2.0, 0.5}, hull) == doctest::Approx(-1.0));
    CHECK(hull_signed_distance(P{2.0, 2.0}, hull) == doctest::Approx(-std::sqrt(2.0)));
  }

  TEST_CASE("scene JSON") {
    const auto j = nlohmann::json::parse(R"({
      "spheres": [{"link": 2, "offset": [0, 0, 0.1], "radius": 0.05}],
      "boxes": [{"center": [0.5, 0, 0.2], "half_extents": [0.1, 0.1, 0.1]}],
      "d_min": 0.01})");
    const Scene s = scene_from_json(j);
    REQUIRE(s.spheres.size() == 1);
    CHECK(s.spheres[0].link_index == 2);
    CHECK(s.spheres[0].local_offset.z == doctest::Approx(0.1));
    CHECK(s.boxes[0].center.x == doctest::Approx(0.5));
    CHECK(s.d_min == doctest::Approx(0.01));
  }
}
