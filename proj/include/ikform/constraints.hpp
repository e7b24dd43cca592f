#pragma once

/**
 * @file constraints.hpp
 * @brief Differentiable constraint building blocks: sphere/box signed
 *        distances, joint-centering costs, log barriers and support-polygon
 *        stability in equality and inequality form.
 */

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ikform/autodiff.hpp"
#include "ikform/geometry.hpp"
#include "ikform/kinematics.hpp"

namespace ikform {

/// Collision sphere rigidly attached to the frame after joint `link_index`.
struct CollisionSphere {
  int link_index = 0;
  Vec3<double> local_offset{};
  double radius = 0.05;
};

/// Axis-aligned box obstacle.
struct BoxObstacle {
  Vec3<double> center{};
  Vec3<double> half_extents{0.1, 0.1, 0.1};
};

struct Scene {
  std::vector<CollisionSphere> spheres;
  std::vector<BoxObstacle> boxes;
  double d_min = 0.001;

  bool empty() const { return spheres.empty(); }
};

Scene scene_from_json(const nlohmann::json& j);

template <class T>
using Point2 = std::array<T, 2>;

/// Ground-contact points whose convex hull is the support polygon.
struct SupportPoints {
  std::vector<Point2<double>> points;
};

/// Signed distance from a sphere surface to an axis-aligned box; negative when penetrating.
template <class T>
T sphere_box_sdf(const Vec3<T>& center, double radius, const BoxObstacle& box) {
  T outside2(0.0);
  T inside = T(-1e300);
  for (int i = 0; i < 3; ++i) {
    const T qi = ad::abs(center[i] - box.center[i]) - box.half_extents[i];
    if (ad::value(qi) > 0.0) outside2 += qi * qi;
    if (ad::value(qi) > ad::value(inside)) inside = qi;
  }
  if (ad::value(outside2) > 0.0) return ad::sqrt(outside2) - radius;
  // Center inside the box: nearest-face distance, negated.
  return inside - radius;
}

template <class T>
T sphere_sphere_sdf(const Vec3<T>& c1, double r1, const Vec3<T>& c2, double r2) {
  return norm(c1 - c2) - (r1 + r2);
}

/**
 * One residual sdf - d_min per (sphere, box) pair and per sphere pair on
 * non-adjacent links. Each residual must be >= 0.
 * `frames[i]` is the frame after joint i (KinematicChain::link_frames).
 */
template <class T>
std::vector<T> min_distance_residuals(std::span<const BasicPose3<T>> frames, const Scene& scene) {
  std::vector<Vec3<T>> centers;
  centers.reserve(scene.spheres.size());
  for (const auto& s : scene.spheres) {
    if (s.link_index < 0 || static_cast<std::size_t>(s.link_index) >= frames.size()) {
      throw std::out_of_range("min_distance_residuals: sphere attached to missing link");
    }
    const Vec3<T> off{T(s.local_offset.x), T(s.local_offset.y), T(s.local_offset.z)};
    centers.push_back(frames[s.link_index].apply(off));
  }
  std::vector<T> out;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (const auto& box : scene.boxes) {
      out.push_back(sphere_box_sdf(centers[i], scene.spheres[i].radius, box) - scene.d_min);
    }
  }
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      if (std::abs(scene.spheres[i].link_index - scene.spheres[j].link_index) <= 1) continue;
      out.push_back(sphere_sphere_sdf(centers[i], scene.spheres[i].radius, centers[j],
                                      scene.spheres[j].radius) -
                    scene.d_min);
    }
  }
  return out;
}

template <class T>
std::vector<T> min_distance_residuals(const KinematicChain& chain, std::span<const T> q, const Scene& scene) {
  const auto frames = chain.link_frames(q);
  return min_distance_residuals<T>(std::span<const BasicPose3<T>>(frames), scene);
}

/// (q - q_nom)^T M (q - q_nom) for a symmetric PSD weight M.
template <class T>
T joint_centering_cost(std::span<const T> q, const Eigen::MatrixXd& weight, std::span<const double> q_nom) {
  const auto n = static_cast<Eigen::Index>(q.size());
  if (weight.rows() != n || weight.cols() != n || q_nom.size() != q.size()) {
    throw std::invalid_argument("joint_centering_cost: dimension mismatch");
  }
  std::vector<T> e;
  e.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) e.push_back(q[i] - q_nom[i]);
  T total(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    T row(0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (weight(i, j) != 0.0) row += weight(i, j) * e[j];
    }
    total += e[i] * row;
  }
  return total;
}

/// -mu log(residual), finite everywhere through safe_log.
template <class T>
T log_barrier(const T& residual, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("log_barrier: mu must be positive");
  return -mu * ad::safe_log(residual);
}

namespace detail {
template <class T>
double twice_area(const Point2<T>& a, const Point2<T>& b, const Point2<T>& c) {
  return (ad::value(b[0]) - ad::value(a[0])) * (ad::value(c[1]) - ad::value(a[1])) -
         (ad::value(b[1]) - ad::value(a[1])) * (ad::value(c[0]) - ad::value(a[0]));
}

template <class T>
T edge_slack(const Point2<T>& p, const Point2<T>& a, const Point2<T>& b) {
  const T nx = -(b[1] - a[1]);
  const T ny = b[0] - a[0];
  return (nx * (p[0] - a[0]) + ny * (p[1] - a[1])) / ad::sqrt(nx * nx + ny * ny);
}
}  // namespace detail

/// Slacks (s12, s23, s31) of p against the oriented triangle v1 v2 v3.
template <class T>
std::array<T, 3> triangle_edge_slacks(const Point2<T>& p, const Point2<T>& v1, const Point2<T>& v2,
                                      const Point2<T>& v3) {
  if (!(std::abs(detail::twice_area(v1, v2, v3)) > 2e-12)) {
    throw std::invalid_argument("triangle_slack: degenerate triangle");
  }
  return {detail::edge_slack(p, v1, v2), detail::edge_slack(p, v2, v3), detail::edge_slack(p, v3, v1)};
}

/// min of the three edge slacks; >= 0 implies p inside when v1 v2 v3 winds counterclockwise.
template <class T>
T triangle_slack(const Point2<T>& p, const Point2<T>& v1, const Point2<T>& v2, const Point2<T>& v3) {
  const auto s = triangle_edge_slacks(p, v1, v2, v3);
  std::size_t k = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (ad::value(s[i]) < ad::value(s[k])) k = i;
  return s[k];
}

/// max over both windings; >= 0 exactly when p lies in the triangle.
template <class T>
T containment_margin(const Point2<T>& p, const Point2<T>& v1, const Point2<T>& v2, const Point2<T>& v3) {
  const T a = triangle_slack(p, v1, v2, v3);
  const T b = triangle_slack(p, v1, v3, v2);
  return ad::value(b) > ad::value(a) ? b : a;
}

namespace detail {
template <class T>
std::vector<T> all_triangle_slacks(const Point2<T>& p, std::span<const Point2<T>> pts) {
  if (pts.size() < 3) throw std::invalid_argument("stability_margin: need at least 3 support points");
  std::vector<T> slacks;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k) {
        if (!(std::abs(twice_area(pts[i], pts[j], pts[k])) > 2e-12)) continue;
        slacks.push_back(triangle_slack(p, pts[i], pts[j], pts[k]));
        slacks.push_back(triangle_slack(p, pts[i], pts[k], pts[j]));
      }
  if (slacks.empty()) throw std::invalid_argument("stability_margin: support points are collinear");
  return slacks;
}
}  // namespace detail

inline constexpr double kStabilityTemperature = 200.0;

/// Exact max over all support triangles and both windings; >= 0 iff p is in the hull.
template <class T>
T stability_margin_hard(const Point2<T>& p, std::span<const Point2<T>> support) {
  const auto s = detail::all_triangle_slacks(p, support);
  std::size_t k = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (ad::value(s[i]) > ad::value(s[k])) k = i;
  return s[k];
}

/**
 * Log-sum-exp surrogate of stability_margin_hard, shifted down by ln(N)/beta
 * so it never exceeds the hard max: a nonnegative smoothed margin certifies
 * containment. The gap to the hard max is at most ln(N)/beta.
 */
template <class T>
T stability_margin(const Point2<T>& p, std::span<const Point2<T>> support, double beta = kStabilityTemperature) {
  const auto s = detail::all_triangle_slacks(p, support);
  double top = ad::value(s[0]);
  for (const auto& v : s) top = std::max(top, ad::value(v));
  T acc(0.0);
  for (const auto& v : s) acc += ad::exp(beta * (v - top));
  return top + ad::log(acc) / beta - std::log(static_cast<double>(s.size())) / beta;
}

/// (sum lambda - 1, sum lambda_i p_i - p); zero iff lambda are convex weights reproducing p.
template <class T>
std::array<T, 3> stability_equality_residuals(const Point2<T>& p, std::span<const Point2<T>> support,
                                              std::span<const T> lambda) {
  if (lambda.size() != support.size()) {
    throw std::invalid_argument("stability_equality_residuals: one multiplier per support point");
  }
  T sum(-1.0), x = -p[0], y = -p[1];
  for (std::size_t i = 0; i < support.size(); ++i) {
    sum += lambda[i];
    x += lambda[i] * support[i][0];
    y += lambda[i] * support[i][1];
  }
  return {sum, x, y};
}

/// Convex hull in counterclockwise order without collinear vertices (monotone chain).
std::vector<Point2<double>> convex_hull(std::vector<Point2<double>> pts);

/// Euclidean distance from p to the boundary of a counterclockwise hull, positive inside.
double hull_signed_distance(const Point2<double>& p, std::span<const Point2<double>> hull);

/// Lifts double points to another scalar type as constants.
template <class T>
std::vector<Point2<T>> lift_points(const SupportPoints& s) {
  std::vector<Point2<T>> out;
  out.reserve(s.points.size());
  for (const auto& p : s.points) out.push_back({T(p[0]), T(p[1])});
  return out;
}

}  // namespace ikform
