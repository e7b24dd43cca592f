#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ikform/geometry.hpp"

namespace ikform {

/// Classic (distal) DH parameters; the joint angle is supplied at evaluation time.
struct DHLink {
  double d = 0.0;
  double alpha = 0.0;
  double a = 0.0;
};

/// Rz(theta) * Tz(d) * Tx(a) * Rx(alpha)
template <class T>
BasicPose3<T> dh_transform(const DHLink& link, const T& theta) {
  const T ct = ad::cos(theta), st = ad::sin(theta);
  const double ca = std::cos(link.alpha), sa = std::sin(link.alpha);
  BasicPose3<T> p;
  auto& r = p.rotation;
  r(0, 0) = ct;
  r(0, 1) = -st * ca;
  r(0, 2) = st * sa;
  r(1, 0) = st;
  r(1, 1) = ct * ca;
  r(1, 2) = -ct * sa;
  r(2, 0) = T(0.0);
  r(2, 1) = T(sa);
  r(2, 2) = T(ca);
  p.position = {ct * link.a, st * link.a, T(link.d)};
  return p;
}

/// Serial revolute chain with joint limits and a fixed base transform.
class KinematicChain {
 public:
  KinematicChain() = default;
  KinematicChain(std::vector<DHLink> links, std::vector<double> q_lb, std::vector<double> q_ub,
                 Pose3 base = Pose3::identity());

  std::size_t num_joints() const { return links_.size(); }
  const std::vector<DHLink>& links() const { return links_; }
  const std::vector<double>& lower_limits() const { return q_lb_; }
  const std::vector<double>& upper_limits() const { return q_ub_; }
  const Pose3& base() const { return base_; }
  void set_base(const Pose3& base) { base_ = base; }
  /// Sum over links of the distance each link frame's origin moves from its parent.
  double total_length() const;

  /// Frame i+1 for every joint i, i.e. base * A_0 * ... * A_i.
  template <class T>
  std::vector<BasicPose3<T>> link_frames(std::span<const T> q) const {
    check_size(q.size());
    std::vector<BasicPose3<T>> frames;
    frames.reserve(links_.size());
    BasicPose3<T> x = lift<T>(base_);
    for (std::size_t i = 0; i < links_.size(); ++i) {
      x = x * dh_transform(links_[i], q[i]);
      frames.push_back(x);
    }
    return frames;
  }

  template <class T>
  BasicPose3<T> forward(std::span<const T> q) const {
    check_size(q.size());
    BasicPose3<T> x = lift<T>(base_);
    for (std::size_t i = 0; i < links_.size(); ++i) x = x * dh_transform(links_[i], q[i]);
    return x;
  }

 private:
  void check_size(std::size_t n) const;

  std::vector<DHLink> links_;
  std::vector<double> q_lb_;
  std::vector<double> q_ub_;
  Pose3 base_;
};

template <class T>
BasicPose3<T> forward_kinematics(const KinematicChain& chain, std::span<const T> q) {
  return chain.forward(q);
}

/// Planar chain of n equal links whose total length is 1.
struct PlanarChain {
  int n = 3;
  double link_length = 1.0 / 3.0;
  Pose2 base{};
  std::vector<double> q_lb;
  std::vector<double> q_ub;

  /// n links of length 1/n, joint box [-limit, limit].
  static PlanarChain uniform(int n, double limit = 2.0 * M_PI, Pose2 base = {});
  std::size_t num_joints() const { return static_cast<std::size_t>(n); }
};

template <class T>
BasicPose2<T> planar_fk(const PlanarChain& chain, std::span<const T> q) {
  BasicPose2<T> p{T(chain.base.x), T(chain.base.y), T(chain.base.theta)};
  for (const auto& qi : q) {
    p.theta += qi;
    p.x += chain.link_length * ad::cos(p.theta);
    p.y += chain.link_length * ad::sin(p.theta);
  }
  return p;
}

/// The same chain as a spatial DH chain (links in the base xy-plane).
KinematicChain to_spatial(const PlanarChain& chain);

/// 6 x d Jacobian of (position, roll, pitch, yaw) with respect to q.
Eigen::MatrixXd jacobian(const KinematicChain& chain, std::span<const double> q);
/// 3 x n Jacobian of (x, y, theta) with respect to q.
Eigen::MatrixXd jacobian(const PlanarChain& chain, std::span<const double> q);

/**
 * Arm with `extra_links` redundant joints followed by a 7-joint
 * spherical-revolute-spherical tail.
 *
 * Extra links alternate (d=l, alpha=-pi/2) and (d=0, alpha=+pi/2); the tail
 * rows are (l,-pi/2) (0,pi/2) (l,pi/2) (0,-pi/2) (l,-pi/2) (0,pi/2) (l,0).
 * l is total_length divided by the number of rows with nonzero d, and every
 * joint is limited to [-pi, pi].
 */
KinematicChain scaled_arm(int extra_links, double total_length = 1.0);

KinematicChain chain_from_json(const nlohmann::json& j);
nlohmann::json chain_to_json(const KinematicChain& chain);

}  // namespace ikform
