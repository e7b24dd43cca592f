#pragma once

// Shared generators and independent reference computations for the test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "ikform/geometry.hpp"
#include "ikform/kinematics.hpp"

namespace ikform::test {

/// Fixed-seed generator so every property test is reproducible.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double angle() { return uniform(-M_PI, M_PI); }

  std::vector<double> angles(std::size_t n, double limit = M_PI) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(-limit, limit);
    return v;
  }

  /// Uniformly distributed rotation (normalized Gaussian quaternion).
  Eigen::Matrix3d rotation() {
    std::normal_distribution<double> g;
    Eigen::Quaterniond q(g(rng_), g(rng_), g(rng_), g(rng_));
    q.normalize();
    return q.toRotationMatrix();
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline Eigen::Matrix3d to_eigen(const Mat3<double>& m) {
  Eigen::Matrix3d r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = m(i, j);
  return r;
}

inline Mat3<double> from_eigen(const Eigen::Matrix3d& r) {
  Mat3<double> m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = r(i, j);
  return m;
}

inline Eigen::Isometry3d to_eigen(const Pose3& p) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = to_eigen(p.rotation);
  t.translation() = Eigen::Vector3d(p.position.x, p.position.y, p.position.z);
  return t;
}

/// Reference roll-pitch-yaw rotation built from Eigen axis-angle factors.
inline Eigen::Matrix3d rpy_reference(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// Reference DH link transform Rz(theta) Tz(d) Tx(a) Rx(alpha) as a product of elementary motions.
inline Eigen::Isometry3d dh_reference(const DHLink& l, double theta) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.rotate(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
  t.translate(Eigen::Vector3d(0, 0, l.d));
  t.translate(Eigen::Vector3d(l.a, 0, 0));
  t.rotate(Eigen::AngleAxisd(l.alpha, Eigen::Vector3d::UnitX()));
  return t;
}

inline Eigen::Isometry3d fk_reference(const KinematicChain& chain, std::span<const double> q) {
  Eigen::Isometry3d t = to_eigen(chain.base());
  for (std::size_t i = 0; i < chain.num_joints(); ++i) t = t * dh_reference(chain.links()[i], q[i]);
  return t;
}

/// Planar FK by explicit angle sums: theta_k = base + q_0 + ... + q_k.
inline Pose2 planar_reference(const PlanarChain& chain, std::span<const double> q) {
  Pose2 p = chain.base;
  double heading = chain.base.theta;
  for (double qi : q) {
    heading += qi;
    p.x += chain.link_length * std::cos(heading);
    p.y += chain.link_length * std::sin(heading);
  }
  p.theta = heading;
  return p;
}

inline double angle_diff(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * M_PI)); }

inline double max_angle_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, angle_diff(a[i], b[i]));
  return m;
}

}  // namespace ikform::test
