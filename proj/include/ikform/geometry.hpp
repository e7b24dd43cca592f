#pragma once

/**
 * @file geometry.hpp
 * @brief Planar and spatial rigid transforms, templated on the scalar type so
 *        the same code runs on doubles and on DiffScalar.
 *
 * Euler angles are roll-pitch-yaw with R = Rz(yaw) * Ry(pitch) * Rx(roll).
 */

#include <array>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ikform/autodiff.hpp"

namespace ikform {

template <class T>
struct Vec3 {
  T x{0.0}, y{0.0}, z{0.0};

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  template <class S>
  Vec3 operator*(const S& s) const {
    return {x * s, y * s, z * s};
  }
};

template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
template <class T>
T norm(const Vec3<T>& a) {
  return ad::sqrt(dot(a, a));
}
template <class T>
Vec3<T> normalized(const Vec3<T>& a) {
  const T n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

/// Row-major 3x3 matrix.
template <class T>
struct Mat3 {
  std::array<T, 9> m{T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0), T(0.0)};

  static Mat3 identity() {
    Mat3 r;
    r(0, 0) = T(1.0);
    r(1, 1) = T(1.0);
    r(2, 2) = T(1.0);
    return r;
  }
  /// Matrix with the given columns.
  static Mat3 from_columns(const Vec3<T>& c0, const Vec3<T>& c1, const Vec3<T>& c2) {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      r(i, 0) = c0[i];
      r(i, 1) = c1[i];
      r(i, 2) = c2[i];
    }
    return r;
  }

  T& operator()(int r, int c) { return m[3 * r + c]; }
  const T& operator()(int r, int c) const { return m[3 * r + c]; }

  Vec3<T> col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        T s = (*this)(i, 0) * o(0, j);
        s += (*this)(i, 1) * o(1, j);
        s += (*this)(i, 2) * o(2, j);
        r(i, j) = s;
      }
    return r;
  }
  Vec3<T> operator*(const Vec3<T>& v) const {
    return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
            (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
            (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
  }
};

template <class T>
Mat3<T> rot_x(const T& a) {
  const T c = ad::cos(a), s = ad::sin(a);
  Mat3<T> r = Mat3<T>::identity();
  r(1, 1) = c;
  r(1, 2) = -s;
  r(2, 1) = s;
  r(2, 2) = c;
  return r;
}
template <class T>
Mat3<T> rot_y(const T& a) {
  const T c = ad::cos(a), s = ad::sin(a);
  Mat3<T> r = Mat3<T>::identity();
  r(0, 0) = c;
  r(0, 2) = s;
  r(2, 0) = -s;
  r(2, 2) = c;
  return r;
}
template <class T>
Mat3<T> rot_z(const T& a) {
  const T c = ad::cos(a), s = ad::sin(a);
  Mat3<T> r = Mat3<T>::identity();
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

/// Rodrigues rotation by `angle` about the unit vector `axis`.
template <class T>
Mat3<T> axis_angle(const Vec3<T>& axis, const T& angle) {
  const T c = ad::cos(angle), s = ad::sin(angle);
  const T t = 1.0 - c;
  Mat3<T> r;
  r(0, 0) = c + axis.x * axis.x * t;
  r(1, 1) = c + axis.y * axis.y * t;
  r(2, 2) = c + axis.z * axis.z * t;
  r(0, 1) = axis.x * axis.y * t - axis.z * s;
  r(1, 0) = axis.x * axis.y * t + axis.z * s;
  r(0, 2) = axis.x * axis.z * t + axis.y * s;
  r(2, 0) = axis.x * axis.z * t - axis.y * s;
  r(1, 2) = axis.y * axis.z * t - axis.x * s;
  r(2, 1) = axis.y * axis.z * t + axis.x * s;
  return r;
}

template <class T>
struct BasicEulerRPY {
  T roll{0.0}, pitch{0.0}, yaw{0.0};
  /// Set when extraction hit |pitch| = pi/2; roll is then pinned to 0.
  bool gimbal_locked = false;
};
using EulerRPY = BasicEulerRPY<double>;

template <class T>
Mat3<T> rotation_from_rpy(const T& roll, const T& pitch, const T& yaw) {
  return rot_z(yaw) * (rot_y(pitch) * rot_x(roll));
}
template <class T>
Mat3<T> rotation_from_rpy(const BasicEulerRPY<T>& e) {
  return rotation_from_rpy(e.roll, e.pitch, e.yaw);
}

template <class T>
BasicEulerRPY<T> rpy_from_rotation(const Mat3<T>& r) {
  constexpr double kLockTol = 1e-12;
  BasicEulerRPY<T> e;
  const T cp = ad::sqrt(r(0, 0) * r(0, 0) + r(1, 0) * r(1, 0));
  if (ad::value(cp) <= kLockTol) {
    // Pitch is +-pi/2: only yaw - roll (or yaw + roll) is observable.
    e.gimbal_locked = true;
    e.roll = r(0, 0) * 0.0;
    e.pitch = ad::value(r(2, 0)) < 0.0 ? T(M_PI / 2) : T(-M_PI / 2);
    e.yaw = ad::atan2(-r(0, 1), r(1, 1));
    return e;
  }
  e.pitch = ad::atan2(-r(2, 0), cp);
  e.roll = ad::atan2(r(2, 1), r(2, 2));
  e.yaw = ad::atan2(r(1, 0), r(0, 0));
  return e;
}

template <class T>
struct BasicPose3 {
  Mat3<T> rotation = Mat3<T>::identity();
  Vec3<T> position{};

  static BasicPose3 identity() { return {}; }
  static BasicPose3 translation(const T& x, const T& y, const T& z) {
    BasicPose3 p;
    p.position = {x, y, z};
    return p;
  }

  /// Rigid transform this * other.
  BasicPose3 operator*(const BasicPose3& o) const {
    return {rotation * o.rotation, rotation * o.position + position};
  }
  Vec3<T> apply(const Vec3<T>& v) const { return rotation * v + position; }
  BasicPose3 inverse() const {
    const Mat3<T> rt = rotation.transpose();
    return {rt, -(rt * position)};
  }
};
using Pose3 = BasicPose3<double>;

template <class T>
BasicPose3<T> compose(const BasicPose3<T>& a, const BasicPose3<T>& b) {
  return a * b;
}

/// X(p, o): pose from a position and roll-pitch-yaw angles.
template <class T>
BasicPose3<T> pose_from_params(const T& x, const T& y, const T& z, const T& roll, const T& pitch,
                               const T& yaw) {
  return {rotation_from_rpy(roll, pitch, yaw), {x, y, z}};
}

/// Pose parameters (x, y, z, roll, pitch, yaw) of a transform.
template <class T>
std::array<T, 6> pose_params(const BasicPose3<T>& p) {
  const auto e = rpy_from_rotation(p.rotation);
  return {p.position.x, p.position.y, p.position.z, e.roll, e.pitch, e.yaw};
}

template <class T>
struct BasicPose2 {
  T x{0.0}, y{0.0}, theta{0.0};

  /// Compose: `o` expressed in this frame.
  BasicPose2 operator*(const BasicPose2& o) const {
    const T c = ad::cos(theta), s = ad::sin(theta);
    return {x + c * o.x - s * o.y, y + s * o.x + c * o.y, theta + o.theta};
  }
};
using Pose2 = BasicPose2<double>;

/// Convert a double-valued matrix to another scalar type (constants).
template <class T>
Mat3<T> lift(const Mat3<double>& r) {
  Mat3<T> out;
  for (int i = 0; i < 9; ++i) out.m[i] = T(r.m[i]);
  return out;
}
template <class T>
BasicPose3<T> lift(const Pose3& p) {
  return {lift<T>(p.rotation), {T(p.position.x), T(p.position.y), T(p.position.z)}};
}
template <class T>
Pose3 value_of(const BasicPose3<T>& p) {
  Pose3 out;
  for (int i = 0; i < 9; ++i) out.rotation.m[i] = ad::value(p.rotation.m[i]);
  out.position = {ad::value(p.position.x), ad::value(p.position.y), ad::value(p.position.z)};
  return out;
}

/// Max-abs deviation of R^T R from identity.
double orthonormality_error(const Mat3<double>& r);
double determinant(const Mat3<double>& r);
/// Frobenius ("chordal") distance between rotations plus position distance.
double pose_distance(const Pose3& a, const Pose3& b);

Pose3 pose3_from_json(const nlohmann::json& j);
nlohmann::json pose3_to_json(const Pose3& p);
Pose2 pose2_from_json(const nlohmann::json& j);

}  // namespace ikform
