#pragma once

/**
 * @file autodiff.hpp
 * @brief Forward-mode differentiable scalar.
 *
 * A DiffScalar carries a value together with its partial derivatives with
 * respect to the decision variables of a program. Partials live in a fixed
 * inline buffer so arithmetic never allocates; only the first size() entries
 * are meaningful. A scalar with size() == 0 is a constant.
 *
 * Domain violations (division by zero, sqrt/log of a negative number)
 * produce a NaN value that propagates through later operations. Callers that
 * must never fail use clipped_arccos / safe_log instead.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace ikform::ad {

inline constexpr std::size_t kMaxPartials = 64;
inline constexpr double kDefaultClipEps = 1e-6;

class DiffScalar {
 public:
  DiffScalar() = default;
  // Implicit on purpose: constants mix freely with variables in expressions.
  DiffScalar(double value) : value_(value) {}  // NOLINT

  DiffScalar(const DiffScalar& other) : value_(other.value_), n_(other.n_) {
    std::copy_n(other.d_.begin(), n_, d_.begin());
  }
  DiffScalar& operator=(const DiffScalar& other) {
    value_ = other.value_;
    n_ = other.n_;
    std::copy_n(other.d_.begin(), n_, d_.begin());
    return *this;
  }

  /// Independent variable `index` out of `count`, seeded with a unit partial.
  static DiffScalar variable(double value, std::size_t index, std::size_t count) {
    if (count > kMaxPartials || index >= count) {
      throw std::out_of_range("DiffScalar::variable: index/count exceed partial capacity");
    }
    DiffScalar s(value);
    s.n_ = static_cast<std::uint32_t>(count);
    std::fill_n(s.d_.begin(), count, 0.0);
    s.d_[index] = 1.0;
    return s;
  }

  static DiffScalar nan() { return DiffScalar(std::numeric_limits<double>::quiet_NaN()); }

  double value() const { return value_; }
  std::size_t size() const { return n_; }
  double d(std::size_t i) const { return i < n_ ? d_[i] : 0.0; }
  std::span<const double> partials() const { return {d_.data(), n_}; }

  /// Result of applying a scalar function with derivative `slope` at this point.
  DiffScalar chain(double new_value, double slope) const {
    DiffScalar r(new_value);
    r.n_ = n_;
    for (std::size_t i = 0; i < n_; ++i) r.d_[i] = slope * d_[i];
    return r;
  }

  /// Same partial layout, all partials zero. Used where gradient information is cut.
  DiffScalar detached(double new_value) const {
    DiffScalar r(new_value);
    r.n_ = n_;
    std::fill_n(r.d_.begin(), n_, 0.0);
    return r;
  }

  DiffScalar& operator+=(const DiffScalar& o) {
    widen(o.n_);
    value_ += o.value_;
    for (std::size_t i = 0; i < o.n_; ++i) d_[i] += o.d_[i];
    return *this;
  }
  DiffScalar& operator-=(const DiffScalar& o) {
    widen(o.n_);
    value_ -= o.value_;
    for (std::size_t i = 0; i < o.n_; ++i) d_[i] -= o.d_[i];
    return *this;
  }
  DiffScalar& operator*=(const DiffScalar& o) {
    widen(o.n_);
    for (std::size_t i = 0; i < n_; ++i) d_[i] *= o.value_;
    for (std::size_t i = 0; i < o.n_; ++i) d_[i] += value_ * o.d_[i];
    value_ *= o.value_;
    return *this;
  }
  DiffScalar& operator/=(const DiffScalar& o) {
    if (o.value_ == 0.0) {
      *this = nan();
      return *this;
    }
    widen(o.n_);
    const double inv = 1.0 / o.value_;
    const double q = value_ * inv;
    for (std::size_t i = 0; i < n_; ++i) d_[i] = (d_[i] - q * o.d(i)) * inv;
    value_ = q;
    return *this;
  }
  DiffScalar& operator+=(double c) {
    value_ += c;
    return *this;
  }
  DiffScalar& operator-=(double c) {
    value_ -= c;
    return *this;
  }
  DiffScalar& operator*=(double c) {
    value_ *= c;
    for (std::size_t i = 0; i < n_; ++i) d_[i] *= c;
    return *this;
  }
  DiffScalar& operator/=(double c) {
    if (c == 0.0) {
      *this = nan();
      return *this;
    }
    return *this *= (1.0 / c);
  }

  DiffScalar operator-() const { return chain(-value_, -1.0); }

 private:
  void widen(std::uint32_t n) {
    if (n > n_) {
      std::fill(d_.begin() + n_, d_.begin() + n, 0.0);
      n_ = n;
    }
  }

  double value_ = 0.0;
  std::uint32_t n_ = 0;
  std::array<double, kMaxPartials> d_;
};

inline DiffScalar operator+(DiffScalar a, const DiffScalar& b) { return a += b; }
inline DiffScalar operator-(DiffScalar a, const DiffScalar& b) { return a -= b; }
inline DiffScalar operator*(DiffScalar a, const DiffScalar& b) { return a *= b; }
inline DiffScalar operator/(DiffScalar a, const DiffScalar& b) { return a /= b; }
inline DiffScalar operator+(DiffScalar a, double b) { return a += b; }
inline DiffScalar operator-(DiffScalar a, double b) { return a -= b; }
inline DiffScalar operator*(DiffScalar a, double b) { return a *= b; }
inline DiffScalar operator/(DiffScalar a, double b) { return a /= b; }
inline DiffScalar operator+(double a, DiffScalar b) { return b += a; }
inline DiffScalar operator-(double a, const DiffScalar& b) { return (-b) += a; }
inline DiffScalar operator*(double a, DiffScalar b) { return b *= a; }
inline DiffScalar operator/(double a, const DiffScalar& b) { return DiffScalar(a) /= b; }

inline bool operator<(const DiffScalar& a, const DiffScalar& b) { return a.value() < b.value(); }
inline bool operator>(const DiffScalar& a, const DiffScalar& b) { return a.value() > b.value(); }
inline bool operator<=(const DiffScalar& a, const DiffScalar& b) { return a.value() <= b.value(); }
inline bool operator>=(const DiffScalar& a, const DiffScalar& b) { return a.value() >= b.value(); }

inline double value(const DiffScalar& s) { return s.value(); }
inline double value(double s) { return s; }

inline DiffScalar sin(const DiffScalar& x) { return x.chain(std::sin(x.value()), std::cos(x.value())); }
inline DiffScalar cos(const DiffScalar& x) { return x.chain(std::cos(x.value()), -std::sin(x.value())); }
inline DiffScalar exp(const DiffScalar& x) {
  const double e = std::exp(x.value());
  return x.chain(e, e);
}
inline DiffScalar log(const DiffScalar& x) {
  if (!(x.value() > 0.0)) return DiffScalar::nan();
  return x.chain(std::log(x.value()), 1.0 / x.value());
}

inline DiffScalar sqrt(const DiffScalar& x) {
  if (x.value() < 0.0 || std::isnan(x.value())) return DiffScalar::nan();
  const double r = std::sqrt(x.value());
  if (r == 0.0) {
    // Infinite slope; partials stay zero only where the input partial is zero.
    DiffScalar out = x.detached(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.d(i) != 0.0) return DiffScalar::nan();
    }
    return out;
  }
  return x.chain(r, 0.5 / r);
}

inline DiffScalar atan2(const DiffScalar& y, const DiffScalar& x) {
  const double r2 = x.value() * x.value() + y.value() * y.value();
  if (r2 == 0.0) return DiffScalar::nan();
  // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
  DiffScalar out = y.chain(std::atan2(y.value(), x.value()), x.value() / r2);
  out -= x.chain(0.0, y.value() / r2);
  return out;
}

inline DiffScalar acos(const DiffScalar& x) {
  const double v = x.value();
  if (!(v >= -1.0 && v <= 1.0)) return DiffScalar::nan();
  return x.chain(std::acos(v), -1.0 / std::sqrt(1.0 - v * v));
}

inline DiffScalar abs(const DiffScalar& x) { return x.value() < 0.0 ? -x : x; }
inline DiffScalar square(const DiffScalar& x) { return x * x; }
inline double square(double x) { return x * x; }

using std::abs;
using std::acos;
using std::atan2;
using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

/// Euclidean norm of a span of scalars.
template <class T>
T norm(std::span<const T> v) {
  T s(0.0);
  for (const auto& e : v) s += e * e;
  return sqrt(s);
}

/// arccos with its argument clamped to [-1 + eps, 1 - eps]; zero slope once clamped.
inline DiffScalar clipped_arccos(const DiffScalar& t, double eps = kDefaultClipEps) {
  const double lo = -1.0 + eps;
  const double hi = 1.0 - eps;
  const double v = t.value();
  if (v > hi) return t.detached(std::acos(hi));
  if (v < lo) return t.detached(std::acos(lo));
  return t.chain(std::acos(v), -1.0 / std::sqrt(1.0 - v * v));
}
inline double clipped_arccos(double t, double eps = kDefaultClipEps) {
  return std::acos(std::clamp(t, -1.0 + eps, 1.0 - eps));
}

/// log(max(t, eps)); zero slope once clamped.
inline DiffScalar safe_log(const DiffScalar& t, double eps = kDefaultClipEps) {
  if (!(t.value() >= eps)) return t.detached(std::log(eps));
  return t.chain(std::log(t.value()), 1.0 / t.value());
}
inline double safe_log(double t, double eps = kDefaultClipEps) {
  return std::log(t >= eps ? t : eps);
}

/// Wrap an angle to (-pi, pi]. Slope 1 everywhere except at the jump.
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * M_PI;
  double r = std::fmod(a + M_PI, kTwoPi);
  if (r <= 0.0) r += kTwoPi;
  return r - M_PI;
}
inline DiffScalar wrap_angle(const DiffScalar& a) { return a + (wrap_angle(a.value()) - a.value()); }

}  // namespace ikform::ad

namespace ikform {
using ad::DiffScalar;
}
