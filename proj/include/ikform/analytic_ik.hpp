#pragma once

/**
 * @file analytic_ik.hpp
 * @brief Closed-form IK maps with self-motion parameters, discrete branches,
 *        clipping of domain-restricted intermediates, and probe values.
 *
 * Every arccos site with argument f reports two probes measured against the
 * clip interval [-1 + eps, 1 - eps]:
 *
 *     D1 = (1 - eps) - f,   D2 = (1 - eps) + f.
 *
 * Both probes are nonnegative exactly when the clip is inactive, so a
 * nonnegative probe vector certifies that the returned joints reproduce the
 * requested pose. With eps = 0 these reduce to 1 - f and 1 + f.
 */

#include <array>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "ikform/autodiff.hpp"
#include "ikform/geometry.hpp"
#include "ikform/kinematics.hpp"

namespace ikform {

/// Raised when the IK map is evaluated at a configuration it cannot resolve.
class SingularConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discrete self-motion parameter: a tuple of signs in {-1, +1}.
class Branch {
 public:
  Branch() = default;
  explicit Branch(std::vector<int> signs);
  Branch(std::initializer_list<int> signs) : Branch(std::vector<int>(signs)) {}

  std::size_t size() const { return signs_.size(); }
  int operator[](std::size_t i) const { return signs_.at(i); }
  const std::vector<int>& signs() const { return signs_; }
  bool operator==(const Branch&) const = default;

  /// All 2^k branches, ordered by binary counting with -1 as the zero digit.
  static std::vector<Branch> all(std::size_t k);
  /// Compact label such as "+-+".
  std::string label() const;

 private:
  std::vector<int> signs_;
};

template <class T>
struct BasicIKResult {
  std::vector<T> q;
  std::vector<T> probes;
  bool clipped = false;
};
using IKResult = BasicIKResult<double>;

template <class T>
std::array<T, 2> arccos_probes(const T& f, double eps = ad::kDefaultClipEps) {
  return {(1.0 - eps) - f, f + (1.0 - eps)};
}

namespace detail {
template <class T>
bool any_negative(const std::vector<T>& probes, std::size_t from = 0) {
  for (std::size_t i = from; i < probes.size(); ++i)
    if (!(ad::value(probes[i]) >= 0.0)) return true;
  return false;
}
}  // namespace detail

/**
 * Closed-form solution of the last three links of an equal-length planar
 * chain. The wrist point is the target minus one link along the target
 * heading; the middle joint is +-2 acos(|wrist - base| / 2l). The single probe
 * is (1 - eps)^2 - |wrist - base|^2 / (2l)^2. Outer joints are wrapped to (-pi, pi].
 */
template <class T>
BasicIKResult<T> planar3r_ik(const BasicPose2<T>& base, const BasicPose2<T>& target, double l,
                             const Branch& branch, double eps = ad::kDefaultClipEps) {
  if (!(l > 0.0)) throw std::invalid_argument("planar3r_ik: link length must be positive");
  if (branch.size() != 1) throw std::invalid_argument("planar3r_ik: expected a 1-sign branch");
  const T wx = target.x - l * ad::cos(target.theta) - base.x;
  const T wy = target.y - l * ad::sin(target.theta) - base.y;
  const T r2 = wx * wx + wy * wy;

  BasicIKResult<T> out;
  out.probes.push_back(ad::square(1.0 - eps) - r2 / (4.0 * l * l));
  out.clipped = detail::any_negative(out.probes);

  const T half = ad::clipped_arccos(ad::sqrt(r2) / (2.0 * l), eps);
  const T q2 = 2.0 * branch[0] * half;
  const T phi1 = ad::atan2(wy, wx) - half * branch[0];
  out.q = {ad::wrap_angle(phi1 - base.theta), q2, ad::wrap_angle(target.theta - phi1 - q2)};
  return out;
}

/// Free joints first, then the 3R tail solved from the pose reached by the free prefix.
template <class T>
BasicIKResult<T> planar_chain_ik(std::span<const T> q_free, const BasicPose2<T>& target,
                                 const PlanarChain& chain, const Branch& branch,
                                 double eps = ad::kDefaultClipEps) {
  if (q_free.size() + 3 != chain.num_joints()) {
    throw std::invalid_argument("planar_chain_ik: need n - 3 free joints");
  }
  const BasicPose2<T> base = planar_fk(chain, q_free);
  auto tail = planar3r_ik(base, target, chain.link_length, branch, eps);
  BasicIKResult<T> out;
  out.q.assign(q_free.begin(), q_free.end());
  out.q.insert(out.q.end(), tail.q.begin(), tail.q.end());
  out.probes = std::move(tail.probes);
  out.clipped = tail.clipped;
  return out;
}

/// Segment lengths of a spherical-revolute-spherical 7-joint arm.
struct SrsGeometry {
  double d_bs = 0.0;  ///< base frame to shoulder
  double d_se = 0.0;  ///< shoulder to elbow
  double d_ew = 0.0;  ///< elbow to wrist
  double d_wf = 0.0;  ///< wrist to flange

  /// Validates the 7 DH rows against the SRS pattern and extracts lengths.
  static SrsGeometry from_links(std::span<const DHLink> links);
};

namespace detail {
/// Rz(a1) Ry(a2) Rz(a3) extraction with the sign of a2 fixed by `sign`.
template <class T>
std::array<T, 3> zyz_angles(const Mat3<T>& m, int sign, double eps, std::vector<T>& probes) {
  const auto pr = arccos_probes(m(2, 2), eps);
  probes.push_back(pr[0]);
  probes.push_back(pr[1]);
  const T a2 = sign * ad::clipped_arccos(m(2, 2), eps);
  const T a1 = ad::atan2(sign * m(1, 2), sign * m(0, 2));
  const T a3 = ad::atan2(sign * m(2, 1), -sign * m(2, 0));
  return {a1, a2, a3};
}

/// Unit normal of the plane spanned by `u` and the base z axis (x axis if parallel).
template <class T>
Vec3<T> reference_normal(const Vec3<T>& u) {
  Vec3<T> m = cross(Vec3<T>{T(0.0), T(0.0), T(1.0)}, u);
  if (ad::value(dot(m, m)) < 1e-18) m = cross(Vec3<T>{T(1.0), T(0.0), T(0.0)}, u);
  return normalized(m);
}
}  // namespace detail

/**
 * IK of a spherical-revolute-spherical arm whose first joint sits at `base`.
 *
 * psi rotates the elbow about the shoulder-wrist line, measured from the
 * reference arm plane containing that line and the base z axis. Branch signs
 * are (shoulder, elbow, wrist). Probes are returned in the order
 * elbow (2), shoulder (2), wrist (2).
 */
template <class T>
BasicIKResult<T> srs7_ik(const BasicPose3<T>& base, const BasicPose3<T>& target, const T& psi,
                         const SrsGeometry& g, const Branch& branch,
                         double eps = ad::kDefaultClipEps) {
  if (branch.size() != 3) throw std::invalid_argument("srs7_ik: expected a 3-sign branch");
  const BasicPose3<T> rel = base.inverse() * target;
  const Vec3<T> shoulder{T(0.0), T(0.0), T(g.d_bs)};
  const Vec3<T> wrist = rel.position - rel.rotation.col(2) * g.d_wf;
  const Vec3<T> sw = wrist - shoulder;
  const T len2 = dot(sw, sw);
  if (!(ad::value(len2) > 1e-24)) {
    throw SingularConfiguration("srs7_ik: wrist center coincides with the shoulder");
  }
  const T len = ad::sqrt(len2);

  BasicIKResult<T> out;
  const T c = (len2 - g.d_se * g.d_se - g.d_ew * g.d_ew) / (2.0 * g.d_se * g.d_ew);
  const auto elbow_probes = arccos_probes(c, eps);
  out.probes = {elbow_probes[0], elbow_probes[1]};
  const T q4 = branch[1] * ad::clipped_arccos(c, eps);

  // Shoulder-to-wrist vector in the elbow frame is (-d_ew s4, d_se + d_ew c4, 0).
  const Vec3<T> w3{-g.d_ew * ad::sin(q4), g.d_se + g.d_ew * ad::cos(q4), T(0.0)};
  const Vec3<T> a1 = normalized(w3);
  const Vec3<T> a2{-a1.y, a1.x, T(0.0)};
  const Vec3<T> a3{T(0.0), T(0.0), T(1.0)};
  const Vec3<T> u = sw * (1.0 / len);
  const Vec3<T> b3 = detail::reference_normal(u);
  const Vec3<T> b2 = cross(b3, u);
  const Mat3<T> r_ref = Mat3<T>::from_columns(u, b2, b3) * Mat3<T>::from_columns(a1, a2, a3).transpose();
  const Mat3<T> r03 = axis_angle(u, psi) * r_ref;

  const Mat3<T> shoulder_m = r03 * lift<T>(rot_x(-M_PI / 2));
  const auto s = detail::zyz_angles(shoulder_m, branch[0], eps, out.probes);

  const Mat3<T> r04 = r03 * (rot_z(q4) * lift<T>(rot_x(-M_PI / 2)));
  const Mat3<T> wrist_m = r04.transpose() * rel.rotation;
  const auto w = detail::zyz_angles(wrist_m, branch[2], eps, out.probes);

  out.q = {s[0], s[1], s[2], q4, w[0], w[1], w[2]};
  out.clipped = detail::any_negative(out.probes);
  return out;
}

/// Initial-guess parameters reproducing a joint vector through an IK map.
struct MatchedGuess {
  std::vector<double> pose;  ///< pose parameters (x, y, theta) or (x, y, z, roll, pitch, yaw)
  std::vector<double> free;  ///< continuous self-motion parameters
  Branch branch;
};

/**
 * An analytic IK function IK(pose, free, branch) -> q for one chain family,
 * along with the forward direction needed to match initial guesses.
 */
class AnalyticIKMap {
 public:
  virtual ~AnalyticIKMap() = default;

  virtual std::size_t num_joints() const = 0;
  /// 3 for planar targets, 6 for spatial targets.
  virtual std::size_t pose_dim() const = 0;
  /// Dimension of the continuous self-motion parameter space.
  virtual std::size_t free_dim() const = 0;
  virtual std::size_t branch_size() const = 0;
  /// Indices within the pose parameters that are angles.
  virtual std::vector<std::size_t> angular_pose_indices() const = 0;

  virtual IKResult evaluate(std::span<const double> pose, std::span<const double> free,
                            const Branch& branch) const = 0;
  virtual BasicIKResult<DiffScalar> evaluate(std::span<const DiffScalar> pose,
                                             std::span<const DiffScalar> free,
                                             const Branch& branch) const = 0;

  /// Pose parameters reached by q.
  virtual std::vector<double> pose_of(std::span<const double> q) const = 0;
  /// Pose, free parameters and branch with IK(...) == q0; throws SingularConfiguration.
  virtual MatchedGuess match(std::span<const double> q0) const = 0;

  virtual std::vector<double> joint_lower() const = 0;
  virtual std::vector<double> joint_upper() const = 0;

  std::vector<Branch> branches() const { return Branch::all(branch_size()); }
};

/// Equal-link planar chain: the first n-3 joints are free, the rest come from planar3r_ik.
class PlanarIKMap final : public AnalyticIKMap {
 public:
  explicit PlanarIKMap(PlanarChain chain, double eps = ad::kDefaultClipEps);

  std::size_t num_joints() const override { return chain_.num_joints(); }
  std::size_t pose_dim() const override { return 3; }
  std::size_t free_dim() const override { return chain_.num_joints() - 3; }
  std::size_t branch_size() const override { return 1; }
  std::vector<std::size_t> angular_pose_indices() const override { return {2}; }

  IKResult evaluate(std::span<const double> pose, std::span<const double> free,
                    const Branch& branch) const override;
  BasicIKResult<DiffScalar> evaluate(std::span<const DiffScalar> pose, std::span<const DiffScalar> free,
                                     const Branch& branch) const override;
  std::vector<double> pose_of(std::span<const double> q) const override;
  MatchedGuess match(std::span<const double> q0) const override;
  std::vector<double> joint_lower() const override { return chain_.q_lb; }
  std::vector<double> joint_upper() const override { return chain_.q_ub; }

  const PlanarChain& chain() const { return chain_; }

 private:
  template <class T>
  BasicIKResult<T> eval(std::span<const T> pose, std::span<const T> free, const Branch& branch) const;

  PlanarChain chain_;
  double eps_;
};

/**
 * Spatial chain ending in a 7-joint SRS tail. The free parameters are the
 * prefix joints followed by the elbow angle psi.
 */
class SrsChainIKMap final : public AnalyticIKMap {
 public:
  explicit SrsChainIKMap(KinematicChain chain, double eps = ad::kDefaultClipEps);

  std::size_t num_joints() const override { return chain_.num_joints(); }
  std::size_t pose_dim() const override { return 6; }
  std::size_t free_dim() const override { return prefix_ + 1; }
  std::size_t branch_size() const override { return 3; }
  std::vector<std::size_t> angular_pose_indices() const override { return {3, 4, 5}; }

  IKResult evaluate(std::span<const double> pose, std::span<const double> free,
                    const Branch& branch) const override;
  BasicIKResult<DiffScalar> evaluate(std::span<const DiffScalar> pose, std::span<const DiffScalar> free,
                                     const Branch& branch) const override;
  std::vector<double> pose_of(std::span<const double> q) const override;
  MatchedGuess match(std::span<const double> q0) const override;
  std::vector<double> joint_lower() const override { return chain_.lower_limits(); }
  std::vector<double> joint_upper() const override { return chain_.upper_limits(); }

  const KinematicChain& chain() const { return chain_; }
  const SrsGeometry& geometry() const { return geometry_; }
  std::size_t prefix_joints() const { return prefix_; }

  /// Frame at the first SRS joint after the prefix joints.
  template <class T>
  BasicPose3<T> srs_base(std::span<const T> prefix) const {
    BasicPose3<T> x = lift<T>(chain_.base());
    for (std::size_t i = 0; i < prefix_; ++i) x = x * dh_transform(chain_.links()[i], prefix[i]);
    return x;
  }

 private:
  template <class T>
  BasicIKResult<T> eval(std::span<const T> pose, std::span<const T> free, const Branch& branch) const;

  KinematicChain chain_;
  SrsGeometry geometry_;
  std::size_t prefix_;
  double eps_;
};

/// psi of a known SRS joint vector under the reference-plane convention of srs7_ik.
/// Everything is measured in the SRS base frame, so the prefix does not enter.
double srs_psi_from_joints(std::span<const double> q7, const SrsGeometry& g);

/// Probe values D_k of the map at (pose, free, branch).
template <class T>
std::vector<T> probe_reachability(const AnalyticIKMap& map, std::span<const T> pose, std::span<const T> free,
                                  const Branch& branch) {
  return map.evaluate(pose, free, branch).probes;
}

/// Picks the IK map matching a chain: planar chains, or spatial chains with an SRS tail.
std::unique_ptr<AnalyticIKMap> make_ik_map(const PlanarChain& chain);
std::unique_ptr<AnalyticIKMap> make_ik_map(const KinematicChain& chain);

}  // namespace ikform
