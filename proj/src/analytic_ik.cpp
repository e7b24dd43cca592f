#include "ikform/analytic_ik.hpp"

#include <cmath>
#include <string>

namespace ikform {

Branch::Branch(std::vector<int> signs) : signs_(std::move(signs)) {
  for (int s : signs_) {
    if (s != 1 && s != -1) throw std::invalid_argument("Branch: every sign must be +1 or -1");
  }
}

std::vector<Branch> Branch::all(std::size_t k) {
  std::vector<Branch> out;
  for (std::size_t code = 0; code < (std::size_t{1} << k); ++code) {
    std::vector<int> s(k);
    for (std::size_t i = 0; i < k; ++i) s[i] = (code >> (k - 1 - i)) & 1 ? 1 : -1;
    out.emplace_back(std::move(s));
  }
  return out;
}

std::string Branch::label() const {
  std::string s;
  for (int v : signs_) s += v > 0 ? '+' : '-';
  return s;
}

namespace {
int sign_of(double v) { return v < 0.0 ? -1 : 1; }

bool near(double a, double b) { return std::abs(a - b) < 1e-12; }
}  // namespace

SrsGeometry SrsGeometry::from_links(std::span<const DHLink> links) {
  if (links.size() != 7) throw std::invalid_argument("SrsGeometry: need exactly 7 links");
  constexpr double h = M_PI / 2;
  const double alphas[7] = {-h, h, h, -h, -h, h, 0.0};
  for (std::size_t i = 0; i < 7; ++i) {
    const bool d_ok = (i % 2 == 1) ? near(links[i].d, 0.0) : links[i].d > 0.0;
    if (!near(links[i].alpha, alphas[i]) || !near(links[i].a, 0.0) || !d_ok) {
      throw std::invalid_argument("SrsGeometry: link " + std::to_string(i) +
                                  " does not match the spherical-revolute-spherical pattern");
    }
  }
  return {links[0].d, links[2].d, links[4].d, links[6].d};
}

// ---------------------------------------------------------------- planar map

PlanarIKMap::PlanarIKMap(PlanarChain chain, double eps) : chain_(std::move(chain)), eps_(eps) {
  if (chain_.n < 3) throw std::invalid_argument("PlanarIKMap: chain needs at least 3 links");
  if (chain_.q_lb.size() != chain_.num_joints()) {
    chain_.q_lb.assign(chain_.num_joints(), -2.0 * M_PI);
    chain_.q_ub.assign(chain_.num_joints(), 2.0 * M_PI);
  }
}

template <class T>
BasicIKResult<T> PlanarIKMap::eval(std::span<const T> pose, std::span<const T> free,
                                   const Branch& branch) const {
  if (pose.size() != 3 || free.size() != free_dim()) {
    throw std::invalid_argument("PlanarIKMap: wrong parameter dimensions");
  }
  return planar_chain_ik(free, BasicPose2<T>{pose[0], pose[1], pose[2]}, chain_, branch, eps_);
}

IKResult PlanarIKMap::evaluate(std::span<const double> pose, std::span<const double> free,
                               const Branch& branch) const {
  return eval(pose, free, branch);
}

BasicIKResult<DiffScalar> PlanarIKMap::evaluate(std::span<const DiffScalar> pose,
                                                std::span<const DiffScalar> free,
                                                const Branch& branch) const {
  return eval(pose, free, branch);
}

std::vector<double> PlanarIKMap::pose_of(std::span<const double> q) const {
  const Pose2 p = planar_fk(chain_, q);
  return {p.x, p.y, ad::wrap_angle(p.theta)};
}

MatchedGuess PlanarIKMap::match(std::span<const double> q0) const {
  if (q0.size() != num_joints()) throw std::invalid_argument("PlanarIKMap::match: wrong joint count");
  MatchedGuess m;
  m.pose = pose_of(q0);
  m.free.assign(q0.begin(), q0.end() - 3);
  m.branch = Branch{sign_of(q0[num_joints() - 2])};
  return m;
}

// ------------------------------------------------------------------ SRS map

SrsChainIKMap::SrsChainIKMap(KinematicChain chain, double eps) : chain_(std::move(chain)), eps_(eps) {
  if (chain_.num_joints() < 7) throw std::invalid_argument("SrsChainIKMap: chain needs at least 7 joints");
  prefix_ = chain_.num_joints() - 7;
  geometry_ = SrsGeometry::from_links(std::span<const DHLink>(chain_.links()).subspan(prefix_));
}

template <class T>
BasicIKResult<T> SrsChainIKMap::eval(std::span<const T> pose, std::span<const T> free,
                                     const Branch& branch) const {
  if (pose.size() != 6 || free.size() != free_dim()) {
    throw std::invalid_argument("SrsChainIKMap: wrong parameter dimensions");
  }
  const auto prefix = free.first(prefix_);
  const BasicPose3<T> base = srs_base(prefix);
  const BasicPose3<T> target = pose_from_params(pose[0], pose[1], pose[2], pose[3], pose[4], pose[5]);
  auto tail = srs7_ik(base, target, free[prefix_], geometry_, branch, eps_);
  BasicIKResult<T> out;
  // Prefix parameters are angles on the circle; report them in the same canonical range as the tail.
  for (const auto& v : prefix) out.q.push_back(ad::wrap_angle(v));
  out.q.insert(out.q.end(), tail.q.begin(), tail.q.end());
  out.probes = std::move(tail.probes);
  out.clipped = tail.clipped;
  return out;
}

IKResult SrsChainIKMap::evaluate(std::span<const double> pose, std::span<const double> free,
                                 const Branch& branch) const {
  return eval(pose, free, branch);
}

BasicIKResult<DiffScalar> SrsChainIKMap::evaluate(std::span<const DiffScalar> pose,
                                                  std::span<const DiffScalar> free,
                                                  const Branch& branch) const {
  return eval(pose, free, branch);
}

std::vector<double> SrsChainIKMap::pose_of(std::span<const double> q) const {
  const auto p = pose_params(chain_.forward(q));
  return {p.begin(), p.end()};
}

double srs_psi_from_joints(std::span<const double> q7, const SrsGeometry& g) {
  if (q7.size() != 7) throw std::invalid_argument("srs_psi_from_joints: need 7 joints");
  // Shoulder frame orientation R03 and the elbow axis z3 = R03 e_z.
  const Mat3<double> r03 = rot_z(q7[0]) * rot_x(-M_PI / 2) * rot_z(q7[1]) * rot_x(M_PI / 2) * rot_z(q7[2]) *
                           rot_x(M_PI / 2);
  const Vec3<double> s4{-g.d_ew * std::sin(q7[3]), g.d_se + g.d_ew * std::cos(q7[3]), 0.0};
  const Vec3<double> sw = r03 * s4;
  const double len = norm(sw);
  if (len < 1e-12) throw SingularConfiguration("srs_psi_from_joints: wrist center on the shoulder");
  const Vec3<double> u = sw * (1.0 / len);
  const Vec3<double> m = detail::reference_normal(u);
  const Vec3<double> z3 = r03.col(2);
  return std::atan2(dot(u, cross(m, z3)), dot(m, z3));
}

MatchedGuess SrsChainIKMap::match(std::span<const double> q0) const {
  if (q0.size() != num_joints()) throw std::invalid_argument("SrsChainIKMap::match: wrong joint count");
  const auto tail = q0.subspan(prefix_);
  MatchedGuess m;
  m.pose = pose_of(q0);
  m.free.assign(q0.begin(), q0.begin() + static_cast<std::ptrdiff_t>(prefix_));
  m.free.push_back(srs_psi_from_joints(tail, geometry_));
  m.branch = Branch{sign_of(tail[1]), sign_of(tail[3]), sign_of(tail[5])};
  return m;
}

std::unique_ptr<AnalyticIKMap> make_ik_map(const PlanarChain& chain) {
  return std::make_unique<PlanarIKMap>(chain);
}

std::unique_ptr<AnalyticIKMap> make_ik_map(const KinematicChain& chain) {
  return std::make_unique<SrsChainIKMap>(chain);
}

}  // namespace ikform
