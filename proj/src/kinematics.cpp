#include "ikform/kinematics.hpp"

#include <stdexcept>

namespace ikform {

KinematicChain::KinematicChain(std::vector<DHLink> links, std::vector<double> q_lb,
                               std::vector<double> q_ub, Pose3 base)
    : links_(std::move(links)), q_lb_(std::move(q_lb)), q_ub_(std::move(q_ub)), base_(base) {
  if (q_lb_.size() != links_.size() || q_ub_.size() != links_.size()) {
    throw std::invalid_argument("KinematicChain: joint limit vectors must match link count");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& l = links_[i];
    if (!std::isfinite(l.d) || !std::isfinite(l.alpha) || !std::isfinite(l.a)) {
      throw std::invalid_argument("KinematicChain: non-finite DH parameter at link " + std::to_string(i));
    }
    if (!(q_lb_[i] <= q_ub_[i])) {
      throw std::invalid_argument("KinematicChain: q_lb > q_ub at joint " + std::to_string(i));
    }
  }
}

void KinematicChain::check_size(std::size_t n) const {
  if (n != links_.size()) {
    throw std::invalid_argument("KinematicChain: expected " + std::to_string(links_.size()) +
                                " joint values, got " + std::to_string(n));
  }
}

double KinematicChain::total_length() const {
  double s = 0.0;
  for (const auto& l : links_) s += std::hypot(l.d, l.a);
  return s;
}

PlanarChain PlanarChain::uniform(int n, double limit, Pose2 base) {
  if (n < 3) throw std::invalid_argument("PlanarChain: need at least 3 links");
  PlanarChain c;
  c.n = n;
  c.link_length = 1.0 / n;
  c.base = base;
  c.q_lb.assign(n, -limit);
  c.q_ub.assign(n, limit);
  return c;
}

KinematicChain to_spatial(const PlanarChain& chain) {
  std::vector<DHLink> links(chain.num_joints(), DHLink{0.0, 0.0, chain.link_length});
  Pose3 base;
  base.rotation = rot_z(chain.base.theta);
  base.position = {chain.base.x, chain.base.y, 0.0};
  return {std::move(links), chain.q_lb, chain.q_ub, base};
}

namespace {
std::vector<DiffScalar> seed(std::span<const double> q) {
  std::vector<DiffScalar> out;
  out.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out.push_back(DiffScalar::variable(q[i], i, q.size()));
  return out;
}
}  // namespace

Eigen::MatrixXd jacobian(const KinematicChain& chain, std::span<const double> q) {
  const auto vars = seed(q);
  const auto params = pose_params(chain.forward(std::span<const DiffScalar>(vars)));
  Eigen::MatrixXd jac(6, q.size());
  for (int r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < q.size(); ++c) jac(r, c) = params[r].d(c);
  return jac;
}

Eigen::MatrixXd jacobian(const PlanarChain& chain, std::span<const double> q) {
  const auto vars = seed(q);
  const auto p = planar_fk(chain, std::span<const DiffScalar>(vars));
  Eigen::MatrixXd jac(3, q.size());
  for (std::size_t c = 0; c < q.size(); ++c) {
    jac(0, c) = p.x.d(c);
    jac(1, c) = p.y.d(c);
    jac(2, c) = p.theta.d(c);
  }
  return jac;
}

KinematicChain scaled_arm(int extra_links, double total_length) {
  if (extra_links < 0 || extra_links % 2 != 0) {
    throw std::invalid_argument("scaled_arm: extra link count must be even and >= 0, got " +
                                std::to_string(extra_links));
  }
  if (!(total_length > 0.0)) throw std::invalid_argument("scaled_arm: total_length must be positive");
  struct Row {
    bool has_d;
    double alpha;
  };
  std::vector<Row> rows;
  for (int i = 0; i < extra_links; ++i) rows.push_back(i % 2 == 0 ? Row{true, -M_PI / 2} : Row{false, M_PI / 2});
  const Row tail[] = {{true, -M_PI / 2}, {false, M_PI / 2},  {true, M_PI / 2}, {false, -M_PI / 2},
                      {true, -M_PI / 2}, {false, M_PI / 2}, {true, 0.0}};
  rows.insert(rows.end(), std::begin(tail), std::end(tail));

  int nonzero = 0;
  for (const auto& r : rows) nonzero += r.has_d ? 1 : 0;
  const double l = total_length / nonzero;

  std::vector<DHLink> links;
  for (const auto& r : rows) links.push_back({r.has_d ? l : 0.0, r.alpha, 0.0});
  const std::size_t n = links.size();
  return {std::move(links), std::vector<double>(n, -M_PI), std::vector<double>(n, M_PI)};
}

KinematicChain chain_from_json(const nlohmann::json& j) {
  if (j.contains("scaled_arm")) {
    const auto& s = j.at("scaled_arm");
    auto chain = scaled_arm(s.value("extra_links", 0), s.value("total_length", 1.0));
    if (j.contains("base")) chain.set_base(pose3_from_json(j.at("base")));
    return chain;
  }
  std::vector<DHLink> links;
  for (const auto& l : j.at("links")) {
    links.push_back({l.value("d", 0.0), l.value("alpha", 0.0), l.value("a", 0.0)});
  }
  const std::size_t n = links.size();
  auto q_lb = j.contains("q_lb") ? j.at("q_lb").get<std::vector<double>>() : std::vector<double>(n, -M_PI);
  auto q_ub = j.contains("q_ub") ? j.at("q_ub").get<std::vector<double>>() : std::vector<double>(n, M_PI);
  Pose3 base = j.contains("base") ? pose3_from_json(j.at("base")) : Pose3::identity();
  return {std::move(links), std::move(q_lb), std::move(q_ub), base};
}

nlohmann::json chain_to_json(const KinematicChain& chain) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& l : chain.links()) links.push_back({{"d", l.d}, {"alpha", l.alpha}, {"a", l.a}});
  return {{"links", links},
          {"q_lb", chain.lower_limits()},
          {"q_ub", chain.upper_limits()},
          {"base", pose3_to_json(chain.base())}};
}

}  // namespace ikform
