#include "ikform/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace ikform {

double orthonormality_error(const Mat3<double>& r) {
  const Mat3<double> g = r.transpose() * r;
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return err;
}

double determinant(const Mat3<double>& r) {
  return dot(r.col(0), cross(r.col(1), r.col(2)));
}

double pose_distance(const Pose3& a, const Pose3& b) {
  double chord = 0.0;
  for (int i = 0; i < 9; ++i) chord += ad::square(a.rotation.m[i] - b.rotation.m[i]);
  return norm(a.position - b.position) + std::sqrt(chord);
}

namespace {
std::array<double, 3> triple(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != 3) {
    throw std::invalid_argument(std::string("pose JSON: expected 3-element array '") + key + "'");
  }
  return {j.at(key)[0].get<double>(), j.at(key)[1].get<double>(), j.at(key)[2].get<double>()};
}
}  // namespace

Pose3 pose3_from_json(const nlohmann::json& j) {
  const auto p = triple(j, "position");
  const auto o = j.contains("rpy") ? triple(j, "rpy") : std::array<double, 3>{0.0, 0.0, 0.0};
  return pose_from_params(p[0], p[1], p[2], o[0], o[1], o[2]);
}

nlohmann::json pose3_to_json(const Pose3& p) {
  const auto e = rpy_from_rotation(p.rotation);
  return {{"position", {p.position.x, p.position.y, p.position.z}},
          {"rpy", {e.roll, e.pitch, e.yaw}}};
}

Pose2 pose2_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 3) return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  return {j.at("x").get<double>(), j.at("y").get<double>(), j.value("theta", 0.0)};
}

}  // namespace ikform
