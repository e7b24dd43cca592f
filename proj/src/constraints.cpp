#include "ikform/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ikform {

namespace {
Vec3<double> vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scene JSON: expected a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
}  // namespace

Scene scene_from_json(const nlohmann::json& j) {
  Scene scene;
  scene.d_min = j.value("d_min", 0.001);
  if (j.contains("spheres")) {
    for (const auto& s : j.at("spheres")) {
      CollisionSphere cs;
      cs.link_index = s.at("link").get<int>();
      cs.local_offset = s.contains("offset") ? vec3(s.at("offset")) : Vec3<double>{};
      cs.radius = s.at("radius").get<double>();
      if (!(cs.radius > 0.0)) throw std::invalid_argument("scene JSON: sphere radius must be positive");
      scene.spheres.push_back(cs);
    }
  }
  if (j.contains("boxes")) {
    for (const auto& b : j.at("boxes")) {
      BoxObstacle box{vec3(b.at("center")), vec3(b.at("half_extents"))};
      for (int i = 0; i < 3; ++i) {
        if (!(box.half_extents[i] > 0.0)) throw std::invalid_argument("scene JSON: box half extents must be positive");
      }
      scene.boxes.push_back(box);
    }
  }
  return scene;
}

namespace {
double cross2(const Point2<double>& o, const Point2<double>& a, const Point2<double>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double segment_distance(const Point2<double>& p, const Point2<double>& a, const Point2<double>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy));
}
}  // namespace

std::vector<Point2<double>> convex_hull(std::vector<Point2<double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2<double>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double hull_signed_distance(const Point2<double>& p, std::span<const Point2<double>> hull) {
  if (hull.size() < 3) throw std::invalid_argument("hull_signed_distance: hull needs at least 3 vertices");
  bool inside = true;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, p) < 0.0) inside = false;
    dist = std::min(dist, segment_distance(p, a, b));
  }
  return inside ? dist : -dist;
}

}  // namespace ikform
