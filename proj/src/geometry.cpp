#include "ssf/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace ssf {

double wrap_deg_180(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w > 180.0) w -= 360.0;
  if (w <= -180.0) w += 360.0;
  return w;
}

double wrap_deg_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod can return 360.0 - epsilon rounding back up; clamp defensively.
  if (w >= 360.0) w -= 360.0;
  return w;
}

Vec3 RelativeGeometry::unit_direction() const {
  const double az = deg_to_rad(azimuth_deg);
  const double el = deg_to_rad(elevation_deg);
  return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
}

Vec3 world_to_receiver_frame(const Vec3& displacement, double heading_deg) {
  const double th = deg_to_rad(heading_deg);
  Eigen::Matrix3d rot;
  rot << std::cos(th), std::sin(th), 0.0,  //
      -std::sin(th), std::cos(th), 0.0,    //
      0.0, 0.0, 1.0;
  return rot * displacement;
}

RelativeGeometry geometry_from_receiver_frame(const Vec3& rel) {
  const double dist = rel.norm();
  if (dist <= 0.0) throw std::invalid_argument("relative_geometry: zero displacement");
  RelativeGeometry g;
  g.distance_m = dist;
  g.azimuth_deg = rad_to_deg(std::atan2(rel.y(), rel.x()));
  if (g.azimuth_deg <= -180.0) g.azimuth_deg = 180.0;
  g.elevation_deg = rad_to_deg(std::atan2(rel.z(), std::hypot(rel.x(), rel.y())));
  return g;
}

RelativeGeometry relative_geometry(const Vec3& source_pos, const Vec3& receiver_pos,
                                   double heading_deg) {
  return geometry_from_receiver_frame(
      world_to_receiver_frame(source_pos - receiver_pos, heading_deg));
}

double angular_error_deg(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0)
    throw std::invalid_argument("angular_error_deg: zero-length direction");
  double c = a.dot(b) / (na * nb);
  c = std::max(-1.0, std::min(1.0, c));
  return rad_to_deg(std::acos(c));
}

}  // namespace ssf
