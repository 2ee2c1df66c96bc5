#pragma once

#include <Eigen/Dense>

namespace ssf {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle in degrees to (-180, 180].
double wrap_deg_180(double deg);

// Wrap an angle in degrees to [0, 360).
double wrap_deg_360(double deg);

// Direction and range of a source seen from a receiver.  Receiver frame:
// +x front, +y left, +z up; azimuth positive toward the left, elevation
// positive up.
struct RelativeGeometry {
  double azimuth_deg = 0.0;    // (-180, 180]
  double elevation_deg = 0.0;  // [-90, 90]
  double distance_m = 0.0;     // > 0

  // Unit direction in the receiver frame.
  Vec3 unit_direction() const;
};

// Rotate a world-frame displacement into the frame of a receiver heading
// `heading_deg` degrees counterclockwise from +x about the vertical axis.
Vec3 world_to_receiver_frame(const Vec3& displacement, double heading_deg);

// Receiver-frame displacement -> (azimuth, elevation, distance).
// Throws std::invalid_argument on zero displacement.
RelativeGeometry geometry_from_receiver_frame(const Vec3& rel);

// World positions + heading -> relative geometry of the source.
RelativeGeometry relative_geometry(const Vec3& source_pos, const Vec3& receiver_pos,
                                   double heading_deg);

// Angle between two directions in degrees, in [0, 180].
double angular_error_deg(const Vec3& a, const Vec3& b);

}  // namespace ssf
