#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ssf/geometry.hpp"

namespace ssf {

// Wall order for absorption coefficients: x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
struct RoomSpec {
  Vec3 dimensions = Vec3(5.0, 4.0, 3.0);           // meters
  std::array<double, 6> surface_absorption{};      // each in [0, 1]
  double speed_of_sound = 343.0;                   // m/s
  int max_reflection_order = 0;
  double sample_rate = 32000.0;

  void set_uniform_absorption(double alpha) { surface_absorption.fill(alpha); }
  double mean_absorption() const;
  double volume() const { return dimensions.prod(); }
  double surface_area() const;
  // Area of the i-th wall in the order above.
  double wall_area(int wall) const;
  bool contains(const Vec3& p, double margin = 0.0) const;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

enum class HeadModel { kNone, kSpherical };

struct ReceiverSpec {
  Vec3 position = Vec3::Zero();
  double heading_deg = 0.0;
  // Microphone offsets in the receiver frame (+x front, +y left, +z up).
  std::vector<Vec3> array_offsets;
  HeadModel head_model = HeadModel::kNone;
  double head_radius_m = 0.0;  // used when head_model == kSpherical

  std::size_t n_mics() const { return array_offsets.size(); }
  // World position of microphone m (offset rotated by heading).
  Vec3 mic_world_position(std::size_t m) const;

  void validate(const RoomSpec& room) const;

  // Two ears on the interaural axis with a spherical head of radius a.
  static ReceiverSpec binaural(const Vec3& position, double heading_deg,
                               double head_radius_m = 0.0875);
  // Regular tetrahedron of the given edge length centered on the receiver.
  static ReceiverSpec tetrahedral(const Vec3& position, double heading_deg,
                                  double edge_m = 0.10);
};

struct SourceSpec {
  Vec3 position = Vec3::Zero();
};

struct ImpulseResponse {
  // frames x channels; one column per microphone.
  Eigen::ArrayXXf channels;
  double sample_rate = 0.0;
  RelativeGeometry geometry;  // direct path, receiver frame
  int order_used = 0;

  Eigen::Index length() const { return channels.rows(); }
  Eigen::Index n_channels() const { return channels.cols(); }
};

struct RoomPreset {
  std::string name;
  std::string category;     // e.g. "Bedroom"
  double target_rt60 = 0.0; // seconds; 0 when not applicable (anechoic)
  RoomSpec room;
};

// Load/store the documented preset JSON (see data/room_presets.json).
std::vector<RoomPreset> load_room_presets(const std::string& path);
void save_room_presets(const std::string& path, const std::vector<RoomPreset>& presets);

}  // namespace ssf
