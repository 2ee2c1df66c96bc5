#include "ssf/room.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ssf {

double RoomSpec::mean_absorption() const {
  double num = 0.0;
  for (int i = 0; i < 6; ++i) num += surface_absorption[i] * wall_area(i);
  return num / surface_area();
}

double RoomSpec::surface_area() const {
  const Vec3& d = dimensions;
  return 2.0 * (d.x() * d.y() + d.x() * d.z() + d.y() * d.z());
}

double RoomSpec::wall_area(int wall) const {
  const Vec3& d = dimensions;
  switch (wall) {
    case 0:
    case 1:
      return d.y() * d.z();
    case 2:
    case 3:
      return d.x() * d.z();
    case 4:
    case 5:
      return d.x() * d.y();
    default:
      throw std::invalid_argument("wall index out of range");
  }
}

bool RoomSpec::contains(const Vec3& p, double margin) const {
  for (int i = 0; i < 3; ++i)
    if (p[i] <= margin || p[i] >= dimensions[i] - margin) return false;
  return true;
}

void RoomSpec::validate() const {
  if ((dimensions.array() <= 0.0).any())
    throw std::invalid_argument("room: all dimensions must be > 0");
  for (double a : surface_absorption)
    if (a < 0.0 || a > 1.0)
      throw std::invalid_argument("room: absorption coefficients must be in [0, 1]");
  if (sample_rate <= 0.0) throw std::invalid_argument("room: sample_rate must be > 0");
  if (speed_of_sound <= 0.0) throw std::invalid_argument("room: speed_of_sound must be > 0");
  if (max_reflection_order < 0)
    throw std::invalid_argument("room: max_reflection_order must be >= 0");
}

Vec3 ReceiverSpec::mic_world_position(std::size_t m) const {
  const double th = deg_to_rad(heading_deg);
  Eigen::Matrix3d rot;
  rot << std::cos(th), -std::sin(th), 0.0,  //
      std::sin(th), std::cos(th), 0.0,      //
      0.0, 0.0, 1.0;
  return position + rot * array_offsets.at(m);
}

void ReceiverSpec::validate(const RoomSpec& room) const {
  if (!room.contains(position))
    throw std::invalid_argument("receiver: position must be strictly inside the room");
  if (array_offsets.empty()) throw std::invalid_argument("receiver: microphone array is empty");
  if (head_model == HeadModel::kSpherical && head_radius_m <= 0.0)
    throw std::invalid_argument("receiver: spherical head radius must be > 0");
}

ReceiverSpec ReceiverSpec::binaural(const Vec3& position, double heading_deg,
                                    double head_radius_m) {
  ReceiverSpec r;
  r.position = position;
  r.heading_deg = heading_deg;
  r.array_offsets = {Vec3(0.0, head_radius_m, 0.0),    // left ear
                     Vec3(0.0, -head_radius_m, 0.0)};  // right ear
  r.head_model = HeadModel::kSpherical;
  r.head_radius_m = head_radius_m;
  return r;
}

ReceiverSpec ReceiverSpec::tetrahedral(const Vec3& position, double heading_deg, double edge_m) {
  ReceiverSpec r;
  r.position = position;
  r.heading_deg = heading_deg;
  const double s = edge_m / (2.0 * std::sqrt(2.0));
  r.array_offsets = {Vec3(s, s, s), Vec3(s, -s, -s), Vec3(-s, s, -s), Vec3(-s, -s, s)};
  r.head_model = HeadModel::kNone;
  return r;
}

std::vector<RoomPreset> load_room_presets(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("room presets: cannot open " + path);
  nlohmann::json j;
  f >> j;
  std::vector<RoomPreset> out;
  for (const auto& item : j.at("presets")) {
    RoomPreset p;
    p.name = item.at("name").get<std::string>();
    p.category = item.at("category").get<std::string>();
    p.target_rt60 = item.value("target_rt60", 0.0);
    auto dims = item.at("dimensions");
    p.room.dimensions = Vec3(dims.at(0), dims.at(1), dims.at(2));
    auto absorb = item.at("absorption");
    if (absorb.size() != 6)
      throw std::runtime_error("room presets: absorption must list 6 coefficients");
    for (int i = 0; i < 6; ++i) p.room.surface_absorption[i] = absorb.at(i);
    p.room.max_reflection_order = item.value("max_reflection_order", 10);
    p.room.sample_rate = item.value("sample_rate", 32000.0);
    p.room.speed_of_sound = item.value("speed_of_sound", 343.0);
    p.room.validate();
    out.push_back(std::move(p));
  }
  return out;
}

void save_room_presets(const std::string& path, const std::vector<RoomPreset>& presets) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["presets"] = nlohmann::ordered_json::array();
  for (const auto& p : presets) {
    nlohmann::ordered_json item;
    item["name"] = p.name;
    item["category"] = p.category;
    item["target_rt60"] = p.target_rt60;
    item["dimensions"] = {p.room.dimensions.x(), p.room.dimensions.y(), p.room.dimensions.z()};
    item["absorption"] = p.room.surface_absorption;
    item["max_reflection_order"] = p.room.max_reflection_order;
    item["sample_rate"] = p.room.sample_rate;
    item["speed_of_sound"] = p.room.speed_of_sound;
    j["presets"].push_back(item);
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("room presets: cannot write " + path);
  f << j.dump(2) << "\n";
}

}  // namespace ssf
