// Regenerates data/room_presets.json: 10 shoebox variants per room category
// with uniform absorption tuned so the Schroeder-measured RT60 of the
// shipped simulator (reflection order 10) matches the category target.
// Starting point is the Eyring inversion; a few secant steps absorb the
// finite-order truncation bias.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "ssf/ism.hpp"
#include "ssf/rng.hpp"
#include "ssf/room.hpp"
#include "ssf/rt60.hpp"

using namespace ssf;

namespace {

struct Category {
  const char* name;
  double target_rt60;
  double base_dims[3];
};

// Targets follow the average reverberation times of common furnished room
// types; dimensions are plausible for each category.
const Category kCategories[] = {
    {"Living Room", 0.2076, {6.0, 4.5, 2.8}},
    {"Bedroom", 0.1917, {4.0, 3.5, 2.6}},
    {"Closet", 0.1950, {2.2, 1.8, 2.4}},
    {"Bathroom", 0.1906, {2.8, 2.2, 2.5}},
    {"Toilet", 0.1706, {1.9, 1.6, 2.4}},
    {"Garage", 0.2190, {6.0, 5.0, 2.8}},
    {"Lounge", 0.2224, {6.5, 5.0, 3.0}},
    {"Kitchen", 0.2061, {4.5, 3.6, 2.7}},
    {"Dining Room", 0.2201, {5.0, 4.2, 2.8}},
};

double measure_rt60(const RoomSpec& room) {
  // Fixed interior measurement geometry; irrational-ish fractions avoid
  // axial-mode symmetry.
  ReceiverSpec receiver;
  receiver.position = Vec3(0.38 * room.dimensions.x(), 0.44 * room.dimensions.y(),
                           std::min(1.5, 0.55 * room.dimensions.z()));
  receiver.array_offsets = {Vec3::Zero()};
  SourceSpec source{Vec3(0.63 * room.dimensions.x(), 0.57 * room.dimensions.y(),
                         std::min(1.3, 0.6 * room.dimensions.z()))};
  return rt60_schroeder(simulate_rir(room, source, receiver));
}

double eyring_alpha(const RoomSpec& room, double target) {
  return 1.0 - std::exp(-0.161 * room.volume() / (target * room.surface_area()));
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "data/room_presets.json";
  Rng rng(20240501);

  std::vector<RoomPreset> presets;
  for (const auto& cat : kCategories) {
    for (int variant = 0; variant < 10; ++variant) {
      RoomPreset preset;
      char name[64];
      std::string slug(cat.name);
      for (auto& c : slug) c = c == ' ' ? '_' : static_cast<char>(std::tolower(c));
      std::snprintf(name, sizeof(name), "%s_%02d", slug.c_str(), variant);
      preset.name = name;
      preset.category = cat.name;
      preset.target_rt60 = cat.target_rt60;

      RoomSpec& room = preset.room;
      const double scale = 0.9 + 0.2 * rng.uniform();
      room.dimensions = Vec3(cat.base_dims[0] * scale * (0.95 + 0.1 * rng.uniform()),
                             cat.base_dims[1] * scale * (0.95 + 0.1 * rng.uniform()),
                             cat.base_dims[2] * (0.97 + 0.06 * rng.uniform()));
      room.sample_rate = 32000.0;

      // Reflection order deep enough for ~50 dB of bounce-driven decay.
      double a0 = eyring_alpha(room, cat.target_rt60);
      const double db_per_bounce = -10.0 * std::log10(1.0 - a0);
      room.max_reflection_order =
          std::min(kMaxReflectionOrderGuard, static_cast<int>(std::ceil(50.0 / db_per_bounce)) + 4);
      room.set_uniform_absorption(a0);
      double t0 = measure_rt60(room);
      double a1 = std::clamp(a0 * (t0 < cat.target_rt60 ? 0.9 : 1.1), 0.02, 0.98);
      for (int iter = 0; iter < 8 && std::abs(t0 - cat.target_rt60) > 0.001; ++iter) {
        room.set_uniform_absorption(a1);
        const double t1 = measure_rt60(room);
        if (std::abs(t1 - t0) < 1e-9) break;
        const double a2 =
            std::clamp(a1 + (cat.target_rt60 - t1) * (a1 - a0) / (t1 - t0), 0.02, 0.98);
        a0 = a1;
        t0 = t1;
        a1 = a2;
      }
      room.set_uniform_absorption(a1);
      const double measured = measure_rt60(room);
      std::printf("%-16s target %.4f  measured %.4f  alpha %.4f\n", preset.name.c_str(),
                  cat.target_rt60, measured, a1);
      presets.push_back(preset);
    }
  }

  // Free-field reference room: fully absorbing walls, direct path only.
  RoomPreset anechoic;
  anechoic.name = "anechoic";
  anechoic.category = "Anechoic";
  anechoic.target_rt60 = 0.0;
  anechoic.room.dimensions = Vec3(12.0, 10.0, 4.0);
  anechoic.room.set_uniform_absorption(1.0);
  anechoic.room.max_reflection_order = 0;
  anechoic.room.sample_rate = 32000.0;
  presets.push_back(anechoic);

  save_room_presets(out_path, presets);
  std::cout << "wrote " << presets.size() << " presets to " << out_path << "\n";
  return 0;
}
