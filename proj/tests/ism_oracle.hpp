#pragma once

// Independent image-source enumeration used as the test oracle.  Instead of
// the closed-form (m, q) index formula in the implementation, this builds
// each axis's image set by literally mirroring positions across the two
// walls generation by generation (bounce count = generation), then combines
// the axes.  No recursion into the library's enumeration path.

#include <cmath>
#include <map>
#include <vector>

#include "ssf/room.hpp"

namespace ssf_test {

struct OracleArrival {
  double delay_s;
  double amplitude;
  int order;
};

struct AxisImage1D {
  double coord;
  int bounces_lo;
  int bounces_hi;
};

inline std::vector<AxisImage1D> mirror_axis(double s, double length, int max_order) {
  // pos -> (bounces_lo, bounces_hi) at first (minimal) visit
  std::map<long long, AxisImage1D> seen;
  const auto key = [](double x) { return static_cast<long long>(std::llround(x * 1e7)); };
  std::vector<AxisImage1D> frontier = {{s, 0, 0}};
  seen[key(s)] = frontier[0];
  for (int gen = 1; gen <= max_order; ++gen) {
    std::vector<AxisImage1D> next;
    for (const auto& img : frontier) {
      const AxisImage1D lo{-img.coord, img.bounces_lo + 1, img.bounces_hi};
      const AxisImage1D hi{2.0 * length - img.coord, img.bounces_lo, img.bounces_hi + 1};
      for (const auto& cand : {lo, hi}) {
        if (!seen.count(key(cand.coord))) {
          seen[key(cand.coord)] = cand;
          next.push_back(cand);
        }
      }
    }
    frontier = std::move(next);
  }
  std::vector<AxisImage1D> out;
  out.reserve(seen.size());
  for (const auto& [k, v] : seen) out.push_back(v);
  return out;
}

inline std::vector<OracleArrival> enumerate_arrivals(const ssf::RoomSpec& room,
                                                     const ssf::Vec3& source,
                                                     const ssf::Vec3& mic, int max_order) {
  const auto xs = mirror_axis(source.x(), room.dimensions.x(), max_order);
  const auto ys = mirror_axis(source.y(), room.dimensions.y(), max_order);
  const auto zs = mirror_axis(source.z(), room.dimensions.z(), max_order);
  std::array<double, 6> beta{};
  for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - room.surface_absorption[i]);

  std::vector<OracleArrival> out;
  for (const auto& ix : xs)
    for (const auto& iy : ys)
      for (const auto& iz : zs) {
        const int order = ix.bounces_lo + ix.bounces_hi + iy.bounces_lo + iy.bounces_hi +
                          iz.bounces_lo + iz.bounces_hi;
        if (order > max_order) continue;
        const double reflect = std::pow(beta[0], ix.bounces_lo) * std::pow(beta[1], ix.bounces_hi) *
                               std::pow(beta[2], iy.bounces_lo) * std::pow(beta[3], iy.bounces_hi) *
                               std::pow(beta[4], iz.bounces_lo) * std::pow(beta[5], iz.bounces_hi);
        if (reflect == 0.0 && order > 0) continue;
        const ssf::Vec3 img(ix.coord, iy.coord, iz.coord);
        const double dist = (img - mic).norm();
        out.push_back({dist / room.speed_of_sound, reflect / dist, order});
      }
  return out;
}

}  // namespace ssf_test
