#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssf/geometry.hpp"
#include "ssf/rng.hpp"
#include "ssf/room.hpp"

namespace ssf {

inline constexpr int kClipSampleRate = 32000;
inline constexpr int kClipSamples = 320000;  // 10 s
inline constexpr double kDistanceBinWidth = 0.5;
inline constexpr double kMaxLabelDistance = 10.0;
// Placements closer than this angle to an octant boundary plane are
// resampled; categorical octant labels would otherwise be ill-defined.
inline constexpr double kOctantMarginDeg = 5.0;
inline constexpr double kMinSourceDistance = 0.5;
inline constexpr double kWallMargin = 0.3;

struct ClipSource {
  Eigen::ArrayXf samples;               // mono, 32 kHz
  std::vector<std::string> categories;  // non-empty, sorted unique
  std::string id;
};

struct OctantLabel {
  enum class Lr { kLeft, kRight };
  enum class Fb { kFront, kBehind };
  enum class Ud { kAbove, kBelow };
  Lr lr = Lr::kRight;
  Fb fb = Fb::kBehind;
  Ud ud = Ud::kBelow;

  bool operator==(const OctantLabel&) const = default;

  const char* lr_word() const { return lr == Lr::kLeft ? "left" : "right"; }
  const char* fb_word() const { return fb == Fb::kFront ? "front" : "behind"; }
  const char* ud_word() const { return ud == Ud::kAbove ? "above" : "below"; }
  // Rendered in the fixed order lr, fb, ud: "left, behind, below".
  std::string words() const;

  static OctantLabel from_words(const std::string& lr, const std::string& fb,
                                const std::string& ud);
};

struct PlacedSource {
  std::string clip_id;
  std::vector<std::string> categories;
  RelativeGeometry geometry;
  Vec3 position_receiver_frame = Vec3::Zero();
  OctantLabel octant;
  double distance_bin = 0.0;
};

struct SpatialClip {
  Eigen::ArrayXXf channels;  // kClipSamples x n
  std::vector<PlacedSource> sources;
  std::string room_id;
  std::uint64_t rng_seed = 0;
};

// Scale so total energy sum(x^2) == 1.  Throws on all-zero input.
Eigen::ArrayXf loudness_normalize(const Eigen::ArrayXf& wave);

// Per-channel linear convolution with the impulse response, trimmed/padded
// to exactly 10 s.  Geometry metadata is copied from the IR.
SpatialClip spatialize(const ClipSource& clip, const ImpulseResponse& ir);

// Channelwise sum of two single-source scenes.  Requires matching channel
// layout, disjoint category sets and distinct octants.
SpatialClip mix_scene(const SpatialClip& a, const SpatialClip& b);

// Octant label plus quantized distance for a relative geometry.  Distance
// must be in (0, 10]; bins are the nearest multiple of 0.5 m (ties round
// up) clamped to [0.5, 10].  A zero coordinate labels right/behind/below.
std::pair<OctantLabel, double> spatial_labels(const RelativeGeometry& g);

OctantLabel octant_of(const Vec3& receiver_frame_pos);
double distance_bin_of(double distance_m);

// Format a bin the way answers render distances: "1m", "2.5m".
std::string format_distance(double meters);

// Uniformly draw k source positions inside the room honoring the wall
// margin, the minimum distance from the receiver, the octant-boundary
// margin, and (k == 2) distinct octants.  Deterministic given the rng
// state.  Throws std::runtime_error after 1000 failed attempts.
std::vector<SourceSpec> place_sources(const RoomSpec& room, const ReceiverSpec& receiver, int k,
                                      Rng& rng);

}  // namespace ssf
