#pragma once

#include <vector>

#include "ssf/room.hpp"

namespace ssf {

// Hard ceiling on the reflection order accepted by simulate_rir.  Measuring
// RT60s near 0.2 s in small rooms needs the image lattice to cover ~45 wall
// bounces before the decay curve reaches -35 dB, so the guard sits well
// above that; image counts grow cubically, so this bound keeps worst-case
// enumeration around a million images.
inline constexpr int kMaxReflectionOrderGuard = 64;

// Half-width of the Hann-windowed sinc used for fractional-delay placement
// (81 taps total).
inline constexpr int kFractionalDelayHalfWidth = 40;

// One reflection path from an image source to a microphone.
struct Arrival {
  double delay_s = 0.0;      // propagation delay, seconds
  double amplitude = 0.0;    // product of reflection coefficients / distance
  Vec3 image_position = Vec3::Zero();
  int order = 0;             // total number of wall bounces
};

// Enumerate all image-source arrivals up to `max_order` combined bounces
// for a single microphone at `mic_pos` (world frame).  Reflection
// coefficient per bounce is sqrt(1 - absorption) and amplitude follows the
// free-field 1/r law.  Exposed separately from simulate_rir so tests can
// compare the arrival set against an independent enumeration.
std::vector<Arrival> image_arrivals(const RoomSpec& room, const Vec3& source_pos,
                                    const Vec3& mic_pos, int max_order);

// Render the multichannel room impulse response for a shoebox room.
// Arrivals are placed with 81-tap Hann-windowed sinc interpolation.  With a
// spherical head model the contralateral ear receives the Woodworth excess
// delay (a/c)(gamma - sin gamma) on top of its geometric path - making the
// total ITD match the Woodworth formula (a/c)(gamma + sin gamma) - plus a
// one-pole head-shadow low-pass whose coefficient relaxes linearly from the
// 1.5 kHz full-shadow value to pass-through at zero shadow.
//
// Throws std::invalid_argument when the source is outside the room or
// within 1 mm of a microphone, and when max_reflection_order exceeds the
// guard.
ImpulseResponse simulate_rir(const RoomSpec& room, const SourceSpec& source,
                             const ReceiverSpec& receiver);

// Woodworth spherical-head ITD for lateral angle gamma (radians in
// [0, pi/2]): tau = (a/c) * (gamma + sin gamma).
double woodworth_itd(double head_radius_m, double gamma_rad, double speed_of_sound = 343.0);

}  // namespace ssf
