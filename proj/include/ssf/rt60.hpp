#pragma once

#include <Eigen/Dense>

#include "ssf/room.hpp"

namespace ssf {

// Reverberation time from an impulse response via Schroeder backward
// integration: the energy decay curve is fit with a least-squares line over
// its -5 dB to -35 dB span and extrapolated to 60 dB (T30 x 2).
// Multichannel responses are pooled by summing per-sample energy across
// channels.  Throws std::invalid_argument on a silent response.
double rt60_schroeder(const Eigen::ArrayXd& ir, double sample_rate);
double rt60_schroeder(const ImpulseResponse& ir);

// Sabine prediction 0.161 V / (sum alpha_i S_i).  Requires mean absorption
// > 0; a fully absorbing room (mean absorption == 1) returns 0 by
// convention.
double rt60_sabine(const RoomSpec& room);

}  // namespace ssf
