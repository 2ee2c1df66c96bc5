#include "ssf/rt60.hpp"

#include <cmath>
#include <stdexcept>

namespace ssf {
namespace {

double schroeder_from_energy(const Eigen::ArrayXd& energy_in, double sample_rate) {
  const Eigen::Index n = energy_in.size();
  if (n == 0) throw std::invalid_argument("rt60: empty impulse response");

  // Backward-integrated energy decay curve.
  Eigen::ArrayXd edc(n);
  double acc = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    acc += energy_in(i);
    edc(i) = acc;
  }
  const double total = edc(0);
  if (!(total > 0.0)) throw std::invalid_argument("rt60: silent impulse response");

  Eigen::Index i5 = -1, i35 = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double db = 10.0 * std::log10(std::max(edc(i) / total, 1e-300));
    if (i5 < 0 && db <= -5.0) i5 = i;
    if (db <= -35.0) {
      i35 = i;
      break;
    }
  }
  if (i5 < 0 || i35 <= i5) return 0.0;  // decays immediately (e.g. bare impulse)

  // Least-squares line over the fit span.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = i5; i <= i35; ++i) {
    if (!(edc(i) > 0.0)) break;
    const double x = static_cast<double>(i) / sample_rate;
    const double y = 10.0 * std::log10(edc(i) / total);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return 0.0;
  const double denom = static_cast<double>(count) * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;  // dB per second
  if (slope >= 0.0) throw std::invalid_argument("rt60: decay curve is not decreasing");
  return -60.0 / slope;
}

}  // namespace

double rt60_schroeder(const Eigen::ArrayXd& ir, double sample_rate) {
  return schroeder_from_energy(ir.square(), sample_rate);
}

double rt60_schroeder(const ImpulseResponse& ir) {
  if (ir.length() == 0) throw std::invalid_argument("rt60: empty impulse response");
  Eigen::ArrayXd energy = Eigen::ArrayXd::Zero(ir.length());
  for (Eigen::Index c = 0; c < ir.n_channels(); ++c)
    energy += ir.channels.col(c).cast<double>().square();
  return schroeder_from_energy(energy, ir.sample_rate);
}

double rt60_sabine(const RoomSpec& room) {
  room.validate();
  const double mean = room.mean_absorption();
  if (mean >= 1.0) return 0.0;  // fully absorbing: no reverberant field
  double absorption_area = 0.0;
  for (int i = 0; i < 6; ++i) absorption_area += room.surface_absorption[i] * room.wall_area(i);
  if (!(absorption_area > 0.0))
    throw std::invalid_argument("rt60_sabine: mean absorption must be > 0");
  return 0.161 * room.volume() / absorption_area;
}

}  // namespace ssf
