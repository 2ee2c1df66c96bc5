#include "ssf/ism.hpp"

#include <cmath>
#include <stdexcept>

namespace ssf {
namespace {

struct AxisImage {
  double coord = 0.0;
  int bounces = 0;
  double reflectance = 1.0;  // beta_lo^b_lo * beta_hi^b_hi
};

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

// 1-D images of `s` between the wall pair (0, length). For index m and
// parity q the image sits at (1-2q)s + 2mL with |m-q| bounces off the lower
// wall and |m| off the upper one.
std::vector<AxisImage> axis_images(double s, double length, double beta_lo, double beta_hi,
                                   int max_order) {
  std::vector<AxisImage> out;
  const int m_max = (max_order + 1) / 2;
  for (int m = -m_max; m <= m_max; ++m) {
    for (int q = 0; q <= 1; ++q) {
      AxisImage img;
      img.coord = (1 - 2 * q) * s + 2.0 * m * length;
      const int b_lo = std::abs(m - q);
      const int b_hi = std::abs(m);
      img.bounces = b_lo + b_hi;
      if (img.bounces > max_order) continue;
      img.reflectance = std::pow(beta_lo, b_lo) * std::pow(beta_hi, b_hi);
      out.push_back(img);
    }
  }
  return out;
}

}  // namespace

double woodworth_itd(double head_radius_m, double gamma_rad, double speed_of_sound) {
  return head_radius_m / speed_of_sound * (gamma_rad + std::sin(gamma_rad));
}

std::vector<Arrival> image_arrivals(const RoomSpec& room, const Vec3& source_pos,
                                    const Vec3& mic_pos, int max_order) {
  std::array<double, 6> beta{};
  for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - room.surface_absorption[i]);

  const auto xs = axis_images(source_pos.x(), room.dimensions.x(), beta[0], beta[1], max_order);
  const auto ys = axis_images(source_pos.y(), room.dimensions.y(), beta[2], beta[3], max_order);
  const auto zs = axis_images(source_pos.z(), room.dimensions.z(), beta[4], beta[5], max_order);

  std::vector<Arrival> out;
  out.reserve(xs.size() * ys.size() * zs.size() / 4);
  for (const auto& ix : xs) {
    for (const auto& iy : ys) {
      const int bxy = ix.bounces + iy.bounces;
      if (bxy > max_order) continue;
      const double rxy = ix.reflectance * iy.reflectance;
      for (const auto& iz : zs) {
        const int order = bxy + iz.bounces;
        if (order > max_order) continue;
        const double reflectance = rxy * iz.reflectance;
        if (reflectance == 0.0 && order > 0) continue;
        Arrival a;
        a.image_position = Vec3(ix.coord, iy.coord, iz.coord);
        const double dist = (a.image_position - mic_pos).norm();
        a.delay_s = dist / room.speed_of_sound;
        a.amplitude = reflectance / dist;
        a.order = order;
        out.push_back(a);
      }
    }
  }
  return out;
}

ImpulseResponse simulate_rir(const RoomSpec& room, const SourceSpec& source,
                             const ReceiverSpec& receiver) {
  room.validate();
  receiver.validate(room);
  if (room.max_reflection_order > kMaxReflectionOrderGuard)
    throw std::invalid_argument("simulate_rir: reflection order guard exceeded (max " +
                                std::to_string(kMaxReflectionOrderGuard) + ")");
  if (!room.contains(source.position))
    throw std::invalid_argument("simulate_rir: source must be strictly inside the room");

  const std::size_t n_mics = receiver.n_mics();
  std::vector<Vec3> mic_pos(n_mics);
  for (std::size_t m = 0; m < n_mics; ++m) {
    mic_pos[m] = receiver.mic_world_position(m);
    if ((source.position - mic_pos[m]).norm() < 1e-3)
      throw std::invalid_argument("simulate_rir: source coincides with a microphone (< 1 mm)");
  }

  const double fs = room.sample_rate;
  const double c = room.speed_of_sound;
  const bool spherical = receiver.head_model == HeadModel::kSpherical;
  const double head_a = receiver.head_radius_m;
  // Pole of the full-shadow one-pole low-pass (1.5 kHz cutoff).
  const double full_shadow_pole = std::exp(-2.0 * kPi * 1500.0 / fs);
  constexpr int kShadowTailMax = 160;

  std::vector<std::vector<Arrival>> arrivals(n_mics);
  double max_delay = 0.0;
  for (std::size_t m = 0; m < n_mics; ++m) {
    arrivals[m] = image_arrivals(room, source.position, mic_pos[m], room.max_reflection_order);
    for (const auto& a : arrivals[m]) max_delay = std::max(max_delay, a.delay_s);
  }
  // Contralateral excess delay never exceeds (a/c)*(pi/2).
  if (spherical) max_delay += head_a / c * kPi;

  const Eigen::Index length = static_cast<Eigen::Index>(std::ceil(max_delay * fs)) +
                              kFractionalDelayHalfWidth + kShadowTailMax + 2;

  ImpulseResponse ir;
  ir.channels = Eigen::ArrayXXf::Zero(length, static_cast<Eigen::Index>(n_mics));
  ir.sample_rate = fs;
  ir.order_used = room.max_reflection_order;
  ir.geometry = relative_geometry(source.position, receiver.position, receiver.heading_deg);

  std::vector<double> kernel;
  kernel.reserve(2 * kFractionalDelayHalfWidth + 1 + kShadowTailMax);

  Eigen::ArrayXd accum(length);
  for (std::size_t m = 0; m < n_mics; ++m) {
    const double ear_side = receiver.array_offsets[m].y();
    accum.setZero();
    for (const auto& a : arrivals[m]) {
      double delay_s = a.delay_s;
      double shadow = 0.0;
      if (spherical && ear_side != 0.0) {
        const Vec3 incident =
            world_to_receiver_frame(a.image_position - receiver.position, receiver.heading_deg);
        const double norm = incident.norm();
        if (norm > 0.0) {
          const double sin_gamma = std::min(1.0, std::abs(incident.y()) / norm);
          const double gamma = std::asin(sin_gamma);
          const bool contralateral = (incident.y() > 0.0) != (ear_side > 0.0);
          if (contralateral) {
            delay_s += head_a / c * (gamma - sin_gamma);
            shadow = gamma / (kPi / 2.0);
          }
        }
      }

      const double delay_samples = delay_s * fs;
      const long n0 = static_cast<long>(std::floor(delay_samples));
      const double frac = delay_samples - static_cast<double>(n0);

      kernel.clear();
      for (int j = -kFractionalDelayHalfWidth; j <= kFractionalDelayHalfWidth; ++j) {
        const double t = static_cast<double>(j) - frac;
        const double w = 0.5 * (1.0 + std::cos(kPi * t / (kFractionalDelayHalfWidth + 1)));
        kernel.push_back(w * sinc(t));
      }
      if (shadow > 0.0) {
        // One-pole low-pass y[n] = (1-p) x[n] + p y[n-1]; the coefficient is
        // relaxed linearly so zero shadow is exact pass-through.
        const double p = shadow * full_shadow_pole;
        double y = 0.0;
        for (double& v : kernel) {
          y = (1.0 - p) * v + p * y;
          v = y;
        }
        for (int extra = 0; extra < kShadowTailMax; ++extra) {
          y *= p;
          if (std::abs(y) < 1e-10) break;
          kernel.push_back(y);
        }
      }

      const long start = n0 - kFractionalDelayHalfWidth;
      for (std::size_t j = 0; j < kernel.size(); ++j) {
        const long idx = start + static_cast<long>(j);
        if (idx >= 0 && idx < length) accum(idx) += a.amplitude * kernel[j];
      }
    }
    ir.channels.col(m) = accum.cast<float>();
  }
  return ir;
}

}  // namespace ssf
