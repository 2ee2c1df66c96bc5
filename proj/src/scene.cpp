#include "ssf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssf/fft_utils.hpp"

namespace ssf {

std::string OctantLabel::words() const {
  std::string out(lr_word());
  out += ", ";
  out += fb_word();
  out += ", ";
  out += ud_word();
  return out;
}

OctantLabel OctantLabel::from_words(const std::string& lr, const std::string& fb,
                                    const std::string& ud) {
  OctantLabel o;
  if (lr == "left")
    o.lr = Lr::kLeft;
  else if (lr == "right")
    o.lr = Lr::kRight;
  else
    throw std::invalid_argument("octant: bad left/right word '" + lr + "'");
  if (fb == "front")
    o.fb = Fb::kFront;
  else if (fb == "behind")
    o.fb = Fb::kBehind;
  else
    throw std::invalid_argument("octant: bad front/behind word '" + fb + "'");
  if (ud == "above")
    o.ud = Ud::kAbove;
  else if (ud == "below")
    o.ud = Ud::kBelow;
  else
    throw std::invalid_argument("octant: bad above/below word '" + ud + "'");
  return o;
}

Eigen::ArrayXf loudness_normalize(const Eigen::ArrayXf& wave) {
  const double energy = wave.cast<double>().square().sum();
  if (!(energy > 0.0)) throw std::invalid_argument("loudness_normalize: all-zero input");
  const double scale = 1.0 / std::sqrt(energy);
  return (wave.cast<double>() * scale).cast<float>();
}

SpatialClip spatialize(const ClipSource& clip, const ImpulseResponse& ir) {
  if (ir.n_channels() == 0) throw std::invalid_argument("spatialize: IR has no channels");
  if (static_cast<int>(ir.sample_rate) != kClipSampleRate)
    throw std::invalid_argument("spatialize: sample rate mismatch (IR at " +
                                std::to_string(ir.sample_rate) + " Hz, clips are 32000 Hz)");
  if (clip.samples.size() == 0) throw std::invalid_argument("spatialize: empty clip");

  SpatialClip out;
  out.channels = Eigen::ArrayXXf::Zero(kClipSamples, ir.n_channels());
  const Eigen::ArrayXd dry = clip.samples.cast<double>();
  for (Eigen::Index c = 0; c < ir.n_channels(); ++c) {
    Eigen::ArrayXd wet = fast_convolve(dry, ir.channels.col(c).cast<double>());
    const Eigen::Index n = std::min<Eigen::Index>(wet.size(), kClipSamples);
    out.channels.col(c).head(n) = wet.head(n).cast<float>();
  }

  PlacedSource placed;
  placed.clip_id = clip.id;
  placed.categories = clip.categories;
  placed.geometry = ir.geometry;
  placed.position_receiver_frame = ir.geometry.unit_direction() * ir.geometry.distance_m;
  auto [octant, bin] = spatial_labels(ir.geometry);
  placed.octant = octant;
  placed.distance_bin = bin;
  out.sources.push_back(std::move(placed));
  return out;
}

SpatialClip mix_scene(const SpatialClip& a, const SpatialClip& b) {
  if (a.channels.rows() != b.channels.rows() || a.channels.cols() != b.channels.cols())
    throw std::invalid_argument("mix_scene: mismatched channel count or length");
  if (a.room_id != b.room_id)
    throw std::invalid_argument("mix_scene: scenes come from different rooms");
  if (a.sources.size() != 1 || b.sources.size() != 1)
    throw std::invalid_argument("mix_scene: inputs must be single-source scenes");
  for (const auto& ca : a.sources[0].categories)
    for (const auto& cb : b.sources[0].categories)
      if (ca == cb)
        throw std::invalid_argument("mix_scene: sources share category '" + ca + "'");
  if (a.sources[0].octant == b.sources[0].octant)
    throw std::invalid_argument("mix_scene: sources share octant " + a.sources[0].octant.words());

  SpatialClip out;
  out.channels = a.channels + b.channels;
  out.sources = a.sources;
  out.sources.push_back(b.sources[0]);
  out.room_id = a.room_id;
  out.rng_seed = a.rng_seed;
  return out;
}

OctantLabel octant_of(const Vec3& p) {
  OctantLabel o;
  o.lr = p.y() > 0.0 ? OctantLabel::Lr::kLeft : OctantLabel::Lr::kRight;
  o.fb = p.x() > 0.0 ? OctantLabel::Fb::kFront : OctantLabel::Fb::kBehind;
  o.ud = p.z() > 0.0 ? OctantLabel::Ud::kAbove : OctantLabel::Ud::kBelow;
  return o;
}

double distance_bin_of(double distance_m) {
  if (!(distance_m > 0.0) || distance_m > kMaxLabelDistance)
    throw std::invalid_argument("distance_bin: distance must be in (0, 10] m, got " +
                                std::to_string(distance_m));
  // Nearest multiple of 0.5 m, ties rounding up.
  double bin = kDistanceBinWidth * std::floor(distance_m / kDistanceBinWidth + 0.5);
  return std::clamp(bin, kDistanceBinWidth, kMaxLabelDistance);
}

std::pair<OctantLabel, double> spatial_labels(const RelativeGeometry& g) {
  return {octant_of(g.unit_direction()), distance_bin_of(g.distance_m)};
}

std::string format_distance(double meters) {
  const double rounded = std::round(meters * 10.0) / 10.0;
  const long whole = static_cast<long>(std::lround(rounded * 10.0));
  if (whole % 10 == 0) return std::to_string(whole / 10) + "m";
  return std::to_string(whole / 10) + "." + std::to_string(std::labs(whole) % 10) + "m";
}

namespace {

bool octant_margin_ok(const Vec3& rel) {
  const double d = rel.norm();
  if (d <= 0.0) return false;
  const double sin_margin = std::sin(deg_to_rad(kOctantMarginDeg));
  return std::abs(rel.x()) >= d * sin_margin && std::abs(rel.y()) >= d * sin_margin &&
         std::abs(rel.z()) >= d * sin_margin;
}

}  // namespace

std::vector<SourceSpec> place_sources(const RoomSpec& room, const ReceiverSpec& receiver, int k,
                                      Rng& rng) {
  if (k != 1 && k != 2) throw std::invalid_argument("place_sources: k must be 1 or 2");
  room.validate();
  receiver.validate(room);

  std::vector<SourceSpec> out;
  std::vector<OctantLabel> octants;
  int attempts = 0;
  while (static_cast<int>(out.size()) < k) {
    if (++attempts > 1000)
      throw std::runtime_error("place_sources: constraints unsatisfiable after 1000 attempts");
    Vec3 p(rng.uniform(kWallMargin, room.dimensions.x() - kWallMargin),
           rng.uniform(kWallMargin, room.dimensions.y() - kWallMargin),
           rng.uniform(kWallMargin, room.dimensions.z() - kWallMargin));
    if ((p - receiver.position).norm() < kMinSourceDistance) continue;
    const Vec3 rel = world_to_receiver_frame(p - receiver.position, receiver.heading_deg);
    if (!octant_margin_ok(rel)) continue;
    const OctantLabel oct = octant_of(rel);
    if (k == 2 && !octants.empty() && octants.front() == oct) continue;
    out.push_back(SourceSpec{p});
    octants.push_back(oct);
  }
  return out;
}

}  // namespace ssf
