#include "ssf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "ssf/fft_utils.hpp"
#include "ssf/ism.hpp"
#include "ssf/scene.hpp"
#include "ssf/wav.hpp"

namespace fs = std::filesystem;

namespace ssf {

TdoaEstimate gcc_phat(const Eigen::ArrayXd& x_i, const Eigen::ArrayXd& x_j, double sample_rate,
                      double max_lag_s) {
  if (x_i.size() != x_j.size()) throw std::invalid_argument("gcc_phat: length mismatch");
  if (x_i.size() == 0) throw std::invalid_argument("gcc_phat: empty input");
  if (!(x_i.abs().maxCoeff() > 0.0) || !(x_j.abs().maxCoeff() > 0.0))
    throw std::invalid_argument("gcc_phat: silent input");

  const long max_lag = std::max(1L, static_cast<long>(std::ceil(max_lag_s * sample_rate)) + 1);
  const std::size_t n = next_pow2(static_cast<std::size_t>(x_i.size()) + 2 * max_lag);

  const Eigen::ArrayXcd fi = rfft(x_i, n);
  const Eigen::ArrayXcd fj = rfft(x_j, n);
  Eigen::ArrayXcd cross = fi.conjugate() * fj;
  for (Eigen::Index k = 0; k < cross.size(); ++k) {
    const double mag = std::abs(cross(k));
    cross(k) = mag > 1e-15 ? cross(k) / mag : std::complex<double>(0.0, 0.0);
  }
  const Eigen::ArrayXd cc = irfft(cross, n);

  // cc index tau holds correlation at lag tau (negative lags wrap).
  const auto lag_value = [&](long lag) {
    const long idx = lag >= 0 ? lag : static_cast<long>(n) + lag;
    return cc(idx);
  };

  long best_lag = 0;
  double best = -1.0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    const double v = lag_value(lag);
    if (v > best) {
      best = v;
      best_lag = lag;
    }
  }
  // Secondary peak outside +/-2 samples of the primary.
  double second = 0.0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    if (std::labs(lag - best_lag) <= 2) continue;
    second = std::max(second, lag_value(lag));
  }

  // Parabolic sub-sample refinement around the peak.
  double refined = static_cast<double>(best_lag);
  const double y0 = lag_value(best_lag - 1), y1 = best, y2 = lag_value(best_lag + 1);
  const double denom = y0 - 2.0 * y1 + y2;
  if (std::abs(denom) > 1e-12) {
    const double shift = 0.5 * (y0 - y2) / denom;
    if (std::abs(shift) <= 1.0) refined += shift;
  }

  TdoaEstimate est;
  est.delay_s = refined / sample_rate;
  est.confidence = best > 0.0 ? std::clamp(1.0 - std::max(second, 0.0) / best, 0.0, 1.0) : 0.0;
  return est;
}

DoaEstimate estimate_doa(const std::vector<Vec3>& mic_offsets,
                         const std::vector<TdoaEstimate>& tdoas, double speed_of_sound) {
  if (tdoas.size() < 3)
    throw std::invalid_argument("estimate_doa: need at least 3 microphone pairs");

  Eigen::MatrixXd offsets(static_cast<Eigen::Index>(tdoas.size()), 3);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(tdoas.size()));
  for (std::size_t p = 0; p < tdoas.size(); ++p) {
    const Vec3 d = mic_offsets.at(static_cast<std::size_t>(tdoas[p].mic_i)) -
                   mic_offsets.at(static_cast<std::size_t>(tdoas[p].mic_j));
    offsets.row(static_cast<Eigen::Index>(p)) = d.transpose();
    rhs(static_cast<Eigen::Index>(p)) = speed_of_sound * tdoas[p].delay_s;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(offsets, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DoaEstimate est;
  est.rank_ok = svd.singularValues()(2) > 1e-9 * svd.singularValues()(0);
  const Eigen::Vector3d u = svd.solve(rhs);
  est.residual = (offsets * u - rhs).norm();

  const double norm = u.norm();
  if (norm < 1e-9) {
    // All-zero TDOAs: every direction fits equally; report broadside (+x).
    est.direction = Vec3(1.0, 0.0, 0.0);
    est.confident = false;
    return est;
  }
  est.direction = u / norm;
  est.confident = est.rank_ok && est.residual < 0.25 * rhs.norm() + 1e-12;
  return est;
}

LateralAngleEstimate lateral_angle_binaural(double itd_s, double head_radius_m,
                                            double speed_of_sound) {
  LateralAngleEstimate est;
  est.left = itd_s > 0.0;
  const double target = std::abs(itd_s);
  const double max_itd = woodworth_itd(head_radius_m, kPi / 2.0, speed_of_sound);
  if (target >= max_itd) {
    est.lateral_deg = 90.0;
    est.clamped = target > max_itd;
    return est;
  }
  double lo = 0.0, hi = kPi / 2.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (woodworth_itd(head_radius_m, mid, speed_of_sound) < target)
      lo = mid;
    else
      hi = mid;
  }
  est.lateral_deg = rad_to_deg(0.5 * (lo + hi));
  return est;
}

void CalibrationCurve::validate() const {
  if (points.size() < 2) throw std::invalid_argument("calibration: need at least 2 points");
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].first <= points[i - 1].first)
      throw std::invalid_argument("calibration: distances must increase");
    if (points[i].second >= points[i - 1].second)
      throw std::invalid_argument("calibration: energy must strictly decrease with distance");
  }
}

double CalibrationCurve::distance_from_energy_db(double energy_db) const {
  const double log2_d = (energy_db - intercept_db) / slope_db_per_log2;
  return std::clamp(std::exp2(log2_d), min_distance, max_distance);
}

std::string CalibrationCurve::to_json() const {
  nlohmann::ordered_json j;
  j["points"] = nlohmann::ordered_json::array();
  for (const auto& [d, e] : points) j["points"].push_back({{"distance_m", d}, {"energy_db", e}});
  j["fit"] = {{"intercept_db", intercept_db}, {"slope_db_per_log2", slope_db_per_log2}};
  j["valid_range_m"] = {min_distance, max_distance};
  return j.dump(2);
}

CalibrationCurve CalibrationCurve::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CalibrationCurve c;
  for (const auto& p : j.at("points"))
    c.points.push_back({p.at("distance_m").get<double>(), p.at("energy_db").get<double>()});
  c.intercept_db = j.at("fit").at("intercept_db");
  c.slope_db_per_log2 = j.at("fit").at("slope_db_per_log2");
  c.min_distance = j.at("valid_range_m").at(0);
  c.max_distance = j.at("valid_range_m").at(1);
  c.validate();
  return c;
}

Eigen::Index onset_index(const Eigen::ArrayXd& x) {
  const double peak = x.abs().maxCoeff();
  if (!(peak > 0.0)) throw std::invalid_argument("onset: silent signal");
  const double threshold = 0.1 * peak;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= threshold) return i;
  throw std::logic_error("onset: unreachable");
}

double direct_energy_db(const Eigen::ArrayXd& x, double sample_rate) {
  const Eigen::Index onset = onset_index(x);
  const Eigen::Index win = static_cast<Eigen::Index>(std::lround(0.0025 * sample_rate));
  const Eigen::Index end = std::min(onset + win, x.size());
  if (end <= onset) throw std::invalid_argument("direct_energy: onset window is empty");
  const double power = x.segment(onset, end - onset).square().mean();

  // Active duration normalizes away clip length: loudness normalization
  // fixes total energy, so short clips are proportionally louder.
  const double peak = x.abs().maxCoeff();
  const Eigen::Index active = (x.abs() >= 0.01 * peak).count();
  const double duration_s = static_cast<double>(std::max<Eigen::Index>(active, 1)) / sample_rate;

  const double feature = power * duration_s;
  return 10.0 * std::log10(std::max(feature, 1e-30));
}

CalibrationCurve calibrate_distance(const RoomSpec& room, const ReceiverSpec& receiver,
                                    const std::vector<double>& distances, std::uint64_t seed) {
  if (distances.size() < 5)
    throw std::invalid_argument("calibrate_distance: need >= 5 known distances");
  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());

  // Unit-energy noise probe, 2 s.
  Rng rng(seed);
  Eigen::ArrayXf probe(2 * kClipSampleRate);
  for (Eigen::Index i = 0; i < probe.size(); ++i)
    probe(i) = static_cast<float>(rng.normal() * 0.25);
  ClipSource clip;
  clip.samples = loudness_normalize(probe);
  clip.categories = {"calibration_probe"};
  clip.id = "calibration_probe";

  CalibrationCurve curve;
  for (double d : sorted) {
    const Vec3 dir = world_to_receiver_frame(Vec3(1.0, 0.0, 0.0), -receiver.heading_deg);
    SourceSpec src{receiver.position + dir * d};
    if (!room.contains(src.position, 0.05))
      throw std::invalid_argument("calibrate_distance: distance " + std::to_string(d) +
                                  " m does not fit in the room");
    const ImpulseResponse ir = simulate_rir(room, src, receiver);
    SpatialClip scene = spatialize(clip, ir);
    curve.points.push_back({d, direct_energy_db(scene.channels.col(0).cast<double>(),
                                                room.sample_rate)});
  }
  curve.validate();

  // Least-squares line energy_db = intercept + slope * log2(d).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [d, e] : curve.points) {
    const double x = std::log2(d);
    sx += x;
    sy += e;
    sxx += x * x;
    sxy += x * e;
  }
  const double n = static_cast<double>(curve.points.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw std::invalid_argument("calibrate_distance: degenerate distance set");
  curve.slope_db_per_log2 = (n * sxy - sx * sy) / denom;
  curve.intercept_db = (sy - curve.slope_db_per_log2 * sx) / n;
  // Estimates clamp to the distance label range, extrapolating the fitted
  // line beyond the probed span.
  curve.min_distance = kMinSourceDistance;
  curve.max_distance = kMaxLabelDistance;
  return curve;
}

double estimate_distance(const Eigen::ArrayXd& channel, double sample_rate,
                         const CalibrationCurve& calibration) {
  return calibration.distance_from_energy_db(direct_energy_db(channel, sample_rate));
}

std::vector<Prediction> run_baseline(const std::vector<QaRecord>& manifest,
                                     const std::string& manifest_dir,
                                     const std::vector<RoomPreset>& presets, BaselineMode mode,
                                     std::uint64_t seed) {
  std::map<std::string, const RoomPreset*> presets_by_name;
  for (const auto& p : presets) presets_by_name[p.name] = &p;
  std::map<std::string, CalibrationCurve> calibrations;
  Rng master(seed);

  const auto calibration_for = [&](const std::string& room_name) -> const CalibrationCurve& {
    auto it = calibrations.find(room_name);
    if (it != calibrations.end()) return it->second;
    auto preset_it = presets_by_name.find(room_name);
    if (preset_it == presets_by_name.end())
      throw std::runtime_error("run_baseline: manifest room '" + room_name +
                               "' missing from presets");
    const RoomSpec& room = preset_it->second->room;
    // Probe from near the low-x wall so even small rooms span a usable
    // range of distances; six log-spaced points.
    Vec3 pos(std::min(kWallMargin + 0.1, room.dimensions.x() * 0.25),
             room.dimensions.y() / 2.0, std::min(1.5, room.dimensions.z() * 0.6));
    ReceiverSpec receiver = mode == BaselineMode::kBinaural
                                ? ReceiverSpec::binaural(pos, 0.0)
                                : ReceiverSpec::tetrahedral(pos, 0.0);
    const double lo = 0.35;
    const double hi =
        std::min(room.dimensions.x() - kWallMargin - pos.x() - 0.05, 6.0);
    if (hi < 0.5)
      throw std::runtime_error("run_baseline: room '" + room_name +
                               "' too small for distance calibration");
    std::vector<double> distances;
    for (int i = 0; i < 6; ++i)
      distances.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / 5.0));
    auto [ins, unused] =
        calibrations.emplace(room_name, calibrate_distance(room, receiver, distances,
                                                           master.split("calibrate").state()));
    (void)unused;
    return ins->second;
  };

  std::vector<Prediction> out;
  out.reserve(manifest.size());
  for (std::size_t idx = 0; idx < manifest.size(); ++idx) {
    const QaRecord& rec = manifest[idx];
    Prediction pred;
    pred.record_id = rec.id;
    // Multi-source records are abstained: the classical chain has no
    // separation stage.
    if (rec.truth.sources.size() != 1 || rec.audio_path.empty()) {
      out.push_back(std::move(pred));
      continue;
    }

    const std::string wav_path = (fs::path(manifest_dir) / rec.audio_path).string();
    const WavData wav = read_wav(wav_path, kClipSampleRate);
    Rng rng = master.split("baseline", static_cast<std::uint64_t>(idx));

    if (mode == BaselineMode::kBinaural) {
      if (wav.channels() < 2)
        throw std::runtime_error("run_baseline: binaural mode needs 2 channels: " + wav_path);
      const double head_a = 0.0875;
      const double max_itd = woodworth_itd(head_a, kPi / 2.0) + 1.0 / kClipSampleRate;
      const TdoaEstimate itd = gcc_phat(wav.samples.col(0).cast<double>(),
                                        wav.samples.col(1).cast<double>(), kClipSampleRate,
                                        max_itd);
      const LateralAngleEstimate lat = lateral_angle_binaural(itd.delay_s, head_a);
      const double gamma = deg_to_rad(lat.lateral_deg);
      // Front/back and up/down carry no binaural cue here; split the
      // residual magnitude between them with random signs.
      const double fb_sign = rng.coin() ? 1.0 : -1.0;
      const double ud_sign = rng.coin() ? 1.0 : -1.0;
      const double planar = std::cos(gamma) / std::sqrt(2.0);
      pred.doa = Vec3(fb_sign * planar, (lat.left ? 1.0 : -1.0) * std::sin(gamma),
                      ud_sign * planar);
      // Head shadow attenuates the contralateral ear; the louder ear is the
      // unshadowed one and matches the straight-ahead calibration geometry.
      const Eigen::ArrayXd left = wav.samples.col(0).cast<double>();
      const Eigen::ArrayXd right = wav.samples.col(1).cast<double>();
      const double e_left = direct_energy_db(left, kClipSampleRate);
      const double e_right = direct_energy_db(right, kClipSampleRate);
      pred.distance_m = calibration_for(rec.room).distance_from_energy_db(
          std::max(e_left, e_right));
    } else {
      if (wav.channels() < 4)
        throw std::runtime_error("run_baseline: tetrahedral mode needs 4 channels: " + wav_path);
      const ReceiverSpec probe = ReceiverSpec::tetrahedral(Vec3::Zero(), 0.0);
      std::vector<TdoaEstimate> tdoas;
      for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
          const double pair_dist = (probe.array_offsets[static_cast<std::size_t>(i)] -
                                    probe.array_offsets[static_cast<std::size_t>(j)])
                                       .norm();
          TdoaEstimate t = gcc_phat(wav.samples.col(i).cast<double>(),
                                    wav.samples.col(j).cast<double>(), kClipSampleRate,
                                    pair_dist / 343.0 + 1.0 / kClipSampleRate);
          t.mic_i = i;
          t.mic_j = j;
          tdoas.push_back(t);
        }
      }
      const DoaEstimate doa = estimate_doa(probe.array_offsets, tdoas);
      pred.doa = doa.direction;
      pred.distance_m = estimate_distance(wav.samples.col(0).cast<double>(), kClipSampleRate,
                                          calibration_for(rec.room));
    }
    out.push_back(std::move(pred));
  }
  return out;
}

}  // namespace ssf
