#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssf/manifest.hpp"
#include "ssf/room.hpp"

namespace ssf {

struct TdoaEstimate {
  int mic_i = 0;
  int mic_j = 0;
  double delay_s = 0.0;        // arrival time at mic j minus arrival at mic i
  double confidence = 0.0;     // 1 - secondary/primary peak ratio, in [0, 1]
};

// Generalized cross-correlation with phase transform.  The peak is refined
// with a parabolic fit for sub-sample accuracy and searched within
// +/- max_lag_s.  Throws on silent input.
TdoaEstimate gcc_phat(const Eigen::ArrayXd& x_i, const Eigen::ArrayXd& x_j, double sample_rate,
                      double max_lag_s);

struct DoaEstimate {
  Vec3 direction = Vec3(1.0, 0.0, 0.0);  // unit vector toward the source
  double residual = 0.0;                 // least-squares residual (seconds scale)
  bool rank_ok = true;                   // geometry spans 3-D
  bool confident = true;                 // residual below threshold, nonzero solution
};

// Far-field TDOA least squares: solve min ||D u - c tau|| over the pairwise
// offset matrix D, then renormalize.  With all-zero TDOAs the solution is
// ambiguous: the estimate falls back to the +x broadside direction with
// confident = false.
DoaEstimate estimate_doa(const std::vector<Vec3>& mic_offsets,
                         const std::vector<TdoaEstimate>& tdoas,
                         double speed_of_sound = 343.0);

struct LateralAngleEstimate {
  double lateral_deg = 0.0;  // in [0, 90]
  bool left = false;
  bool clamped = false;  // ITD exceeded the physical Woodworth range
};

// Numerically inverts the Woodworth ITD tau = (a/c)(gamma + sin gamma).
// Front/back and up/down stay unknown (cone of confusion).
LateralAngleEstimate lateral_angle_binaural(double itd_s, double head_radius_m,
                                            double speed_of_sound = 343.0);

// Energy-versus-distance calibration.  The feature is the mean-square level
// over the first 2.5 ms after onset scaled by the active signal duration;
// under unit-energy loudness normalization it tracks the 1/r^2 direct-path
// law without being confounded by clip length.
struct CalibrationCurve {
  std::vector<std::pair<double, double>> points;  // (distance_m, energy_db)
  double intercept_db = 0.0;
  double slope_db_per_log2 = -6.02;  // fitted; ~ -6 dB per doubling
  double min_distance = 0.5;
  double max_distance = 10.0;

  double distance_from_energy_db(double energy_db) const;
  void validate() const;  // energy must decrease with distance
  std::string to_json() const;
  static CalibrationCurve from_json(const std::string& text);
};

// Onset = first sample exceeding 10% of the global peak.
Eigen::Index onset_index(const Eigen::ArrayXd& x);
double direct_energy_db(const Eigen::ArrayXd& x, double sample_rate);

// Fit a calibration curve by simulating known-distance sources in `room`
// (straight ahead of a centered receiver) and measuring the feature on a
// unit-energy noise probe.  Needs >= 5 distances.
CalibrationCurve calibrate_distance(const RoomSpec& room, const ReceiverSpec& receiver,
                                    const std::vector<double>& distances, std::uint64_t seed);

double estimate_distance(const Eigen::ArrayXd& channel, double sample_rate,
                         const CalibrationCurve& calibration);

enum class BaselineMode { kBinaural, kTetrahedral };

// Produce a metrics-eval-compatible predictions file for every record in
// the manifest.  Single-source records get DoA (binaural: lateral angle +
// left/right from ITD, front/back and up/down drawn uniformly with the
// fixed seed) and a calibrated distance; two-source records are abstained.
std::vector<Prediction> run_baseline(const std::vector<QaRecord>& manifest,
                                     const std::string& manifest_dir,
                                     const std::vector<RoomPreset>& presets, BaselineMode mode,
                                     std::uint64_t seed);

}  // namespace ssf
