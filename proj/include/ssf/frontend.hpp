#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ssf/scene.hpp"

namespace ssf {

inline constexpr int kStftWindow = 1024;
inline constexpr int kStftHop = 320;
inline constexpr int kMelBins = 128;
inline constexpr int kPaddedFrames = 1024;
inline constexpr double kMelFmin = 20.0;
inline constexpr double kMelFmax = 16000.0;
inline constexpr double kLogFloor = 1e-10;
inline constexpr int kPatchSize = 16;

struct Stft {
  Eigen::MatrixXcd frames;  // T x F, F = N/2 + 1
  int window_size = kStftWindow;
  int hop = kStftHop;
  double sample_rate = kClipSampleRate;

  Eigen::Index n_frames() const { return frames.rows(); }
  Eigen::Index n_bins() const { return frames.cols(); }
};

// Periodic Hann analysis, no center padding: frame t covers samples
// [t*hop, t*hop + window).  Input must hold at least one window.
Stft stft(const Eigen::ArrayXd& wave, int window = kStftWindow, int hop = kStftHop,
          double sample_rate = kClipSampleRate);

struct MelFilterbank {
  Eigen::MatrixXd weights;  // M x F, nonnegative, triangular rows peaking at 1
  double sample_rate = kClipSampleRate;
  double f_min = kMelFmin;
  double f_max = kMelFmax;

  Eigen::Index n_mels() const { return weights.rows(); }
  Eigen::Index n_bins() const { return weights.cols(); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with peak 1.0, centers equally spaced on the HTK Mel
// scale between f_min and f_max.
MelFilterbank mel_filterbank(double sample_rate = kClipSampleRate, int n_fft = kStftWindow,
                             int n_mels = kMelBins, double f_min = kMelFmin,
                             double f_max = kMelFmax);

// S = log(max(|X|^2 * melW^T, eps)), natural log, eps = 1e-10.
Eigen::MatrixXd mel_spectrogram(const Stft& spec, const MelFilterbank& fb);

// Elementwise phase of X_right / X_left in (-pi, pi].  Bins where the left
// channel magnitude is below 1e-12 emit 0.
Eigen::MatrixXd ipd(const Stft& left, const Stft& right);

// Front-end output Z: planes [S_left; S_right; cos(IPD)*melW; sin(IPD)*melW],
// frame axis zero-padded to 1024 (mel planes pad with log eps, IPD planes
// with 0).  Shape is (4, 1024, 128) for a 10 s binaural clip at 32 kHz.
struct FeatureTensor {
  std::array<Eigen::MatrixXf, 4> planes;  // each kPaddedFrames x kMelBins
  Eigen::Index n_real_frames = 0;         // frames before padding
};

FeatureTensor assemble_features(const SpatialClip& clip);

// Non-overlapping 16x16 patch layout over (T_pad, M); data layout only.
struct PatchGrid {
  int patch_frames = kPatchSize;
  int patch_mels = kPatchSize;
  int rows = 0;  // along the frame axis
  int cols = 0;  // along the mel axis
  int n_patches() const { return rows * cols; }
  // Inclusive start / exclusive end ranges of patch (r, c).
  std::pair<int, int> frame_range(int r) const;
  std::pair<int, int> mel_range(int c) const;
};

PatchGrid patchify(int n_frames = kPaddedFrames, int n_mels = kMelBins,
                   int patch = kPatchSize);

// Discretized training targets: 0.5 m distance bins, 1 degree angle bins.
struct TargetLabels {
  std::vector<int> category_ids;  // indices into the ontology, multi-hot
  int distance_class = 0;         // 0..19
  int azimuth_class = 0;          // 0..359
  int elevation_class = 0;        // 0..180
};

TargetLabels encode_targets(const PlacedSource& source,
                            const std::vector<std::string>& ontology_ids);

// Raw little-endian float32 export in plane-major order plus a JSON sidecar
// describing shape and constants.  `path` gains a ".json" sibling.
void write_feature_tensor(const std::string& path, const FeatureTensor& tensor);
FeatureTensor read_feature_tensor(const std::string& path);

}  // namespace ssf
