#include "ssf/frontend.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace ssf {

Stft stft(const Eigen::ArrayXd& wave, int window, int hop, double sample_rate) {
  if (wave.size() < window)
    throw std::invalid_argument("stft: input shorter than one window");
  const Eigen::Index n_frames = (wave.size() - window) / hop + 1;
  const Eigen::Index n_bins = window / 2 + 1;

  // Periodic Hann.
  Eigen::ArrayXd win(window);
  for (int n = 0; n < window; ++n)
    win(n) = 0.5 - 0.5 * std::cos(2.0 * kPi * n / window);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);

  Stft out;
  out.window_size = window;
  out.hop = hop;
  out.sample_rate = sample_rate;
  out.frames.resize(n_frames, n_bins);

  std::vector<double> buf(static_cast<std::size_t>(window));
  std::vector<std::complex<double>> freq;
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    const Eigen::Index start = t * hop;
    for (int n = 0; n < window; ++n) buf[static_cast<std::size_t>(n)] = wave(start + n) * win(n);
    fft.fwd(freq, buf);
    for (Eigen::Index f = 0; f < n_bins; ++f) out.frames(t, f) = freq[static_cast<std::size_t>(f)];
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(double sample_rate, int n_fft, int n_mels, double f_min,
                             double f_max) {
  if (n_mels < 1) throw std::invalid_argument("mel_filterbank: need at least one mel bin");
  if (!(f_min < f_max) || f_max > sample_rate / 2.0)
    throw std::invalid_argument("mel_filterbank: need f_min < f_max <= Nyquist");

  const Eigen::Index n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);

  // n_mels + 2 breakpoints equally spaced in mel; filter i spans
  // (edge[i], edge[i+2]) with its peak at edge[i+1].
  Eigen::ArrayXd edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges(i) = mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1);

  MelFilterbank fb;
  fb.sample_rate = sample_rate;
  fb.f_min = f_min;
  fb.f_max = f_max;
  fb.weights = Eigen::MatrixXd::Zero(n_mels, n_bins);

  for (Eigen::Index k = 0; k < n_bins; ++k) {
    const double mel_k = hz_to_mel(sample_rate * static_cast<double>(k) / n_fft);
    for (int m = 0; m < n_mels; ++m) {
      const double lo = edges(m), center = edges(m + 1), hi = edges(m + 2);
      double w = 0.0;
      if (mel_k > lo && mel_k < hi)
        w = mel_k <= center ? (mel_k - lo) / (center - lo) : (hi - mel_k) / (hi - center);
      fb.weights(m, k) = std::max(0.0, w);
    }
  }

  for (int m = 0; m < n_mels; ++m)
    if (fb.weights.row(m).sum() <= 0.0)
      throw std::runtime_error("mel_filterbank: row " + std::to_string(m) +
                               " has no support; widen the frequency range");
  return fb;
}

Eigen::MatrixXd mel_spectrogram(const Stft& spec, const MelFilterbank& fb) {
  if (spec.n_bins() != fb.n_bins())
    throw std::invalid_argument("mel_spectrogram: STFT/filterbank bin count mismatch");
  Eigen::MatrixXd power = spec.frames.cwiseAbs2();
  Eigen::MatrixXd mel = power * fb.weights.transpose();
  return mel.cwiseMax(kLogFloor).array().log().matrix();
}

Eigen::MatrixXd ipd(const Stft& left, const Stft& right) {
  if (left.n_frames() != right.n_frames() || left.n_bins() != right.n_bins())
    throw std::invalid_argument("ipd: STFT dimension mismatch");
  Eigen::MatrixXd out(left.n_frames(), left.n_bins());
  for (Eigen::Index t = 0; t < left.n_frames(); ++t) {
    for (Eigen::Index f = 0; f < left.n_bins(); ++f) {
      const std::complex<double> l = left.frames(t, f);
      if (std::abs(l) < 1e-12) {
        out(t, f) = 0.0;  // phase of a near-zero reference is noise
        continue;
      }
      const std::complex<double> r = right.frames(t, f);
      out(t, f) = std::arg(r * std::conj(l));
    }
  }
  return out;
}

FeatureTensor assemble_features(const SpatialClip& clip) {
  if (clip.channels.cols() != 2)
    throw std::invalid_argument("assemble_features: expected exactly 2 channels");
  if (clip.channels.rows() != kClipSamples)
    throw std::invalid_argument("assemble_features: expected a 10 s clip at 32 kHz");

  const Eigen::ArrayXd left = clip.channels.col(0).cast<double>();
  const Eigen::ArrayXd right = clip.channels.col(1).cast<double>();
  const Stft sl = stft(left);
  const Stft sr = stft(right);
  static const MelFilterbank fb = mel_filterbank();

  const Eigen::MatrixXd mel_l = mel_spectrogram(sl, fb);
  const Eigen::MatrixXd mel_r = mel_spectrogram(sr, fb);
  const Eigen::MatrixXd phase = ipd(sl, sr);
  const Eigen::MatrixXd cos_ipd = phase.array().cos().matrix() * fb.weights.transpose();
  const Eigen::MatrixXd sin_ipd = phase.array().sin().matrix() * fb.weights.transpose();

  const Eigen::Index t_real = sl.n_frames();
  if (t_real > kPaddedFrames)
    throw std::invalid_argument("assemble_features: more frames than the padded length");

  FeatureTensor z;
  z.n_real_frames = t_real;
  const float floor_val = static_cast<float>(std::log(kLogFloor));
  z.planes[0] = Eigen::MatrixXf::Constant(kPaddedFrames, kMelBins, floor_val);
  z.planes[1] = Eigen::MatrixXf::Constant(kPaddedFrames, kMelBins, floor_val);
  z.planes[2] = Eigen::MatrixXf::Zero(kPaddedFrames, kMelBins);
  z.planes[3] = Eigen::MatrixXf::Zero(kPaddedFrames, kMelBins);
  z.planes[0].topRows(t_real) = mel_l.cast<float>();
  z.planes[1].topRows(t_real) = mel_r.cast<float>();
  z.planes[2].topRows(t_real) = cos_ipd.cast<float>();
  z.planes[3].topRows(t_real) = sin_ipd.cast<float>();
  return z;
}

std::pair<int, int> PatchGrid::frame_range(int r) const {
  return {r * patch_frames, (r + 1) * patch_frames};
}

std::pair<int, int> PatchGrid::mel_range(int c) const {
  return {c * patch_mels, (c + 1) * patch_mels};
}

PatchGrid patchify(int n_frames, int n_mels, int patch) {
  if (patch <= 0 || n_frames % patch != 0 || n_mels % patch != 0)
    throw std::invalid_argument("patchify: dimensions must divide the patch size");
  PatchGrid g;
  g.patch_frames = patch;
  g.patch_mels = patch;
  g.rows = n_frames / patch;
  g.cols = n_mels / patch;
  return g;
}

TargetLabels encode_targets(const PlacedSource& source,
                            const std::vector<std::string>& ontology_ids) {
  TargetLabels t;
  t.azimuth_class = static_cast<int>(std::floor(wrap_deg_360(source.geometry.azimuth_deg)));
  t.azimuth_class = std::min(t.azimuth_class, 359);
  t.elevation_class = static_cast<int>(std::floor(source.geometry.elevation_deg + 90.0));
  if (t.elevation_class < 0 || t.elevation_class > 180)
    throw std::invalid_argument("encode_targets: elevation out of [-90, 90]");
  t.distance_class = static_cast<int>(std::lround(source.distance_bin / kDistanceBinWidth)) - 1;
  if (t.distance_class < 0 || t.distance_class > 19)
    throw std::invalid_argument("encode_targets: distance bin out of range");
  for (const auto& cat : source.categories) {
    auto it = std::find(ontology_ids.begin(), ontology_ids.end(), cat);
    if (it == ontology_ids.end())
      throw std::invalid_argument("encode_targets: unknown category '" + cat + "'");
    t.category_ids.push_back(static_cast<int>(it - ontology_ids.begin()));
  }
  if (t.category_ids.empty()) throw std::invalid_argument("encode_targets: no categories");
  return t;
}

void write_feature_tensor(const std::string& path, const FeatureTensor& tensor) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("features: cannot write " + path);
  for (const auto& plane : tensor.planes)
    for (Eigen::Index t = 0; t < plane.rows(); ++t)
      for (Eigen::Index m = 0; m < plane.cols(); ++m) {
        const float v = plane(t, m);
        f.write(reinterpret_cast<const char*>(&v), sizeof(float));
      }
  if (!f) throw std::runtime_error("features: short write to " + path);

  nlohmann::ordered_json meta;
  meta["shape"] = {4, kPaddedFrames, kMelBins};
  meta["dtype"] = "float32";
  meta["byte_order"] = "little";
  meta["layout"] = "plane-major";
  meta["planes"] = {"mel_left", "mel_right", "cos_ipd_mel", "sin_ipd_mel"};
  meta["sample_rate"] = kClipSampleRate;
  meta["stft"] = {{"window", kStftWindow}, {"hop", kStftHop}, {"window_fn", "hann_periodic"}};
  meta["mel"] = {{"bins", kMelBins}, {"f_min_hz", kMelFmin}, {"f_max_hz", kMelFmax},
                 {"scale", "htk"}};
  meta["log_floor"] = kLogFloor;
  meta["real_frames"] = tensor.n_real_frames;
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw std::runtime_error("features: cannot write " + path + ".json");
  side << meta.dump(2) << "\n";
}

FeatureTensor read_feature_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("features: cannot open " + path);
  FeatureTensor tensor;
  for (auto& plane : tensor.planes) {
    plane.resize(kPaddedFrames, kMelBins);
    for (Eigen::Index t = 0; t < plane.rows(); ++t)
      for (Eigen::Index m = 0; m < plane.cols(); ++m) {
        float v;
        f.read(reinterpret_cast<char*>(&v), sizeof(float));
        if (!f) throw std::runtime_error("features: truncated file " + path);
        plane(t, m) = v;
      }
  }
  std::ifstream side(path + ".json");
  if (side) {
    nlohmann::json meta;
    side >> meta;
    tensor.n_real_frames = meta.value("real_frames", 0);
  }
  return tensor;
}

}  // namespace ssf
