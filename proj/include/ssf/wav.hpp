#pragma once

#include <Eigen/Dense>
#include <string>

namespace ssf {

// Audio buffers are stored samples-by-channels so each channel is a
// contiguous Eigen column.
struct WavData {
  Eigen::ArrayXXf samples;  // frames x channels, normalized to [-1, 1]
  int sample_rate = 0;

  Eigen::Index frames() const { return samples.rows(); }
  Eigen::Index channels() const { return samples.cols(); }
};

// Read a RIFF/WAVE file (PCM16, PCM24 or float32, any channel count).
// PCM samples are scaled by 1/32768 (resp. 1/8388608) so full-scale
// negative maps to -1.0 exactly.  If expected_rate > 0 and the file's rate
// differs, the read fails loudly; there is deliberately no resampler.
WavData read_wav(const std::string& path, int expected_rate = 0);

// Write a float32 WAV.  Round-trips bit-exactly through read_wav.
void write_wav(const std::string& path, const Eigen::ArrayXXf& samples, int sample_rate);

// Mono convenience overload.
void write_wav(const std::string& path, const Eigen::ArrayXf& samples, int sample_rate);

}  // namespace ssf
