#include "ssf/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace ssf {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace

WavData read_wav(const std::string& path, int expected_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("wav: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("wav: malformed RIFF header in " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    std::uint32_t size = read_u32(chunk + 4);
    const unsigned char* body = chunk + 8;
    if (pos + 8 + size > buf.size()) throw std::runtime_error("wav: truncated chunk in " + path);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw std::runtime_error("wav: malformed fmt chunk in " + path);
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw std::runtime_error("wav: malformed extensible fmt in " + path);
        format = read_u16(body + 24);  // first two bytes of the sub-format GUID
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }

  if (!data || channels == 0) throw std::runtime_error("wav: missing fmt/data chunk in " + path);
  if (expected_rate > 0 && static_cast<int>(rate) != expected_rate)
    throw std::runtime_error("wav: " + path + " has sample rate " + std::to_string(rate) +
                             ", expected " + std::to_string(expected_rate) +
                             " (resample offline; this tool never resamples)");

  const std::size_t bytes_per_sample = bits / 8;
  if (bytes_per_sample == 0) throw std::runtime_error("wav: zero bit depth in " + path);
  const std::size_t n_values = data_size / bytes_per_sample;
  const std::size_t n_frames = n_values / channels;

  WavData out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(static_cast<Eigen::Index>(n_frames), channels);

  auto sample_at = [&](std::size_t idx) -> float {
    const unsigned char* p = data + idx * bytes_per_sample;
    if (format == kFormatPcm && bits == 16) {
      std::int16_t v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return static_cast<float>(v) / 32768.0f;
    }
    if (format == kFormatPcm && bits == 24) {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xffffff;
      return static_cast<float>(v) / 8388608.0f;
    }
    if (format == kFormatFloat && bits == 32) {
      float v;
      std::memcpy(&v, p, 4);
      return v;
    }
    throw std::runtime_error("wav: unsupported codec (format " + std::to_string(format) + ", " +
                             std::to_string(bits) + " bit) in " + path);
  };

  for (std::size_t i = 0; i < n_frames; ++i)
    for (std::uint16_t c = 0; c < channels; ++c)
      out.samples(static_cast<Eigen::Index>(i), c) = sample_at(i * channels + c);
  return out;
}

void write_wav(const std::string& path, const Eigen::ArrayXXf& samples, int sample_rate) {
  if (!samples.allFinite()) throw std::invalid_argument("wav: refusing to write non-finite samples");
  const std::uint16_t channels = static_cast<std::uint16_t>(samples.cols());
  const std::uint32_t n_frames = static_cast<std::uint32_t>(samples.rows());
  const std::uint32_t data_size = n_frames * channels * 4;

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatFloat);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * channels * 4);
  put_u16(out, channels * 4);
  put_u16(out, 32);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);

  for (std::uint32_t i = 0; i < n_frames; ++i)
    for (std::uint16_t c = 0; c < channels; ++c) {
      float v = samples(static_cast<Eigen::Index>(i), c);
      unsigned char b[4];
      std::memcpy(b, &v, 4);
      out.insert(out.end(), b, b + 4);
    }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("wav: cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("wav: short write to " + path);
}

void write_wav(const std::string& path, const Eigen::ArrayXf& samples, int sample_rate) {
  Eigen::ArrayXXf m(samples.size(), 1);
  m.col(0) = samples;
  write_wav(path, m, sample_rate);
}

}  // namespace ssf
