#include "ssf/fft_utils.hpp"

#include <unsupported/Eigen/FFT>
#include <stdexcept>
#include <vector>

namespace ssf {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Eigen::ArrayXcd rfft(const Eigen::ArrayXd& x, std::size_t n) {
  std::vector<double> time(n, 0.0);
  const std::size_t copy = std::min<std::size_t>(n, static_cast<std::size_t>(x.size()));
  for (std::size_t i = 0; i < copy; ++i) time[i] = x(static_cast<Eigen::Index>(i));

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, time);

  Eigen::ArrayXcd out(static_cast<Eigen::Index>(freq.size()));
  for (std::size_t i = 0; i < freq.size(); ++i) out(static_cast<Eigen::Index>(i)) = freq[i];
  return out;
}

Eigen::ArrayXd irfft(const Eigen::ArrayXcd& spectrum, std::size_t n) {
  if (static_cast<std::size_t>(spectrum.size()) != n / 2 + 1)
    throw std::invalid_argument("irfft: spectrum size must be n/2+1");
  std::vector<std::complex<double>> freq(spectrum.size());
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) freq[static_cast<std::size_t>(i)] = spectrum(i);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> time(n);
  fft.inv(time, freq);

  Eigen::ArrayXd out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = time[i];
  return out;
}

Eigen::ArrayXd fast_convolve(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("fast_convolve: empty input");
  const std::size_t out_len = static_cast<std::size_t>(a.size() + b.size() - 1);
  const std::size_t n = next_pow2(out_len);
  const Eigen::ArrayXcd fa = rfft(a, n);
  const Eigen::ArrayXcd fb = rfft(b, n);
  Eigen::ArrayXd full = irfft(fa * fb, n);
  return full.head(static_cast<Eigen::Index>(out_len));
}

}  // namespace ssf
