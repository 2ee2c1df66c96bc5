#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ssf {

std::size_t next_pow2(std::size_t n);

// Linear convolution of two real signals via a single zero-padded FFT.
// Output length is a.size() + b.size() - 1.
Eigen::ArrayXd fast_convolve(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);

// Forward real FFT of length n (input zero-padded/truncated to n),
// returning the n/2+1 half spectrum.
Eigen::ArrayXcd rfft(const Eigen::ArrayXd& x, std::size_t n);

// Inverse of rfft for a half spectrum of size n/2+1; returns n real samples.
Eigen::ArrayXd irfft(const Eigen::ArrayXcd& spectrum, std::size_t n);

}  // namespace ssf
