#pragma once

// Internal FFT helpers shared by the calculus and model translation units.

#include <unsupported/Eigen/FFT>

#include <Eigen/Dense>
#include <complex>

namespace surfeit::spectral {

// Integer mode of FFT bin m on an n-point grid: 0..n/2-1 then -n/2..-1.
inline int k_of(int m, int n) { return m <= n / 2 ? (m < n / 2 ? m : -n / 2) : m - n; }

// Forward transform scaled so that values_j = sum_m hat_m exp(2 pi i m j / n).
inline Eigen::VectorXcd forward(const Eigen::VectorXcd& values) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(values.size());
  std::vector<std::complex<double>> in(values.data(), values.data() + n), out(n);
  fft.fwd(out, in);
  Eigen::VectorXcd hat(n);
  for (int m = 0; m < n; ++m) hat(m) = out[m] / static_cast<double>(n);
  return hat;
}

inline Eigen::VectorXcd inverse(const Eigen::VectorXcd& hat) {
  Eigen::FFT<double> fft;
  const int n = static_cast<int>(hat.size());
  std::vector<std::complex<double>> in(n), out(n);
  for (int m = 0; m < n; ++m) in[m] = hat(m) * static_cast<double>(n);
  fft.inv(out, in);
  Eigen::VectorXcd v(n);
  for (int m = 0; m < n; ++m) v(m) = out[m];
  return v;
}

}  // namespace surfeit::spectral
