#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace cmc {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline const cplx kI{0.0, 1.0};

// Error carrying a stable machine-readable code (used by the CLI's JSON errors).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline Mat2 mat_identity() { return Mat2::Identity(); }

inline Mat2 mat_A() {
  Mat2 a;
  a << 0, 1, 1, 0;
  return a;
}

inline Mat2 sigma1() { return mat_A(); }

inline Mat2 sigma2() {
  Mat2 s;
  s << 0, -kI, kI, 0;
  return s;
}

inline Mat2 sigma3() {
  Mat2 s;
  s << 1, 0, 0, -1;
  return s;
}

// D A D^{-1} = sigma3
inline Mat2 mat_D() {
  const double h = 1.0 / std::sqrt(2.0);
  Mat2 d;
  d << h, h, -h, h;
  return d;
}

inline double opnorm(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m);
  return svd.singularValues()(0);
}

// Cheap entrywise max norm; used for residual reporting.
inline double maxabs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

inline Mat2 inv2(const Mat2& m) {
  const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Mat2 r;
  r << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return r / det;
}

}  // namespace cmc
