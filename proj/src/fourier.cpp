#include "cmc/fourier.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace cmc {

namespace {
Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> f;
  return f;
}
}  // namespace

std::vector<cplx> circle_nodes(int M, double rho) {
  std::vector<cplx> z(M);
  // long double angles: node errors get amplified by steep samples
  constexpr long double two_pi = 6.283185307179586476925286766559005768L;
  for (int j = 0; j < M; ++j) {
    const long double t = two_pi * j / M;
    z[j] = cplx(double(rho * std::cos(t)), double(rho * std::sin(t)));
  }
  return z;
}

std::vector<cplx> dft(const std::vector<cplx>& s) {
  std::vector<cplx> out;
  fft_engine().fwd(out, s);
  const double inv = 1.0 / double(s.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::vector<cplx> idft(const std::vector<cplx>& c) {
  std::vector<cplx> out;
  fft_engine().inv(out, c);
  const double m = double(c.size());
  for (auto& v : out) v *= m;
  return out;
}

namespace {
template <class F>
Samples entrywise(const Samples& s, F f) {
  const int M = int(s.size());
  Samples out(M);
  std::vector<cplx> buf(M);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (int j = 0; j < M; ++j) buf[j] = s[j](a, b);
      auto t = f(buf);
      for (int j = 0; j < M; ++j) out[j](a, b) = t[j];
    }
  return out;
}
}  // namespace

Samples dft(const Samples& s) {
  return entrywise(s, [](const std::vector<cplx>& v) { return dft(v); });
}

Samples idft(const Samples& c) {
  return entrywise(c, [](const std::vector<cplx>& v) { return idft(v); });
}

Samples sample_loop(const LoopMatrix& g, int M, double rho) {
  int span = 0;
  for (const auto& kv : g.coeffs) span = std::max(span, std::abs(kv.first));
  if (2 * span < M) {
    Samples c(M, Mat2::Zero());
    for (const auto& [n, m] : g.coeffs) c[degree_bin(n, M)] += std::pow(rho, n) * m;
    return idft(c);
  }
  auto z = circle_nodes(M, rho);
  Samples s(M);
  for (int j = 0; j < M; ++j) s[j] = g.eval(z[j]);
  return s;
}

LoopMatrix loop_from_samples(const Samples& s, double rho, double r_meta, int nmax, double rel_tol,
                             bool twisted) {
  const int M = int(s.size());
  Samples c = dft(s);
  double big = 0.0;
  for (const auto& m : c) big = std::max(big, maxabs(m));
  LoopMatrix g;
  g.r = r_meta;
  g.twisted = twisted;
  double tail = 0.0;
  int span = 0;
  for (int k = 0; k < M; ++k) {
    const int n = bin_degree(k, M);
    if (k == M / 2) continue;
    Mat2 m = c[k] * std::pow(rho, -n);
    if (twisted) {
      if (n % 2 == 0) m(0, 1) = m(1, 0) = 0.0;
      else m(0, 0) = m(1, 1) = 0.0;
    }
    const double sz = maxabs(c[k]);
    if (sz <= rel_tol * big || std::abs(n) > nmax) {
      tail = std::max(tail, sz);
      continue;
    }
    g.coeffs.emplace(n, m);
    span = std::max(span, std::abs(n));
  }
  g.tail = tail;
  g.N = std::max(span, 1);
  return g;
}

ScalarLoop scalar_from_samples(const std::vector<cplx>& s, double rho, double r_meta, int nmax,
                               double rel_tol, Parity parity) {
  const int M = int(s.size());
  auto c = dft(s);
  double big = 0.0;
  for (auto v : c) big = std::max(big, std::abs(v));
  ScalarLoop f;
  f.r = r_meta;
  f.parity = parity;
  int span = 0;
  double tail = 0.0;
  for (int k = 0; k < M; ++k) {
    if (k == M / 2) continue;
    const int n = bin_degree(k, M);
    const double sz = std::abs(c[k]);
    if (sz <= rel_tol * big || std::abs(n) > nmax) {
      tail = std::max(tail, sz);
      continue;
    }
    f.coeffs.emplace(n, c[k] * std::pow(rho, -n));
    span = std::max(span, std::abs(n));
  }
  f.N = std::max(span, 1);
  f.tail = tail;
  return f;
}

double sup_dist(const Samples& a, const Samples& b) {
  double d = 0.0;
  for (size_t j = 0; j < a.size(); ++j) d = std::max(d, maxabs(a[j] - b[j]));
  return d;
}

}  // namespace cmc
