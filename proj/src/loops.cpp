#include "cmc/loops.hpp"

#include <algorithm>
#include <cmath>

namespace cmc {

namespace {
constexpr double kTwistTol = 1e-14;

cplx ipow(cplx z, int n) {
  if (n == 0) return 1.0;
  if (n < 0) return 1.0 / ipow(z, -n);
  cplx r = 1.0, b = z;
  while (n) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}
}  // namespace

Mat2 LoopMatrix::coeff(int n) const {
  auto it = coeffs.find(n);
  return it == coeffs.end() ? Mat2::Zero() : it->second;
}

int LoopMatrix::min_degree() const { return coeffs.empty() ? 0 : coeffs.begin()->first; }
int LoopMatrix::max_degree() const { return coeffs.empty() ? 0 : coeffs.rbegin()->first; }

Mat2 LoopMatrix::eval(cplx lambda) const {
  if (lambda == cplx(0.0) && min_degree() < 0) throw Error("EvalAtZero", "loop has negative degrees; cannot evaluate at 0");
  Mat2 s = Mat2::Zero();
  for (const auto& [n, c] : coeffs) s += ipow(lambda, n) * c;
  return s;
}

Mat2 LoopMatrix::deriv_theta(cplx lambda0) const {
  if (lambda0 == cplx(0.0)) throw Error("EvalAtZero", "deriv_theta at 0");
  Mat2 s = Mat2::Zero();
  for (const auto& [n, c] : coeffs) s += (kI * double(n)) * ipow(lambda0, n) * c;
  return s;
}

LoopMatrix LoopMatrix::identity(double r, int N) {
  LoopMatrix g;
  g.coeffs[0] = Mat2::Identity();
  g.r = r;
  g.N = N;
  g.twisted = true;
  return g;
}

cplx ScalarLoop::coeff(int n) const {
  auto it = coeffs.find(n);
  return it == coeffs.end() ? cplx(0.0) : it->second;
}

cplx ScalarLoop::eval(cplx lambda) const {
  cplx s = 0.0;
  for (const auto& [n, c] : coeffs) s += ipow(lambda, n) * c;
  return s;
}

double ScalarLoop::parity_violation() const {
  if (parity == Parity::None) return 0.0;
  double v = 0.0;
  for (const auto& [n, c] : coeffs) {
    const bool odd = (n % 2) != 0;
    if ((parity == Parity::Even && odd) || (parity == Parity::Odd && !odd)) v = std::max(v, std::abs(c));
  }
  return v;
}

double twist_violation(const std::map<int, Mat2>& coeffs) {
  double v = 0.0;
  for (const auto& [n, c] : coeffs) {
    if (n % 2 == 0) {
      v = std::max({v, std::abs(c(0, 1)), std::abs(c(1, 0))});
    } else {
      v = std::max({v, std::abs(c(0, 0)), std::abs(c(1, 1))});
    }
  }
  return v;
}

LoopMatrix make_loop(const std::map<int, Mat2>& coeffs, double r, bool twisted, int N) {
  if (!(r > 0.0 && r <= 1.0)) throw Error("BadRadius", "radius must lie in (0,1]");
  int span = 1;
  for (const auto& kv : coeffs) span = std::max(span, std::abs(kv.first));
  if (N < 0) N = std::max(32, span);
  if (span > N) throw Error("TruncationExceeded", "coefficient degree outside declared truncation");
  if (twisted) {
    double scale = 1.0;
    for (const auto& kv : coeffs) scale = std::max(scale, maxabs(kv.second));
    if (twist_violation(coeffs) > kTwistTol * scale) throw Error("TwistingViolation", "coefficient support violates the twisting condition");
  }
  LoopMatrix g;
  g.coeffs = coeffs;
  g.r = r;
  g.N = N;
  g.twisted = twisted;
  return g;
}

LoopMatrix multiply(const LoopMatrix& g, const LoopMatrix& h) {
  if (std::abs(g.r - h.r) > 1e-14) throw Error("RadiusMismatch", "loops live on different circles");
  LoopMatrix p;
  p.r = g.r;
  p.N = std::max(g.N, h.N);
  p.twisted = g.twisted && h.twisted;
  std::map<int, Mat2> full;
  for (const auto& [n, a] : g.coeffs)
    for (const auto& [m, b] : h.coeffs) {
      auto it = full.find(n + m);
      if (it == full.end())
        full.emplace(n + m, a * b);
      else
        it->second += a * b;
    }
  double tail = std::max(g.tail, h.tail);
  for (auto& [n, c] : full) {
    if (std::abs(n) > p.N)
      tail = std::max(tail, maxabs(c));
    else
      p.coeffs.emplace(n, c);
  }
  p.tail = tail;
  return p;
}

LoopMatrix star(const LoopMatrix& g) {
  LoopMatrix s = g;
  s.coeffs.clear();
  for (const auto& [n, c] : g.coeffs) s.coeffs.emplace(-n, c.adjoint());
  return s;
}

LoopMatrix inverse_adj(const LoopMatrix& g) {
  LoopMatrix s = g;
  s.coeffs.clear();
  for (const auto& [n, c] : g.coeffs) {
    Mat2 a;
    a << c(1, 1), -c(0, 1), -c(1, 0), c(0, 0);
    s.coeffs.emplace(n, a);
  }
  return s;
}

Mat2 eval(const LoopMatrix& g, cplx lambda) { return g.eval(lambda); }
Mat2 deriv_theta(const LoopMatrix& g, cplx lambda0) { return g.deriv_theta(lambda0); }

double tail_norm(const LoopMatrix& g, int n0) {
  double t = 0.0;
  for (const auto& [n, c] : g.coeffs)
    if (std::abs(n) > n0) t = std::max(t, maxabs(c));
  return t;
}

}  // namespace cmc
