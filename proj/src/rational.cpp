#include "cmc/rational.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace cmc {

cplx poly_eval(const Poly& p, cplx x) {
  cplx s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * x + *it;
  return s;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly c(std::max(a.size(), b.size()), 0.0);
  for (size_t i = 0; i < a.size(); ++i) c[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) c[i] += b[i];
  return c;
}

Poly poly_scale(const Poly& a, cplx s) {
  Poly c = a;
  for (auto& v : c) v *= s;
  return c;
}

Poly poly_trim(Poly p, double rel_tol) {
  double big = 0.0;
  for (auto v : p) big = std::max(big, std::abs(v));
  while (!p.empty() && std::abs(p.back()) <= rel_tol * big) p.pop_back();
  return p;
}

std::vector<cplx> poly_roots(const Poly& p0) {
  Poly p = poly_trim(p0, 0.0);
  std::vector<cplx> roots;
  // strip zero roots
  size_t lead = 0;
  while (lead < p.size() && p[lead] == cplx(0.0)) ++lead;
  for (size_t i = 0; i < lead; ++i) roots.push_back(0.0);
  Poly q(p.begin() + lead, p.end());
  const int n = int(q.size()) - 1;
  if (n <= 0) return roots;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) C(i, n - 1) = -q[i] / q[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  Poly dq(n);
  for (int i = 1; i <= n; ++i) dq[i - 1] = double(i) * q[i];
  for (int i = 0; i < n; ++i) {
    cplx z = es.eigenvalues()(i);
    for (int it = 0; it < 4; ++it) {
      const cplx d = poly_eval(dq, z);
      if (std::abs(d) == 0.0) break;
      const cplx step = poly_eval(q, z) / d;
      if (!(std::abs(step) < 1e-6 * (1.0 + std::abs(z)))) break;
      z -= step;
    }
    roots.push_back(z);
  }
  return roots;
}

namespace {

cplx ipow(cplx z, int n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  cplx r = 1.0;
  while (n--) r *= z;
  return r;
}

Poly expand(const std::vector<Root>& rs) {
  Poly p{1.0};
  for (const auto& r : rs)
    for (int k = 0; k < r.mult; ++k) p = poly_mul(p, Poly{-r.z, 1.0});
  return p;
}

void add_root(std::vector<Root>& rs, cplx z, int m, double tol) {
  for (auto& r : rs)
    if (std::abs(r.z - z) <= tol * (1.0 + std::abs(z))) {
      r.mult += m;
      return;
    }
  rs.push_back({z, m});
}

}  // namespace

cplx RationalFn::eval(cplx nu) const {
  cplx v = gain * ipow(nu, nu_power);
  for (const auto& r : zeros) v *= ipow(nu - r.z, r.mult);
  for (const auto& r : poles) v /= ipow(nu - r.z, r.mult);
  return v;
}

Poly RationalFn::numerator() const {
  Poly p = poly_scale(expand(zeros), gain);
  if (nu_power > 0) p.insert(p.begin(), size_t(nu_power), cplx(0.0));
  return p;
}

Poly RationalFn::denominator() const {
  Poly p = expand(poles);
  if (nu_power < 0) p.insert(p.begin(), size_t(-nu_power), cplx(0.0));
  return p;
}

int RationalFn::order_at(cplx z, double tol) const {
  if (std::abs(z) <= tol) return nu_power;
  int o = 0;
  for (const auto& r : zeros)
    if (std::abs(r.z - z) <= tol * (1.0 + std::abs(z))) o += r.mult;
  for (const auto& r : poles)
    if (std::abs(r.z - z) <= tol * (1.0 + std::abs(z))) o -= r.mult;
  return o;
}

RationalFn RationalFn::constant(cplx c) {
  RationalFn f;
  f.gain = c;
  return f;
}

RationalFn RationalFn::monomial(cplx c, int n) {
  RationalFn f;
  f.gain = c;
  f.nu_power = n;
  return f;
}

RationalFn RationalFn::linear(cplx root) {
  RationalFn f;
  if (root == cplx(0.0)) f.nu_power = 1;
  else f.zeros.push_back({root, 1});
  return f;
}

RationalFn RationalFn::from_polys(const Poly& num0, const Poly& den0) {
  Poly num = poly_trim(num0, 1e-15);
  Poly den = poly_trim(den0, 1e-15);
  if (den.empty()) throw Error("DivisionByZero", "zero denominator");
  RationalFn f;
  if (num.empty()) {
    f.gain = 0.0;
    return f;
  }
  f.gain = num.back() / den.back();
  for (cplx z : poly_roots(num)) {
    if (z == cplx(0.0)) ++f.nu_power;
    else add_root(f.zeros, z, 1, 1e-12);
  }
  for (cplx z : poly_roots(den)) {
    if (z == cplx(0.0)) --f.nu_power;
    else add_root(f.poles, z, 1, 1e-12);
  }
  return simplify(f);
}

RationalFn RationalFn::from_laurent(const std::map<int, cplx>& coeffs) {
  if (coeffs.empty()) return constant(0.0);
  const int lo = coeffs.begin()->first;
  const int hi = coeffs.rbegin()->first;
  Poly p(size_t(hi - lo + 1), 0.0);
  for (const auto& [n, c] : coeffs) p[size_t(n - lo)] = c;
  RationalFn f = from_polys(p, Poly{1.0});
  f.nu_power += lo;
  return f;
}

RationalFn operator*(const RationalFn& a, const RationalFn& b) {
  RationalFn f = a;
  f.gain *= b.gain;
  f.nu_power += b.nu_power;
  for (const auto& r : b.zeros) f.zeros.push_back(r);
  for (const auto& r : b.poles) f.poles.push_back(r);
  return simplify(f);
}

RationalFn operator/(const RationalFn& a, const RationalFn& b) {
  if (b.is_zero()) throw Error("DivisionByZero", "division by the zero function");
  RationalFn inv;
  inv.gain = 1.0 / b.gain;
  inv.nu_power = -b.nu_power;
  inv.zeros = b.poles;
  inv.poles = b.zeros;
  return a * inv;
}

RationalFn pow(const RationalFn& a, int n) {
  if (n < 0) return RationalFn::constant(1.0) / pow(a, -n);
  RationalFn f;
  f.gain = ipow(a.gain, n);
  f.nu_power = a.nu_power * n;
  for (auto r : a.zeros) f.zeros.push_back({r.z, r.mult * n});
  for (auto r : a.poles) f.poles.push_back({r.z, r.mult * n});
  return simplify(f);
}

RationalFn scale(const RationalFn& a, cplx s) {
  RationalFn f = a;
  f.gain *= s;
  return f;
}

RationalFn add(const RationalFn& a, const RationalFn& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  // a = Na/Da, b = Nb/Db with monomials folded in; sum = (Na Db + Nb Da)/(Da Db)
  const Poly na = a.numerator(), da = a.denominator();
  const Poly nb = b.numerator(), db = b.denominator();
  const Poly num = poly_add(poly_mul(na, db), poly_mul(nb, da));
  const Poly den = poly_mul(da, db);
  return RationalFn::from_polys(num, den);
}

RationalFn star(const RationalFn& f) {
  RationalFn s;
  s.gain = std::conj(f.gain);
  s.nu_power = -f.nu_power;
  // conj(1/conj(nu) - w) = -conj(w) (nu - 1/conj(w)) / nu
  for (const auto& r : f.zeros) {
    s.gain *= ipow(-std::conj(r.z), r.mult);
    s.zeros.push_back({1.0 / std::conj(r.z), r.mult});
    s.nu_power -= r.mult;
  }
  for (const auto& r : f.poles) {
    s.gain /= ipow(-std::conj(r.z), r.mult);
    s.poles.push_back({1.0 / std::conj(r.z), r.mult});
    s.nu_power += r.mult;
  }
  return s;
}

RationalFn simplify(const RationalFn& f, double tol) {
  RationalFn s;
  s.gain = f.gain;
  s.nu_power = f.nu_power;
  std::vector<Root> net;
  for (const auto& r : f.zeros) add_root(net, r.z, r.mult, tol);
  for (const auto& r : f.poles) add_root(net, r.z, -r.mult, tol);
  for (const auto& r : net) {
    if (r.mult > 0) s.zeros.push_back(r);
    else if (r.mult < 0) s.poles.push_back({r.z, -r.mult});
  }
  auto by_arg = [](const Root& a, const Root& b) {
    if (std::abs(a.z) != std::abs(b.z)) return std::abs(a.z) < std::abs(b.z);
    return std::arg(a.z) < std::arg(b.z);
  };
  std::sort(s.zeros.begin(), s.zeros.end(), by_arg);
  std::sort(s.poles.begin(), s.poles.end(), by_arg);
  return s;
}

}  // namespace cmc
