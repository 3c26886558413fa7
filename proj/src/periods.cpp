#include "cmc/periods.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace cmc {

namespace {

double seg_clearance(cplx e, cplx a, cplx b) {
  const cplx d = b - a;
  const double t = std::clamp(((e - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
  return std::abs(e - (a + t * d));
}

double max_coeff(const SecondKindDifferential& w) {
  double m = 0.0;
  for (cplx x : w.c) m = std::max(m, std::abs(x));
  return m;
}

SecondKindDifferential solve_normalized(const CurveSpec& s, const CycleSet& cs, int refine, cplx c_minus,
                                        cplx c_top, const char* label) {
  const int g = s.genus();
  const auto A = a_moment_table(s, cs, refine);
  Eigen::MatrixXcd M(g, g);
  Eigen::VectorXcd rhs(g);
  for (int j = 0; j < g; ++j) {
    for (int k = 0; k < g; ++k) M(j, k) = A[size_t(j)][size_t(k + 1)];
    rhs(j) = -c_minus * A[size_t(j)][0] - c_top * A[size_t(j)][size_t(g + 1)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(g - 1) < 1e-12 * sv(0))
    throw Error("SingularPeriodSystem", "a-periods of the holomorphic differentials are degenerate");
  const Eigen::VectorXcd x = svd.solve(rhs);
  SecondKindDifferential w;
  w.genus = g;
  w.label = label;
  w.c.assign(size_t(g + 2), 0.0);
  w.c[0] = c_minus;
  for (int k = 0; k < g; ++k) w.c[size_t(k + 1)] = x(k);
  w.c[size_t(g + 1)] = c_top;
  return w;
}

}  // namespace

cplx SecondKindDifferential::numerator(cplx nu) const {
  // Horner on sum_{k=0}^{g} c_k nu^k, plus c_{-1}/nu
  cplx v = 0.0;
  for (int k = genus; k >= 0; --k) v = v * nu + coeff(k);
  if (coeff(-1) != 0.0) v += coeff(-1) / nu;
  return v;
}

bool SecondKindDifferential::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](cplx x) { return x == 0.0; });
}

SecondKindDifferential linear_combination(cplx a, const SecondKindDifferential& x, cplx b,
                                          const SecondKindDifferential& y, std::string label) {
  if (x.genus != y.genus) throw Error("BadInput", "differentials live on different curves");
  SecondKindDifferential r = x;
  r.label = std::move(label);
  for (size_t i = 0; i < r.c.size(); ++i) r.c[i] = a * x.c[i] + b * y.c[i];
  return r;
}

std::vector<std::vector<cplx>> a_moment_table(const CurveSpec& s, const CycleSet& cs, int refine) {
  std::vector<std::vector<cplx>> t;
  for (const auto& a : cs.a) t.push_back(cycle_moments(s, cs, a, -1, s.genus(), refine));
  return t;
}

SecondKindDifferential build_omega1(const CurveSpec& s, const CycleSet& cs, int refine) {
  return solve_normalized(s, cs, refine, 0.0, 0.5, "Omega1");
}

SecondKindDifferential build_omega2(const CurveSpec& s, const CycleSet& cs, int refine) {
  return solve_normalized(s, cs, refine, -0.5 * s.c0, 0.0, "Omega2");
}

SecondKindDifferential sigma_conjugate(const CurveSpec& s, const SecondKindDifferential& w) {
  // conj(sigma^* nu^k dnu/mu) = -c0 nu^{g-1-k} dnu/mu
  const int g = w.genus;
  SecondKindDifferential r;
  r.genus = g;
  r.label = w.label + "*";
  r.c.assign(w.c.size(), 0.0);
  for (int k = -1; k <= g; ++k) r.c[size_t(g - 1 - k + 1)] = -s.c0 * std::conj(w.coeff(k));
  return r;
}

SecondKindDifferential build_omega_q(const SecondKindDifferential& omega1, const SecondKindDifferential& omega2,
                                     cplx q) {
  return linear_combination(-std::conj(q), omega1, q, omega2, "omega");
}

std::vector<cplx> cycle_periods(const CurveSpec& s, const CycleSet& cs, const std::vector<CyclePath>& cycles,
                                const SecondKindDifferential& w, int refine) {
  std::vector<cplx> out;
  for (const auto& c : cycles) {
    const auto m = cycle_moments(s, cs, c, -1, w.genus, refine);
    cplx v = 0.0;
    for (size_t i = 0; i < w.c.size(); ++i) v += w.c[i] * m[i];
    out.push_back(v);
  }
  return out;
}

PrincipalPart principal_part(const CurveSpec& s, const SecondKindDifferential& w, bool at_infinity,
                             double radius) {
  double rmin = 1.0;
  for (cplx e : s.inner) rmin = std::min(rmin, std::abs(e));
  const double rho = radius > 0.0 ? radius : 0.5 * std::sqrt(rmin);
  const int n = 64;
  const int g = s.genus();
  PrincipalPart pp{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    const cplx t = std::polar(rho, 2 * kPi * (j + 0.5) / n);
    cplx dens;
    if (!at_infinity) {
      dens = w.density(t * t, mu_near_p0(s, t)) * 2.0 * t;
    } else {
      cplx mu = std::pow(t, -(2 * g + 1));
      for (cplx e : s.branch_points()) mu *= std::sqrt(1.0 - e * t * t);
      dens = w.density(1.0 / (t * t), mu) * (-2.0) / (t * t * t);
    }
    pp.second += dens * t * t;
    pp.residue += dens * t;
  }
  pp.second /= double(n);
  pp.residue /= double(n);
  return pp;
}

PeriodReport periods_U(const CurveSpec& s, const CycleSet& cs, const SecondKindDifferential& omega1,
                       const SecondKindDifferential& omega2, int refine) {
  PeriodReport r;
  r.U = cycle_periods(s, cs, cs.b, omega1, refine);
  r.V = cycle_periods(s, cs, cs.b, omega2, refine);
  for (size_t k = 0; k < r.U.size(); ++k) r.uv_gap = std::max(r.uv_gap, std::abs(r.V[k] - std::conj(r.U[k])));
  r.delaunay_phi = delaunay_phi(r.U);
  return r;
}

SymCheck check_sym_condition(const std::vector<cplx>& U, cplx q, double tol) {
  SymCheck r;
  r.pass = true;
  for (cplx u : U) {
    const double x = (q * std::conj(u)).imag() / kPi;
    const int m = int(std::lround(x));
    r.m.push_back(m);
    r.deviation.push_back(x - m);
    if (std::abs(x - m) >= tol) r.pass = false;
  }
  return r;
}

QSolution solve_q(const std::vector<cplx>& U, const std::vector<int>& m, double tol) {
  if (U.size() != m.size() || U.empty()) throw Error("BadInput", "need one integer per period");
  const int g = int(U.size());
  // Im((x + i y) conj(u)) = y Re u - x Im u
  Eigen::MatrixXd M(g, 2);
  Eigen::VectorXd rhs(g);
  for (int k = 0; k < g; ++k) {
    M(k, 0) = -U[size_t(k)].imag();
    M(k, 1) = U[size_t(k)].real();
    rhs(k) = kPi * m[size_t(k)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  QSolution out;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  if (sv(0) > 0.0) {
    const bool rank1 = sv.size() < 2 || sv(1) < 1e-10 * sv(0);
    const Eigen::VectorXd b = svd.matrixU().transpose() * rhs;
    x = svd.matrixV().col(0) * (b(0) / sv(0));
    if (!rank1) x += svd.matrixV().col(1) * (b(1) / sv(1));
    else out.free_dir = cplx(svd.matrixV()(0, 1), svd.matrixV()(1, 1));
  } else {
    out.free_dir = 1.0;  // every q solves the homogeneous system
  }
  out.residual = (M * x - rhs).norm() / kPi;
  if (out.residual > tol) throw Error("Inconsistent", "no q satisfies all period conditions");
  out.q = cplx(x(0), x(1));
  if (std::abs(out.q) == 0.0 && out.free_dir) out.q = *out.free_dir;
  return out;
}

std::vector<std::vector<double>> torus_matrix(cplx q1, cplx q2, cplx c, const std::vector<cplx>& U) {
  const double X[2] = {2 * q1.imag(), 2 * q2.imag()};
  const double Y[2] = {2 * q1.real(), 2 * q2.real()};
  std::vector<std::vector<double>> M(2);
  for (int j = 0; j < 2; ++j) {
    M[size_t(j)].push_back((X[j] * 2 * c.real() - Y[j] * 2 * c.imag()) / (2 * kPi));
    for (cplx u : U) M[size_t(j)].push_back((X[j] * u.real() - Y[j] * u.imag()) / (2 * kPi));
  }
  return M;
}

std::string torus_classify(const std::vector<std::vector<double>>& matrix, double omega1_value, double int_tol,
                           double zero_tol, double* deviation) {
  double dev = 0.0;
  for (const auto& row : matrix)
    for (double x : row) dev = std::max(dev, std::abs(x - std::round(x)));
  if (deviation) *deviation = dev;
  const bool int_ok = dev < int_tol, zero_ok = omega1_value < zero_tol;
  if (int_ok && zero_ok) return "torus-conditions-met";
  // near misses on either test are reported as undecided
  const bool int_near = dev < 10 * int_tol, zero_near = omega1_value < 1e3 * zero_tol;
  if (int_near && zero_near) return "inconclusive";
  return "no-torus";
}

cplx integral_to_branch(const CurveSpec& s, const SecondKindDifferential& w, cplx nu0, int sheet) {
  const auto E = s.finite_branch_points();
  int best = -1;
  double clearance = -1.0;
  for (int i = 0; i < int(E.size()); ++i) {
    if (i == 0 && w.coeff(-1) != 0.0) continue;  // pole at P0
    double c = 1e300;
    for (int j = 0; j < int(E.size()); ++j)
      if (j != i) c = std::min(c, seg_clearance(E[size_t(j)], E[size_t(i)], nu0));
    if (c > clearance) {
      clearance = c;
      best = i;
    }
  }
  if (best < 0 || clearance < 1e-6) throw Error("PathBlocked", "no straight path to a branch point clears the others");
  cplx mu_end;
  const auto nodes = branch_path_nodes(s, best, {nu0}, &mu_end, 1);
  const cplx I = integrate_nodes(nodes, [&](cplx nu, cplx mu) { return w.density(nu, mu); });
  const cplx target = curve_point(s, nu0, sheet).mu;
  const cplx to_point = std::abs(mu_end - target) < std::abs(mu_end + target) ? I : -I;
  return -to_point;
}

TorusVerdict check_torus(const CurveSpec& s, const SecondKindDifferential& omega1, const std::vector<cplx>& U,
                         cplx q1, cplx q2, std::optional<cplx> lambda0, double int_tol, double zero_tol) {
  if (std::abs((q1 * std::conj(q2)).imag()) < 1e-12 * std::abs(q1) * std::abs(q2))
    throw Error("BadInput", "q1 and q2 must be independent over the reals");
  TorusVerdict v;
  cplx nu0;
  if (lambda0) {
    nu0 = *lambda0 * *lambda0;
  } else {
    // zero of sum c_k nu^k closest to the unit circle, projected onto it
    Poly p;
    for (int k = 0; k <= omega1.genus; ++k) p.push_back(omega1.coeff(k));
    const auto roots = poly_roots(p);
    cplx best = 1.0;
    double gap = 1e300;
    for (cplx z : roots)
      if (std::abs(z) > 0 && std::abs(std::abs(z) - 1.0) < gap) {
        gap = std::abs(std::abs(z) - 1.0);
        best = z / std::abs(z);
      }
    nu0 = best;
    v.lambda0 = std::sqrt(best);
  }
  if (lambda0) v.lambda0 = lambda0;
  v.omega1_value = std::abs(omega1.numerator(nu0)) / max_coeff(omega1);
  v.c = integral_to_branch(s, omega1, nu0, 1);
  v.matrix = torus_matrix(q1, q2, v.c, U);
  v.verdict = torus_classify(v.matrix, v.omega1_value, int_tol, zero_tol, &v.integer_deviation);
  return v;
}

std::optional<double> delaunay_phi(const std::vector<cplx>& U, double tol) {
  double scale = 0.0;
  cplx umax = 0.0;
  for (cplx u : U)
    if (std::abs(u) > scale) {
      scale = std::abs(u);
      umax = u;
    }
  if (scale == 0.0) return 0.0;
  for (size_t j = 0; j < U.size(); ++j)
    for (size_t k = j + 1; k < U.size(); ++k)
      if (std::abs((U[j] * std::conj(U[k])).imag()) > tol * scale * scale) return std::nullopt;
  double phi = std::fmod(std::arg(umax), kPi);
  if (phi < 0) phi += kPi;
  if (phi > kPi - 1e-14) phi = 0.0;
  return phi;
}

std::pair<double, double> elliptic_KE(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw Error("ModulusOutOfRange", "elliptic modulus must lie in [0, 1)");
  double a = 1.0, b = std::sqrt((1.0 - k) * (1.0 + k)), c = k;
  double sum = 0.5 * c * c, pw = 0.5;
  for (int n = 0; n < 60 && std::abs(c) > 1e-17 * a; ++n) {
    c = 0.5 * (a - b);
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    pw *= 2.0;
    sum += pw * c * c;
  }
  const double K = kPi / (2.0 * a);
  return {K, K * (1.0 - sum)};
}

cplx genus1_omega1_c0(cplx nu1) {
  const double r = std::abs(nu1);
  auto [K, E] = elliptic_KE(std::sqrt((1.0 - r) * (1.0 + r)));
  return -std::polar(1.0, std::arg(nu1)) / (2.0 * r) * E / K;
}

}  // namespace cmc
