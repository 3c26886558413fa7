#include "cmc/construct.hpp"

#include <algorithm>
#include <cmath>

#include "cmc/parallel.hpp"

namespace cmc {

namespace {

RationalFn branch_denominator(const CurveSpec& s) {
  RationalFn d = RationalFn::constant(1.0);
  for (cplx w : s.branch_points()) d = d * RationalFn::linear(w);
  return d;
}

cplx prod_inner(const CurveSpec& s) {
  cplx p = 1.0;
  for (cplx w : s.inner) p *= w;
  return p;
}

std::vector<cplx> circle_points(int n, double phase = 0.0) {
  std::vector<cplx> pts(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) pts[size_t(k)] = std::polar(1.0, phase + 2 * kPi * k / n);
  return pts;
}

double seg_dist(cplx a, cplx b, cplx p) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(std::real((p - a) * std::conj(d)) / len2, 0.0, 1.0);
  return std::abs(a + t * d - p);
}

// Clearance of the polyline from the finite branch points; the endpoints themselves may be branch points.
double polyline_clearance(const std::vector<cplx>& pts, const std::vector<cplx>& branch, double skip_tol = 1e-12) {
  double best = 1e300;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    for (cplx e : branch) {
      const bool first_end = i == 0 && std::abs(e - pts.front()) < skip_tol;
      const bool last_end = i + 2 == pts.size() && std::abs(e - pts.back()) < skip_tol;
      if (first_end || last_end) continue;
      best = std::min(best, seg_dist(pts[i], pts[i + 1], e));
    }
  return best;
}

// Waypoint between a and b keeping the two-segment path clear of branch points.
cplx best_waypoint(cplx a, cplx b, const std::vector<cplx>& branch) {
  const cplx mid = 0.5 * (a + b), d = b - a;
  cplx best = mid;
  double score = -1.0;
  for (double t : {0.0, 0.3, -0.3, 0.6, -0.6, 1.0, -1.0, 1.5, -1.5}) {
    const cplx m = mid + kI * t * d;
    const double c = polyline_clearance({a, m, b}, branch);
    // straight path preferred unless a detour is clearly better
    if (c > score * 1.25 || (score < 0.0)) {
      score = c;
      best = m;
    }
  }
  return best;
}

}  // namespace

A0Result build_a0sq(const CurveSpec& s, std::optional<cplx> nu0) {
  const int g = s.genus();
  if (g < 1) throw Error("BadInput", "genus must be at least 1");
  A0Result r;
  const cplx w = prod_inner(s);
  if (g % 2 == 1) {
    if (nu0) throw Error("BadInput", "nu0 applies to even genus only");
    r.ahat2 = RationalFn::monomial(w, g) / branch_denominator(s);
  } else {
    if (!nu0) throw Error("MissingNu0", "even genus requires nu0 on the unit circle");
    if (std::abs(std::abs(*nu0) - 1.0) > 1e-12) throw Error("BadInput", "nu0 must have modulus 1");
    // gain conj(nu0) prod w: real on S^1 for every nu0 in S^1
    r.ahat2 = RationalFn::monomial(std::conj(*nu0) * w, g - 1) * pow(RationalFn::linear(*nu0), 2) /
              branch_denominator(s);
  }
  // sign on S^1
  double pos = 0.0, neg = 0.0;
  for (cplx x : circle_points(256, 0.01)) {
    const cplx v = r.ahat2.eval(x);
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v)))
      throw Error("ConstraintViolation", "a-hat^2 is not real on the unit circle");
    pos = std::max(pos, v.real());
    neg = std::max(neg, -v.real());
  }
  if (pos > 1e-12 && neg > 1e-12) throw Error("ConstraintViolation", "a-hat^2 changes sign on the unit circle");
  r.epsilon = neg > pos ? -1 : 1;
  r.a0sq = scale(r.ahat2, double(r.epsilon));
  return r;
}

RationalFn f_tilde_function(const std::map<int, cplx>& coeffs, int genus) {
  const int m = (genus - 1) / 2;
  double mx = 0.0;
  for (const auto& [k, c] : coeffs) {
    if (std::abs(k) > m && std::abs(c) != 0.0)
      throw Error("InadmissibleFTilde", "f~ has a pole of order " + std::to_string(std::abs(k)) +
                                            " at nu = 0; at most " + std::to_string(m) + " allowed");
    mx = std::max(mx, std::abs(c));
  }
  if (mx == 0.0) throw Error("InadmissibleFTilde", "f~ vanishes identically");
  for (const auto& [k, c] : coeffs) {
    auto it = coeffs.find(-k);
    const cplx partner = it == coeffs.end() ? cplx(0.0) : it->second;
    if (std::abs(partner - std::conj(c)) > 1e-12 * mx)
      throw Error("InadmissibleFTilde", "f~ is not real on the unit circle (coefficient " + std::to_string(k) + ")");
  }
  std::map<int, cplx> nz;
  for (const auto& [k, c] : coeffs)
    if (std::abs(c) != 0.0) nz[k] = c;
  return RationalFn::from_laurent(nz);
}

double sup_on_circle(const RationalFn& f) {
  const int n = 512;
  auto val = [&](double t) { return f.eval(std::polar(1.0, t)).real(); };
  int kbest = 0;
  double best = -1e300;
  for (int k = 0; k < n; ++k) {
    const double v = val(2 * kPi * k / n);
    if (v > best) {
      best = v;
      kbest = k;
    }
  }
  // golden-section refinement on the bracketing cell
  double lo = 2 * kPi * (kbest - 1) / n, hi = 2 * kPi * (kbest + 1) / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = val(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = val(x2);
    }
  }
  return std::max({best, f1, f2});
}

A2Result build_a2(const FamilyParams& fp) {
  const int g = fp.curve.genus();
  A2Result r;
  std::optional<cplx> nu0 = fp.nu0;
  if (g % 2 == 0 && !nu0) nu0 = cplx(1.0);
  r.a0 = build_a0sq(fp.curve, nu0);
  const RationalFn ft = f_tilde_function(fp.f_tilde, g);
  const RationalFn base = pow(ft, 2) * r.a0.a0sq;
  for (const auto& p : base.poles) {
    bool at_branch = false;
    for (cplx w : fp.curve.branch_points()) at_branch = at_branch || std::abs(p.z - w) < 1e-9;
    if (!at_branch) throw Error("InadmissibleFTilde", "f~^2 a0^2 has a pole away from the branch points");
  }
  r.sup = sup_on_circle(base);
  if (!(r.sup > 0.0)) throw Error("ConstraintViolation", "a^2 vanishes identically on the unit circle");
  r.scale = fp.scale ? *fp.scale : 0.99 / r.sup;
  if (!(r.scale > 0.0)) throw Error("BadInput", "scale must be positive");
  if (r.scale * r.sup >= 1.0)
    throw Error("ConstraintViolation", "scale gives sup a^2 = " + std::to_string(r.scale * r.sup) + " >= 1");
  r.a2 = scale(base, r.scale);
  return r;
}

BCResult build_b2_c2(const CurveSpec& s, const RationalFn& a2) {
  BCResult out;
  const RationalFn one_minus = simplify(add(RationalFn::constant(1.0), scale(a2, -1.0)));
  if (one_minus.nu_power != 0) throw Error("ConstraintViolation", "1 - a^2 must be finite and nonzero at nu = 0");

  // zeros of 1 - a^2: tau-paired z <-> 1/conj(z), matched greedily
  std::vector<Root> inner, outer;
  for (const auto& z : one_minus.zeros) {
    const double m = std::abs(z.z);
    if (std::abs(m - 1.0) < 1e-10) throw Error("ConstraintViolation", "1 - a^2 vanishes on the unit circle");
    (m < 1.0 ? inner : outer).push_back(z);
  }
  std::vector<bool> used(outer.size(), false);
  for (const auto& z : inner) {
    const cplx want = 1.0 / std::conj(z.z);
    int hit = -1;
    double bestd = 1e300;
    for (size_t j = 0; j < outer.size(); ++j) {
      if (used[j] || outer[j].mult != z.mult) continue;
      const double d = std::abs(outer[j].z - want);
      if (d < bestd) {
        bestd = d;
        hit = int(j);
      }
    }
    if (hit < 0 || bestd > 1e-8 * std::max(1.0, std::abs(want)))
      throw Error("RootPairingFailure", "zero of 1 - a^2 without its reflected partner");
    used[size_t(hit)] = true;
  }
  if (std::count(used.begin(), used.end(), false) != 0)
    throw Error("RootPairingFailure", "unpaired zeros of 1 - a^2 outside the disk");

  RationalFn bt = RationalFn::constant(1.0);
  for (const auto& z : inner) {
    out.inner_zeros.push_back(z.z);
    bt = bt * pow(RationalFn::linear(z.z), 2 * z.mult);
  }
  // poles of a^2 must be simple and at branch points
  auto pole_at = [&](cplx w) {
    for (const auto& p : a2.poles)
      if (std::abs(p.z - w) < 1e-9 * std::max(1.0, std::abs(w))) {
        if (p.mult != 1) throw Error("ConstraintViolation", "a^2 has a pole of order > 1 (non-generic data)");
        return true;
      }
    return false;
  };
  for (const auto& p : a2.poles) {
    bool ok = false;
    for (cplx w : s.branch_points()) ok = ok || std::abs(p.z - w) < 1e-9 * std::max(1.0, std::abs(w));
    if (!ok) throw Error("InadmissibleFTilde", "a^2 has a pole away from the branch points");
  }
  for (int k = 0; k < s.genus(); ++k) {
    const cplx w = s.inner[size_t(k)], wo = s.outer(k);
    const bool pi = pole_at(w), po = pole_at(wo);
    if (pi != po) throw Error("ConstraintViolation", "a^2 is not real on the unit circle");
    if (pi) {
      bt = bt / (RationalFn::linear(w) * RationalFn::linear(wo));
      ++out.K;
    } else {
      bt = bt * RationalFn::linear(w) / RationalFn::linear(wo);
    }
  }
  out.b2_tilde = bt;

  // delta = (1 - a^2)^2 / (b~^2 (b~^2)^*) is a positive constant
  const RationalFn bts = star(bt);
  const cplx probes[] = {cplx(0.37, 0.21), cplx(-0.52, 0.61), cplx(1.7, -0.4), cplx(0.05, -0.9), cplx(-2.3, -1.1)};
  std::vector<cplx> vals;
  for (cplx x : probes) {
    const cplx om = one_minus.eval(x);
    vals.push_back(om * om / (bt.eval(x) * bts.eval(x)));
  }
  cplx mean = 0.0;
  for (cplx v : vals) mean += v;
  mean /= double(vals.size());
  double spread = 0.0;
  for (cplx v : vals) spread = std::max(spread, std::abs(v - mean));
  if (spread > 1e-8 * std::abs(mean) || std::abs(mean.imag()) > 1e-8 * std::abs(mean) || mean.real() <= 0.0)
    throw Error("ConstraintViolation", "(1 - a^2)^2 / (b~^2 b~^2*) is not a positive constant");
  out.delta = mean.real();
  out.b2 = scale(bt, std::sqrt(out.delta));
  out.c2 = star(out.b2);

  double gap = 0.0;
  for (double rad : {0.7, 1.0, 1.3})
    for (cplx x : circle_points(16, 0.123)) {
      const cplx nu = rad * x;
      const cplx om = one_minus.eval(nu);
      gap = std::max(gap, std::abs(out.b2.eval(nu) * out.c2.eval(nu) - om * om) / std::max(1.0, std::abs(om * om)));
    }
  out.identity_gap = gap;
  return out;
}

cplx CurveSqrt::over_mu(cplx lambda) const {
  const cplx y = Y.eval(lambda * lambda);
  return e == 1 ? sign * lambda * y : sign * y;
}

cplx CurveSqrt::at(cplx lambda, cplx mu) const { return over_mu(lambda) / mu; }

cplx CurveSqrt::on_disk(const CurveSpec& s, cplx lambda) const {
  // mu_near_p0 / lambda, so that lambda = 0 needs no limit
  const cplx nu = lambda * lambda;
  cplx m = s.c0;
  for (cplx w : s.branch_points()) m *= std::sqrt(1.0 - nu / w);
  const cplx y = sign * Y.eval(nu) / m;
  if (e == 1) return y;
  if (lambda == cplx(0.0)) return 0.0;
  return y / lambda;
}

CurveSqrt curve_sqrt(const CurveSpec& s, const RationalFn& x2) {
  CurveSqrt r;
  r.e = ((x2.nu_power + 1) % 2 + 2) % 2;
  RationalFn y2 = x2 * RationalFn::monomial(1.0, 1 - r.e) * branch_denominator(s);
  y2 = simplify(y2, 1e-9);
  if (y2.nu_power % 2 != 0) throw Error("SqrtBranchFailure", "odd order at nu = 0 after clearing the curve");
  RationalFn y;
  y.gain = std::sqrt(y2.gain);
  y.nu_power = y2.nu_power / 2;
  for (const auto& z : y2.zeros) {
    if (z.mult % 2) throw Error("SqrtBranchFailure", "zero of odd multiplicity; no square root on the curve");
    y.zeros.push_back({z.z, z.mult / 2});
  }
  for (const auto& p : y2.poles) {
    if (p.mult % 2) throw Error("SqrtBranchFailure", "pole of odd multiplicity; no square root on the curve");
    y.poles.push_back({p.z, p.mult / 2});
  }
  r.Y = y;
  return r;
}

PFunction::PFunction(const CurveSpec& s, const SecondKindDifferential& omega, cplx q, int n_terms)
    : s_(s), w_(omega), q_(q) {
  const int g = s.genus();
  rho_ = 1e300;
  for (cplx w : s.inner) rho_ = std::min(rho_, std::abs(w));
  r0_ = std::sqrt(rho_);
  const int N = std::max(n_terms, g + 8);
  const auto bp = s.branch_points();
  // scaled log coefficients of R(nu) = prod (1 - nu/nu_j)^{-1/2}
  std::vector<cplx> L(static_cast<size_t>(N), 0.0), R(static_cast<size_t>(N), 0.0);
  for (int n = 1; n < N; ++n) {
    cplx acc = 0.0;
    for (cplx w : bp) acc += std::pow(rho_ / w, n);
    L[size_t(n)] = acc / (2.0 * n);
  }
  R[0] = 1.0;
  for (int n = 1; n < N; ++n) {
    cplx acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += double(k) * L[size_t(k)] * R[size_t(n - k)];
    R[size_t(n)] = acc / double(n);
  }
  // G~_m = sum_k d_k rho^k R~_{m-k}, m = -1 .. N-2
  G_.assign(static_cast<size_t>(N), 0.0);
  for (int m = -1; m <= N - 2; ++m) {
    cplx acc = 0.0;
    for (int k = -1; k <= g; ++k) {
      if (m - k < 0) continue;
      acc += omega.coeff(k) * std::pow(rho_, k) * R[size_t(m - k)];
    }
    G_[size_t(m + 1)] = acc;
  }
  for (int m = 0; m < std::min(64, N - 1); ++m) {
    cplx f = 2.0 / s.c0 * G_[size_t(m + 1)] * std::pow(rho_, -m) / double(2 * m + 1);
    if (m == 0) f += std::conj(q);
    if (!std::isfinite(std::abs(f))) break;
    fplus_.push_back(f);
  }

  // constant of integration: path value against the series at an interior point
  const cplx ls = std::polar(0.5 * r0_, 0.3);
  cplx mu_end = 0.0;
  cplx I = path_integral(ls * ls, &mu_end);
  const cplx mu_s = mu_near_p0(s, ls);
  if (std::abs(mu_end + mu_s) < std::abs(mu_end - mu_s)) I = -I;
  const cplx C = I - series(ls);
  const double k = std::round(C.imag() / kPi);
  if (std::abs(C - kI * kPi * k) > 1e-7 * std::max(1.0, std::abs(C)))
    throw Error("QNotAdmissible", "p is not single-valued up to i pi Z: offset " + std::to_string(C.real()) + " + " +
                                      std::to_string(C.imag()) + "i");
  C_ = kI * kPi * k;
}

cplx PFunction::series(cplx lambda) const {
  if (std::abs(lambda) >= r0_) throw Error("OutOfDisk", "series evaluation outside the branch-point-free disk");
  if (lambda == cplx(0.0)) throw Error("EvalAtZero", "p has a pole at P0");
  const cplx x = lambda * lambda / rho_;
  cplx acc = 0.0;
  for (int m = int(G_.size()) - 2; m >= 0; --m) acc = acc * x + G_[size_t(m + 1)] / double(2 * m + 1);
  acc -= G_[0] / x;
  return 2.0 / s_.c0 * lambda * acc;
}

cplx PFunction::f_plus(cplx lambda) const {
  if (lambda == cplx(0.0)) return 0.0;
  return series(lambda) - q_ / lambda + std::conj(q_) * lambda;
}

cplx PFunction::path_integral(cplx nu, cplx* mu_out) const {
  const auto fb = s_.finite_branch_points();
  const cplx start = fb[1];
  if (std::abs(nu - start) < 1e-14) {
    *mu_out = 0.0;
    return 0.0;
  }
  const cplx m = best_waypoint(start, nu, fb);
  auto nodes = branch_path_nodes(s_, 1, {m, nu}, mu_out);
  return integrate_nodes(nodes, [&](cplx x, cplx mu) { return w_.density(x, mu); });
}

cplx PFunction::at(cplx nu, cplx* mu_out) const {
  cplx mu = 0.0;
  const cplx I = path_integral(nu, &mu);
  if (mu_out) *mu_out = mu;
  return I - C_;
}

cplx PFunction::at_branch(int k) const {
  const auto fb = s_.finite_branch_points();
  if (k < 1 || k >= int(fb.size())) throw Error("BadInput", "branch index out of range");
  if (k == 1) return -C_;
  const cplx m = best_waypoint(fb[1], fb[size_t(k)], fb);
  cplx mu1 = 0.0, mu2 = 0.0;
  auto f = [&](cplx x, cplx mu) { return w_.density(x, mu); };
  const cplx I1 = integrate_nodes(branch_path_nodes(s_, 1, {m}, &mu1), f);
  const cplx I2 = integrate_nodes(branch_path_nodes(s_, k, {m}, &mu2), f);
  // the second leg runs backwards; on the opposite sheet the density flips sign
  const bool same = std::abs(mu2 - mu1) < std::abs(mu2 + mu1);
  return I1 + (same ? -I2 : I2) - C_;
}

ConstructedData assemble_family(const FamilyParams& fp) {
  ConstructedData cd;
  cd.params = fp;
  const CurveSpec& s = fp.curve;
  const int g = s.genus();
  if (g < 1) throw Error("BadInput", "genus must be at least 1");

  cd.a = build_a2(fp);
  cd.a2 = cd.a.a2;
  cd.bc = build_b2_c2(s, cd.a2);
  cd.b2 = cd.bc.b2;
  cd.c2 = cd.bc.c2;

  cd.cycles = build_cycles(s);
  cd.omega1 = build_omega1(s, cd.cycles);
  cd.omega2 = build_omega2(s, cd.cycles);
  cd.omega = build_omega_q(cd.omega1, cd.omega2, fp.q);
  cd.periods = periods_U(s, cd.cycles, cd.omega1, cd.omega2);
  cd.sym = check_sym_condition(cd.periods.U, fp.q);
  if (!cd.sym.pass) throw Error("QNotAdmissible", "q fails the period condition");

  cd.ya = curve_sqrt(s, cd.a2);
  cd.yb = curve_sqrt(s, cd.b2);
  cd.yc = curve_sqrt(s, cd.c2);
  cd.r0 = std::sqrt(std::abs(s.inner.empty() ? cplx(1.0) : s.inner[0]));
  for (cplx w : s.inner) cd.r0 = std::min(cd.r0, std::sqrt(std::abs(w)));
  cd.r_final = 0.8 * cd.r0;
  if (cd.r_final < 1e-2) throw Error("RadiusCollapse", "branch points too close to 0 for a working radius");

  // signs: a/lambda -> Re >= 0, Re b(0) > 0, b(0) c(0) = 1
  const cplx tiny = 1e-4 * cd.r0;
  const cplx a1 = cd.ya.on_disk(s, tiny) / tiny;
  if (a1.real() < 0.0 || (a1.real() == 0.0 && a1.imag() < 0.0)) cd.ya.sign = -1.0;
  const cplx b0 = cd.yb.on_disk(s, tiny);
  if (b0.real() < 0.0 || (std::abs(b0.real()) < 1e-14 * std::abs(b0) && b0.imag() < 0.0)) cd.yb.sign = -1.0;
  const cplx bc0 = cd.yb.on_disk(s, tiny) * cd.yc.on_disk(s, tiny);
  if (bc0.real() < 0.0) cd.yc.sign = -1.0;

  cd.p = std::make_shared<PFunction>(s, cd.omega, fp.q);

  // single-valuedness of cosh p, sinh p
  double gap = 0.0;
  for (const auto* cyc : {&cd.cycles.a, &cd.cycles.b})
    for (cplx per : cycle_periods(s, cd.cycles, *cyc, cd.omega)) gap = std::max(gap, std::abs(std::exp(per) - 1.0));
  cd.omega_period_gap = gap;
  double bmax = 0.0;
  for (int k = 1; k <= 2 * g; ++k) bmax = std::max(bmax, std::abs(std::sinh(cd.p->at_branch(k))));
  cd.beta_at_branch = bmax;

  SymmetryData& sd = cd.sd;
  sd.q = fp.q;
  sd.a2 = cd.a2;
  sd.b2 = cd.b2;
  sd.c2 = cd.c2;
  sd.r = cd.r_final;
  const CurveSpec sc = s;
  const CurveSqrt ya = cd.ya, yb = cd.yb, yc = cd.yc;
  sd.a = [sc, ya](cplx l) { return ya.on_disk(sc, l); };
  sd.b = [sc, yb](cplx l) { return yb.on_disk(sc, l); };
  sd.c = [sc, yc](cplx l) { return yc.on_disk(sc, l); };
  auto pf = cd.p;
  sd.f_plus = [pf](cplx l) { return pf->f_plus(l); };
  const double r_series = 0.9 * cd.r0;
  sd.two_sided = [sc, ya, yb, yc, pf, r_series](cplx l) {
    TwoSided t;
    cplx p, mu;
    if (std::abs(l) < r_series) {
      p = pf->series(l);
      mu = mu_near_p0(sc, l);
    } else {
      p = pf->at(l * l, &mu);
    }
    const cplx sh = std::sinh(p);
    t.alpha = std::cosh(p);
    t.beta2 = sh * sh;
    t.beta_a = sh * ya.at(l, mu);
    t.beta_b = sh * yb.at(l, mu);
    t.beta_c = sh * yc.at(l, mu);
    return t;
  };

  cd.hplus = build_hplus(sd.a, sd.b, sd.c, cd.r_final);
  return cd;
}

FamilyCheck check_family(const ConstructedData& cd, const std::vector<cplx>& zs, const DressOptions& opt) {
  FamilyCheck fc;
  Dresser d(cd.hplus.loop, opt);
  const ChiMatrix chi = build_chi(cd.sd);
  fc.chi_unitarity = chi.unitarity;
  fc.translation_residual = verify_translation(d, cd.params.q, chi, zs).residual;
  std::vector<double> du(zs.size(), 0.0);
  parallel_for(zs.size(), [&](size_t i) {
    du[i] = std::abs(metric_u_at(d, zs[i] + cd.params.q, opt.H) - metric_u_at(d, zs[i], opt.H));
  });
  for (double v : du) fc.u_variation = std::max(fc.u_variation, v);
  fc.validated = validate_necessary(cd.sd).all_pass;
  return fc;
}

}  // namespace cmc
