#include "cmc/symmetry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cmc/fourier.hpp"
#include "cmc/parallel.hpp"

namespace cmc {

namespace {

// sqrt(c) continued along the ray [0, lambda]
cplx ray_sqrt(const ScalarFn& c, cplx lambda, int steps = 24) {
  cplx s = std::sqrt(c(0.0));
  for (int k = 1; k <= steps; ++k) {
    const cplx v = std::sqrt(c(lambda * (double(k) / steps)));
    s = std::abs(v - s) <= std::abs(v + s) ? v : -v;
  }
  return s;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

SymmetryData cylinder_symmetry(cplx q, double r) {
  SymmetryData sd;
  sd.q = q;
  sd.r = r;
  sd.a = [](cplx) { return cplx(0.0); };
  sd.b = [](cplx) { return cplx(1.0); };
  sd.c = [](cplx) { return cplx(1.0); };
  sd.f_plus = [](cplx) { return cplx(0.0); };
  sd.two_sided = [q](cplx l) {
    const cplx p = q / l - l * std::conj(q);
    TwoSided t;
    t.alpha = std::cosh(p);
    const cplx s = std::sinh(p);
    t.beta2 = s * s;
    t.beta_b = t.beta_c = s;
    return t;
  };
  return sd;
}

Mat2 s_matrix(const SymmetryData& sd, cplx lambda) {
  Mat2 S;
  const cplx a = sd.a(lambda);
  S << a, sd.b(lambda), sd.c(lambda), -a;
  return S;
}

Mat2 chi_value(const TwoSided& t) {
  Mat2 m;
  m << t.alpha + t.beta_a, t.beta_b, t.beta_c, t.alpha - t.beta_a;
  return m;
}

HPlus build_hplus(const ScalarFn& a, const ScalarFn& b, const ScalarFn& c, double r, int n_samples) {
  std::vector<std::string> bad;
  const cplx b0 = b(0.0), c0 = c(0.0);
  if (std::abs(b0) < 1e-12) bad.push_back("b(0) = 0");
  if (std::abs(c0) < 1e-12) bad.push_back("c(0) = 0");
  double rel = 0.0, par = 0.0;
  const auto nodes = circle_nodes(n_samples, r);
  for (cplx l : nodes) {
    const cplx av = a(l), bv = b(l), cv = c(l);
    rel = std::max(rel, std::abs(av * av + bv * cv - 1.0) / std::max(1.0, std::abs(av * av)));
    par = std::max({par, std::abs(a(-l) + av), std::abs(b(-l) - bv), std::abs(c(-l) - cv)});
  }
  if (rel > 1e-10) bad.push_back("a^2 + bc = 1 fails by " + fmt(rel));
  if (par > 1e-10 * std::max(1.0, std::abs(b0))) bad.push_back("parity (a odd, b and c even) fails by " + fmt(par));
  if (!bad.empty()) {
    std::string msg;
    for (auto& s : bad) msg += (msg.empty() ? "" : "; ") + s;
    throw Error("ConstraintViolation", msg);
  }
  // c must not wind around 0 on C_r, otherwise sqrt(c) is not single-valued on the disk
  const int Mw = 512;
  double wind = 0.0;
  cplx prev = c(r);
  for (int k = 1; k <= Mw; ++k) {
    const cplx cur = c(std::polar(r, 2 * kPi * k / Mw));
    wind += std::arg(cur / prev);
    prev = cur;
  }
  if (std::abs(wind) > kPi) throw Error("SqrtBranchFailure", "c winds around 0 on C_r; shrink r");

  HPlus h;
  h.r = r;
  h.fn = [a, c](cplx l) {
    const cplx s = ray_sqrt(c, l);
    Mat2 m;
    m << 1.0 / s, a(l) / s, 0.0, s;
    return m;
  };
  Samples sm(static_cast<size_t>(n_samples));
  for (size_t j = 0; j < nodes.size(); ++j) {
    sm[j] = h.fn(nodes[j]);
    Mat2 S;
    S << a(nodes[j]), b(nodes[j]), c(nodes[j]), -a(nodes[j]);
    h.conj_residual = std::max(h.conj_residual, maxabs(sm[j] * mat_A() * inv2(sm[j]) - S));
  }
  h.loop = loop_from_samples(sm, r, r, n_samples / 2 - 1, 1e-16, true);
  // negative degrees are aliasing and rounding only
  for (auto it = h.loop.coeffs.begin(); it != h.loop.coeffs.end();) {
    if (it->first < 0) {
      h.negative_tail = std::max(h.negative_tail, maxabs(it->second) * std::pow(r, it->first));
      it = h.loop.coeffs.erase(it);
    } else {
      ++it;
    }
  }
  return h;
}

ChiMatrix build_chi(const SymmetryData& sd, int M, double tol) {
  ChiMatrix chi;
  chi.q = sd.q;
  auto ts = sd.two_sided;
  chi.eval = [ts](cplx l) { return chi_value(ts(l)); };
  const auto nodes = circle_nodes(M, 1.0);
  std::vector<TwoSided> vals(nodes.size());
  parallel_for(nodes.size(), [&](size_t j) { vals[j] = ts(nodes[j]); });
  Samples s(nodes.size());
  double alpha_im = 0.0, beta2_pos = 0.0, ha = 0.0, hbc = 0.0, scale = 1.0;
  for (size_t j = 0; j < nodes.size(); ++j) {
    const auto& t = vals[j];
    s[j] = chi_value(t);
    chi.unitarity = std::max(chi.unitarity, maxabs(s[j].adjoint() * s[j] - Mat2::Identity()));
    chi.trace_gap = std::max(chi.trace_gap, std::abs(0.5 * s[j].trace() - t.alpha));
    scale = std::max(scale, std::abs(t.alpha));
    alpha_im = std::max(alpha_im, std::abs(t.alpha.imag()));
    beta2_pos = std::max(beta2_pos, t.beta2.real());
    // on S^1: (beta a)^* = -(beta a) means beta a is imaginary; (beta c)^* = -(beta b) means beta c = -conj(beta b)
    ha = std::max(ha, std::abs(t.beta_a.real()));
    hbc = std::max(hbc, std::abs(t.beta_c + std::conj(t.beta_b)));
  }
  auto coeffs = dft(s);
  double cmax = 0.0, tm = 0.0, tp = 0.0;
  for (int k = 0; k < M; ++k) {
    const int n = bin_degree(k, M);
    const double v = maxabs(coeffs[size_t(k)]);
    cmax = std::max(cmax, v);
    if (n <= -M / 4) tm = std::max(tm, v);
    if (n >= M / 4) tp = std::max(tp, v);
  }
  chi.tail_minus = cmax > 0 ? tm / cmax : 0.0;
  chi.tail_plus = cmax > 0 ? tp / cmax : 0.0;
  chi.laurent = loop_from_samples(s, 1.0, 1.0, M / 2 - 1, 1e-17, true);
  if (chi.unitarity > tol * scale * scale) {
    std::string why;
    if (alpha_im > tol * scale) why += " b') alpha not real on S^1 (" + fmt(alpha_im) + ");";
    if (beta2_pos > tol * scale * scale) why += " c') beta^2 positive on S^1 (" + fmt(beta2_pos) + ");";
    if (ha > tol * scale || hbc > tol * scale) why += " d') beta a, beta b, beta c violate the reality pairing;";
    if (chi.tail_minus > 1e-6 || chi.tail_plus > 1e-6) why += " a') Laurent tails do not decay;";
    if (why.empty()) why = " unitarity defect " + fmt(chi.unitarity);
    throw Error("NonUnitary", "chi is not unitary on S^1:" + why);
  }
  return chi;
}

const ConditionResult* NecessaryReport::find(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.name == name) return &c;
  return nullptr;
}

NecessaryReport validate_necessary(const SymmetryData& sd, double tol) {
  NecessaryReport rep;
  auto add = [&](std::string name, double residual, double limit, std::string note = "") {
    ConditionResult c{std::move(name), residual <= limit, residual, std::move(note)};
    rep.all_pass = rep.all_pass && c.pass;
    rep.conditions.push_back(std::move(c));
  };
  const int Md = 64, Ms = 512;
  const auto disk = circle_nodes(Md, sd.r);
  const auto circle = circle_nodes(Ms, 1.0);

  add("a_rational", 0.0, tol, "exact: a^2, b^2, c^2 are stored as rational functions");

  double par = 0.0, abc = 0.0, sq = 0.0;
  for (cplx l : disk) {
    const cplx av = sd.a(l), bv = sd.b(l), cv = sd.c(l);
    par = std::max({par, std::abs(sd.a(-l) + av), std::abs(sd.b(-l) - bv), std::abs(sd.c(-l) - cv)});
    abc = std::max(abc, std::abs(av * av + bv * cv - 1.0));
    const cplx nu = l * l;
    sq = std::max({sq, std::abs(av * av - sd.a2.eval(nu)), std::abs(bv * bv - sd.b2.eval(nu)),
                   std::abs(cv * cv - sd.c2.eval(nu))});
  }
  add("b_parity", par, tol);
  add("c_abc", abc, tol);
  add("roots_match_squares", sq, tol, "a, b, c square to a^2, b^2, c^2 on C_r");

  double a_im = 0.0, a_lo = 0.0, a_hi = 0.0, e_gap = 0.0;
  const RationalFn b2s = star(sd.b2);
  for (cplx l : circle) {
    const cplx nu = l * l;
    const cplx a2 = sd.a2.eval(nu);
    a_im = std::max(a_im, std::abs(a2.imag()));
    a_lo = std::max(a_lo, -a2.real());
    a_hi = std::max(a_hi, a2.real() - 1.0);
    e_gap = std::max(e_gap, std::abs(sd.c2.eval(nu) - b2s.eval(nu)));
  }
  add("d_a2_real_in_unit_interval", std::max({a_im, a_lo, a_hi}), tol);
  add("e_c2_star_b2", e_gap, tol);

  // two-sided data: reality on S^1 and Laurent-tail decay on S^1 and on C_r
  std::vector<TwoSided> on_s1(circle.size()), on_cr(disk.size());
  parallel_for(circle.size(), [&](size_t j) { on_s1[j] = sd.two_sided(circle[j]); });
  parallel_for(disk.size(), [&](size_t j) { on_cr[j] = sd.two_sided(disk[j]); });
  double im_ab = 0.0, b2pos = 0.0, pairing = 0.0, scale = 1.0, a_beta_zero = 0.0;
  for (const auto& t : on_s1) {
    scale = std::max({scale, std::abs(t.alpha), std::abs(t.beta2)});
    im_ab = std::max({im_ab, std::abs(t.alpha.imag()), std::abs(t.beta2.imag())});
    b2pos = std::max(b2pos, t.beta2.real());
    pairing = std::max({pairing, std::abs(t.beta_a.real()), std::abs(t.beta_c + std::conj(t.beta_b))});
    a_beta_zero = std::max(a_beta_zero, std::abs(t.beta_a));
  }
  auto tail = [&](auto get) {
    std::vector<cplx> v(on_s1.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = get(on_s1[j]);
    auto c = dft(v);
    double mx = 0.0, tl = 0.0;
    const int M = int(c.size());
    for (int k = 0; k < M; ++k) {
      mx = std::max(mx, std::abs(c[size_t(k)]));
      if (std::abs(bin_degree(k, M)) >= M / 4) tl = std::max(tl, std::abs(c[size_t(k)]));
    }
    return mx > 0 ? tl / mx : 0.0;
  };
  // agreement of the low Laurent coefficients read off S^1 and C_r (holomorphy on the annulus)
  auto annulus = [&](auto get) {
    std::vector<cplx> v1(on_s1.size()), vr(on_cr.size());
    for (size_t j = 0; j < v1.size(); ++j) v1[j] = get(on_s1[j]);
    for (size_t j = 0; j < vr.size(); ++j) vr[j] = get(on_cr[j]);
    auto c1 = dft(v1), cr = dft(vr);
    double gap = 0.0, mx = 1e-300;
    for (int n = -6; n <= 6; ++n) {
      const cplx x1 = c1[size_t(degree_bin(n, int(c1.size())))];
      const cplx xr = cr[size_t(degree_bin(n, Md))] * std::pow(sd.r, -n);
      gap = std::max(gap, std::abs(x1 - xr));
      mx = std::max(mx, std::abs(x1));
    }
    return gap / std::max(1.0, mx);
  };
  const double t_alpha = std::max(tail([](const TwoSided& t) { return t.alpha; }),
                                  tail([](const TwoSided& t) { return t.beta2; }));
  const double an_alpha = std::max(annulus([](const TwoSided& t) { return t.alpha; }),
                                   annulus([](const TwoSided& t) { return t.beta2; }));
  add("a'_alpha_beta2_on_Cstar", std::max(t_alpha, an_alpha), 1e-6, "tail decay and annulus agreement");
  add("b'_alpha_beta2_real", im_ab, tol * scale);
  add("c'_beta2_nonpositive", b2pos, tol * scale);
  double t_hat = 0.0, an_hat = 0.0;
  for (auto get : {+[](const TwoSided& t) { return t.beta_a; }, +[](const TwoSided& t) { return t.beta_b; },
                   +[](const TwoSided& t) { return t.beta_c; }}) {
    t_hat = std::max(t_hat, tail(get));
    an_hat = std::max(an_hat, annulus(get));
  }
  add("d'_beta_abc_on_Cstar", std::max(t_hat, an_hat), 1e-6,
      a_beta_zero == 0.0 ? "beta a vanishes identically (a = 0 branch)" : "");
  add("chi_reality_pairing", pairing, tol * scale, "(beta a)^* = -beta a, (beta c)^* = -beta b on S^1");
  return rep;
}

TranslationCheck verify_translation(const Dresser& d, cplx q, const ChiMatrix& chi, const std::vector<cplx>& zs,
                                    int n_lambda) {
  TranslationCheck out;
  std::vector<double> res(zs.size(), 0.0);
  std::vector<cplx> lams;
  std::vector<Mat2> chis;
  for (int k = 0; k < n_lambda; ++k) {
    lams.push_back(std::polar(1.0, 0.13 + 2 * kPi * k / n_lambda));
    chis.push_back(chi.eval(lams.back()));
  }
  parallel_for(zs.size(), [&](size_t i) {
    const auto F0 = d.frame_loop(zs[i]);
    const auto F1 = d.frame_loop(zs[i] + q);
    for (size_t k = 0; k < lams.size(); ++k)
      res[i] = std::max(res[i], maxabs(F1.eval(lams[k]) - chis[k] * F0.eval(lams[k])));
  });
  for (double r : res) out.residual = std::max(out.residual, r);
  out.pairs = int(zs.size());
  return out;
}

TranslationCheck verify_translation(const FrameGrid& fg, cplx q, const ChiMatrix& chi, int n_lambda) {
  const auto& g = fg.grid;
  const int di = int(std::lround(q.real() / g.dx)), dj = int(std::lround(q.imag() / g.dy));
  TranslationCheck out;
  out.snap_error = std::abs(q - cplx(di * g.dx, dj * g.dy));
  std::vector<cplx> lams;
  std::vector<Mat2> chis;
  for (int k = 0; k < n_lambda; ++k) {
    lams.push_back(std::polar(1.0, 0.13 + 2 * kPi * k / n_lambda));
    chis.push_back(chi.eval(lams.back()));
  }
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int i2 = i + di, j2 = j + dj;
      if (i2 < 0 || j2 < 0 || i2 >= g.nx || j2 >= g.ny) continue;
      ++out.pairs;
      const auto& F0 = fg.frames[size_t(g.index(i, j))];
      const auto& F1 = fg.frames[size_t(g.index(i2, j2))];
      for (size_t k = 0; k < lams.size(); ++k)
        out.residual = std::max(out.residual, maxabs(F1.eval(lams[k]) - chis[k] * F0.eval(lams[k])));
    }
  if (out.pairs == 0) throw Error("GridTooSmall", "no grid point pairs differ by the translation");
  return out;
}

ClosingResult closing_test(const ScalarFn& beta2, cplx lambda0, double half_width) {
  // degree 12 on Chebyshev nodes: a degree-6 fit leaks the truncated terms into the low coefficients
  const int n = 25, deg = 12;
  const double th0 = std::arg(lambda0);
  Eigen::MatrixXcd V(n, deg + 1);
  Eigen::VectorXcd y(n);
  for (int j = 0; j < n; ++j) {
    const double s = std::cos(kPi * (j + 0.5) / n);
    const cplx v = beta2(std::polar(1.0, th0 + half_width * s));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error("FitIllConditioned", "non-finite sample");
    y(j) = v;
    for (int k = 0; k <= deg; ++k) V(j, k) = std::pow(s, k);
  }
  const Eigen::VectorXcd c = V.colPivHouseholderQr().solve(y);
  ClosingResult r;
  r.value = beta2(std::polar(1.0, th0));
  double scale = 0.0;
  for (int k = 0; k <= deg; ++k) {
    r.coeff_abs.push_back(std::abs(c(k)));
    scale = std::max(scale, std::abs(c(k)));
  }
  if (scale == 0.0) throw Error("FitIllConditioned", "beta^2 vanishes identically on the arc");
  while (r.order <= deg && r.coeff_abs[size_t(r.order)] < 1e-7 * scale) ++r.order;
  r.verdict = r.order == 0 ? "not_closed" : (r.order >= 4 ? "fully_closed" : "chi_is_pm_I");
  return r;
}

std::vector<double> beta2_zeros_on_circle(const ScalarFn& beta2, int n, double rel_tol) {
  std::vector<double> v(static_cast<size_t>(n));
  double mx = 0.0;
  for (int k = 0; k < n; ++k) {
    v[size_t(k)] = std::abs(beta2(std::polar(1.0, 2 * kPi * k / n)));
    mx = std::max(mx, v[size_t(k)]);
  }
  std::vector<double> z;
  for (int k = 0; k < n; ++k) {
    const double a = v[size_t((k + n - 1) % n)], b = v[size_t(k)], c = v[size_t((k + 1) % n)];
    if (b <= a && b < c && b < rel_tol * mx) z.push_back(2 * kPi * k / n);
  }
  return z;
}

}  // namespace cmc
