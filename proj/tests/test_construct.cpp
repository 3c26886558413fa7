#include <Eigen/Dense>
#include <cmath>

#include "cmc/construct.hpp"
#include "doctest.h"

using namespace cmc;

namespace {

std::vector<cplx> circle(int n, double rad = 1.0, double phase = 0.05) {
  std::vector<cplx> v;
  for (int k = 0; k < n; ++k) v.push_back(std::polar(rad, phase + 2 * kPi * k / n));
  return v;
}

FamilyParams family(const std::vector<cplx>& inner, const std::vector<int>& m) {
  FamilyParams fp;
  fp.curve = build_curve(inner);
  auto cs = build_cycles(fp.curve);
  auto pr = periods_U(fp.curve, cs, build_omega1(fp.curve, cs), build_omega2(fp.curve, cs));
  fp.q = solve_q(pr.U, m).q;
  return fp;
}

// local order of f at z from two radii
double local_order(const RationalFn& f, cplx z) {
  const cplx d = std::polar(1.0, 0.3);
  const double e1 = 1e-7, e2 = 1e-8;
  return std::log(std::abs(f.eval(z + e1 * d)) / std::abs(f.eval(z + e2 * d))) / std::log(e1 / e2);
}

// identities every constructed member satisfies
void check_identities(const ConstructedData& cd) {
  const auto& sd = cd.sd;
  double abc = 0.0;
  for (cplx l : circle(64, cd.r_final)) {
    const cplx a = sd.a(l), b = sd.b(l), c = sd.c(l);
    abc = std::max(abc, std::abs(a * a + b * c - 1.0));
  }
  CHECK(abc < 1e-12);
  CHECK(cd.bc.identity_gap < 1e-10);
  double bc2 = 0.0;
  for (double rad : {0.5, 1.0, 1.7})
    for (cplx x : circle(16, rad, 0.2)) {
      const cplx om = 1.0 - cd.a2.eval(x);
      bc2 = std::max(bc2, std::abs(cd.b2.eval(x) * cd.c2.eval(x) - om * om) / std::max(1.0, std::abs(om * om)));
    }
  CHECK(bc2 < 1e-10);
  CHECK(std::abs(sd.b(0.0) * sd.c(0.0) - 1.0) < 1e-12);
  CHECK(std::abs(cd.b2.eval(0.0) * cd.c2.eval(0.0) - 1.0) < 1e-12);
  CHECK(cd.beta_at_branch < 1e-8);
  CHECK(cd.omega_period_gap < 1e-8);
  double a_lo = 0.0, a_hi = 0.0, b2_pos = 0.0, alpha_im = 0.0;
  for (cplx l : circle(512)) {
    const cplx a2 = cd.a2.eval(l * l);
    a_lo = std::max(a_lo, -a2.real());
    a_hi = std::max(a_hi, a2.real());
    const auto t = sd.two_sided(l);
    b2_pos = std::max(b2_pos, t.beta2.real());
    alpha_im = std::max(alpha_im, std::abs(t.alpha.imag()));
  }
  CHECK(a_lo < 1e-14);
  CHECK(a_hi < 1.0);
  CHECK(b2_pos < 1e-12);
  CHECK(alpha_im < 1e-10);
  auto rep = validate_necessary(sd);
  for (const auto& c : rep.conditions) {
    INFO(c.name << " " << c.residual << " " << c.note);
    CHECK(c.pass);
  }
  CHECK(cd.hplus.conj_residual < 1e-10);
  // round trip through h_+: S = h A h^{-1} reproduces a^2, b^2, c^2
  double rt = 0.0;
  for (cplx l : circle(24, 0.9 * cd.r_final)) {
    const Mat2 h = cd.hplus.loop.eval(l);
    const Mat2 S = h * mat_A() * inv2(h);
    const cplx nu = l * l;
    rt = std::max({rt, std::abs(S(0, 0) * S(0, 0) - cd.a2.eval(nu)), std::abs(S(0, 1) * S(0, 1) - cd.b2.eval(nu)),
                   std::abs(S(1, 0) * S(1, 0) - cd.c2.eval(nu)), std::abs(S(1, 1) + S(0, 0))});
  }
  CHECK(rt < 1e-8);
}

}  // namespace

TEST_CASE("a0^2 for odd and even genus") {
  auto s = build_curve({0.25});
  auto r = build_a0sq(s, std::nullopt);
  for (cplx x : {cplx(0.3, 0.2), cplx(-1.5, 0.4), cplx(2.0)})
    CHECK(std::abs(r.ahat2.eval(x) - 0.25 * x / ((x - 0.25) * (x - 4.0))) < 1e-14);
  CHECK(std::abs(r.ahat2.eval(1.0) + 1.0 / 9.0) < 1e-15);
  CHECK(r.epsilon == -1);
  CHECK(r.ahat2.eval(0.0) == cplx(0.0));
  for (cplx x : circle(32)) {
    CHECK(std::abs(star(r.ahat2).eval(x) - r.ahat2.eval(x)) < 1e-12);
    CHECK(r.a0sq.eval(x).real() >= 0.0);
  }

  auto s2 = build_curve({cplx(0.3, 0.2), -0.4});
  try {
    build_a0sq(s2, std::nullopt);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "MissingNu0");
  }
  CHECK_THROWS_AS(build_a0sq(s2, cplx(1.2)), Error);
  CHECK_THROWS_AS(build_a0sq(s, cplx(1.0)), Error);
  const cplx nu0 = std::polar(1.0, 0.4);
  auto r2 = build_a0sq(s2, nu0);
  CHECK(r2.ahat2.eval(0.0) == cplx(0.0));
  CHECK(std::abs(r2.a0sq.eval(nu0)) < 1e-14);
  for (cplx x : circle(64)) {
    CHECK(std::abs(star(r2.ahat2).eval(x) - r2.ahat2.eval(x)) < 1e-12);
    CHECK(r2.a0sq.eval(x).real() >= -1e-15);
  }
}

TEST_CASE("admissible f~") {
  auto f3 = f_tilde_function({{-1, 0.2}, {0, 0.6}, {1, 0.2}}, 3);
  for (cplx x : circle(8)) CHECK(std::abs(f3.eval(x) - (x + 1.0 / x + 3.0) / 5.0) < 1e-14);
  CHECK(f3.order_at(0.0) == -1);
  auto code = [](const std::map<int, cplx>& c, int g) {
    try {
      f_tilde_function(c, g);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("ok");
  };
  CHECK(code({{-1, 1.0}, {0, 1.0}, {1, 1.0}}, 1) == "InadmissibleFTilde");  // pole order 1 > 0
  CHECK(code({{-1, 1.0}, {0, 1.0}, {1, 1.0}}, 2) == "InadmissibleFTilde");
  CHECK(code({{0, cplx(1.0, 0.1)}}, 1) == "InadmissibleFTilde");             // not real on S^1
  CHECK(code({{-1, cplx(0, 1)}, {1, cplx(0, 1)}}, 3) == "InadmissibleFTilde");
  CHECK(code({{-1, cplx(0, -1)}, {1, cplx(0, 1)}}, 3) == "ok");
  CHECK(code({{0, 0.0}}, 1) == "InadmissibleFTilde");
}

TEST_CASE("a^2 normalization") {
  FamilyParams fp;
  fp.curve = build_curve({0.25});
  auto r = build_a2(fp);
  CHECK(std::abs(r.sup - 1.0 / 9.0) < 1e-12);  // a0^2 peaks at nu = 1
  CHECK(std::abs(sup_on_circle(r.a2) - 0.99) < 1e-12);
  CHECK(r.a2.eval(0.0) == cplx(0.0));
  for (cplx x : circle(512)) {
    const cplx v = r.a2.eval(x);
    CHECK(std::abs(v.imag()) < 1e-14);
    CHECK(v.real() >= 0.0);
    CHECK(v.real() < 1.0);
  }
  fp.scale = 1.0;
  auto r1 = build_a2(fp);
  for (cplx x : {cplx(0.3, 0.2), cplx(-2.0, 1.0)})
    CHECK(std::abs(r1.a2.eval(x) + 0.25 * x / ((x - 0.25) * (x - 4.0))) < 1e-14);
  fp.scale = 9.5;
  CHECK_THROWS_AS(build_a2(fp), Error);
  fp.scale = -1.0;
  CHECK_THROWS_AS(build_a2(fp), Error);
}

TEST_CASE("b^2 and c^2 for the genus-one example") {
  auto s = build_curve({0.25});
  const RationalFn a2 =
      scale(RationalFn::monomial(1.0, 1) / (RationalFn::linear(0.25) * RationalFn::linear(4.0)), -0.25);
  auto bc = build_b2_c2(s, a2);
  const double r3 = std::sqrt(3.0);
  REQUIRE(bc.inner_zeros.size() == 1);
  CHECK(std::abs(bc.inner_zeros[0] - (2.0 - r3)) < 1e-12);
  CHECK(bc.K == 1);
  CHECK(std::abs(std::sqrt(bc.delta) - (2.0 + r3)) < 1e-10);
  for (cplx x : {cplx(0.3, 0.2), cplx(-1.5, 0.4), cplx(2.0, -3.0)}) {
    const cplx want = (x - (2.0 - r3)) * (x - (2.0 - r3)) / ((x - 0.25) * (x - 4.0));
    CHECK(std::abs(bc.b2_tilde.eval(x) - want) < 1e-12 * std::max(1.0, std::abs(want)));
    const cplx om = 1.0 - a2.eval(x);
    CHECK(std::abs(bc.b2.eval(x) * bc.c2.eval(x) - om * om) < 1e-10 * std::max(1.0, std::abs(om * om)));
    CHECK(std::abs(bc.c2.eval(x) - std::conj(bc.b2.eval(1.0 / std::conj(x)))) < 1e-12);
  }
  CHECK(std::abs(bc.b2.eval(0.0) * bc.c2.eval(0.0) - 1.0) < 1e-12);
  for (cplx w : s.branch_points()) {
    CHECK(std::abs(std::abs(bc.b2.order_at(w)) - 1) == 0);
    CHECK(std::abs(std::abs(local_order(bc.b2, w)) - 1.0) < 1e-3);
    CHECK(std::abs(std::abs(local_order(bc.c2, w)) - 1.0) < 1e-3);
  }

  // 1 - a^2 with zeros that are not reflections of each other
  const RationalFn skew =
      scale(RationalFn::monomial(1.0, 1) / (RationalFn::linear(0.25) * RationalFn::linear(3.0)), 0.5);
  try {
    build_b2_c2(s, skew);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "RootPairingFailure");
  }
}

TEST_CASE("square roots on the curve") {
  auto s = build_curve({0.25});
  const RationalFn a2 =
      scale(RationalFn::monomial(1.0, 1) / (RationalFn::linear(0.25) * RationalFn::linear(4.0)), -0.25);
  auto ya = curve_sqrt(s, a2);
  CHECK(ya.e == 0);
  auto bc = build_b2_c2(s, a2);
  auto yb = curve_sqrt(s, bc.b2);
  CHECK(yb.e == 1);
  for (cplx l : circle(16, 0.4)) {
    CHECK(std::abs(std::pow(ya.on_disk(s, l), 2) - a2.eval(l * l)) < 1e-13);
    CHECK(std::abs(ya.on_disk(s, -l) + ya.on_disk(s, l)) < 1e-14);
    CHECK(std::abs(std::pow(yb.on_disk(s, l), 2) - bc.b2.eval(l * l)) < 1e-12);
    CHECK(std::abs(yb.on_disk(s, -l) - yb.on_disk(s, l)) < 1e-14);
  }
  // nu alone has no square root on this curve
  try {
    curve_sqrt(s, RationalFn::monomial(1.0, 1));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "SqrtBranchFailure");
  }
}

TEST_CASE("genus-one family member") {
  auto fp = family({0.25}, {0});
  CHECK(std::abs(fp.q.imag()) < 1e-12);
  auto cd = assemble_family(fp);
  check_identities(cd);

  // p: principal part, parity, agreement of series and path values
  const auto& p = *cd.p;
  const cplx tiny(1e-6, 2e-6);
  CHECK(std::abs(p.series(tiny) * tiny - fp.q) < 1e-10);
  for (cplx l : circle(12, 0.6 * p.r0())) {
    CHECK(std::abs(p.f_plus(-l) + p.f_plus(l)) < 1e-10);
    cplx mu;
    const cplx pp = p.at(l * l, &mu);
    CHECK(std::abs(std::cosh(pp) - std::cosh(p.series(l))) < 1e-10);
    const bool same = std::abs(mu - mu_near_p0(fp.curve, l)) < std::abs(mu + mu_near_p0(fp.curve, l));
    CHECK(std::abs(std::sinh(pp) - (same ? 1.0 : -1.0) * std::sinh(p.series(l))) < 1e-10);
  }
  for (cplx l : circle(5, 0.3 * p.r0())) {
    cplx sum = 0.0;
    const auto& fc = p.f_plus_coeffs();
    for (size_t k = fc.size(); k-- > 0;) sum = sum * l * l + fc[k];
    CHECK(std::abs(sum * l - p.f_plus(l)) < 1e-10);
  }

  auto fc = check_family(cd, {cplx(0.0), cplx(0.2, 0.1), cplx(-0.3, 0.25)});
  CHECK(fc.translation_residual < 1e-6);
  CHECK(fc.u_variation < 1e-5);
  CHECK(fc.chi_unitarity < 1e-8);
  CHECK(fc.validated);

  // negative control
  Dresser d(cd.hplus.loop);
  CHECK(verify_translation(d, fp.q + 0.1, build_chi(cd.sd), {cplx(0.0), cplx(0.2, 0.1)}).residual > 1e-2);
}

TEST_CASE("h_+ does not depend on the admissible q") {
  auto fp = family({0.25}, {0});
  auto c1 = assemble_family(fp);
  fp.q *= 2.0;
  auto c2 = assemble_family(fp);
  REQUIRE(c1.hplus.loop.coeffs.size() == c2.hplus.loop.coeffs.size());
  for (const auto& [n, m] : c1.hplus.loop.coeffs) CHECK(m == c2.hplus.loop.coeff(n));
}

TEST_CASE("inadmissible q is rejected") {
  auto fp = family({0.25}, {0});
  fp.q = cplx(1.0, 0.5);
  try {
    assemble_family(fp);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == "QNotAdmissible");
  }
  auto s = fp.curve;
  auto cs = build_cycles(s);
  auto w = build_omega_q(build_omega1(s, cs), build_omega2(s, cs), fp.q);
  CHECK_THROWS_AS(PFunction(s, w, fp.q), Error);
}

TEST_CASE("genus-two family member") {
  auto fp = family({cplx(0.3, 0.2), -0.4}, {1, 0});
  auto cd = assemble_family(fp);
  CHECK(cd.bc.K == 2);
  check_identities(cd);
  auto fc = check_family(cd, {cplx(0.0), cplx(0.15, -0.1)});
  CHECK(fc.translation_residual < 1e-6);
  CHECK(fc.u_variation < 1e-5);
}

TEST_CASE("genus three with a Laurent f~") {
  FamilyParams fp;
  fp.curve = build_curve({cplx(0.3, 0.1), cplx(-0.35, 0.2), cplx(0.1, -0.4)});
  fp.f_tilde = {{-1, 0.2}, {0, 0.6}, {1, 0.2}};
  auto a = build_a2(fp);
  CHECK(a.a2.order_at(0.0) == 1);
  for (cplx x : circle(256)) {
    const cplx v = a.a2.eval(x);
    CHECK(std::abs(v.imag()) < 1e-12);
    CHECK(v.real() > -1e-14);
    CHECK(v.real() < 1.0);
  }
  auto bc = build_b2_c2(fp.curve, a.a2);
  CHECK(bc.identity_gap < 1e-10);
  CHECK(bc.inner_zeros.size() == 3);
  for (cplx w : fp.curve.branch_points()) CHECK(std::abs(bc.b2.order_at(w)) == 1);
  // q = 0 is always admissible: trivial translation, but the roots and h_+ are still built
  auto cd = assemble_family(fp);
  CHECK(cd.hplus.conj_residual < 1e-10);
  double abc = 0.0;
  for (cplx l : circle(64, cd.r_final)) {
    const cplx av = cd.sd.a(l), bv = cd.sd.b(l), cv = cd.sd.c(l);
    abc = std::max(abc, std::abs(av * av + bv * cv - 1.0));
  }
  CHECK(abc < 1e-12);
}

TEST_CASE("family dimension equals the genus") {
  struct Case {
    std::vector<cplx> inner;
    int g;
  };
  for (const auto& cs : {Case{{0.25}, 1}, Case{{cplx(0.3, 0.2), -0.4}, 2},
                         Case{{cplx(0.3, 0.1), cplx(-0.35, 0.2), cplx(0.1, -0.4)}, 3}}) {
    FamilyParams base;
    base.curve = build_curve(cs.inner);
    const int m = (cs.g - 1) / 2;
    // real parameters: c_0, Re/Im c_k (k = 1..m), and the angle of nu0 for even genus
    std::vector<double> x = {1.0};
    for (int k = 1; k <= m; ++k) {
      x.push_back(0.1);
      x.push_back(0.05);
    }
    if (cs.g % 2 == 0) x.push_back(0.0);
    REQUIRE(int(x.size()) == cs.g);
    auto params = [&](const std::vector<double>& v) {
      FamilyParams fp = base;
      fp.f_tilde = {{0, v[0]}};
      for (int k = 1; k <= m; ++k) {
        const cplx c(v[size_t(2 * k - 1)], v[size_t(2 * k)]);
        fp.f_tilde[k] = c;
        fp.f_tilde[-k] = std::conj(c);
      }
      if (cs.g % 2 == 0) fp.nu0 = std::polar(1.0, v.back());
      fp.scale = 0.5 / build_a2([&] {
                         FamilyParams t = base;
                         t.f_tilde = {{0, 1.0}};
                         if (cs.g % 2 == 0) t.nu0 = cplx(1.0);
                         return t;
                       }()).sup;
      return fp;
    };
    const std::vector<cplx> probes = {cplx(0.37, 0.21), cplx(-0.6, 0.5), cplx(1.3, -0.8), cplx(0.05, 0.7)};
    auto sample = [&](const FamilyParams& fp) {
      auto a = build_a2(fp);
      build_b2_c2(fp.curve, a.a2);  // each member is buildable
      std::vector<double> out;
      for (cplx z : probes) {
        out.push_back(a.a2.eval(z).real());
        out.push_back(a.a2.eval(z).imag());
      }
      return out;
    };
    const auto y0 = sample(params(x));
    Eigen::MatrixXd J(int(y0.size()), cs.g);
    const double h = 1e-3;
    for (int j = 0; j < cs.g; ++j) {
      auto xp = x;
      xp[size_t(j)] += h;
      const auto y1 = sample(params(xp));
      for (size_t i = 0; i < y0.size(); ++i) J(int(i), j) = (y1[i] - y0[i]) / h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto sv = svd.singularValues();
    CHECK(sv(cs.g - 1) > 1e-4 * sv(0));
  }
}
