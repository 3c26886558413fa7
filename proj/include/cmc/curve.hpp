#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cmc/rational.hpp"
#include "cmc/types.hpp"

namespace cmc {

// Hyperelliptic curve mu^2 = nu prod_k (nu - nu_k) with nu_{2k} = 1/conj(nu_{2k-1}).
struct CurveSpec {
  std::vector<cplx> inner;  // nu_1, nu_3, ...
  cplx c0 = 1.0;            // sigma-hat constant (-1)^g prod(w/|w|)
  cplx mu1 = 1.0;           // reference value mu(1)

  int genus() const { return int(inner.size()); }
  cplx outer(int k) const { return 1.0 / std::conj(inner[size_t(k)]); }
  // nu_1, nu_2, ..., nu_{2g} in pair order
  std::vector<cplx> branch_points() const;
  // 0 followed by branch_points(); index 0 is nu = 0
  std::vector<cplx> finite_branch_points() const;
  double min_separation() const;
};

CurveSpec build_curve(const std::vector<cplx>& inner_points);

cplx curve_poly(const CurveSpec& s, cplx nu);  // nu prod(nu - nu_k)
// mu continued from nu = 1 along the straight segment [1, nu]
cplx mu_reference(const CurveSpec& s, cplx nu);
// Exact continuation of mu along the straight segment a -> b (must avoid branch points).
cplx continue_segment(const CurveSpec& s, cplx a, cplx mu_a, cplx b);
// mu at the point with local coordinate lambda near P0 (lambda^2 = nu), |lambda|^2 < min |nu_k|.
cplx mu_near_p0(const CurveSpec& s, cplx lambda);

enum class PointTag { Finite, P0, Pinf };

struct CurvePoint {
  cplx nu = 0.0;
  cplx mu = 0.0;
  int sheet = 1;  // relative to mu_reference
  PointTag tag = PointTag::Finite;
};

CurvePoint curve_point(const CurveSpec& s, cplx nu, int sheet);
int sheet_of(const CurveSpec& s, cplx nu, cplx mu);

enum class Involution { I, SigmaHat };
CurvePoint apply_involution(const CurveSpec& s, const CurvePoint& p, Involution which);

// Point of C': mu~^2 = prod(lambda^2 - nu_k); rho(lambda, mu~) = (lambda^2, lambda mu~).
struct PrimePoint {
  cplx lambda;
  cplx mut;
};
CurvePoint rho_map(const CurveSpec& s, const PrimePoint& p);

struct CyclePath {
  std::string kind;  // "a", "b", "open"
  int index = -1;
  std::vector<cplx> waypoints;
  std::vector<cplx> mu;
  std::vector<int> sheets;
  bool closed = false;
  int end_sheet = 1;
  // homology cycles: sum of coef * (arc - I arc) over chain arcs
  std::vector<std::pair<int, int>> terms;
};

// Stepless continuation along the polygon; throws BranchTooClose within eps of a branch point.
CyclePath continue_mu(const CurveSpec& s, const std::vector<cplx>& path, int start_sheet, double eps = 1e-3);

// Polygonal arc joining two finite branch points (indices into finite_branch_points()).
// The lift is fixed by c: near the start, nu = e + d s^2 and mu = c s (1 + O(s^2)).
struct Arc {
  std::vector<cplx> vertices;
  int from = 0, to = 0;
  cplx c = 1.0;
};

struct QuadNode {
  cplx nu, mu, w;  // integral of f(nu, mu) dnu ~ sum w f(nu, mu)
};

std::vector<QuadNode> arc_nodes(const CurveSpec& s, const Arc& arc, int refine = 1);
// Path from a finite branch point through the given vertices; returns nodes and the final mu.
std::vector<QuadNode> branch_path_nodes(const CurveSpec& s, int from, const std::vector<cplx>& vertices,
                                        cplx* mu_end, int refine = 1);
// Path between regular points with mu given at the start.
std::vector<QuadNode> path_nodes(const CurveSpec& s, const std::vector<cplx>& vertices, cplx mu_start,
                                 cplx* mu_end, int refine = 1);

struct CycleSet {
  std::vector<Arc> chain;        // C_1 .. C_{2g}, consecutive arcs share one branch point
  std::vector<CyclePath> a, b;   // indexed like CurveSpec::inner
  std::vector<int> order;        // cut indices sorted by argument
  std::vector<int> chain_signs;  // local intersection C_i . C_{i+1} before sign fixing
};

CycleSet build_cycles(const CurveSpec& s);
// tau = B A^{-1} for the holomorphic differentials nu^k dnu / mu, k = 0..g-1, normalized on the a-cycles
Eigen::MatrixXcd period_matrix(const CurveSpec& s, const CycleSet& cs, int refine = 1);

using CurveIntegrand = std::function<cplx(cplx nu, cplx mu)>;
cplx integrate_nodes(const std::vector<QuadNode>& nodes, const CurveIntegrand& f);
// Integral over sum coef (arc - I arc)
cplx integrate_cycle(const CurveSpec& s, const CycleSet& cs, const CyclePath& c, const CurveIntegrand& f,
                     int refine = 1);
// Periods of nu^k dnu / mu for k in [kmin, kmax], kmin >= -1
std::vector<cplx> cycle_moments(const CurveSpec& s, const CycleSet& cs, const CyclePath& c, int kmin, int kmax,
                                int refine = 1);
// Intersection sign of the lifted arcs at a shared branch point (0 when disjoint ends).
int arc_intersection(const CurveSpec& s, const Arc& x, const Arc& y);
// Closed polygon around the straight segment [e, f] at distance h (for monodromy checks).
std::vector<cplx> loop_around_segment(cplx e, cplx f, double h, int n_cap = 12);

// f1(nu) + f2(nu) mu
struct CurveFunction {
  RationalFn f1 = RationalFn::constant(0.0);
  RationalFn f2 = RationalFn::constant(0.0);
  cplx eval(const CurvePoint& p) const;
  bool is_I_symmetric() const { return f2.is_zero(); }
};
// f*(P) = conj(f(sigma-hat P))
CurveFunction star(const CurveSpec& s, const CurveFunction& f);
// f o rho on C'
cplx lift_to_prime(const CurveSpec& s, const CurveFunction& f, const PrimePoint& p);

}  // namespace cmc
