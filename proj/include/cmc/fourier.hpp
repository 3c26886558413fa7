#pragma once

#include <vector>

#include "cmc/loops.hpp"

namespace cmc {

// Values of a 2x2 function at the M equispaced nodes rho*exp(2 pi i j/M).
using Samples = std::vector<Mat2>;

std::vector<cplx> circle_nodes(int M, double rho);

// Bin k of a length-M transform holds degree k (k < M/2) or k - M.
inline int bin_degree(int k, int M) { return k < M / 2 ? k : k - M; }
inline int degree_bin(int n, int M) { return ((n % M) + M) % M; }

// c_n = (1/M) sum_j s_j w_j^{-n}: Laurent coefficients in the unit-scaled variable w = lambda/rho.
Samples dft(const Samples& s);
Samples idft(const Samples& c);
std::vector<cplx> dft(const std::vector<cplx>& s);
std::vector<cplx> idft(const std::vector<cplx>& c);

Samples sample_loop(const LoopMatrix& g, int M, double rho);

// Laurent coefficients (lambda units) from samples on C_rho; entries below
// rel_tol * max are dropped, degrees limited to |n| <= nmax.
LoopMatrix loop_from_samples(const Samples& s, double rho, double r_meta, int nmax, double rel_tol,
                             bool twisted);

ScalarLoop scalar_from_samples(const std::vector<cplx>& s, double rho, double r_meta, int nmax,
                               double rel_tol, Parity parity);

double sup_dist(const Samples& a, const Samples& b);

}  // namespace cmc
