#pragma once

#include <string>

#include "cmc/fourier.hpp"
#include "cmc/loops.hpp"

namespace cmc {

struct FactorOptions {
  int M = 0;                // samples per circle; 0 picks a size from the input
  int seed = 0;             // start variant for the spectral-factor iteration
  double tol = 1e-14;       // residual target of the spectral-factor iteration
  int max_iter = 200;
  double coeff_tol = 1e-17; // relative drop tolerance when emitting loops
  double rcond_min = 1e-14; // below this the minus-part system counts as singular
};

struct IwasawaResult {
  LoopMatrix unitary_part;  // F
  LoopMatrix plus_part;     // g_+
  double residual = 0.0;    // sup |g - F g_+| at off-node points of C_r
  double unitarity = 0.0;   // sup |F^* F - I| on S^1
  int iterations = 0;
  std::string method;
};

struct BirkhoffResult {
  LoopMatrix minus_part;
  LoopMatrix plus_part;
  double residual = 0.0;
  bool in_big_cell = true;
  double rcond = 1.0;
};

// Sample-level primitives. Samples live on C_rho (or S^1) at M equispaced nodes.
struct BirkhoffSamples {
  bool ok = true;
  bool aliased = false;
  double rcond = 1.0;
  int K = 0;
  std::vector<Mat2> y;  // g_- = I + sum_k y[k-1] w^{-k}, w = lambda/rho
  Samples gminus;       // on C_rho
  Samples gplus;        // on C_rho
};

BirkhoffSamples birkhoff_samples(const Samples& g, double rho, const FactorOptions& opt = {});

struct SpectralFactor {
  Samples P;       // plus loop on S^1 with Phi = P^* P, P(0) in B
  Samples coeffs;  // bins of P in lambda units
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::string method;
};

SpectralFactor spectral_factor(const Samples& Phi, const FactorOptions& opt = {});

struct IwasawaSamples {
  bool ok = true;
  Samples F;       // unitary factor on S^1 (same node count as input)
  Samples F_inner; // the same factor on C_rho
  Samples gplus;   // plus factor on C_rho
  Mat2 gplus0;     // g_+(0)
  double rcond = 1.0;
  int iterations = 0;
  std::string method;
};

// r-Iwasawa of g given on C_rho. For rho < 1 a Birkhoff split on C_rho comes
// first; its minus factor extends to S^1, where the unitary factor is found.
IwasawaSamples iwasawa_samples(const Samples& g, double rho, const FactorOptions& opt = {});

IwasawaResult iwasawa(const LoopMatrix& g, const FactorOptions& opt = {});
BirkhoffResult birkhoff(const LoopMatrix& g, const FactorOptions& opt = {});

// Cylinder frame exp((lambda^{-1} z - lambda conj(z)) A) at one point.
Mat2 cylinder_value(cplx z, cplx lambda);

}  // namespace cmc
