#pragma once

#include <cstdint>
#include <string>

#include "tentlab/banach.hpp"
#include "tentlab/tent_function.hpp"

namespace tentlab {

struct GammaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::string method;  // "exact" or "mc"
  int samples = 0;
  std::uint64_t seed = 0;
};

struct GammaOptions {
  std::uint64_t seed = 0;
  int samples = 4096;
  // Sample even when the exact Hilbert path applies; used to compare the
  // sampler against the closed form.
  bool force_sampling = false;
};

// Gaussian norm of u restricted to R, for the Gaussian sum
// Z = sum_nodes sqrt(w) g_node u(node) with independent standard Gaussians.
// Hilbert targets (q = 2, weighted or not) evaluate sqrt(sum w ||u||_X^2)
// exactly; other targets are sampled, value = sqrt(mean ||Z||_X^2) with a
// delta-method standard error.  Sampling draws one Gaussian per (node,
// sample) counter, so estimates are independent of evaluation order and of
// any restriction applied.
template <typename Scalar>
GammaEstimate gamma_norm(const TentFunction<Scalar>& u, const Region& R, const BanachSpace& X,
                         GammaOptions opts = {});

// Hilbert-path value; throws unless X.hilbert().
template <typename Scalar>
double gamma_norm_exact(const TentFunction<Scalar>& u, const Region& R, const BanachSpace& X);

// (E ||Z||^p)^(1/p) / (E ||Z||^q)^(1/q) for the same Gaussian sum, estimated
// from one sample stream; standard error from 16 batch means.  For p = q the
// ratio is exactly 1.
GammaEstimate moment_ratio(const TentFunction<double>& u, const Region& R, const BanachSpace& X,
                           double p, double q, GammaOptions opts = {});

struct MonotonicityReport {
  bool pass = false;
  double margin = 0.0;  // outer value minus inner value
  GammaEstimate inner, outer;
};

// Checks ||u 1_R||_gamma <= ||u 1_R'||_gamma for R inside R', sharing the
// Gaussian draws between the two estimates.
template <typename Scalar>
MonotonicityReport restriction_monotonicity_check(const TentFunction<Scalar>& u, const Region& R,
                                                  const Region& Rp, const BanachSpace& X,
                                                  GammaOptions opts = {});

// sup over random families {xi_1..xi_k} of
//   (E || sum_i g_i xi_i ||_X^2)^(1/2) / (sum_i ||xi_i||_X^r)^(1/r).
// Hilbert targets with r = 2 give exactly 1.
double type_constant_probe(const BanachSpace& X, double r, int families, GammaOptions opts = {});

}  // namespace tentlab
