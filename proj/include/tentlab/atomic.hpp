#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "tentlab/banach.hpp"
#include "tentlab/gamma.hpp"
#include "tentlab/tent_norms.hpp"

namespace tentlab {

// Dyadic level-set machinery shared by the decomposition and the
// interpolation family: thresholds 2^k for k in [kmin, kmax], extensions
// E_k^sigma, and the disjoint bands A_k between consecutive tents.
struct LevelSets {
  int kmin = 0;
  int kmax = -1;  // kmax < kmin encodes an empty ladder (u = 0)
  Eigen::VectorXd functional;   // A u per point
  std::vector<SetM> level;      // E_k = {A u > 2^k}
  std::vector<SetM> extended;   // E_k^sigma
  std::vector<Region> bands;    // A_k = T(E_k^sigma) minus T(E_{k+1}^sigma)
  std::vector<double> extended_measure;
};

LevelSets level_decomposition(const TentFunction<double>& u, double sigma,
                              const BanachSpace& X, const GammaOptions& opts = {});

struct TentAtom {
  Ball ball;                    // dilated Whitney ball carrying the piece
  TentFunction<double> a;       // supported in the tent over ball
  double lambda_literal = 0.0;  // mu(ball)^(1/2) * ||u restricted||_{T^2}
};

struct Decomposition {
  std::vector<double> lambdas;  // powers of two, one per atom
  std::vector<TentAtom> atoms;
  double lambda_sum = 0.0;
  double t1_norm = 0.0;
  double reconstruction_residual = 0.0;  // max node-wise |sum - u|, 0 expected
  int level_count = 0;
  int kmin = 0, kmax = -1;
};

// Constructive T^1 decomposition: thresholds -> extensions -> tents ->
// Whitney localization, each band partitioned by the first dilated Whitney
// ball whose tent contains the node.  Coefficients are rounded up to powers
// of two so every atom reconstructs its piece bit-exactly.
Decomposition atomic_decompose(const TentFunction<double>& u, double sigma,
                               const BanachSpace& X, const GammaOptions& opts = {});

struct AtomCheck {
  bool support_ok = false;  // a restricted to T(ball) equals a
  bool t2_ok = false;       // ||a||_{T^2} <= mu(ball)^(-1/2)
  bool tp_ok = false;       // ||a||_{T^p} <= mu(ball)^(-(1-1/p)), p in {1, 1.5, 2}
  double t2_value = 0.0;
  double t2_bound = 0.0;
  bool pass = false;
};

AtomCheck verify_atom(const TentAtom& atom, const BanachSpace& X,
                      const GammaOptions& opts = {});

// Interpolation family Upsilon(zeta) = sum_k 2^(k (upsilon(zeta) p - 1)) u 1_{A_k}
// with upsilon(zeta) = 1 - zeta (1 - 1/r).  At the interior point where the
// exponent vanishes the coefficients collapse to one and Upsilon returns u
// itself, bit-exactly; exponents within 1e-9 of zero snap to zero.
TentFunction<std::complex<double>> interpolation_function(const TentFunction<double>& u,
                                                          double p, double r,
                                                          std::complex<double> zeta,
                                                          double sigma, const BanachSpace& X,
                                                          const GammaOptions& opts = {});

}  // namespace tentlab
