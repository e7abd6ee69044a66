#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "tentlab/atomic.hpp"
#include "tentlab/operator_l.hpp"

namespace tentlab {

// Smallest admissible order floor(n/2) + 1 for the space's dimension n
// (lattice dimension on tori, measured doubling exponent on graphs).
int default_hardy_order(const SpaceGrid& space);

// ||f||_{H^p_{L,N}} = ||Q_N f||_{T^p} on the spectral ladder of L.  Mean-zero
// f only; f = 0 gives 0.
double hardy_norm(const OperatorL& L, int N, const Eigen::MatrixXd& f, double p,
                  const BanachSpace& X, const GammaOptions& opts = {});
double hardy_norm(const OperatorL& L, int N, const Eigen::MatrixXcd& f, double p,
                  const BanachSpace& X, const GammaOptions& opts = {});

struct HcalcRow {
  double norm_f = 0.0;     // ||f||_{H^p}
  double norm_phif = 0.0;  // ||phi(L) f||_{H^p}
  double ratio = 0.0;      // norm_phif / (sup_norm * norm_f)
};

struct HcalcReport {
  double sup_ratio = 0.0;
  double phi_sup = 1.0;
  std::vector<HcalcRow> rows;
};

// Boundedness measurement for the functional calculus on H^p: the sup over
// the corpus of ||phi(L)f|| / (||phi||_inf ||f||).  The identity symbol
// short-circuits in functional_calculus, so its ratio is exactly 1.
HcalcReport hcalc_experiment(const OperatorL& L, const HoloSymbol& phi,
                             const std::vector<Eigen::MatrixXcd>& corpus, double p, int N,
                             const BanachSpace& X, const GammaOptions& opts = {});

// Propagation family inside the atom witness: the compactly supported bump
// transform (the construction's choice) or the heat kernel (no finite
// propagation; useful as the contrast case for the support check).
enum class WitnessProfile { Bump, Heat };

struct LAtomDiagnostics {
  double lk_residual = 0.0;      // rel l2(mu) of m - L^K witness
  double support_leakage = 0.0;  // mu-l1 mass of m outside the ball, relative
  bool support_flagged = false;  // leakage above the threshold
  double leak_threshold = 0.0;
  Eigen::VectorXd size_values;   // k = 0..K: ||(r^2 L)^k witness||_{H^2_L}
  double size_bound = 0.0;       // r^{2K} mu(ball)^{-1/2}
  double normalizer = 0.0;       // raw max size value / bound, divided out
  double mean_abs = 0.0;         // max over columns of |sum mu m|
};

// L-atom of order K in the stored ball: m = L^K witness, supported in the
// ball up to the measured leakage, size values at most size_bound.  The
// stored pair is scaled by 1/normalizer so the worst size value sits exactly
// on the bound; normalizer * m reproduces the unnormalized construction.
struct LAtom {
  Eigen::MatrixXd m;
  Eigen::MatrixXd witness;
  int order = 1;
  Ball ball;
  LAtomDiagnostics diag;
};

// Witness sum over the support levels of the tent atom,
//   witness = sum_j ln(rho) t_j^{2(N+K)} L^N Phi_{t_j} a(., t_j),
// and m = L^K witness.  The level cut is the atom's own support rather than
// the literal t_j < r_B: tents admit nodes up to one realized distance above
// the radius, and keeping them preserves m = pi_tilde_{N+K} a exactly, which
// the Hardy reconstruction sums rely on.  The stored ball doubles the tent
// ball; leakage above the threshold flags the atom but never throws.
LAtom l_atom_build(const OperatorL& L, const TentAtom& a, int N, int K, const BanachSpace& X,
                   WitnessProfile profile = WitnessProfile::Bump, double leak_threshold = 1e-6,
                   const GammaOptions& opts = {});

struct LAtomCheck {
  bool lk_ok = false;       // m = L^K witness to 1e-10
  bool support_ok = false;  // leakage at most the threshold
  bool size_ok = false;     // size values at most size_bound (1 + 1e-9)
  bool mean_ok = false;     // columns mu-mean-zero relative to the l1 mass
  bool pass = false;
  LAtomDiagnostics diag;
};

// Recomputes every invariant from the stored fields; nothing is trusted.
LAtomCheck verify_l_atom(const OperatorL& L, const LAtom& atom, int N, const BanachSpace& X,
                         double leak_threshold = 1e-6, const GammaOptions& opts = {});

struct HardyDecomposition {
  std::vector<double> lambdas;  // mixed Calderon constant * tent lambda * normalizer
  std::vector<LAtom> atoms;
  double calderon = 0.0;            // the mixed constant used
  double lambda_sum = 0.0;
  double hardy1 = 0.0;              // ||f||_{H^1} = ||Q_N f||_{T^1}
  double reconstruction_rel = 0.0;  // rel l2(mu) of sum lambda_k m_k - f
  double leak_worst = 0.0;
  int flagged = 0;
  Decomposition tent;  // the underlying T^1 decomposition of Q_N f
};

// f = c sum_k lambda_k pi_tilde_{N+K} a_k through the tent atoms of Q_N f:
// each atom maps to an L-atom of order K, the coefficients absorb the mixed
// Calderon constant and the atom normalizers, and the reconstruction
// residual measures the ladder's reproducing error.  f = 0 gives no atoms.
HardyDecomposition hardy_atomic_decompose(const OperatorL& L, const Eigen::MatrixXd& f, int N,
                                          int K, const BanachSpace& X, double sigma = 0.5,
                                          WitnessProfile profile = WitnessProfile::Bump,
                                          double leak_threshold = 1e-6,
                                          const GammaOptions& opts = {});

// Mean-zero function supported in a ball with ||m||_{l2(mu,X)} at most
// mu(B)^{-1/2}.
struct ClassicalAtom {
  Eigen::MatrixXd m;
  Ball ball;
};

// Restricts the profile to the ball, removes the mu-mean per column, and
// scales onto the size bound.  A profile that dies under mean removal gives
// the zero atom.
ClassicalAtom classical_atom(const SpaceGrid& space, const Ball& ball,
                             const Eigen::MatrixXd& profile, const BanachSpace& X);

// Single-column atom with values shape(d(center, y) / radius) inside the
// ball; the dilation family for the scaling experiments.
ClassicalAtom radial_classical_atom(const SpaceGrid& space, const Ball& ball,
                                    const std::function<double(double)>& shape,
                                    const BanachSpace& X);

bool verify_classical_atom(const SpaceGrid& space, const ClassicalAtom& atom,
                           const BanachSpace& X, double tol = 1e-9);

// sup over the corpus of ||m||_{H^1_{L,N}}; the discrete stand-in for the
// uniform L^1-boundedness of classical atoms.  Atoms are re-verified first.
double classical_atom_hardy_bound(const OperatorL& L, const std::vector<ClassicalAtom>& corpus,
                                  int N, const BanachSpace& X, const GammaOptions& opts = {});

// ||f||_{H^p} / ||f||_{l^p(mu, X)} on mean-zero f; throws on f = 0.
double lp_compare(const OperatorL& L, const Eigen::MatrixXd& f, double p, int N,
                  const BanachSpace& X, const GammaOptions& opts = {});

// |sum_x mu <f(x), g(x)>| / (||f||_{H^p} ||g||_{H^{p'}}), the measured
// constant of the duality pairing; coordinatewise bilinear pairing.
double hardy_duality_ratio(const OperatorL& L, int N, const Eigen::MatrixXd& f,
                           const Eigen::MatrixXd& g, double p, const BanachSpace& X,
                           const GammaOptions& opts = {});

}  // namespace tentlab
