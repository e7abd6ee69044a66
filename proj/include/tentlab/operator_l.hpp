#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tentlab/fit.hpp"
#include "tentlab/half_grid.hpp"
#include "tentlab/space.hpp"
#include "tentlab/tent_function.hpp"

namespace tentlab {

// Non-negative self-adjoint operator on l2(mu): the canonical Laplacian of
// the space.  Tori diagonalize through the discrete Fourier transform with
// symbol lambda(xi) = sum_axes (2 - 2 cos(2 pi xi_a / s_a)) / h^2; graphs
// carry a dense eigendecomposition of the mu-symmetrized matrix (conductance
// 1/len^2 per edge), capped at 4096 vertices.  Both expose the same spectral
// interface: bins, bin_eigenvalue, to_spectral / from_spectral, apply.
//
// Invariants: eigenvalues >= 0 with the constant vector in the kernel
// (bin 0 on tori, lowest eigenvalue on graphs), and matvec (the one-hop
// stencil) agrees with apply on the eigenvalue symbol.
class OperatorL {
 public:
  static OperatorL laplacian(std::shared_ptr<const SpaceGrid> space);

  const SpaceGrid& space() const { return *space_; }
  const std::shared_ptr<const SpaceGrid>& space_ptr() const { return space_; }
  bool fourier() const { return fourier_; }

  int bins() const { return static_cast<int>(eig_.size()); }
  double bin_eigenvalue(int b) const { return eig_[b]; }
  const Eigen::VectorXd& eigenvalues() const { return eig_; }
  double lambda_max() const { return lambda_max_; }
  double lambda_min_positive() const { return lambda_min_pos_; }

  // Columns are independent functions; rows follow the point indexing.
  Eigen::MatrixXcd to_spectral(const Eigen::MatrixXcd& f) const;
  Eigen::MatrixXcd from_spectral(const Eigen::MatrixXcd& coef) const;

  // phi(L) f for per-bin symbol values: diagonal in the spectral frame.
  Eigen::MatrixXcd apply(const Eigen::VectorXcd& symbol, const Eigen::MatrixXcd& f) const;
  Eigen::MatrixXd apply(const Eigen::VectorXd& symbol, const Eigen::MatrixXd& f) const;

  // L f through the neighbor stencil; the locality oracle for the spectral
  // paths (one hop on graphs, 2d+1 points on tori).
  Eigen::MatrixXd matvec(const Eigen::MatrixXd& f) const;

  // L as a dense matrix, assembled column by column from the stencil.
  Eigen::MatrixXd dense() const;

 private:
  OperatorL() = default;

  std::shared_ptr<const SpaceGrid> space_;
  bool fourier_ = false;
  Eigen::VectorXd eig_;
  double lambda_max_ = 0.0, lambda_min_pos_ = 0.0;

  // torus: row-major strides and per-axis line starts for the FFT passes
  std::vector<int> strides_;
  std::vector<std::vector<int>> lines_;

  // graph: symmetrized eigenvectors and the measure scalings
  Eigen::MatrixXd evec_;
  Eigen::VectorXd sqrt_mu_, inv_sqrt_mu_;
};

// Per-column mu-weighted mean, and the relative mean-zero test used to gate
// the operators that live on the range of L.
Eigen::VectorXcd mu_mean(const SpaceGrid& space, const Eigen::MatrixXcd& f);
bool is_mean_zero(const SpaceGrid& space, const Eigen::MatrixXcd& f, double rel_tol = 1e-9);
Eigen::MatrixXd remove_mean(const SpaceGrid& space, const Eigen::MatrixXd& f);

// Bounded holomorphic symbol restricted to the non-negative reals.  The
// value at 0 is kept separate because several presets are singular at the
// origin; it only ever multiplies the (gated) kernel component.
struct HoloSymbol {
  std::string name;
  std::function<std::complex<double>(double)> eval;
  std::complex<double> at_zero{1.0, 0.0};
  double sup_norm = 1.0;
  bool is_identity = false;  // phi == 1: functional_calculus short-circuits

  static HoloSymbol one();
  static HoloSymbol heat(double t);               // exp(-t zeta)
  static HoloSymbol poisson(double s);            // exp(-s sqrt(zeta))
  static HoloSymbol imaginary_power(double s);    // zeta^{is}, 0 at the origin
  static HoloSymbol mexican(int N);               // zeta^N exp(-zeta)

  Eigen::VectorXcd on_bins(const OperatorL& L) const;
};

// Heat semigroup e^{-tL} f; mass-preserving, contractive on l2(mu).
Eigen::MatrixXd heat(const OperatorL& L, double t, const Eigen::MatrixXd& f);
Eigen::MatrixXcd heat(const OperatorL& L, double t, const Eigen::MatrixXcd& f);

// phi(L) f on mean-zero f (the kernel component is excluded by the gate).
Eigen::MatrixXcd functional_calculus(const OperatorL& L, const HoloSymbol& phi,
                                     const Eigen::MatrixXcd& f);

// Fourier transform of the even C-infinity bump exp(-1/(1-x^2)) on [-1, 1],
// tabulated once on a fine uniform grid and interpolated cubically; zero
// beyond the table where the transform has decayed below the table's own
// accuracy.  phi_hat0(0) is the integral of the bump.
double phi_hat0(double xi);

// Finite-propagation family Phi_t = phi_hat0(t sqrt(L)).
Eigen::MatrixXd phi_family(const OperatorL& L, double t, const Eigen::MatrixXd& f);
Eigen::MatrixXcd phi_family(const OperatorL& L, double t, const Eigen::MatrixXcd& f);

// mu-mass of Phi_t delta_x outside B(x, t), relative to the total mass.
// Lattice propagation is approximate; this is the measured leakage.
double propagation_leakage(const OperatorL& L, int x0, double t);

// Scale ladder matched to the spectrum: t_min = 0.1 / sqrt(lambda_max),
// t_max = 4.5 / sqrt(lambda_min+), geometric with the given ratio.  The
// range is wide enough that the Calderon integrand's head and tail both
// fall below 1e-3 of its mass for every eigenvalue.
std::shared_ptr<const HalfGrid> spectral_half_grid(const OperatorL& L,
                                                   double rho = 1.0905077326652577);

// Q_N f(y, t_j) = (t_j^2 L)^N e^{-t_j^2 L} f(y) on mean-zero f.
TentFunction<double> q_operator(const OperatorL& L, const std::shared_ptr<const HalfGrid>& hg,
                                int N, const Eigen::MatrixXd& f);
TentFunction<std::complex<double>> q_operator(const OperatorL& L,
                                              const std::shared_ptr<const HalfGrid>& hg, int N,
                                              const Eigen::MatrixXcd& f);

// pi_N u = sum_j ln(rho) (t_j^2 L)^N e^{-t_j^2 L} u(., t_j); mean-zero out.
Eigen::MatrixXd pi_operator(const OperatorL& L, int N, const TentFunction<double>& u);
Eigen::MatrixXcd pi_operator(const OperatorL& L, int N,
                             const TentFunction<std::complex<double>>& u);

// The finite-propagation variants: Phi_t in place of the heat factor.
TentFunction<double> q_tilde(const OperatorL& L, const std::shared_ptr<const HalfGrid>& hg,
                             int N, const Eigen::MatrixXd& f);
TentFunction<std::complex<double>> q_tilde(const OperatorL& L,
                                           const std::shared_ptr<const HalfGrid>& hg, int N,
                                           const Eigen::MatrixXcd& f);
Eigen::MatrixXd pi_tilde(const OperatorL& L, int N, const TentFunction<double>& u);
Eigen::MatrixXcd pi_tilde(const OperatorL& L, int N,
                          const TentFunction<std::complex<double>>& u);

// Normalizer of the reproducing formula f = c int (t^2 L)^{2N} e^{-2 t^2 L}
// f dt/t: adaptive quadrature of the scalar profile, with the closed form
// 2^{2N+1} / Gamma(2N) as an independent cross-check.
double calderon_constant(int N);
double calderon_constant_closed(int N);

// Companion constant for f = c pi_{N'} Q~_N f: same quadrature applied to
// u^{N+N'} phi_hat0(sqrt(u)) e^{-u} / (2u).
double mixed_calderon_constant(int N, int Nprime);

// Operator families for the off-diagonal measurements, at scale t.
struct OffdiagFamily {
  enum class Kind { HeatPower, PhiCalculus, PhiFamily };
  Kind kind = Kind::HeatPower;
  int k = 0;
  HoloSymbol phi = HoloSymbol::one();

  static OffdiagFamily heat_power(int k);
  static OffdiagFamily phi_calculus(HoloSymbol phi, int k);
  static OffdiagFamily phi_family();
};

// Largest singular value of 1_{E'} T_t 1_E on l2(mu), via the measure-
// symmetrized compression D^{1/2} T D^{-1/2}.  Materializes |E| columns;
// guarded against large grids.
double offdiag_measure(const OperatorL& L, const OffdiagFamily& family, const SetM& E,
                       const SetM& Eprime, double t);

struct OffdiagSample {
  double dist = 0.0;  // d(E, E')
  double t = 0.0;     // scale
  double norm = 0.0;  // measured compressed norm
};

// log norm against d^2/t^2 (exponential family: slope < 0 expected) and
// against log(1 + d^2/t^2) (polynomial family: -slope is the exponent).
LineFit offdiag_exponential_fit(const std::vector<OffdiagSample>& samples);
LineFit offdiag_polynomial_fit(const std::vector<OffdiagSample>& samples);

// Kernel integral operator Su(., t_j) = sum_i ln(rho) K(t_j, s_i) u(., s_i)
// for kernels diagonal in the spectral frame.  The composed preset is
// K(t,s) = c (t^2 L)^N e^{-t^2 L} phi(L) (s^2 L)^{N'} e^{-s^2 L}; delta is
// the discrete identity kernel 1_{i=j}/ln(rho).
struct KernelSpec {
  enum class Kind { Delta, Composed };
  Kind kind = Kind::Composed;
  int N = 1, Nprime = 1;
  HoloSymbol phi = HoloSymbol::one();
  double c = 1.0;

  static KernelSpec delta();
  static KernelSpec composed(int N, int Nprime, HoloSymbol phi, double c = 1.0);
  // c(N) Q_N pi_N: the reproducing projection onto the Q_N range.
  static KernelSpec projection(int N);
};

// s0 sums s_i < t_j, s_inf sums s_i >= t_j, and s = s0 + s_inf node-wise,
// so the split identity holds bit-exactly by construction.
struct KernelResult {
  TentFunction<std::complex<double>> s0, s_inf, s;
};

KernelResult kernel_apply(const OperatorL& L, const KernelSpec& spec,
                          const TentFunction<double>& u);
KernelResult kernel_apply(const OperatorL& L, const KernelSpec& spec,
                          const TentFunction<std::complex<double>>& u);

}  // namespace tentlab
