#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "tentlab/banach.hpp"
#include "tentlab/gamma.hpp"
#include "tentlab/tent_function.hpp"

namespace tentlab {

// Result of a tent-space norm evaluation.  For finite p the value is the
// measure-weighted l^p norm of the functional array,
//   value = (sum_x mu(x) * functional(x)^p)^(1/p);
// for p = inf the value is the ball-scan supremum and best_center/best_radius
// record the maximizing ball, with functional holding the truncated
// functional at that radius.
struct TentNormReport {
  double p = 2.0;
  double alpha = 1.0;
  double value = 0.0;
  Eigen::VectorXd functional;
  int best_center = -1;    // p = inf only
  double best_radius = 0;  // p = inf only
  std::string method = "exact";
  int samples = 0;
  std::uint64_t seed = 0;
};

// Exact squared functional field x -> A_alpha u(x)^2.  Hilbert targets only;
// cost O(levels * points) on tori (box sums per level), O(points^2) on
// graphs (per-point level suffix sums).
template <typename Scalar>
Eigen::VectorXd a_functional_sq_all(const TentFunction<Scalar>& u, double alpha,
                                    const BanachSpace& X);

// A_alpha u(x) = gamma norm of u over the cone at x; exact or sampled per
// the target space, like gamma_norm.
template <typename Scalar>
GammaEstimate a_functional(const TentFunction<Scalar>& u, int x, double alpha,
                           const BanachSpace& X, const GammaOptions& opts = {});

template <typename Scalar>
TentNormReport tent_norm(const TentFunction<Scalar>& u, double p, double alpha,
                         const BanachSpace& X, const GammaOptions& opts = {});

// sup over balls B (every center, every ladder radius) of the mu-average of
// the truncated functional squares over B, square-rooted.
template <typename Scalar>
TentNormReport tent_norm_inf(const TentFunction<Scalar>& v, const BanachSpace& X,
                             const GammaOptions& opts = {});

// Fubini form of the squared T^2 norm for Hilbert targets:
//   sum over nodes of what(y) * ||u(y,t)||_X^2.
// Equals tent_norm(u, 2, 1, X)^2 because w * V = what holds exactly; this
// path never touches the point loop, so it is the reproducible normalizer.
template <typename Scalar>
double tent_norm2_sq_fubini(const TentFunction<Scalar>& u, const BanachSpace& X);

// sum over nodes of what(y) * <u(y,t), v(y,t)> with the coordinatewise
// bilinear pairing.
template <typename Scalar>
Scalar duality_pairing(const TentFunction<Scalar>& u, const TentFunction<Scalar>& v);

struct ApertureReport {
  std::vector<double> alphas;
  Eigen::MatrixXd ratios;   // corpus x alphas, ||A_alpha u||_p / ||A_1 u||_p
  Eigen::VectorXd slopes;   // per function, log-log least-squares slope
  double max_slope = 0.0;
};

// Per function, fits log(ratio) against log(alpha) and reports every ratio
// plus the worst slope.  Callers pick apertures clear of saturation.
ApertureReport aperture_exponent_fit(const std::vector<TentFunction<double>>& corpus,
                                     const std::vector<double>& alphas, double p,
                                     const BanachSpace& X, const GammaOptions& opts = {});

struct TruncationReport {
  double ratio = 0.0;   // max_x A(u restricted off T(E^sigma))(x) / lambda
  SetM level_set;       // E = {A u > lambda}
  std::vector<int> cover_sizes;  // cone-cover certificate size per point of E
  int max_cover = 0;
};

// Pointwise truncation bound: with E = {A u > lambda}, removing the tent
// over E^sigma caps the functional at a multiple of lambda; the certificate
// comes from cone_cover_search at each point of E.
TruncationReport pointwise_truncation_bound(const TentFunction<double>& u, double lambda,
                                            double sigma, const BanachSpace& X,
                                            const GammaOptions& opts = {});

// Literal check of the averaging identity: the aperture-alpha extension of u
// equals the ball average of the aperture-1 extension field.  Returns the
// max node-wise deviation; O(points * nodes) work, guarded.
double averaging_projection_deviation(const TentFunction<double>& u, double alpha);

struct TinfComparison {
  double lhs = 0.0;    // tent_norm_inf
  double rhs = 0.0;    // sup_B ( sum_{T(3B)} what |v|^2 / mu(B) )^(1/2)
  double ratio = 0.0;  // lhs / rhs, at most 1 up to rounding
};

// Scalar comparability of the T^inf ball scan against the tent-mass form;
// the lhs <= rhs direction is exact, the converse constant is measured.
TinfComparison tinf_comparability(const TentFunction<double>& v);

// Points whose unit cone meets K.
SetM surround_set(const Region& K);

}  // namespace tentlab
