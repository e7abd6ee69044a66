#include "tentlab/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tentlab {

namespace {

// Per-point functional values, exact on Hilbert targets.
Eigen::VectorXd functional_field(const TentFunction<double>& u, const BanachSpace& X,
                                 const GammaOptions& opts) {
  if (X.hilbert() && !opts.force_sampling)
    return a_functional_sq_all(u, 1.0, X).cwiseMax(0.0).cwiseSqrt();
  Eigen::VectorXd out(u.grid().points());
  for (int x = 0; x < u.grid().points(); ++x)
    out[x] = gamma_norm(u, cone(u.grid_ptr(), x, 1.0), X, opts).value;
  return out;
}

// Smallest power of two at or above v (v > 0).
double next_pow2(double v) {
  double lam = std::exp2(std::ceil(std::log2(v)));
  while (lam < v) lam *= 2.0;
  while (lam * 0.5 >= v) lam *= 0.5;
  return lam;
}

// Support mask with cancelled rows dropped; the support region may keep
// nodes whose values summed to zero, which no band can see.
template <typename Scalar>
Region effective_support(const TentFunction<Scalar>& u) {
  Region eff(u.grid_ptr());
  for (int node : u.support().node_indices())
    if (u.values().row(node).squaredNorm() > 0.0) eff.add(node);
  return eff;
}

}  // namespace

LevelSets level_decomposition(const TentFunction<double>& u, double sigma,
                              const BanachSpace& X, const GammaOptions& opts) {
  if (u.empty()) throw std::invalid_argument("level_decomposition: empty tent function");
  const auto& hgp = u.grid_ptr();
  const auto& sp = hgp->space();

  LevelSets ls;
  ls.functional = functional_field(u, X, opts);
  double lo = 0.0, hi = 0.0;
  for (int x = 0; x < ls.functional.size(); ++x) {
    const double a = ls.functional[x];
    if (a <= 0.0) continue;
    lo = lo == 0.0 ? a : std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (hi == 0.0) return ls;  // kmax < kmin: nothing above any threshold

  ls.kmin = static_cast<int>(std::floor(std::log2(lo))) - 1;
  ls.kmax = static_cast<int>(std::ceil(std::log2(hi)));
  while (std::exp2(ls.kmin) >= lo) --ls.kmin;  // threshold strictly below min+

  // Tents over the extensions, one level past kmax where the set is empty.
  std::vector<Region> tents;
  for (int k = ls.kmin; k <= ls.kmax + 1; ++k) {
    const double thr = std::exp2(k);
    SetM E(sp.points());
    for (int x = 0; x < sp.points(); ++x)
      if (ls.functional[x] > thr) E.add(x);
    SetM estar = E.empty() ? E : maximal_extension(sp, E, sigma);
    double mu = 0.0;
    for (int x : estar.indices()) mu += sp.measure(x);
    tents.push_back(estar.empty() ? Region(hgp) : tent(hgp, estar));
    if (k <= ls.kmax) {
      ls.level.push_back(std::move(E));
      ls.extended.push_back(std::move(estar));
      ls.extended_measure.push_back(mu);
    }
  }
  for (size_t i = 0; i + 1 < tents.size(); ++i) {
    if (!tents[i + 1].subset_of(tents[i]))
      throw std::logic_error("level_decomposition: tents not nested");
    ls.bands.push_back(tents[i].minus(tents[i + 1]));
  }
  return ls;
}

Decomposition atomic_decompose(const TentFunction<double>& u, double sigma,
                               const BanachSpace& X, const GammaOptions& opts) {
  const auto& hgp = u.grid_ptr();
  const auto& sp = hgp->space();
  Decomposition dec;
  dec.t1_norm = tent_norm(u, 1.0, 1.0, X, opts).value;

  const LevelSets ls = level_decomposition(u, sigma, X, opts);
  dec.kmin = ls.kmin;
  dec.kmax = ls.kmax;
  if (ls.kmax < ls.kmin) return dec;  // u = 0
  dec.level_count = ls.kmax - ls.kmin + 1;

  const Region eff = effective_support(u);
  Region assigned(hgp);
  Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(hgp->nodes(), u.components());

  for (size_t ki = 0; ki < ls.bands.size(); ++ki) {
    const Region band = ls.bands[ki].intersect(eff);
    if (band.empty()) continue;
    const auto balls = whitney_decomposition(sp, ls.extended[ki]);

    // Dilated tents, built on first use; the first Whitney ball covering the
    // base point has radius at least half its distance to the complement,
    // which makes its tripled tent contain the whole node.
    std::vector<Region> tents3(balls.size());
    std::vector<char> built(balls.size(), 0);
    std::vector<std::vector<int>> piece(balls.size());
    for (int node : band.node_indices()) {
      bool placed = false;
      for (size_t b = 0; b < balls.size() && !placed; ++b) {
        if (!built[b]) {
          tents3[b] = tent(hgp, sp.ball_points(balls[b].center, 3.0 * balls[b].radius));
          built[b] = 1;
        }
        if (tents3[b].contains(node)) {
          piece[b].push_back(node);
          placed = true;
        }
      }
      if (!placed) throw std::logic_error("atomic_decompose: node escaped every dilated ball");
      assigned.add(node);
    }

    for (size_t b = 0; b < balls.size(); ++b) {
      if (piece[b].empty()) continue;
      Region mask(hgp);
      for (int node : piece[b]) mask.add(node);
      const TentFunction<double> part = restrict_to(u, mask);
      const Ball dilated{balls[b].center, 3.0 * balls[b].radius};
      const double muB = sp.volume(dilated.center, dilated.radius);
      const double t2 = X.hilbert() && !opts.force_sampling
                            ? std::sqrt(tent_norm2_sq_fubini(part, X))
                            : tent_norm(part, 2.0, 1.0, X, opts).value;
      const double literal = std::sqrt(muB) * t2;
      if (!(literal > 0.0)) continue;
      const double lam = next_pow2(literal);
      TentAtom atom;
      atom.ball = dilated;
      atom.lambda_literal = literal;
      atom.a = scale(part, 1.0 / lam);
      recon += lam * atom.a.values();
      dec.lambdas.push_back(lam);
      dec.atoms.push_back(std::move(atom));
      dec.lambda_sum += lam;
    }
  }

  if (!(assigned == eff))
    throw std::logic_error("atomic_decompose: bands missed part of the support");
  dec.reconstruction_residual = (recon - u.values()).cwiseAbs().maxCoeff();
  return dec;
}

AtomCheck verify_atom(const TentAtom& atom, const BanachSpace& X, const GammaOptions& opts) {
  AtomCheck chk;
  const auto& hgp = atom.a.grid_ptr();
  const auto& sp = hgp->space();
  const double muB = sp.volume(atom.ball.center, atom.ball.radius);

  const Region tb = tent(hgp, sp.ball_points(atom.ball.center, atom.ball.radius));
  chk.support_ok = atom.a.support().subset_of(tb);

  const bool exact = X.hilbert() && !opts.force_sampling;
  chk.t2_bound = muB > 0.0 ? 1.0 / std::sqrt(muB) : 0.0;
  double t2_se = 0.0;
  if (exact) {
    chk.t2_value = std::sqrt(tent_norm2_sq_fubini(atom.a, X));
  } else {
    // worst per-point stderr as the Monte Carlo slack
    const auto rep = tent_norm(atom.a, 2.0, 1.0, X, opts);
    chk.t2_value = rep.value;
    for (int x = 0; x < sp.points(); ++x) {
      const auto est = gamma_norm(atom.a, cone(hgp, x, 1.0), X, opts);
      t2_se = std::max(t2_se, est.stderr_);
    }
  }
  chk.t2_ok = chk.t2_value <= chk.t2_bound * (1.0 + 1e-12) + 3.0 * t2_se;

  chk.tp_ok = true;
  for (double p : {1.0, 1.5, 2.0}) {
    const double tp = tent_norm(atom.a, p, 1.0, X, opts).value;
    const double bound = std::pow(muB, -(1.0 - 1.0 / p));
    if (tp > bound * (1.0 + 1e-12) + 3.0 * t2_se) chk.tp_ok = false;
  }
  chk.pass = chk.support_ok && chk.t2_ok && chk.tp_ok;
  return chk;
}

TentFunction<std::complex<double>> interpolation_function(const TentFunction<double>& u,
                                                          double p, double r,
                                                          std::complex<double> zeta,
                                                          double sigma, const BanachSpace& X,
                                                          const GammaOptions& opts) {
  if (zeta.real() < 0.0 || zeta.real() > 1.0)
    throw std::invalid_argument("interpolation_function: zeta outside the closed strip");
  if (!(r > 1.0) || r > 2.0)
    throw std::invalid_argument("interpolation_function: r must lie in (1, 2]");
  if (!(p >= 1.0)) throw std::invalid_argument("interpolation_function: p must be >= 1");

  const LevelSets ls = level_decomposition(u, sigma, X, opts);
  Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(u.grid().nodes(), u.components());
  if (ls.kmax < ls.kmin)
    return TentFunction<std::complex<double>>(u.grid_ptr(), std::move(vals), Region(u.grid_ptr()));

  const std::complex<double> upsilon = 1.0 - zeta * (1.0 - 1.0 / r);
  std::complex<double> s = upsilon * p - 1.0;
  if (std::abs(s) <= 1e-9) s = 0.0;  // snap: the recovery point returns u itself

  const Region eff = effective_support(u);
  Region covered(u.grid_ptr());
  for (size_t ki = 0; ki < ls.bands.size(); ++ki) {
    const Region band = ls.bands[ki].intersect(eff);
    if (band.empty()) continue;
    const int k = ls.kmin + static_cast<int>(ki);
    const std::complex<double> coef =
        s == 0.0 ? std::complex<double>(1.0) : std::exp(std::log(2.0) * (double(k) * s));
    for (int node : band.node_indices()) {
      if (covered.contains(node))
        throw std::logic_error("interpolation_function: bands overlap");
      covered.add(node);
      for (int c = 0; c < u.components(); ++c) vals(node, c) = coef * u.values()(node, c);
    }
  }
  if (!(covered == eff))
    throw std::logic_error("interpolation_function: bands missed part of the support");
  return TentFunction<std::complex<double>>(u.grid_ptr(), std::move(vals));
}

}  // namespace tentlab
