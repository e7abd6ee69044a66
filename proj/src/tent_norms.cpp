#include "tentlab/tent_norms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>

#include "box_sums.hpp"
#include "tentlab/fit.hpp"

namespace tentlab {

namespace {

// Largest integer m with cell * m < radius (-1 if none), adjusted so the
// comparison is the same one cone() applies to lattice distances.
int hw_exact(double radius, double cell) {
  int m = static_cast<int>(std::ceil(radius / cell)) - 1;
  if (m < -1) m = -1;
  while (cell * (m + 1) < radius) ++m;
  while (m >= 0 && !(cell * m < radius)) --m;
  return m;
}

template <typename Scalar>
double sq_x_norm(const BanachSpace& X, const Eigen::Matrix<Scalar, Eigen::Dynamic,
                                                           Eigen::Dynamic>& vals,
                 int row) {
  double s = 0.0;
  for (int c = 0; c < vals.cols(); ++c) s += X.wgt(c) * std::norm(vals(row, c));
  return s;
}

template <typename Scalar>
void check_field_args(const TentFunction<Scalar>& u, double alpha, const BanachSpace& X) {
  if (u.empty()) throw std::invalid_argument("a_functional: empty tent function");
  if (alpha < 1.0) throw std::invalid_argument("a_functional: aperture must be >= 1");
  if (u.components() != X.dim())
    throw std::invalid_argument("a_functional: target dimension mismatch");
}

// Per-point functional values, exact when the target is Hilbert, otherwise
// one Monte Carlo estimate per point.  Draws are node-keyed, so one seed
// serves every point consistently.
template <typename Scalar>
Eigen::VectorXd a_field(const TentFunction<Scalar>& u, double alpha, const BanachSpace& X,
                        const GammaOptions& opts, bool* sampled) {
  if (X.hilbert() && !opts.force_sampling) {
    if (sampled) *sampled = false;
    return a_functional_sq_all(u, alpha, X).cwiseMax(0.0).cwiseSqrt();
  }
  check_field_args(u, alpha, X);
  if (sampled) *sampled = true;
  const auto& hg = u.grid_ptr();
  Eigen::VectorXd out(hg->points());
  for (int x = 0; x < hg->points(); ++x)
    out[x] = gamma_norm(u, cone(hg, x, alpha), X, opts).value;
  return out;
}

double lp_of_field(const SpaceGrid& sp, const Eigen::VectorXd& field, double p) {
  double acc = 0.0;
  for (int x = 0; x < sp.points(); ++x)
    if (field[x] > 0.0) acc += sp.measure(x) * std::pow(field[x], p);
  return std::pow(acc, 1.0 / p);
}

}  // namespace

template <typename Scalar>
Eigen::VectorXd a_functional_sq_all(const TentFunction<Scalar>& u, double alpha,
                                    const BanachSpace& X) {
  check_field_args(u, alpha, X);
  if (!X.hilbert())
    throw std::invalid_argument("a_functional_sq_all: closed form needs a Hilbert target");
  const auto& hg = u.grid();
  const auto& sp = hg.space();
  const int n = hg.points();
  const int J = hg.levels();
  const auto& vals = u.values();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);

  if (sp.is_torus()) {
    std::vector<std::vector<int>> coords(n);
    for (int x = 0; x < n; ++x) coords[x] = sp.coords_of(x);
    std::vector<double> field(n);
    for (int j = 0; j < J; ++j) {
      bool any = false;
      for (int y = 0; y < n; ++y) {
        const int node = hg.node(y, j);
        if (u.support().contains(node)) {
          field[y] = hg.gamma_weight(y, j) * sq_x_norm(X, vals, node);
          any = any || field[y] > 0.0;
        } else {
          field[y] = 0.0;
        }
      }
      if (!any) continue;
      const int m = hw_exact(alpha * hg.t(j), sp.cell());
      if (m < 0) continue;
      detail::TorusPrefix<double> pre(sp.sides(), field);
      const std::vector<int> hw(sp.dims(), m);
      for (int x = 0; x < n; ++x) out[x] += pre.box(coords[x], hw);
    }
    return out;
  }

  // Graph path: suffix energies per support point, one distance lookup per
  // (x, support point) pair.
  std::vector<int> pts;
  std::vector<Eigen::VectorXd> suffix;
  for (int y = 0; y < n; ++y) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(J + 1);
    bool any = false;
    for (int j = J - 1; j >= 0; --j) {
      const int node = hg.node(y, j);
      double e = 0.0;
      if (u.support().contains(node)) e = hg.gamma_weight(y, j) * sq_x_norm(X, vals, node);
      s[j] = s[j + 1] + e;
      any = any || e > 0.0;
    }
    if (any) {
      pts.push_back(y);
      suffix.push_back(std::move(s));
    }
  }
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      const double d = sp.distance(x, pts[i]);
      int j = std::max(0, hg.levels_at_most(d / alpha) - 2);
      while (j < J && !(alpha * hg.t(j) > d)) ++j;
      acc += suffix[i][j];
    }
    out[x] = acc;
  }
  return out;
}

template <typename Scalar>
GammaEstimate a_functional(const TentFunction<Scalar>& u, int x, double alpha,
                           const BanachSpace& X, const GammaOptions& opts) {
  check_field_args(u, alpha, X);
  if (x < 0 || x >= u.grid().points()) throw std::invalid_argument("a_functional: bad point");
  return gamma_norm(u, cone(u.grid_ptr(), x, alpha), X, opts);
}

template <typename Scalar>
TentNormReport tent_norm(const TentFunction<Scalar>& u, double p, double alpha,
                         const BanachSpace& X, const GammaOptions& opts) {
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("tent_norm: p must be finite and >= 1");
  bool sampled = false;
  TentNormReport rep;
  rep.p = p;
  rep.alpha = alpha;
  rep.functional = a_field(u, alpha, X, opts, &sampled);
  rep.value = lp_of_field(u.grid().space(), rep.functional, p);
  rep.method = sampled ? "sampled" : "exact";
  rep.samples = sampled ? opts.samples : 0;
  rep.seed = sampled ? opts.seed : 0;
  return rep;
}

template <typename Scalar>
TentNormReport tent_norm_inf(const TentFunction<Scalar>& v, const BanachSpace& X,
                             const GammaOptions& opts) {
  check_field_args(v, 1.0, X);
  const auto& hgp = v.grid_ptr();
  const auto& hg = *hgp;
  const auto& sp = hg.space();
  const int n = hg.points();
  const int J = hg.levels();
  const bool exact = X.hilbert() && !opts.force_sampling;

  TentNormReport rep;
  rep.p = std::numeric_limits<double>::infinity();
  rep.method = exact ? "exact" : "sampled";
  rep.samples = exact ? 0 : opts.samples;
  rep.seed = exact ? 0 : opts.seed;

  // Level fields G_j(x) = sum over y in B(x, t_j) of w(y,j) ||v(y,j)||^2;
  // the truncated functional squared below height r is the partial sum
  // F_r = sum_{t_j < r} G_j.
  std::vector<Eigen::VectorXd> G;
  if (exact) {
    G.assign(J, Eigen::VectorXd::Zero(n));
    const auto& vals = v.values();
    if (sp.is_torus()) {
      std::vector<std::vector<int>> coords(n);
      for (int x = 0; x < n; ++x) coords[x] = sp.coords_of(x);
      std::vector<double> field(n);
      for (int j = 0; j < J; ++j) {
        bool any = false;
        for (int y = 0; y < n; ++y) {
          const int node = hg.node(y, j);
          field[y] = v.support().contains(node)
                         ? hg.gamma_weight(y, j) * sq_x_norm(X, vals, node)
                         : 0.0;
          any = any || field[y] > 0.0;
        }
        if (!any) continue;
        const int m = hw_exact(1.0 * hg.t(j), sp.cell());
        if (m < 0) continue;
        detail::TorusPrefix<double> pre(sp.sides(), field);
        const std::vector<int> hw(sp.dims(), m);
        for (int x = 0; x < n; ++x) G[j][x] = pre.box(coords[x], hw);
      }
    } else {
      for (int j = 0; j < J; ++j) {
        for (int y = 0; y < n; ++y) {
          const int node = hg.node(y, j);
          if (!v.support().contains(node)) continue;
          const double e = hg.gamma_weight(y, j) * sq_x_norm(X, vals, node);
          if (e == 0.0) continue;
          for (int x = 0; x < n; ++x)
            if (1.0 * hg.t(j) > sp.distance(x, y)) G[j][x] += e;
        }
      }
    }
  }

  // Monte Carlo path: one estimate per distinct (point, cut level).
  std::map<std::pair<int, int>, double> mc_sq;
  auto truncated_sq = [&](int x, int jcut, double r) {
    auto it = mc_sq.find({x, jcut});
    if (it != mc_sq.end()) return it->second;
    const auto est = gamma_norm(v, truncated_cone(hgp, x, 1.0, r), X, opts);
    const double sq = est.value * est.value;
    mc_sq.insert({{x, jcut}, sq});
    return sq;
  };

  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  int jdone = 0;
  int best_jcut = 0;
  for (double r : sp.radius_ladder()) {
    int jcut = hg.levels_at_most(r);
    while (jcut > 0 && !(hg.t(jcut - 1) < r)) --jcut;
    if (exact) {
      for (; jdone < jcut; ++jdone) F += G[jdone];
    }
    for (int c = 0; c < n; ++c) {
      const double vol = sp.volume(c, r);
      if (vol <= 0.0) continue;
      double acc = 0.0;
      for (int x = 0; x < n; ++x) {
        if (!(sp.distance(c, x) < r)) continue;
        acc += sp.measure(x) * (exact ? F[x] : truncated_sq(x, jcut, r));
      }
      const double avg = acc / vol;
      if (rep.best_center < 0 || avg > rep.value * rep.value) {
        rep.value = std::sqrt(std::max(0.0, avg));
        rep.best_center = c;
        rep.best_radius = r;
        best_jcut = jcut;
      }
    }
  }

  if (exact) {
    Eigen::VectorXd Fb = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < best_jcut; ++j) Fb += G[j];
    rep.functional = Fb.cwiseMax(0.0).cwiseSqrt();
  } else {
    rep.functional = Eigen::VectorXd::Zero(n);
    for (int x = 0; x < n; ++x)
      rep.functional[x] = std::sqrt(std::max(0.0, truncated_sq(x, best_jcut, rep.best_radius)));
  }
  return rep;
}

template <typename Scalar>
double tent_norm2_sq_fubini(const TentFunction<Scalar>& u, const BanachSpace& X) {
  check_field_args(u, 1.0, X);
  if (!X.hilbert())
    throw std::invalid_argument("tent_norm2_sq_fubini: needs a Hilbert target");
  const auto& hg = u.grid();
  double acc = 0.0;
  for (int node : u.support().node_indices())
    acc += hg.pairing_weight(hg.node_point(node)) * sq_x_norm(X, u.values(), node);
  return acc;
}

template <typename Scalar>
Scalar duality_pairing(const TentFunction<Scalar>& u, const TentFunction<Scalar>& v) {
  if (&u.grid() != &v.grid()) throw std::invalid_argument("duality_pairing: grids differ");
  if (u.components() != v.components())
    throw std::invalid_argument("duality_pairing: component mismatch");
  const auto& hg = u.grid();
  Scalar acc = Scalar(0);
  for (int node : u.support().intersect(v.support()).node_indices()) {
    Scalar dot = Scalar(0);
    for (int c = 0; c < u.components(); ++c) dot += u.values()(node, c) * v.values()(node, c);
    acc += Scalar(hg.pairing_weight(hg.node_point(node))) * dot;
  }
  return acc;
}

ApertureReport aperture_exponent_fit(const std::vector<TentFunction<double>>& corpus,
                                     const std::vector<double>& alphas, double p,
                                     const BanachSpace& X, const GammaOptions& opts) {
  if (corpus.empty()) throw std::invalid_argument("aperture_exponent_fit: empty corpus");
  if (alphas.size() < 2) throw std::invalid_argument("aperture_exponent_fit: need two apertures");
  ApertureReport rep;
  rep.alphas = alphas;
  rep.ratios.resize(static_cast<int>(corpus.size()), static_cast<int>(alphas.size()));
  rep.slopes.resize(static_cast<int>(corpus.size()));
  for (size_t i = 0; i < corpus.size(); ++i) {
    const double base = tent_norm(corpus[i], p, 1.0, X, opts).value;
    if (base <= 0.0) throw std::invalid_argument("aperture_exponent_fit: zero-norm member");
    std::vector<double> ratios(alphas.size());
    for (size_t a = 0; a < alphas.size(); ++a) {
      ratios[a] = tent_norm(corpus[i], p, alphas[a], X, opts).value / base;
      rep.ratios(static_cast<int>(i), static_cast<int>(a)) = ratios[a];
    }
    rep.slopes[static_cast<int>(i)] = fit_loglog(alphas, ratios).slope;
  }
  rep.max_slope = rep.slopes.maxCoeff();
  return rep;
}

TruncationReport pointwise_truncation_bound(const TentFunction<double>& u, double lambda,
                                            double sigma, const BanachSpace& X,
                                            const GammaOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("pointwise_truncation_bound: lambda > 0");
  const auto& hgp = u.grid_ptr();
  const auto& sp = hgp->space();
  TruncationReport rep;
  const Eigen::VectorXd A = a_field(u, 1.0, X, opts, nullptr);
  rep.level_set = SetM(sp.points());
  for (int x = 0; x < sp.points(); ++x)
    if (A[x] > lambda) rep.level_set.add(x);

  Region keep(hgp, true);
  if (!rep.level_set.empty()) {
    const SetM estar = maximal_extension(sp, rep.level_set, sigma);
    keep = tent(hgp, estar).complement();
  }
  const Eigen::VectorXd A2 = a_field(restrict_to(u, keep), 1.0, X, opts, nullptr);
  rep.ratio = A2.size() ? A2.maxCoeff() / lambda : 0.0;

  // Cover certificates need a proper level set; when E is everything the
  // tent removal already emptied u and the bound holds vacuously.
  if (static_cast<int>(rep.level_set.count()) < sp.points()) {
    for (int x : rep.level_set.indices()) {
      const CoverReport cover = cone_cover_search(hgp, rep.level_set, sigma, x);
      rep.cover_sizes.push_back(static_cast<int>(cover.centers.size()));
      if (cover.success)
        rep.max_cover = std::max(rep.max_cover, static_cast<int>(cover.centers.size()));
    }
  }
  return rep;
}

double averaging_projection_deviation(const TentFunction<double>& u, double alpha) {
  if (u.empty()) throw std::invalid_argument("averaging_projection_check: empty function");
  if (alpha < 1.0) throw std::invalid_argument("averaging_projection_check: aperture >= 1");
  const auto& hg = u.grid();
  const auto& sp = hg.space();
  const int n = hg.points();
  if (static_cast<std::int64_t>(n) * hg.nodes() > (1 << 24))
    throw std::invalid_argument("averaging_projection_check: grid too large");

  double dev = 0.0;
  for (int node : u.support().node_indices()) {
    const int y = hg.node_point(node);
    const int j = hg.node_level(node);
    const double t = hg.t(j);
    for (int c = 0; c < u.components(); ++c) {
      const double val = u.values()(node, c);
      // Ball average of the aperture-1 extension field over z in B(y, t),
      // evaluated literally.
      double num = 0.0, den = 0.0;
      for (int z = 0; z < n; ++z) {
        if (!(sp.distance(z, y) < t)) continue;
        den += sp.measure(z);
        num += sp.measure(z) * val;
      }
      const double avg = den > 0.0 ? num / den : 0.0;
      for (int x = 0; x < n; ++x) {
        const bool in_alpha = alpha * t > sp.distance(x, y);
        const double lhs = in_alpha ? val : 0.0;
        const double rhs = in_alpha ? avg : 0.0;
        dev = std::max(dev, std::abs(lhs - rhs));
      }
    }
  }
  return dev;
}

TinfComparison tinf_comparability(const TentFunction<double>& v) {
  if (v.components() != 1)
    throw std::invalid_argument("tinf_comparability: scalar functions only");
  const BanachSpace X = BanachSpace::lq(1, 2);
  const auto& hgp = v.grid_ptr();
  const auto& hg = *hgp;
  const auto& sp = hg.space();

  TinfComparison cmp;
  cmp.lhs = tent_norm_inf(v, X).value;

  // Tent-mass form: per ball B, the what-mass of |v|^2 over T(3B), averaged
  // by mu(B).
  for (int c = 0; c < sp.points(); ++c) {
    for (double r : sp.radius_ladder()) {
      const double vol = sp.volume(c, r);
      if (vol <= 0.0) continue;
      const Region t3b = tent(hgp, sp.ball_points(c, 3.0 * r));
      double mass = 0.0;
      for (int node : v.support().intersect(t3b).node_indices())
        mass += hg.pairing_weight(hg.node_point(node)) * std::norm(v.values()(node, 0));
      cmp.rhs = std::max(cmp.rhs, mass / vol);
    }
  }
  cmp.rhs = std::sqrt(cmp.rhs);
  cmp.ratio = cmp.rhs > 0.0 ? cmp.lhs / cmp.rhs : (cmp.lhs > 0.0 ? 1e300 : 0.0);
  return cmp;
}

SetM surround_set(const Region& K) {
  const auto& hg = K.grid();
  const auto& sp = hg.space();
  SetM out(sp.points());
  for (int node : K.node_indices()) {
    const int y = hg.node_point(node);
    const double t = hg.t(hg.node_level(node));
    if (sp.is_torus()) {
      const int m = hw_exact(1.0 * t, sp.cell());
      if (m < 0) continue;
      std::vector<int> strides(sp.dims(), 1);
      for (int a = sp.dims() - 2; a >= 0; --a) strides[a] = strides[a + 1] * sp.sides()[a + 1];
      detail::for_each_box_point(sp.sides(), strides, sp.coords_of(y),
                                 std::vector<int>(sp.dims(), m), [&](int x) { out.add(x); });
    } else {
      for (int x = 0; x < sp.points(); ++x)
        if (1.0 * t > sp.distance(x, y)) out.add(x);
    }
  }
  return out;
}

template Eigen::VectorXd a_functional_sq_all<double>(const TentFunction<double>&, double,
                                                     const BanachSpace&);
template Eigen::VectorXd a_functional_sq_all<std::complex<double>>(
    const TentFunction<std::complex<double>>&, double, const BanachSpace&);
template GammaEstimate a_functional<double>(const TentFunction<double>&, int, double,
                                            const BanachSpace&, const GammaOptions&);
template GammaEstimate a_functional<std::complex<double>>(
    const TentFunction<std::complex<double>>&, int, double, const BanachSpace&,
    const GammaOptions&);
template TentNormReport tent_norm<double>(const TentFunction<double>&, double, double,
                                          const BanachSpace&, const GammaOptions&);
template TentNormReport tent_norm<std::complex<double>>(const TentFunction<std::complex<double>>&,
                                                        double, double, const BanachSpace&,
                                                        const GammaOptions&);
template TentNormReport tent_norm_inf<double>(const TentFunction<double>&, const BanachSpace&,
                                              const GammaOptions&);
template TentNormReport tent_norm_inf<std::complex<double>>(
    const TentFunction<std::complex<double>>&, const BanachSpace&, const GammaOptions&);
template double tent_norm2_sq_fubini<double>(const TentFunction<double>&, const BanachSpace&);
template double tent_norm2_sq_fubini<std::complex<double>>(
    const TentFunction<std::complex<double>>&, const BanachSpace&);
template double duality_pairing<double>(const TentFunction<double>&,
                                        const TentFunction<double>&);
template std::complex<double> duality_pairing<std::complex<double>>(
    const TentFunction<std::complex<double>>&, const TentFunction<std::complex<double>>&);

}  // namespace tentlab
