#include "tentlab/corpus.hpp"

#include <cmath>
#include <stdexcept>

#include "tentlab/rng.hpp"

namespace tentlab {

TentFunction<double> random_tent_function(const std::shared_ptr<const HalfGrid>& hg, int m,
                                          std::uint64_t seed, int target) {
  if (target < 1) throw std::invalid_argument("random_tent_function: target must be positive");
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(hg->nodes(), m);
  const int np = hg->points();
  // Levels below the diameter scale; places mass where cones and tents live.
  const int jlow = std::max(1, hg->levels_at_most(hg->space().diameter()));
  for (int i = 0; i < target; ++i) {
    int node;
    if (i % 2 == 0) {
      const int j = static_cast<int>(rng::pick(seed, 40, 2 * i, jlow));
      const int y = static_cast<int>(rng::pick(seed, 40, 2 * i + 1, np));
      node = hg->node(y, j);
    } else {
      node = static_cast<int>(rng::pick(seed, 41, i, hg->nodes()));
    }
    for (int c = 0; c < m; ++c) vals(node, c) = rng::normal(seed, 42 + c, node);
  }
  return TentFunction<double>(hg, std::move(vals));
}

TentFunction<double> point_mass(const std::shared_ptr<const HalfGrid>& hg, int point, int level,
                                const Eigen::VectorXd& value) {
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(hg->nodes(), value.size());
  vals.row(hg->node(point, level)) = value.transpose();
  return TentFunction<double>(hg, std::move(vals));
}

Region random_region(const std::shared_ptr<const HalfGrid>& hg, std::uint64_t seed) {
  const int np = hg->points();
  const int x1 = static_cast<int>(rng::pick(seed, 50, 0, np));
  const int x2 = static_cast<int>(rng::pick(seed, 50, 1, np));
  const double a1 = 0.5 + 1.5 * rng::uniform01(seed, 50, 2);
  const double a2 = 0.5 + 1.5 * rng::uniform01(seed, 50, 3);
  const double r = hg->t(hg->levels() / 2) * (0.5 + rng::uniform01(seed, 50, 4));
  Region R = cone(hg, x1, a1).unite(truncated_cone(hg, x2, a2, r));
  SetM E(np);
  for (int i = 0; i < np; ++i)
    if (rng::uniform01(seed, 51, i) < 0.5) E.add(i);
  if (!E.empty()) R = R.unite(tent(hg, E));
  return R;
}

SetM random_box_union(const SpaceGrid& space, std::uint64_t seed, int boxes, int align) {
  if (!space.is_torus()) throw std::invalid_argument("random_box_union: torus only");
  if (align < 2) throw std::invalid_argument("random_box_union: align must be at least 2");
  const int d = space.dims();
  SetM E(space.points());
  for (int b = 0; b < boxes; ++b) {
    // Corners on the align-lattice: lo_a and width in units of side/align.
    std::vector<int> lo(d), wid(d);
    for (int a = 0; a < d; ++a) {
      const int s = space.sides()[a];
      const int unit = std::max(1, s / align);
      lo[a] = static_cast<int>(rng::pick(seed, 60 + b, 2 * a, align)) * unit;
      wid[a] = (1 + static_cast<int>(rng::pick(seed, 60 + b, 2 * a + 1, align / 2))) * unit;
    }
    for (int i = 0; i < space.points(); ++i) {
      const auto c = space.coords_of(i);
      bool inside = true;
      for (int a = 0; a < d; ++a) {
        const int s = space.sides()[a];
        const int rel = ((c[a] - lo[a]) % s + s) % s;
        inside = inside && rel < wid[a];
      }
      if (inside) E.add(i);
    }
  }
  if (E.empty()) E.add(0);
  if (E.full()) E.remove(space.points() - 1);
  return E;
}

BanachSpace random_banach(std::uint64_t seed, std::uint64_t index, bool hilbert_only) {
  // Targets meant for sampling keep at least four coordinates: the sampling
  // error of the squared norm scales with the effective coordinate rank of
  // the Gaussian sum, and scalar targets would be stuck at chi-square(1)
  // fluctuations above the one percent band.
  const int m = 4 + static_cast<int>(rng::pick(seed, 70, 2 * index, 3));
  if (hilbert_only || rng::pick(seed, 70, 2 * index + 1, 4) == 0) {
    if (rng::pick(seed, 71, index, 2) == 0) return BanachSpace::lq(m, 2.0);
    Eigen::VectorXd w(m);
    for (int c = 0; c < m; ++c) w[c] = 0.25 + 4.0 * rng::uniform01(seed, 72 + c, index);
    return BanachSpace::weighted_lq(m, 2.0, w);
  }
  static const double qs[] = {1.0, 1.5, 2.5, 3.0, 4.0};
  return BanachSpace::lq(m, qs[rng::pick(seed, 73, index, 5)]);
}

double effective_nodes(const TentFunction<double>& u, const Region& R) {
  const auto& hg = u.grid();
  double s1 = 0.0, s2 = 0.0;
  for (int n = 0; n < hg.nodes(); ++n) {
    if (!u.support().contains(n) || !R.contains(n)) continue;
    const double w = hg.gamma_weight(hg.node_point(n), hg.node_level(n));
    const double e = w * u.values().row(n).squaredNorm();
    s1 += e;
    s2 += e * e;
  }
  return s2 > 0.0 ? s1 * s1 / s2 : 0.0;
}

namespace {

// Participation ratio of the eigenvalues of the coordinate covariance of the
// Gaussian sum restricted to R, with the coordinate weights of X folded in:
// tr(C)^2 / tr(C^2).
double coordinate_rank(const TentFunction<double>& u, const Region& R, const BanachSpace& X) {
  const auto& hg = u.grid();
  const int m = u.components();
  Eigen::VectorXd sw(m);
  for (int c = 0; c < m; ++c) sw[c] = std::sqrt(X.wgt(c));
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
  for (int n = 0; n < hg.nodes(); ++n) {
    if (!u.support().contains(n) || !R.contains(n)) continue;
    const double w = hg.gamma_weight(hg.node_point(n), hg.node_level(n));
    const Eigen::VectorXd row = u.values().row(n).transpose().cwiseProduct(sw);
    C += w * row * row.transpose();
  }
  const double tr = C.trace();
  const double tr2 = (C * C).trace();
  return tr2 > 0.0 ? tr * tr / tr2 : 0.0;
}

}  // namespace

GammaTriple gamma_corpus_triple(const std::shared_ptr<const HalfGrid>& hg, std::uint64_t seed,
                                std::uint64_t index, bool hilbert_only) {
  GammaTriple t;
  t.X = random_banach(seed, index, hilbert_only);
  const int m = t.X.dim();
  // Build the region first and plant half the mass inside it, so restricting
  // never starves the estimate; resample on the rare miss.
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t sub = rng::mix64(seed ^ (index * 1315423911ull) ^ attempt);
    t.R = random_region(hg, sub);
    const auto inside = t.R.node_indices();
    Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(hg->nodes(), m);
    // Planted nodes are scaled against the gamma weight so every one carries
    // a comparable share of the energy (the weight spans orders of magnitude
    // across levels), and against the target's coordinate weights so the
    // sampled sums keep full coordinate rank under any weighting.
    auto plant = [&](int n) {
      const double w = hg->gamma_weight(hg->node_point(n), hg->node_level(n));
      const double gain =
          std::exp(2.0 * rng::uniform01(sub, 46, n) - 1.0) / std::sqrt(w);
      for (int c = 0; c < m; ++c)
        vals(n, c) = gain * rng::normal(sub, 44 + c, n) / std::sqrt(t.X.wgt(c));
    };
    const int planted = 48;
    for (int i = 0; i < planted && !inside.empty(); ++i)
      plant(inside[rng::pick(sub, 43, i, inside.size())]);
    for (int i = 0; i < 48; ++i)
      plant(static_cast<int>(rng::pick(sub, 45, i, hg->nodes())));
    t.u = TentFunction<double>(hg, std::move(vals));
    if (effective_nodes(t.u, t.R) >= 8.0 && coordinate_rank(t.u, t.R, t.X) >= 3.5) return t;
    if (attempt > 500) throw std::runtime_error("gamma_corpus_triple: grid too small");
  }
}

}  // namespace tentlab
