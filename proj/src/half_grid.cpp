#include "tentlab/half_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tentlab {

std::shared_ptr<const HalfGrid> HalfGrid::geometric(std::shared_ptr<const SpaceGrid> space,
                                                    double rho) {
  const double t_min = 0.5 * space->min_positive_distance();
  const double t_top = 4.0 * space->diameter();
  int levels = 1;
  while (t_min * std::pow(rho, levels - 1) < t_top) ++levels;
  return custom(std::move(space), t_min, rho, levels);
}

std::shared_ptr<const HalfGrid> HalfGrid::custom(std::shared_ptr<const SpaceGrid> space,
                                                 double t_min, double rho, int levels) {
  if (!space) throw std::invalid_argument("HalfGrid: null space");
  if (t_min <= 0.0) throw std::invalid_argument("HalfGrid: t_min must be positive");
  if (rho <= 1.0) throw std::invalid_argument("HalfGrid: rho must exceed 1");
  if (levels < 1 || levels > 4096) throw std::invalid_argument("HalfGrid: bad level count");
  auto hg = std::shared_ptr<HalfGrid>(new HalfGrid());
  hg->space_ = std::move(space);
  hg->rho_ = rho;
  hg->log_step_ = std::log(rho);
  hg->t_.resize(levels);
  for (int j = 0; j < levels; ++j) hg->t_[j] = t_min * std::pow(rho, j);
  const int n = hg->space_->points();
  hg->vol_.resize(n, levels);
  for (int j = 0; j < levels; ++j) {
    if (hg->space_->is_torus()) {
      const double v = hg->space_->volume(0, hg->t_[j]);  // center-independent
      hg->vol_.col(j).setConstant(v);
    } else {
      for (int y = 0; y < n; ++y) hg->vol_(y, j) = hg->space_->volume(y, hg->t_[j]);
    }
  }
  return hg;
}

int HalfGrid::levels_at_most(double v) const {
  return static_cast<int>(std::upper_bound(t_.begin(), t_.end(), v) - t_.begin());
}

std::vector<std::pair<int, int>> Region::sorted_nodes() const {
  std::vector<std::pair<int, int>> out;
  const int np = grid_->points();
  for (int p = 0; p < np; ++p)
    for (int j = 0; j < grid_->levels(); ++j)
      if (mask_[grid_->node(p, j)]) out.push_back({p, j});
  return out;
}

namespace {

void require_same_grid(const Region& a, const Region& b) {
  if (a.size() != b.size() || &a.grid() != &b.grid())
    throw std::invalid_argument("Region: grids differ");
}

}  // namespace

Region Region::complement() const {
  Region r(grid_);
  for (int i = 0; i < size(); ++i) r.mask()[i] = mask_[i] ? 0 : 1;
  return r;
}

Region Region::unite(const Region& o) const {
  require_same_grid(*this, o);
  Region r(grid_);
  for (int i = 0; i < size(); ++i) r.mask()[i] = (mask_[i] || o.mask_[i]) ? 1 : 0;
  return r;
}

Region Region::intersect(const Region& o) const {
  require_same_grid(*this, o);
  Region r(grid_);
  for (int i = 0; i < size(); ++i) r.mask()[i] = (mask_[i] && o.mask_[i]) ? 1 : 0;
  return r;
}

Region Region::minus(const Region& o) const {
  require_same_grid(*this, o);
  Region r(grid_);
  for (int i = 0; i < size(); ++i) r.mask()[i] = (mask_[i] && !o.mask_[i]) ? 1 : 0;
  return r;
}

bool Region::subset_of(const Region& o) const {
  require_same_grid(*this, o);
  for (int i = 0; i < size(); ++i)
    if (mask_[i] && !o.mask_[i]) return false;
  return true;
}

Region cone(const std::shared_ptr<const HalfGrid>& hg, int x, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("cone: aperture must be positive");
  const auto& space = hg->space();
  Region r(hg);
  for (int y = 0; y < hg->points(); ++y) {
    const double d = space.distance(x, y);
    // levels with alpha * t_j > d; the start index backs off two steps so the
    // division cannot round a boundary level away
    const int j0 = std::max(0, hg->levels_at_most(d / alpha) - 2);
    for (int j = j0; j < hg->levels(); ++j) {
      if (alpha * hg->t(j) > d) r.add(y, j);
    }
  }
  return r;
}

Region truncated_cone(const std::shared_ptr<const HalfGrid>& hg, int x, double alpha, double r) {
  Region out = cone(hg, x, alpha);
  for (int j = 0; j < hg->levels(); ++j) {
    if (hg->t(j) < r) continue;
    for (int y = 0; y < hg->points(); ++y) out.remove(hg->node(y, j));
  }
  return out;
}

Region tent(const std::shared_ptr<const HalfGrid>& hg, const SetM& E) {
  if (E.size() != hg->points()) throw std::invalid_argument("tent: size mismatch");
  Region r(hg);
  if (E.empty()) return r;
  if (E.full()) return Region(hg, true);
  Eigen::VectorXd dist;
  distance_to_set(hg->space(), E.complement(), &dist, nullptr);
  for (int y = 0; y < hg->points(); ++y) {
    const int jmax = hg->levels_at_most(dist[y]);  // t_j <= dist
    for (int j = 0; j < jmax; ++j) r.add(y, j);
  }
  return r;
}

Region tent_via_cones(const std::shared_ptr<const HalfGrid>& hg, const SetM& E) {
  if (E.size() != hg->points()) throw std::invalid_argument("tent_via_cones: size mismatch");
  Region r(hg, true);
  const auto& space = hg->space();
  for (int x = 0; x < hg->points(); ++x) {
    if (E.contains(x)) continue;
    for (int y = 0; y < hg->points(); ++y) {
      const double d = space.distance(x, y);
      for (int j = hg->levels_at_most(d); j < hg->levels(); ++j)
        if (hg->t(j) > d) r.remove(hg->node(y, j));
    }
  }
  return r;
}

CoverReport cone_cover_search(const std::shared_ptr<const HalfGrid>& hg, const SetM& E,
                              double sigma, int x, int max_centers) {
  const auto& space = hg->space();
  if (E.size() != hg->points()) throw std::invalid_argument("cone_cover_search: size mismatch");
  if (E.empty() || E.full())
    throw std::invalid_argument("cone_cover_search: E must be proper and nonempty");
  if (x < 0 || x >= hg->points()) throw std::invalid_argument("cone_cover_search: bad point");

  CoverReport rep;
  const int npts = hg->points();
  const int J = hg->levels();

  const SetM estar = maximal_extension(space, E, sigma);
  Eigen::VectorXd dist_star;
  if (estar.full()) {
    dist_star = Eigen::VectorXd::Constant(npts, std::numeric_limits<double>::infinity());
  } else {
    distance_to_set(space, estar.complement(), &dist_star, nullptr);
  }
  Eigen::VectorXd dist_out;
  std::vector<int> witness;
  distance_to_set(space, E.complement(), &dist_out, &witness);

  // Residual levels at base y: t_j above both d(x, y) and the tent height.
  std::vector<int> ja(npts), ub(npts, J);
  std::vector<int> bases;
  for (int y = 0; y < npts; ++y) {
    const double lower = std::max(space.distance(x, y),
                                  std::isinf(dist_star[y]) ? hg->ladder().back() : dist_star[y]);
    ja[y] = std::isinf(dist_star[y]) ? J : hg->levels_at_most(lower);
    if (ja[y] < J) {
      bases.push_back(y);
      rep.residual_nodes += J - ja[y];
    }
  }
  if (rep.residual_nodes == 0) {
    rep.success = true;
    return rep;
  }

  // Candidate pool: nearest outside witnesses.  Every base is fully covered
  // by its own witness, so the pool always admits a cover.
  std::vector<int> pool;
  for (int y : bases) pool.push_back(witness[y]);
  pool.push_back(witness[x]);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  struct Cand {
    int c;
    double dist_x;
    long stale;  // upper bound on the current gain
  };
  std::vector<Cand> active;
  active.reserve(pool.size());
  for (int c : pool) active.push_back({c, space.distance(x, c), std::numeric_limits<long>::max()});

  auto gain_of = [&](int c) {
    long g = 0;
    for (int y : bases) {
      const int jc = hg->levels_at_most(space.distance(c, y));
      if (jc < ub[y]) g += ub[y] - std::max(ja[y], jc);
    }
    return g;
  };

  long uncovered = rep.residual_nodes;
  while (uncovered > 0 && static_cast<int>(rep.centers.size()) < max_centers) {
    // Gains only shrink, so stale values are upper bounds: scan in stale
    // order and stop once no bound can beat the best fresh gain (ties must
    // still be evaluated for the distance tie-break).
    std::sort(active.begin(), active.end(), [](const Cand& a, const Cand& b) {
      if (a.stale != b.stale) return a.stale > b.stale;
      if (a.dist_x != b.dist_x) return a.dist_x < b.dist_x;
      return a.c < b.c;
    });
    long best = -1;
    int best_i = -1;
    for (size_t i = 0; i < active.size(); ++i) {
      if (active[i].stale < best) break;
      const long g = gain_of(active[i].c);
      active[i].stale = g;
      const bool wins = g > best || (g == best && best_i >= 0 &&
                                     (active[i].dist_x < active[best_i].dist_x ||
                                      (active[i].dist_x == active[best_i].dist_x &&
                                       active[i].c < active[best_i].c)));
      if (wins) {
        best = g;
        best_i = static_cast<int>(i);
      }
    }
    if (best <= 0) break;  // pool exhausted (cannot happen with an honest pool)
    const int c = active[best_i].c;
    rep.centers.push_back(c);
    active.erase(active.begin() + best_i);
    for (int y : bases) {
      const int jc = hg->levels_at_most(space.distance(c, y));
      if (jc < ub[y]) {
        uncovered -= ub[y] - std::max(ja[y], jc);
        ub[y] = std::max(jc, ja[y]);
      }
    }
  }
  rep.uncovered = static_cast<int>(uncovered);
  rep.success = uncovered == 0;
  return rep;
}

}  // namespace tentlab
