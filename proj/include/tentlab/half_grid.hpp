#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

#include "tentlab/space.hpp"

namespace tentlab {

// Discrete upper half-space over a SpaceGrid: the points crossed with a
// geometric time ladder t_j = t_min * rho^j.  Each node (y, j) carries
//   ball volume     V(y, t_j)
//   pairing weight  what(y)    = mu(y) * ln(rho)
//   gamma weight    w(y, t_j)  = what(y) / V(y, t_j),
// so w * V = what holds exactly by construction.
class HalfGrid {
 public:
  // t_min = half the minimum positive distance, levels until t clears
  // 4 * diameter.  One ladder serves every aperture in [1, 4].
  static std::shared_ptr<const HalfGrid> geometric(std::shared_ptr<const SpaceGrid> space,
                                                   double rho = 1.1892071150027210667);
  static std::shared_ptr<const HalfGrid> custom(std::shared_ptr<const SpaceGrid> space,
                                                double t_min, double rho, int levels);

  const SpaceGrid& space() const { return *space_; }
  const std::shared_ptr<const SpaceGrid>& space_ptr() const { return space_; }

  int points() const { return space_->points(); }
  int levels() const { return static_cast<int>(t_.size()); }
  int nodes() const { return points() * levels(); }

  double t(int j) const { return t_[j]; }
  const std::vector<double>& ladder() const { return t_; }
  double rho() const { return rho_; }
  double log_step() const { return log_step_; }

  int node(int point, int level) const { return level * points() + point; }
  int node_point(int n) const { return n % points(); }
  int node_level(int n) const { return n / points(); }

  double volume(int point, int level) const { return vol_(point, level); }
  double pairing_weight(int point) const { return space_->measure(point) * log_step_; }
  double gamma_weight(int point, int level) const {
    return pairing_weight(point) / vol_(point, level);
  }

  // Number of ladder values \le v (= first level index above v).
  int levels_at_most(double v) const;

 private:
  HalfGrid() = default;

  std::shared_ptr<const SpaceGrid> space_;
  std::vector<double> t_;
  double rho_ = 0.0;
  double log_step_ = 0.0;
  Eigen::ArrayXXd vol_;  // points x levels
};

// Subset of the nodes of a HalfGrid.
class Region {
 public:
  Region() = default;
  explicit Region(std::shared_ptr<const HalfGrid> grid, bool full = false)
      : grid_(std::move(grid)), mask_(grid_->nodes(), full ? 1 : 0) {}

  const HalfGrid& grid() const { return *grid_; }
  const std::shared_ptr<const HalfGrid>& grid_ptr() const { return grid_; }
  int size() const { return static_cast<int>(mask_.size()); }

  bool contains(int node) const { return mask_[node] != 0; }
  bool contains(int point, int level) const { return mask_[grid_->node(point, level)] != 0; }
  void add(int node) { mask_[node] = 1; }
  void add(int point, int level) { mask_[grid_->node(point, level)] = 1; }
  void remove(int node) { mask_[node] = 0; }

  int count() const {
    int c = 0;
    for (auto b : mask_) c += b;
    return c;
  }
  bool empty() const { return count() == 0; }

  std::vector<int> node_indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (mask_[i]) out.push_back(i);
    return out;
  }

  // (point, level) pairs sorted by point then level: the export order.
  std::vector<std::pair<int, int>> sorted_nodes() const;

  Region complement() const;
  Region unite(const Region&) const;
  Region intersect(const Region&) const;
  Region minus(const Region&) const;
  bool subset_of(const Region&) const;
  bool operator==(const Region& o) const { return mask_ == o.mask_; }

  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::vector<std::uint8_t>& mask() { return mask_; }

 private:
  std::shared_ptr<const HalfGrid> grid_;
  std::vector<std::uint8_t> mask_;
};

// Cone of aperture alpha at x: nodes (y, j) with d(x, y) < alpha * t_j.
Region cone(const std::shared_ptr<const HalfGrid>& hg, int x, double alpha);

// Cone cut below height r: additionally t_j < r.
Region truncated_cone(const std::shared_ptr<const HalfGrid>& hg, int x, double alpha, double r);

// Tent over E: nodes whose unit ball sits inside E, B(y, t_j) subset of E.
// Computed through the distance transform: t_j <= dist(y, complement of E).
Region tent(const std::shared_ptr<const HalfGrid>& hg, const SetM& E);

// Same set as the complement of the union of cones over points outside E;
// quadratic cost, kept as a cross-check.
Region tent_via_cones(const std::shared_ptr<const HalfGrid>& hg, const SetM& E);

struct CoverReport {
  bool success = false;
  std::vector<int> centers;  // chosen points outside E, in selection order
  int residual_nodes = 0;    // nodes of the cone left outside the tent
  int uncovered = 0;         // nodes still uncovered on failure
};

// Covers the part of the unit cone at x sticking out of T(E^sigma) by cones
// based at points outside E.  Candidates are the nearest-outside witnesses of
// the residual bases (each base is fully covered by its own witness, so a
// cover always exists); selection is greedy by covered-node count with lazy
// re-evaluation, ties broken toward x then by index.
CoverReport cone_cover_search(const std::shared_ptr<const HalfGrid>& hg, const SetM& E,
                              double sigma, int x, int max_centers = 64);

}  // namespace tentlab
