#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace tentlab {

// Open metric ball {y : d(center, y) < radius}.
struct Ball {
  int center = 0;
  double radius = 0.0;
};

// Subset of the point set of a SpaceGrid, stored as a dense membership mask.
class SetM {
 public:
  SetM() = default;
  explicit SetM(int npoints, bool full = false) : mask_(npoints, full ? 1 : 0) {}

  static SetM from_indices(int npoints, const std::vector<int>& idx) {
    SetM s(npoints);
    for (int i : idx) s.mask_[i] = 1;
    return s;
  }

  int size() const { return static_cast<int>(mask_.size()); }
  bool contains(int i) const { return mask_[i] != 0; }
  void add(int i) { mask_[i] = 1; }
  void remove(int i) { mask_[i] = 0; }

  int count() const {
    int c = 0;
    for (auto b : mask_) c += b;
    return c;
  }
  bool empty() const { return count() == 0; }
  bool full() const { return count() == size(); }

  std::vector<int> indices() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (mask_[i]) out.push_back(i);
    return out;
  }

  SetM complement() const {
    SetM s(size());
    for (int i = 0; i < size(); ++i) s.mask_[i] = mask_[i] ? 0 : 1;
    return s;
  }
  SetM unite(const SetM& o) const {
    SetM s(size());
    for (int i = 0; i < size(); ++i) s.mask_[i] = (mask_[i] || o.mask_[i]) ? 1 : 0;
    return s;
  }
  SetM intersect(const SetM& o) const {
    SetM s(size());
    for (int i = 0; i < size(); ++i) s.mask_[i] = (mask_[i] && o.mask_[i]) ? 1 : 0;
    return s;
  }
  bool subset_of(const SetM& o) const {
    for (int i = 0; i < size(); ++i)
      if (mask_[i] && !o.mask_[i]) return false;
    return true;
  }
  bool operator==(const SetM& o) const { return mask_ == o.mask_; }

  const std::vector<std::uint8_t>& mask() const { return mask_; }

 private:
  std::vector<std::uint8_t> mask_;
};

// Finite doubling metric measure space.  Two kinds:
//  - torus: integer lattice Z_{s_1} x ... x Z_{s_d} with the wrap-around
//    l-infinity metric scaled by the cell width, uniform measure cell^d;
//  - graph: connected weighted graph with the shortest-path metric from
//    positive edge lengths and a positive measure per vertex.
// Balls are open (d < r) throughout.
class SpaceGrid {
 public:
  enum class Kind { Torus, Graph };

  struct GraphEdge {
    int u = 0, v = 0;
    double length = 1.0;
  };

  static std::shared_ptr<const SpaceGrid> torus(std::vector<int> sides, double cell);
  static std::shared_ptr<const SpaceGrid> graph(int nvertices, std::vector<GraphEdge> edges,
                                                Eigen::VectorXd measures);

  Kind kind() const { return kind_; }
  bool is_torus() const { return kind_ == Kind::Torus; }
  int points() const { return npoints_; }

  // Torus accessors.
  int dims() const;
  const std::vector<int>& sides() const;
  double cell() const;
  int index_of(const std::vector<int>& coords) const;
  std::vector<int> coords_of(int idx) const;

  // Graph accessors.
  const std::vector<GraphEdge>& edges() const;

  double measure(int i) const { return measures_[i]; }
  const Eigen::VectorXd& measures() const { return measures_; }
  double total_measure() const { return total_measure_; }

  double distance(int i, int j) const;
  double diameter() const { return diameter_; }
  double min_positive_distance() const { return min_dist_; }

  SetM ball_points(int center, double r) const;
  // mu(B(center, r)); closed form on the torus, cumulative sums on graphs.
  double volume(int center, double r) const;

  // Radii realizing every distinct ball: midpoints below the first positive
  // distance, each realized distance, midpoints between consecutive
  // distances, and one radius beyond the diameter.
  const std::vector<double>& radius_ladder() const { return radius_ladder_; }

  // Generic radii (midpoints only) kept away from saturation, for doubling
  // scans: both r and 2r stay informative.
  std::vector<double> doubling_ladder() const;

  // Cached doubling exponent: the lattice dimension on tori, measured on
  // graphs over the doubling ladder.
  double doubling_exponent() const;
  // Cached volume-comparison defect between centers; 0 on tori by
  // translation invariance.
  double translation_defect() const;

  std::string description() const;

 private:
  SpaceGrid() = default;

  Kind kind_ = Kind::Torus;
  int npoints_ = 0;

  // torus
  std::vector<int> sides_;
  std::vector<int> strides_;
  double cell_ = 1.0;

  // graph
  std::vector<GraphEdge> edges_;
  Eigen::MatrixXd dist_;                       // dense shortest-path distances
  std::vector<std::vector<int>> by_distance_;  // per vertex, all vertices sorted by distance
  std::vector<Eigen::VectorXd> cum_measure_;   // cumulative measure in that order

  Eigen::VectorXd measures_;
  double total_measure_ = 0.0;
  double diameter_ = 0.0;
  double min_dist_ = 0.0;
  std::vector<double> radius_ladder_;
  mutable double doubling_exp_ = -1.0;
  mutable double translation_defect_ = -1.0;
};

// max over centers x and ladder radii r of log2( mu(B(x,2r)) / mu(B(x,r)) ).
double doubling_exponent_estimate(const SpaceGrid& space, const std::vector<double>& ladder);

// max over pairs x != y and ladder radii r of
// log( mu(B(x,r)) / mu(B(y,r)) ) / log(1 + d(x,y)/r), the measured exponent in
// the volume comparison between different centers.
double translation_defect_estimate(const SpaceGrid& space, const std::vector<double>& ladder);

// Centered maximal extension E^sigma: points x such that some ladder radius r
// has mu(B(x,r) & E) > sigma * mu(B(x,r)).  Always contains E.
SetM maximal_extension(const SpaceGrid& space, const SetM& E, double sigma);

// Greedy Whitney cover of E: centers picked inside E by decreasing distance
// to the complement, each with radius half that distance, skipping centers
// already covered.  Returned in selection order; that order guarantees the
// first ball whose triple dilation contains a point y in E has radius at
// least dist(y, complement)/2.  E = M (no complement) degenerates to a single
// ball covering everything.
std::vector<Ball> whitney_decomposition(const SpaceGrid& space, const SetM& E);

// Largest multiplicity of the dilated balls {B(c_j, factor * r_j)}.
int cover_overlap(const SpaceGrid& space, const std::vector<Ball>& balls, double factor);

// Partition of a torus with equal power-of-two sides into cubes of side
// sides/2^level cells, ordered by cube multi-index.
std::vector<std::vector<int>> dyadic_cubes(const SpaceGrid& space, int level);

// Exact distance from every point to the set S (metric units), with a witness
// point of S realizing it.  S must be nonempty.
void distance_to_set(const SpaceGrid& space, const SetM& S, Eigen::VectorXd* dist,
                     std::vector<int>* witness);

}  // namespace tentlab
