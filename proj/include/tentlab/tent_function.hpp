#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <stdexcept>

#include "tentlab/half_grid.hpp"

namespace tentlab {

// Function on the nodes of a HalfGrid with values in R^m or C^m, stored as a
// nodes x m matrix plus its support region.  Rows outside the support are
// identically zero.
template <typename Scalar>
class TentFunction {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  TentFunction() = default;

  TentFunction(std::shared_ptr<const HalfGrid> grid, Matrix values)
      : grid_(std::move(grid)), values_(std::move(values)), support_(grid_) {
    check();
    for (int n = 0; n < values_.rows(); ++n)
      if (values_.row(n).squaredNorm() > 0.0) support_.add(n);
  }

  TentFunction(std::shared_ptr<const HalfGrid> grid, Matrix values, Region support)
      : grid_(std::move(grid)), values_(std::move(values)), support_(std::move(support)) {
    check();
    if (support_.size() != static_cast<int>(values_.rows()))
      throw std::invalid_argument("TentFunction: support size mismatch");
    for (int n = 0; n < values_.rows(); ++n)
      if (!support_.contains(n)) values_.row(n).setZero();
  }

  static TentFunction zero(const std::shared_ptr<const HalfGrid>& grid, int m) {
    return TentFunction(grid, Matrix::Zero(grid->nodes(), m), Region(grid));
  }

  const HalfGrid& grid() const { return *grid_; }
  const std::shared_ptr<const HalfGrid>& grid_ptr() const { return grid_; }
  int components() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }
  const Region& support() const { return support_; }

  bool empty() const { return !grid_; }

 private:
  void check() const {
    if (!grid_) throw std::invalid_argument("TentFunction: null grid");
    if (values_.rows() != grid_->nodes() || values_.cols() < 1)
      throw std::invalid_argument("TentFunction: values must be nodes x m");
  }

  std::shared_ptr<const HalfGrid> grid_;
  Matrix values_;
  Region support_;
};

template <typename Scalar>
TentFunction<Scalar> restrict_to(const TentFunction<Scalar>& u, const Region& R) {
  if (&R.grid() != &u.grid()) throw std::invalid_argument("restrict_to: grids differ");
  return TentFunction<Scalar>(u.grid_ptr(), u.values(), u.support().intersect(R));
}

template <typename Scalar>
TentFunction<Scalar> add(const TentFunction<Scalar>& a, const TentFunction<Scalar>& b) {
  if (&a.grid() != &b.grid() || a.components() != b.components())
    throw std::invalid_argument("add: shape mismatch");
  return TentFunction<Scalar>(a.grid_ptr(), a.values() + b.values(),
                              a.support().unite(b.support()));
}

template <typename Scalar>
TentFunction<Scalar> scale(const TentFunction<Scalar>& u, Scalar c) {
  return TentFunction<Scalar>(u.grid_ptr(), u.values() * c, u.support());
}

inline TentFunction<std::complex<double>> complexify(const TentFunction<double>& u) {
  Eigen::MatrixXcd v = u.values().cast<std::complex<double>>();
  return TentFunction<std::complex<double>>(u.grid_ptr(), std::move(v), u.support());
}

}  // namespace tentlab
