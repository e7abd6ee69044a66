#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace tentlab {

// Finite-dimensional Banach space R^m (or C^m) with an l^q norm, optionally
// weighted: ||x|| = (sum_i w_i |x_i|^q)^(1/q).  q = 2 with any weights is the
// Hilbert case; there the Gaussian norm of a tent function has a closed form.
class BanachSpace {
 public:
  BanachSpace() : dim_(1), q_(2.0) {}

  static BanachSpace lq(int dim, double q) {
    check(dim, q);
    BanachSpace X;
    X.dim_ = dim;
    X.q_ = q;
    return X;
  }

  static BanachSpace weighted_lq(int dim, double q, Eigen::VectorXd weights) {
    check(dim, q);
    if (weights.size() != dim || (weights.array() <= 0.0).any())
      throw std::invalid_argument("weighted_lq: need one positive weight per coordinate");
    BanachSpace X;
    X.dim_ = dim;
    X.q_ = q;
    X.weights_ = std::move(weights);
    return X;
  }

  int dim() const { return dim_; }
  double q() const { return q_; }
  bool weighted() const { return weights_.size() > 0; }
  const Eigen::VectorXd& weights() const { return weights_; }

  // The Gaussian norm admits an exact evaluation exactly when the norm comes
  // from an inner product.
  bool hilbert() const { return q_ == 2.0; }

  // Conjugate exponent space for the duality pairing sum_i x_i y_i.
  BanachSpace dual() const {
    if (weighted()) throw std::invalid_argument("dual: only unweighted l^q spaces pair coordinatewise");
    if (q_ == 1.0) return lq(dim_, std::numeric_limits<double>::infinity());
    if (std::isinf(q_)) return lq(dim_, 1.0);
    return lq(dim_, q_ / (q_ - 1.0));
  }

  template <typename Derived>
  double norm(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim_) throw std::invalid_argument("BanachSpace::norm: wrong dimension");
    if (std::isinf(q_)) {
      double m = 0.0;
      for (int i = 0; i < dim_; ++i) m = std::max(m, wgt(i) * std::abs(x[i]));
      return m;
    }
    if (q_ == 2.0) {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += wgt(i) * std::norm(x[i]);
      return std::sqrt(s);
    }
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += wgt(i) * std::pow(std::abs(x[i]), q_);
    return std::pow(s, 1.0 / q_);
  }

  // Squared-norm weight of coordinate i in the Hilbert case: contribution
  // w_i |x_i|^2.
  double wgt(int i) const { return weighted() ? weights_[i] : 1.0; }

 private:
  static void check(int dim, double q) {
    if (dim < 1) throw std::invalid_argument("BanachSpace: dim must be positive");
    if (!(q >= 1.0)) throw std::invalid_argument("BanachSpace: q must be in [1, inf]");
  }

  int dim_;
  double q_;
  Eigen::VectorXd weights_;
};

}  // namespace tentlab
