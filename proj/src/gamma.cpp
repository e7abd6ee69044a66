#include "tentlab/gamma.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tentlab/rng.hpp"

namespace tentlab {

namespace {

// Rows of u inside R (and the support), scaled by sqrt of the gamma weight,
// stored column-wise: Z = cols * g is the Gaussian sum.
template <typename Scalar>
struct ActiveNodes {
  std::vector<int> ids;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cols;  // m x k
};

template <typename Scalar>
ActiveNodes<Scalar> collect(const TentFunction<Scalar>& u, const Region& R) {
  if (&R.grid() != &u.grid()) throw std::invalid_argument("gamma_norm: grids differ");
  const auto& hg = u.grid();
  ActiveNodes<Scalar> a;
  for (int n = 0; n < hg.nodes(); ++n)
    if (u.support().contains(n) && R.contains(n)) a.ids.push_back(n);
  const int k = static_cast<int>(a.ids.size());
  a.cols.resize(u.components(), k);
  for (int i = 0; i < k; ++i) {
    const int n = a.ids[i];
    const double sw = std::sqrt(hg.gamma_weight(hg.node_point(n), hg.node_level(n)));
    a.cols.col(i) = u.values().row(n).transpose() * Scalar(sw);
  }
  return a;
}

template <typename Scalar>
double exact_value(const TentFunction<Scalar>& u, const Region& R, const BanachSpace& X) {
  if (!X.hilbert()) throw std::invalid_argument("gamma_norm_exact: target must be Hilbert");
  if (X.dim() != u.components()) throw std::invalid_argument("gamma_norm: dimension mismatch");
  const auto a = collect(u, R);
  double s = 0.0;
  for (int i = 0; i < a.cols.cols(); ++i) {
    for (int c = 0; c < a.cols.rows(); ++c) s += X.wgt(c) * std::norm(a.cols(c, i));
  }
  return std::sqrt(s);
}

// One Gaussian per (node id, sample) pair.
template <typename Scalar>
Eigen::VectorXd gaussian_sum(const ActiveNodes<Scalar>& a, std::uint64_t seed, int sample);

template <>
Eigen::VectorXd gaussian_sum(const ActiveNodes<double>& a, std::uint64_t seed, int sample) {
  const int k = static_cast<int>(a.ids.size());
  Eigen::VectorXd g(k);
  for (int i = 0; i < k; ++i)
    g[i] = rng::normal(seed, static_cast<std::uint64_t>(a.ids[i]), sample);
  return a.cols * g;
}

template <>
Eigen::VectorXd gaussian_sum(const ActiveNodes<std::complex<double>>&, std::uint64_t, int) {
  throw std::invalid_argument("gamma_norm: sampling needs real scalars");
}

}  // namespace

template <typename Scalar>
double gamma_norm_exact(const TentFunction<Scalar>& u, const Region& R, const BanachSpace& X) {
  return exact_value(u, R, X);
}

template <typename Scalar>
GammaEstimate gamma_norm(const TentFunction<Scalar>& u, const Region& R, const BanachSpace& X,
                         GammaOptions opts) {
  GammaEstimate est;
  est.seed = opts.seed;
  if (X.hilbert() && !opts.force_sampling) {
    est.value = exact_value(u, R, X);
    est.method = "exact";
    return est;
  }
  if (X.dim() != u.components()) throw std::invalid_argument("gamma_norm: dimension mismatch");
  if (opts.samples < 2) throw std::invalid_argument("gamma_norm: need at least two samples");
  const auto a = collect(u, R);
  est.method = "mc";
  est.samples = opts.samples;
  if (a.ids.empty()) return est;
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < opts.samples; ++s) {
    const Eigen::VectorXd Z = gaussian_sum(a, opts.seed, s);
    const double y = X.norm(Z) * X.norm(Z);
    sum += y;
    sumsq += y * y;
  }
  const double n = static_cast<double>(opts.samples);
  const double mean = sum / n;
  est.value = std::sqrt(mean);
  if (mean > 0.0) {
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    // se of sqrt(mean) by the delta method
    est.stderr_ = std::sqrt(var / n) / (2.0 * est.value);
  }
  return est;
}

GammaEstimate moment_ratio(const TentFunction<double>& u, const Region& R, const BanachSpace& X,
                           double p, double q, GammaOptions opts) {
  if (!(p > 0.0) || !(q > 0.0)) throw std::invalid_argument("moment_ratio: moments must be positive");
  if (opts.samples < 32) throw std::invalid_argument("moment_ratio: need at least 32 samples");
  const auto a = collect(u, R);
  if (a.ids.empty()) throw std::invalid_argument("moment_ratio: empty restriction");
  GammaEstimate est;
  est.method = "mc";
  est.samples = opts.samples;
  est.seed = opts.seed;

  const int nbatch = 16;
  const int per = opts.samples / nbatch;
  double sp = 0.0, sq = 0.0;
  std::vector<double> bp(nbatch, 0.0), bq(nbatch, 0.0);
  for (int s = 0; s < opts.samples; ++s) {
    const Eigen::VectorXd Z = gaussian_sum(a, opts.seed, s);
    const double nrm = X.norm(Z);
    const double vp = std::pow(nrm, p), vq = std::pow(nrm, q);
    sp += vp;
    sq += vq;
    const int b = s / per;
    if (b < nbatch) {
      bp[b] += vp;
      bq[b] += vq;
    }
  }
  const double n = static_cast<double>(opts.samples);
  est.value = std::pow(sp / n, 1.0 / p) / std::pow(sq / n, 1.0 / q);
  double bm = 0.0, bv = 0.0;
  std::vector<double> ratios(nbatch);
  for (int b = 0; b < nbatch; ++b) {
    ratios[b] = std::pow(bp[b] / per, 1.0 / p) / std::pow(bq[b] / per, 1.0 / q);
    bm += ratios[b];
  }
  bm /= nbatch;
  for (int b = 0; b < nbatch; ++b) bv += (ratios[b] - bm) * (ratios[b] - bm);
  est.stderr_ = std::sqrt(bv / (nbatch - 1.0) / nbatch);
  return est;
}

template <typename Scalar>
MonotonicityReport restriction_monotonicity_check(const TentFunction<Scalar>& u, const Region& R,
                                                  const Region& Rp, const BanachSpace& X,
                                                  GammaOptions opts) {
  if (!R.subset_of(Rp))
    throw std::invalid_argument("restriction_monotonicity_check: regions must be nested");
  MonotonicityReport rep;
  rep.inner = gamma_norm(u, R, X, opts);
  rep.outer = gamma_norm(u, Rp, X, opts);
  rep.margin = rep.outer.value - rep.inner.value;
  const double slack = rep.inner.method == "exact"
                           ? 1e-12 * std::max(1.0, rep.outer.value)
                           : 3.0 * (rep.inner.stderr_ + rep.outer.stderr_);
  rep.pass = rep.inner.value <= rep.outer.value + slack;
  return rep;
}

double type_constant_probe(const BanachSpace& X, double r, int families, GammaOptions opts) {
  if (!(r >= 1.0) || std::isinf(r)) throw std::invalid_argument("type_constant_probe: r in [1, inf)");
  if (families < 1) throw std::invalid_argument("type_constant_probe: need at least one family");
  const int m = X.dim();
  double worst = 0.0;
  for (int trial = 0; trial < families; ++trial) {
    const int k = 2 + static_cast<int>(rng::pick(opts.seed, 777, trial, 6));
    Eigen::MatrixXd xi(m, k);
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < m; ++c)
        xi(c, i) = rng::normal(opts.seed, 1000 + trial * 16 + i, c);
    double denom = 0.0;
    for (int i = 0; i < k; ++i) denom += std::pow(X.norm(xi.col(i)), r);
    denom = std::pow(denom, 1.0 / r);
    if (denom == 0.0) continue;
    double numer;
    if (X.hilbert()) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        const double ni = X.norm(xi.col(i));
        s += ni * ni;
      }
      numer = std::sqrt(s);
    } else {
      double sum = 0.0;
      for (int s = 0; s < opts.samples; ++s) {
        Eigen::VectorXd Z = Eigen::VectorXd::Zero(m);
        for (int i = 0; i < k; ++i)
          Z += rng::normal(opts.seed, 500000 + trial * 16 + i, s) * xi.col(i);
        const double nz = X.norm(Z);
        sum += nz * nz;
      }
      numer = std::sqrt(sum / opts.samples);
    }
    worst = std::max(worst, numer / denom);
  }
  return worst;
}

template double gamma_norm_exact<double>(const TentFunction<double>&, const Region&,
                                         const BanachSpace&);
template double gamma_norm_exact<std::complex<double>>(const TentFunction<std::complex<double>>&,
                                                       const Region&, const BanachSpace&);
template GammaEstimate gamma_norm<double>(const TentFunction<double>&, const Region&,
                                          const BanachSpace&, GammaOptions);
template GammaEstimate gamma_norm<std::complex<double>>(const TentFunction<std::complex<double>>&,
                                                        const Region&, const BanachSpace&,
                                                        GammaOptions);
template MonotonicityReport restriction_monotonicity_check<double>(const TentFunction<double>&,
                                                                   const Region&, const Region&,
                                                                   const BanachSpace&,
                                                                   GammaOptions);
template MonotonicityReport restriction_monotonicity_check<std::complex<double>>(
    const TentFunction<std::complex<double>>&, const Region&, const Region&, const BanachSpace&,
    GammaOptions);

}  // namespace tentlab
