#include "tentlab/operator_l.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace tentlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [-1, 1]: Newton on the recurrence,
// seeded from the Chebyshev angles.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

double bump(double x) {
  const double s = 1.0 - x * x;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// Fourier transform of the bump, tabulated on [0, 512] at step 1/64.  Each
// entry is a composite 4x96-point Gauss-Legendre pass over [0, 1], accurate
// while the integrand stays resolvable (xi well past the table end).
struct PhiHatTable {
  static constexpr double kStep = 1.0 / 64.0;
  static constexpr int kCount = 512 * 64 + 1;
  std::vector<double> v;

  PhiHatTable() : v(kCount) {
    std::vector<double> gx, gw;
    gauss_legendre(96, gx, gw);
    for (int i = 0; i < kCount; ++i) {
      const double xi = i * kStep;
      double s = 0.0;
      for (int p = 0; p < 4; ++p) {
        const double a = 0.25 * p, mid = a + 0.125, half = 0.125;
        for (size_t q = 0; q < gx.size(); ++q) {
          const double x = mid + half * gx[q];
          s += gw[q] * half * bump(x) * std::cos(xi * x);
        }
      }
      v[i] = 2.0 * s;
    }
  }
};

// Adaptive Simpson with the Richardson end-correction.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, eps, 48);
}

void check_space_match(const OperatorL& L, const HalfGrid& hg, const char* who) {
  if (hg.space_ptr().get() != L.space_ptr().get())
    throw std::invalid_argument(std::string(who) + ": ladder and operator spaces differ");
}

// (t^2 lambda)^N e^{-t^2 lambda} per bin; exact zero on the kernel bins.
Eigen::VectorXd heat_power_symbol(const OperatorL& L, double t, int N) {
  Eigen::VectorXd s(L.bins());
  for (int b = 0; b < L.bins(); ++b) {
    const double u = t * t * L.bin_eigenvalue(b);
    s[b] = std::pow(u, N) * std::exp(-u);
  }
  return s;
}

// (t^2 lambda)^N phi_hat0(t sqrt(lambda)) per bin.
Eigen::VectorXd band_symbol(const OperatorL& L, double t, int N) {
  Eigen::VectorXd s(L.bins());
  for (int b = 0; b < L.bins(); ++b) {
    const double lam = L.bin_eigenvalue(b);
    const double u = t * t * lam;
    s[b] = std::pow(u, N) * phi_hat0(t * std::sqrt(lam));
  }
  return s;
}

template <typename SymbolVec, typename Mat>
Mat q_operator_impl(const OperatorL& L, const std::shared_ptr<const HalfGrid>& hg,
                    const Mat& f, const std::function<SymbolVec(double)>& symbol_at) {
  const int P = hg->points(), J = hg->levels();
  Mat vals(hg->nodes(), f.cols());
  for (int j = 0; j < J; ++j)
    vals.block(j * P, 0, P, f.cols()) = L.apply(symbol_at(hg->t(j)), f);
  return vals;
}

}  // namespace

OperatorL OperatorL::laplacian(std::shared_ptr<const SpaceGrid> space) {
  if (!space) throw std::invalid_argument("OperatorL: null space");
  OperatorL L;
  L.space_ = std::move(space);
  const SpaceGrid& sp = *L.space_;
  const int P = sp.points();

  if (sp.is_torus()) {
    L.fourier_ = true;
    const auto& sides = sp.sides();
    const int d = static_cast<int>(sides.size());
    const double h2 = sp.cell() * sp.cell();
    L.strides_.assign(d, 1);
    for (int a = d - 2; a >= 0; --a) L.strides_[a] = L.strides_[a + 1] * sides[a + 1];
    L.eig_.resize(P);
    for (int p = 0; p < P; ++p) {
      const std::vector<int> xi = sp.coords_of(p);
      double lam = 0.0;
      for (int a = 0; a < d; ++a)
        lam += (2.0 - 2.0 * std::cos(2.0 * kPi * xi[a] / sides[a])) / h2;
      L.eig_[p] = std::max(lam, 0.0);
    }
    L.lines_.resize(d);
    for (int a = 0; a < d; ++a)
      for (int p = 0; p < P; ++p)
        if (sp.coords_of(p)[a] == 0) L.lines_[a].push_back(p);
  } else {
    if (P > 4096)
      throw std::invalid_argument("OperatorL: dense spectral path capped at 4096 points");
    Eigen::VectorXd mu = sp.measures();
    L.sqrt_mu_ = mu.cwiseSqrt();
    L.inv_sqrt_mu_ = L.sqrt_mu_.cwiseInverse();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
    for (const auto& e : sp.edges()) {
      const double c = 1.0 / (e.length * e.length);
      A(e.u, e.u) += c / mu[e.u];
      A(e.v, e.v) += c / mu[e.v];
      const double off = c / (L.sqrt_mu_[e.u] * L.sqrt_mu_[e.v]);
      A(e.u, e.v) -= off;
      A(e.v, e.u) -= off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw std::runtime_error("OperatorL: eigensolver failed");
    L.eig_ = es.eigenvalues().cwiseMax(0.0);
    L.evec_ = es.eigenvectors();
  }

  L.lambda_max_ = L.eig_.maxCoeff();
  const double floor = 1e-12 * std::max(L.lambda_max_, 1.0);
  double lmp = std::numeric_limits<double>::infinity();
  for (int b = 0; b < L.eig_.size(); ++b) {
    if (L.eig_[b] <= floor)
      L.eig_[b] = 0.0;  // kernel bin: the constant survives exactly
    else
      lmp = std::min(lmp, L.eig_[b]);
  }
  if (!std::isfinite(lmp))
    throw std::invalid_argument("OperatorL: spectrum has no positive part");
  L.lambda_min_pos_ = lmp;
  return L;
}

Eigen::MatrixXcd OperatorL::to_spectral(const Eigen::MatrixXcd& f) const {
  if (f.rows() != space_->points())
    throw std::invalid_argument("to_spectral: row count must match the point count");
  if (fourier_) {
    Eigen::MatrixXcd work = f;
    Eigen::FFT<double> fft;
    const auto& sides = space_->sides();
    for (size_t a = 0; a < sides.size(); ++a) {
      const int n = sides[a], stride = strides_[a];
      Eigen::VectorXcd in(n), out(n);
      for (Eigen::Index c = 0; c < work.cols(); ++c)
        for (int base : lines_[a]) {
          for (int k = 0; k < n; ++k) in[k] = work(base + k * stride, c);
          fft.fwd(out.data(), in.data(), n);
          for (int k = 0; k < n; ++k) work(base + k * stride, c) = out[k];
        }
    }
    return work;
  }
  const Eigen::MatrixXd gr = evec_.transpose() * (sqrt_mu_.asDiagonal() * f.real());
  const Eigen::MatrixXd gi = evec_.transpose() * (sqrt_mu_.asDiagonal() * f.imag());
  Eigen::MatrixXcd out(gr.rows(), gr.cols());
  out.real() = gr;
  out.imag() = gi;
  return out;
}

Eigen::MatrixXcd OperatorL::from_spectral(const Eigen::MatrixXcd& coef) const {
  if (coef.rows() != static_cast<Eigen::Index>(eig_.size()))
    throw std::invalid_argument("from_spectral: row count must match the bin count");
  if (fourier_) {
    Eigen::MatrixXcd work = coef;
    Eigen::FFT<double> fft;
    const auto& sides = space_->sides();
    for (size_t a = 0; a < sides.size(); ++a) {
      const int n = sides[a], stride = strides_[a];
      Eigen::VectorXcd in(n), out(n);
      for (Eigen::Index c = 0; c < work.cols(); ++c)
        for (int base : lines_[a]) {
          for (int k = 0; k < n; ++k) in[k] = work(base + k * stride, c);
          fft.inv(out.data(), in.data(), n);
          for (int k = 0; k < n; ++k) work(base + k * stride, c) = out[k];
        }
    }
    return work;
  }
  const Eigen::MatrixXd gr = inv_sqrt_mu_.asDiagonal() * (evec_ * coef.real());
  const Eigen::MatrixXd gi = inv_sqrt_mu_.asDiagonal() * (evec_ * coef.imag());
  Eigen::MatrixXcd out(gr.rows(), gr.cols());
  out.real() = gr;
  out.imag() = gi;
  return out;
}

Eigen::MatrixXcd OperatorL::apply(const Eigen::VectorXcd& symbol,
                                  const Eigen::MatrixXcd& f) const {
  if (symbol.size() != eig_.size())
    throw std::invalid_argument("apply: symbol size must match the bin count");
  Eigen::MatrixXcd coef = to_spectral(f);
  coef.array().colwise() *= symbol.array();
  return from_spectral(coef);
}

Eigen::MatrixXd OperatorL::apply(const Eigen::VectorXd& symbol, const Eigen::MatrixXd& f) const {
  if (symbol.size() != eig_.size())
    throw std::invalid_argument("apply: symbol size must match the bin count");
  if (fourier_) {
    const Eigen::VectorXcd sym = symbol.cast<std::complex<double>>();
    return apply(sym, f.cast<std::complex<double>>()).real();
  }
  Eigen::MatrixXd coef = evec_.transpose() * (sqrt_mu_.asDiagonal() * f);
  coef.array().colwise() *= symbol.array();
  return inv_sqrt_mu_.asDiagonal() * (evec_ * coef);
}

Eigen::MatrixXd OperatorL::matvec(const Eigen::MatrixXd& f) const {
  if (f.rows() != space_->points())
    throw std::invalid_argument("matvec: row count must match the point count");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(f.rows(), f.cols());
  if (fourier_) {
    const auto& sides = space_->sides();
    const double h2 = space_->cell() * space_->cell();
    for (size_t a = 0; a < sides.size(); ++a) {
      const int n = sides[a], stride = strides_[a];
      for (int base : lines_[a])
        for (int k = 0; k < n; ++k) {
          const int p = base + k * stride;
          const int nx = base + ((k + 1) % n) * stride;
          const int pv = base + ((k + n - 1) % n) * stride;
          out.row(p) += (2.0 * f.row(p) - f.row(nx) - f.row(pv)) / h2;
        }
    }
    return out;
  }
  const Eigen::VectorXd& mu = space_->measures();
  for (const auto& e : space_->edges()) {
    const double c = 1.0 / (e.length * e.length);
    out.row(e.u) += (c / mu[e.u]) * (f.row(e.u) - f.row(e.v));
    out.row(e.v) += (c / mu[e.v]) * (f.row(e.v) - f.row(e.u));
  }
  return out;
}

Eigen::MatrixXd OperatorL::dense() const {
  const int P = space_->points();
  if (P > 4096) throw std::invalid_argument("dense: capped at 4096 points");
  return matvec(Eigen::MatrixXd::Identity(P, P));
}

Eigen::VectorXcd mu_mean(const SpaceGrid& space, const Eigen::MatrixXcd& f) {
  if (f.rows() != space.points())
    throw std::invalid_argument("mu_mean: row count must match the point count");
  Eigen::VectorXcd out(f.cols());
  const Eigen::VectorXd& mu = space.measures();
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    std::complex<double> s = 0.0;
    for (Eigen::Index p = 0; p < f.rows(); ++p) s += mu[p] * f(p, c);
    out[c] = s / space.total_measure();
  }
  return out;
}

bool is_mean_zero(const SpaceGrid& space, const Eigen::MatrixXcd& f, double rel_tol) {
  const Eigen::VectorXcd mean = mu_mean(space, f);
  const Eigen::VectorXd& mu = space.measures();
  for (Eigen::Index c = 0; c < f.cols(); ++c) {
    double e2 = 0.0;
    for (Eigen::Index p = 0; p < f.rows(); ++p) e2 += mu[p] * std::norm(f(p, c));
    const double rms = std::sqrt(e2 / space.total_measure());
    if (std::abs(mean[c]) > rel_tol * rms) return false;
  }
  return true;
}

Eigen::MatrixXd remove_mean(const SpaceGrid& space, const Eigen::MatrixXd& f) {
  const Eigen::VectorXcd mean = mu_mean(space, f.cast<std::complex<double>>());
  Eigen::MatrixXd out = f;
  for (Eigen::Index c = 0; c < f.cols(); ++c) out.col(c).array() -= mean[c].real();
  return out;
}

HoloSymbol HoloSymbol::one() {
  HoloSymbol s;
  s.name = "one";
  s.eval = [](double) { return std::complex<double>(1.0, 0.0); };
  s.at_zero = 1.0;
  s.sup_norm = 1.0;
  s.is_identity = true;
  return s;
}

HoloSymbol HoloSymbol::heat(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("HoloSymbol::heat: t must be >= 0");
  HoloSymbol s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "heat(%g)", t);
  s.name = buf;
  s.eval = [t](double lam) { return std::complex<double>(std::exp(-t * lam), 0.0); };
  s.at_zero = 1.0;
  s.sup_norm = 1.0;
  return s;
}

HoloSymbol HoloSymbol::poisson(double sdecay) {
  if (!(sdecay >= 0.0)) throw std::invalid_argument("HoloSymbol::poisson: s must be >= 0");
  HoloSymbol s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "poisson(%g)", sdecay);
  s.name = buf;
  s.eval = [sdecay](double lam) {
    return std::complex<double>(std::exp(-sdecay * std::sqrt(lam)), 0.0);
  };
  s.at_zero = 1.0;
  s.sup_norm = 1.0;
  return s;
}

HoloSymbol HoloSymbol::imaginary_power(double spow) {
  HoloSymbol s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "imag_power(%g)", spow);
  s.name = buf;
  s.eval = [spow](double lam) {
    const double a = spow * std::log(lam);
    return std::complex<double>(std::cos(a), std::sin(a));
  };
  s.at_zero = 0.0;  // continuous extension along the range of L
  s.sup_norm = 1.0;
  return s;
}

HoloSymbol HoloSymbol::mexican(int N) {
  if (N < 1) throw std::invalid_argument("HoloSymbol::mexican: N must be >= 1");
  HoloSymbol s;
  char buf[64];
  std::snprintf(buf, sizeof buf, "mexican(%d)", N);
  s.name = buf;
  s.eval = [N](double lam) {
    return std::complex<double>(std::pow(lam, N) * std::exp(-lam), 0.0);
  };
  s.at_zero = 0.0;
  s.sup_norm = std::exp(N * (std::log(static_cast<double>(N)) - 1.0));
  return s;
}

Eigen::VectorXcd HoloSymbol::on_bins(const OperatorL& L) const {
  Eigen::VectorXcd out(L.bins());
  for (int b = 0; b < L.bins(); ++b) {
    const double lam = L.bin_eigenvalue(b);
    out[b] = lam > 0.0 ? eval(lam) : at_zero;
  }
  return out;
}

Eigen::MatrixXd heat(const OperatorL& L, double t, const Eigen::MatrixXd& f) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat: t must be >= 0");
  Eigen::VectorXd sym(L.bins());
  for (int b = 0; b < L.bins(); ++b) sym[b] = std::exp(-t * L.bin_eigenvalue(b));
  return L.apply(sym, f);
}

Eigen::MatrixXcd heat(const OperatorL& L, double t, const Eigen::MatrixXcd& f) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat: t must be >= 0");
  return L.apply(HoloSymbol::heat(t).on_bins(L), f);
}

Eigen::MatrixXcd functional_calculus(const OperatorL& L, const HoloSymbol& phi,
                                     const Eigen::MatrixXcd& f) {
  if (!is_mean_zero(L.space(), f))
    throw std::invalid_argument("functional_calculus: f must be mean-zero");
  if (phi.is_identity) return f;
  return L.apply(phi.on_bins(L), f);
}

double phi_hat0(double xi) {
  static const PhiHatTable tab;
  xi = std::abs(xi);
  const double u = xi / PhiHatTable::kStep;
  if (u >= PhiHatTable::kCount - 1) return 0.0;
  const int i = static_cast<int>(u);
  const double x = u - i;
  const double ym = (i == 0) ? tab.v[1] : tab.v[i - 1];  // even extension
  const double y0 = tab.v[i];
  const double y1 = tab.v[i + 1];
  const double y2 = (i + 2 < PhiHatTable::kCount) ? tab.v[i + 2] : 0.0;
  return 0.5 * (2.0 * y0 + (-ym + y1) * x + (2.0 * ym - 5.0 * y0 + 4.0 * y1 - y2) * x * x +
                (-ym + 3.0 * y0 - 3.0 * y1 + y2) * x * x * x);
}

Eigen::MatrixXd phi_family(const OperatorL& L, double t, const Eigen::MatrixXd& f) {
  if (!(t > 0.0)) throw std::invalid_argument("phi_family: t must be > 0");
  Eigen::VectorXd sym(L.bins());
  for (int b = 0; b < L.bins(); ++b) sym[b] = phi_hat0(t * std::sqrt(L.bin_eigenvalue(b)));
  return L.apply(sym, f);
}

Eigen::MatrixXcd phi_family(const OperatorL& L, double t, const Eigen::MatrixXcd& f) {
  if (!(t > 0.0)) throw std::invalid_argument("phi_family: t must be > 0");
  Eigen::VectorXcd sym(L.bins());
  for (int b = 0; b < L.bins(); ++b) sym[b] = phi_hat0(t * std::sqrt(L.bin_eigenvalue(b)));
  return L.apply(sym, f);
}

double propagation_leakage(const OperatorL& L, int x0, double t) {
  const SpaceGrid& sp = L.space();
  if (x0 < 0 || x0 >= sp.points()) throw std::invalid_argument("propagation_leakage: bad point");
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(sp.points(), 1);
  delta(x0, 0) = 1.0;
  const Eigen::MatrixXd g = phi_family(L, t, delta);
  double total = 0.0, outside = 0.0;
  const double reach = t * (1.0 + 1e-12);
  for (int p = 0; p < sp.points(); ++p) {
    const double m = sp.measure(p) * std::abs(g(p, 0));
    total += m;
    if (sp.distance(x0, p) > reach) outside += m;
  }
  return total > 0.0 ? outside / total : 0.0;
}

std::shared_ptr<const HalfGrid> spectral_half_grid(const OperatorL& L, double rho) {
  if (!(rho > 1.0)) throw std::invalid_argument("spectral_half_grid: rho must exceed 1");
  const double t_min = 0.1 / std::sqrt(L.lambda_max());
  const double t_max = 4.5 / std::sqrt(L.lambda_min_positive());
  const int levels = static_cast<int>(std::ceil(std::log(t_max / t_min) / std::log(rho))) + 1;
  return HalfGrid::custom(L.space_ptr(), t_min, rho, levels);
}

TentFunction<double> q_operator(const OperatorL& L, const std::shared_ptr<const HalfGrid>& hg,
                                int N, const Eigen::MatrixXd& f) {
  check_space_match(L, *hg, "q_operator");
  if (N < 1) throw std::invalid_argument("q_operator: N must be >= 1");
  if (!is_mean_zero(L.space(), f.cast<std::complex<double>>()))
    throw std::invalid_argument("q_operator: f must be mean-zero");
  std::function<Eigen::VectorXd(double)> sym = [&](double t) {
    return heat_power_symbol(L, t, N);
  };
  return TentFunction<double>(hg, q_operator_impl<Eigen::VectorXd>(L, hg, f, sym));
}

TentFunction<std::complex<double>> q_operator(const OperatorL& L,
                                              const std::shared_ptr<const HalfGrid>& hg, int N,
                                              const Eigen::MatrixXcd& f) {
  check_space_match(L, *hg, "q_operator");
  if (N < 1) throw std::invalid_argument("q_operator: N must be >= 1");
  if (!is_mean_zero(L.space(), f)) throw std::invalid_argument("q_operator: f must be mean-zero");
  std::function<Eigen::VectorXcd(double)> sym = [&](double t) {
    return heat_power_symbol(L, t, N).cast<std::complex<double>>().eval();
  };
  return TentFunction<std::complex<double>>(hg, q_operator_impl<Eigen::VectorXcd>(L, hg, f, sym));
}

TentFunction<double> q_tilde(const OperatorL& L, const std::shared_ptr<const HalfGrid>& hg,
                             int N, const Eigen::MatrixXd& f) {
  check_space_match(L, *hg, "q_tilde");
  if (N < 1) throw std::invalid_argument("q_tilde: N must be >= 1");
  if (!is_mean_zero(L.space(), f.cast<std::complex<double>>()))
    throw std::invalid_argument("q_tilde: f must be mean-zero");
  std::function<Eigen::VectorXd(double)> sym = [&](double t) { return band_symbol(L, t, N); };
  return TentFunction<double>(hg, q_operator_impl<Eigen::VectorXd>(L, hg, f, sym));
}

TentFunction<std::complex<double>> q_tilde(const OperatorL& L,
                                           const std::shared_ptr<const HalfGrid>& hg, int N,
                                           const Eigen::MatrixXcd& f) {
  check_space_match(L, *hg, "q_tilde");
  if (N < 1) throw std::invalid_argument("q_tilde: N must be >= 1");
  if (!is_mean_zero(L.space(), f)) throw std::invalid_argument("q_tilde: f must be mean-zero");
  std::function<Eigen::VectorXcd(double)> sym = [&](double t) {
    return band_symbol(L, t, N).cast<std::complex<double>>().eval();
  };
  return TentFunction<std::complex<double>>(hg, q_operator_impl<Eigen::VectorXcd>(L, hg, f, sym));
}

Eigen::MatrixXd pi_operator(const OperatorL& L, int N, const TentFunction<double>& u) {
  check_space_match(L, u.grid(), "pi_operator");
  if (N < 1) throw std::invalid_argument("pi_operator: N must be >= 1");
  const HalfGrid& hg = u.grid();
  const int P = hg.points();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P, u.components());
  for (int j = 0; j < hg.levels(); ++j)
    out += hg.log_step() *
           L.apply(heat_power_symbol(L, hg.t(j), N), u.values().block(j * P, 0, P, u.components()));
  return out;
}

Eigen::MatrixXcd pi_operator(const OperatorL& L, int N,
                             const TentFunction<std::complex<double>>& u) {
  check_space_match(L, u.grid(), "pi_operator");
  if (N < 1) throw std::invalid_argument("pi_operator: N must be >= 1");
  const HalfGrid& hg = u.grid();
  const int P = hg.points();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(P, u.components());
  for (int j = 0; j < hg.levels(); ++j) {
    const Eigen::VectorXcd sym = heat_power_symbol(L, hg.t(j), N).cast<std::complex<double>>();
    out += hg.log_step() * L.apply(sym, u.values().block(j * P, 0, P, u.components()));
  }
  return out;
}

Eigen::MatrixXd pi_tilde(const OperatorL& L, int N, const TentFunction<double>& u) {
  check_space_match(L, u.grid(), "pi_tilde");
  if (N < 1) throw std::invalid_argument("pi_tilde: N must be >= 1");
  const HalfGrid& hg = u.grid();
  const int P = hg.points();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(P, u.components());
  for (int j = 0; j < hg.levels(); ++j)
    out += hg.log_step() *
           L.apply(band_symbol(L, hg.t(j), N), u.values().block(j * P, 0, P, u.components()));
  return out;
}

Eigen::MatrixXcd pi_tilde(const OperatorL& L, int N,
                          const TentFunction<std::complex<double>>& u) {
  check_space_match(L, u.grid(), "pi_tilde");
  if (N < 1) throw std::invalid_argument("pi_tilde: N must be >= 1");
  const HalfGrid& hg = u.grid();
  const int P = hg.points();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(P, u.components());
  for (int j = 0; j < hg.levels(); ++j) {
    const Eigen::VectorXcd sym = band_symbol(L, hg.t(j), N).cast<std::complex<double>>();
    out += hg.log_step() * L.apply(sym, u.values().block(j * P, 0, P, u.components()));
  }
  return out;
}

double calderon_constant(int N) {
  if (N < 1 || N > 64) throw std::invalid_argument("calderon_constant: N out of range");
  // int_0^inf (t^2 lam)^{2N} e^{-2 t^2 lam} dt/t = (1/2) int_0^inf u^{2N-1} e^{-2u} du
  const auto g = [N](double u) { return 0.5 * std::pow(u, 2 * N - 1) * std::exp(-2.0 * u); };
  const double hi = 30.0 + 10.0 * N;
  const double integral = adaptive_simpson(g, 0.0, hi, 1e-16);
  return 1.0 / integral;
}

double calderon_constant_closed(int N) {
  if (N < 1 || N > 64) throw std::invalid_argument("calderon_constant_closed: N out of range");
  return std::exp2(2 * N + 1) / std::tgamma(2.0 * N);
}

double mixed_calderon_constant(int N, int Nprime) {
  if (N < 1 || Nprime < 1 || N + Nprime > 64)
    throw std::invalid_argument("mixed_calderon_constant: orders out of range");
  const auto g = [N, Nprime](double u) {
    return 0.5 * std::pow(u, N + Nprime - 1) * phi_hat0(std::sqrt(u)) * std::exp(-u);
  };
  const double hi = 60.0 + 10.0 * (N + Nprime);
  const double integral = adaptive_simpson(g, 0.0, hi, 1e-15);
  if (!(std::abs(integral) > 1e-8))
    throw std::runtime_error("mixed_calderon_constant: degenerate normalization");
  return 1.0 / integral;
}

OffdiagFamily OffdiagFamily::heat_power(int k) {
  if (k < 0) throw std::invalid_argument("heat_power: k must be >= 0");
  OffdiagFamily f;
  f.kind = Kind::HeatPower;
  f.k = k;
  return f;
}

OffdiagFamily OffdiagFamily::phi_calculus(HoloSymbol phi, int k) {
  if (k < 0) throw std::invalid_argument("phi_calculus: k must be >= 0");
  OffdiagFamily f;
  f.kind = Kind::PhiCalculus;
  f.k = k;
  f.phi = std::move(phi);
  return f;
}

OffdiagFamily OffdiagFamily::phi_family() {
  OffdiagFamily f;
  f.kind = Kind::PhiFamily;
  return f;
}

double offdiag_measure(const OperatorL& L, const OffdiagFamily& family, const SetM& E,
                       const SetM& Eprime, double t) {
  const SpaceGrid& sp = L.space();
  if (sp.points() > 4096) throw std::invalid_argument("offdiag_measure: capped at 4096 points");
  if (E.count() == 0 || Eprime.count() == 0)
    throw std::invalid_argument("offdiag_measure: E and E' must be nonempty");
  if (!(t > 0.0)) throw std::invalid_argument("offdiag_measure: t must be > 0");

  Eigen::VectorXcd sym(L.bins());
  for (int b = 0; b < L.bins(); ++b) {
    const double lam = L.bin_eigenvalue(b);
    const double u = t * t * lam;
    switch (family.kind) {
      case OffdiagFamily::Kind::HeatPower:
        sym[b] = std::pow(u, family.k) * std::exp(-u);
        break;
      case OffdiagFamily::Kind::PhiCalculus: {
        const std::complex<double> phi = lam > 0.0 ? family.phi.eval(lam) : family.phi.at_zero;
        sym[b] = phi * std::pow(u, family.k) * std::exp(-u);
        break;
      }
      case OffdiagFamily::Kind::PhiFamily:
        sym[b] = phi_hat0(t * std::sqrt(lam));
        break;
    }
  }

  const std::vector<int> src = E.indices(), dst = Eprime.indices();
  Eigen::MatrixXcd basis = Eigen::MatrixXcd::Zero(sp.points(), src.size());
  for (size_t e = 0; e < src.size(); ++e) basis(src[e], e) = 1.0;
  const Eigen::MatrixXcd T = L.apply(sym, basis);

  Eigen::MatrixXcd M(dst.size(), src.size());
  for (size_t r = 0; r < dst.size(); ++r)
    for (size_t e = 0; e < src.size(); ++e)
      M(r, e) = std::sqrt(sp.measure(dst[r])) * T(dst[r], e) / std::sqrt(sp.measure(src[e]));

  // largest singular value through the smaller Gram matrix
  const Eigen::MatrixXcd G =
      M.rows() <= M.cols() ? Eigen::MatrixXcd(M * M.adjoint()) : Eigen::MatrixXcd(M.adjoint() * M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  if (es.info() != Eigen::Success) throw std::runtime_error("offdiag_measure: eigensolver failed");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

LineFit offdiag_exponential_fit(const std::vector<OffdiagSample>& samples) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (!(s.norm > 0.0) || !(s.t > 0.0)) continue;
    x.push_back(s.dist * s.dist / (s.t * s.t));
    y.push_back(std::log(s.norm));
  }
  return fit_linear(x, y);
}

LineFit offdiag_polynomial_fit(const std::vector<OffdiagSample>& samples) {
  std::vector<double> x, y;
  for (const auto& s : samples) {
    if (!(s.norm > 0.0) || !(s.t > 0.0)) continue;
    x.push_back(std::log(1.0 + s.dist * s.dist / (s.t * s.t)));
    y.push_back(std::log(s.norm));
  }
  return fit_linear(x, y);
}

KernelSpec KernelSpec::delta() {
  KernelSpec k;
  k.kind = Kind::Delta;
  return k;
}

KernelSpec KernelSpec::composed(int N, int Nprime, HoloSymbol phi, double c) {
  if (N < 1 || Nprime < 1) throw std::invalid_argument("KernelSpec: orders must be >= 1");
  KernelSpec k;
  k.kind = Kind::Composed;
  k.N = N;
  k.Nprime = Nprime;
  k.phi = std::move(phi);
  k.c = c;
  return k;
}

KernelSpec KernelSpec::projection(int N) {
  return composed(N, N, HoloSymbol::one(), calderon_constant(N));
}

namespace {

template <typename Scalar>
KernelResult kernel_apply_impl(const OperatorL& L, const KernelSpec& spec,
                               const TentFunction<Scalar>& u) {
  check_space_match(L, u.grid(), "kernel_apply");
  const auto hg = u.grid_ptr();
  const int P = hg->points(), J = hg->levels(), m = u.components();
  const double lnrho = hg->log_step();

  std::vector<Eigen::MatrixXcd> uhat(J);
  for (int j = 0; j < J; ++j)
    uhat[j] = L.to_spectral(
        u.values().block(j * P, 0, P, m).template cast<std::complex<double>>());

  Eigen::MatrixXcd s0v = Eigen::MatrixXcd::Zero(hg->nodes(), m);
  Eigen::MatrixXcd sinfv = Eigen::MatrixXcd::Zero(hg->nodes(), m);

  if (spec.kind == KernelSpec::Kind::Delta) {
    const double coef = lnrho * (1.0 / lnrho);
    for (int j = 0; j < J; ++j)
      sinfv.block(j * P, 0, P, m) = L.from_spectral(coef * uhat[j]);
  } else {
    std::vector<Eigen::VectorXcd> a(J), b(J);
    const Eigen::VectorXcd phib = spec.phi.on_bins(L);
    for (int j = 0; j < J; ++j) {
      const Eigen::VectorXd aj = heat_power_symbol(L, hg->t(j), spec.N);
      const Eigen::VectorXd bj = heat_power_symbol(L, hg->t(j), spec.Nprime);
      a[j] = (spec.c * aj).cast<std::complex<double>>().cwiseProduct(phib);
      b[j] = bj.cast<std::complex<double>>();
    }
    Eigen::MatrixXcd run = Eigen::MatrixXcd::Zero(P, m);
    for (int j = 0; j < J; ++j) {  // s_i < t_j
      Eigen::MatrixXcd hat = run;
      hat.array().colwise() *= a[j].array();
      s0v.block(j * P, 0, P, m) = L.from_spectral(hat);
      Eigen::MatrixXcd term = uhat[j];
      term.array().colwise() *= b[j].array();
      run += lnrho * term;
    }
    run.setZero();
    for (int j = J - 1; j >= 0; --j) {  // s_i >= t_j
      Eigen::MatrixXcd term = uhat[j];
      term.array().colwise() *= b[j].array();
      run += lnrho * term;
      Eigen::MatrixXcd hat = run;
      hat.array().colwise() *= a[j].array();
      sinfv.block(j * P, 0, P, m) = L.from_spectral(hat);
    }
  }

  KernelResult out;
  out.s0 = TentFunction<std::complex<double>>(hg, std::move(s0v));
  out.s_inf = TentFunction<std::complex<double>>(hg, std::move(sinfv));
  out.s = add(out.s0, out.s_inf);
  return out;
}

}  // namespace

KernelResult kernel_apply(const OperatorL& L, const KernelSpec& spec,
                          const TentFunction<double>& u) {
  return kernel_apply_impl(L, spec, u);
}

KernelResult kernel_apply(const OperatorL& L, const KernelSpec& spec,
                          const TentFunction<std::complex<double>>& u) {
  return kernel_apply_impl(L, spec, u);
}

}  // namespace tentlab
