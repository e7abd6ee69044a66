#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "tentlab/corpus.hpp"
#include "tentlab/gamma.hpp"
#include "tentlab/rng.hpp"
#include "tentlab/tent_norms.hpp"

using namespace tentlab;

namespace {

std::shared_ptr<const HalfGrid> torus16() {
  return HalfGrid::geometric(SpaceGrid::torus({16}, 1.0 / 16));
}

std::shared_ptr<const HalfGrid> torus8x8() {
  return HalfGrid::geometric(SpaceGrid::torus({8, 8}, 1.0 / 8));
}

std::shared_ptr<const HalfGrid> kite() {
  std::vector<SpaceGrid::GraphEdge> edges = {
      {0, 1, 1.0}, {1, 2, 0.5}, {2, 3, 0.75}, {3, 1, 0.25}, {3, 4, 2.0}};
  Eigen::VectorXd mu(5);
  mu << 1.0, 0.5, 2.0, 0.25, 1.25;
  return HalfGrid::geometric(SpaceGrid::graph(5, edges, mu));
}

// Direct-sum oracle for the squared functional: cone membership evaluated
// from the definition, energies accumulated in long double.
double a_sq_oracle(const TentFunction<double>& u, int x, double alpha, const BanachSpace& X) {
  const auto& hg = u.grid();
  const auto& sp = hg.space();
  long double acc = 0.0L;
  for (int node : u.support().node_indices()) {
    const int y = hg.node_point(node);
    const int j = hg.node_level(node);
    if (!(alpha * hg.t(j) > sp.distance(x, y))) continue;
    long double sq = 0.0L;
    for (int c = 0; c < u.components(); ++c)
      sq += X.wgt(c) * static_cast<long double>(u.values()(node, c)) * u.values()(node, c);
    acc += hg.gamma_weight(y, j) * sq;
  }
  return static_cast<double>(acc);
}

TentFunction<double> pm(const std::shared_ptr<const HalfGrid>& hg, int y, int j, double amp) {
  Eigen::VectorXd v(1);
  v << amp;
  return point_mass(hg, y, j, v);
}

TentFunction<double> random_u(const std::shared_ptr<const HalfGrid>& hg, int m,
                              std::uint64_t seed, int nodes = 60) {
  Eigen::MatrixXd vals = Eigen::MatrixXd::Zero(hg->nodes(), m);
  for (int i = 0; i < nodes; ++i) {
    const int n = static_cast<int>(rng::pick(seed, 7, i, hg->nodes()));
    for (int c = 0; c < m; ++c) vals(n, c) = rng::normal(seed, 11 + c, n);
  }
  return TentFunction<double>(hg, std::move(vals));
}

}  // namespace

TEST_CASE("functional field matches the direct-sum oracle") {
  for (const auto& hg : {torus16(), torus8x8(), kite()}) {
    for (int m : {1, 3}) {
      const auto X = m == 1 ? BanachSpace::lq(1, 2)
                            : BanachSpace::weighted_lq(3, 2.0, Eigen::Vector3d(0.5, 1.0, 2.5));
      const auto u = random_u(hg, m, 301 + m);
      for (double alpha : {1.0, 1.7, 3.0}) {
        const Eigen::VectorXd sq = a_functional_sq_all(u, alpha, X);
        for (int x = 0; x < hg->points(); ++x) {
          const double want = a_sq_oracle(u, x, alpha, X);
          CHECK(sq[x] == doctest::Approx(want).epsilon(1e-12));
        }
        // a_functional routes through gamma_norm over the cone region.
        for (int x = 0; x < hg->points(); x += 3) {
          const auto est = a_functional(u, x, alpha, X);
          CHECK(est.method == "exact");
          CHECK(est.value ==
                doctest::Approx(std::sqrt(a_sq_oracle(u, x, alpha, X))).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("zero function gives zero functional and zero norms") {
  const auto hg = torus16();
  const auto X = BanachSpace::lq(2, 2);
  const auto z = TentFunction<double>::zero(hg, 2);
  CHECK(a_functional(z, 5, 1.0, X).value == 0.0);
  CHECK(a_functional_sq_all(z, 2.0, X).maxCoeff() == 0.0);
  CHECK(tent_norm(z, 1.0, 1.0, X).value == 0.0);
  CHECK(tent_norm(z, 2.5, 2.0, X).value == 0.0);
  CHECK(tent_norm_inf(z, X).value == 0.0);
  const auto rep = pointwise_truncation_bound(z, 0.5, 0.5, BanachSpace::lq(2, 2));
  CHECK(rep.ratio == 0.0);
  CHECK(rep.level_set.empty());
}

TEST_CASE("point mass: membership, T^1 closed form, aperture ratio") {
  const auto hg = torus16();
  const auto& sp = hg->space();
  const auto X = BanachSpace::lq(1, 2);
  const int y0 = 6, j0 = 10;  // t irrational multiple of the cell width
  const double t0 = hg->t(j0);
  const double amp = -1.25;
  const auto u = pm(hg, y0, j0, amp);
  const double w = hg->gamma_weight(y0, j0);

  const Eigen::VectorXd sq = a_functional_sq_all(u, 1.0, X);
  for (int x = 0; x < sp.points(); ++x) {
    const double want = sp.distance(x, y0) < t0 ? std::sqrt(w) * std::abs(amp) : 0.0;
    CHECK(std::sqrt(sq[x]) == doctest::Approx(want).epsilon(1e-12));
  }

  const auto t1 = tent_norm(u, 1.0, 1.0, X);
  CHECK(t1.value == doctest::Approx(sp.volume(y0, t0) * std::sqrt(w) * std::abs(amp))
                        .epsilon(1e-12));

  const auto t1a2 = tent_norm(u, 1.0, 2.0, X);
  CHECK(t1a2.value / t1.value ==
        doctest::Approx(sp.volume(y0, 2.0 * t0) / sp.volume(y0, t0)).epsilon(1e-12));
}

TEST_CASE("report value equals the Lp norm of its functional array") {
  const auto hg = torus8x8();
  const auto X = BanachSpace::lq(2, 2);
  const auto u = random_u(hg, 2, 77);
  for (double p : {1.0, 1.5, 2.0, 3.0}) {
    const auto rep = tent_norm(u, p, 1.0, X);
    long double acc = 0.0L;
    for (int x = 0; x < hg->points(); ++x)
      acc += hg->space().measure(x) * std::pow(static_cast<long double>(rep.functional[x]), p);
    CHECK(rep.value == doctest::Approx(static_cast<double>(std::pow(acc, 1.0L / p)))
                           .epsilon(1e-12));
  }
  CHECK_THROWS_AS(tent_norm(u, 0.5, 1.0, X), std::invalid_argument);
  CHECK_THROWS_AS(tent_norm(u, std::numeric_limits<double>::infinity(), 1.0, X),
                  std::invalid_argument);
  CHECK_THROWS_AS(tent_norm(u, 1.0, 0.5, X), std::invalid_argument);
}

TEST_CASE("sampled path agrees with the exact field and reruns bit-identically") {
  const auto hg = torus16();
  const auto X = BanachSpace::lq(2, 2);
  const auto u = random_u(hg, 2, 501);
  GammaOptions opts;
  opts.seed = 99;
  opts.samples = 4096;
  opts.force_sampling = true;
  const auto mc = tent_norm(u, 2.0, 1.0, X, opts);
  const auto mc2 = tent_norm(u, 2.0, 1.0, X, opts);
  CHECK(mc.method == "sampled");
  CHECK(mc.samples == 4096);
  CHECK(mc.value == mc2.value);
  const auto exact = tent_norm(u, 2.0, 1.0, X);
  CHECK(exact.method == "exact");
  for (int x = 0; x < hg->points(); ++x)
    CHECK(mc.functional[x] == doctest::Approx(exact.functional[x]).epsilon(0.12));
  CHECK(mc.value == doctest::Approx(exact.value).epsilon(0.05));
}

TEST_CASE("functional is nondecreasing in the aperture") {
  for (const auto& hg : {torus16(), kite()}) {
    const auto X = BanachSpace::lq(2, 2);
    const auto u = random_u(hg, 2, 901);
    Eigen::VectorXd prev = a_functional_sq_all(u, 1.0, X);
    for (double alpha : {1.3, 2.0, 4.0}) {
      const Eigen::VectorXd cur = a_functional_sq_all(u, alpha, X);
      for (int x = 0; x < hg->points(); ++x) CHECK(cur[x] >= prev[x] - 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("T^inf: point mass is found by a ball just above its height") {
  const auto hg = torus16();
  const auto& sp = hg->space();
  const auto X = BanachSpace::lq(1, 2);
  const int y0 = 3, j0 = 9;
  const double t0 = hg->t(j0);
  const auto v = pm(hg, y0, j0, 2.0);
  const auto rep = tent_norm_inf(v, X);
  CHECK(rep.value ==
        doctest::Approx(std::sqrt(hg->gamma_weight(y0, j0)) * 2.0).epsilon(1e-12));
  CHECK(rep.best_center == y0);
  CHECK(rep.best_radius > t0);
  // Same ball of points: the radius only just clears the mass height.
  CHECK(sp.volume(y0, rep.best_radius) == sp.volume(y0, t0));
}

TEST_CASE("T^inf matches an exhaustive ball-average oracle") {
  for (const auto& hg : {torus16(), kite()}) {
    const auto& sp = hg->space();
    const auto X = BanachSpace::lq(2, 2);
    const auto v = random_u(hg, 2, 1203, 40);
    const auto rep = tent_norm_inf(v, X);
    double want = 0.0;
    for (int c = 0; c < sp.points(); ++c) {
      for (double r : sp.radius_ladder()) {
        const double vol = sp.volume(c, r);
        if (vol <= 0.0) continue;
        double acc = 0.0;
        for (int x = 0; x < sp.points(); ++x) {
          if (!(sp.distance(c, x) < r)) continue;
          // truncated-cone energy from the definition
          long double sq = 0.0L;
          for (int node : v.support().node_indices()) {
            const int y = hg->node_point(node);
            const int j = hg->node_level(node);
            if (!(hg->t(j) < r)) continue;
            if (!(1.0 * hg->t(j) > sp.distance(x, y))) continue;
            for (int cc = 0; cc < v.components(); ++cc)
              sq += hg->gamma_weight(y, j) * v.values()(node, cc) * v.values()(node, cc);
          }
          acc += sp.measure(x) * static_cast<double>(sq);
        }
        want = std::max(want, std::sqrt(acc / vol));
      }
    }
    CHECK(rep.value == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("scalar T^inf comparability: ball scan is dominated by the tent-mass form") {
  for (const auto& hg : {torus16(), kite()}) {
    const auto v = random_u(hg, 1, 41);
    const auto cmp = tinf_comparability(v);
    CHECK(cmp.lhs <= cmp.rhs * (1.0 + 1e-12));
    CHECK(cmp.ratio > 0.05);
    CHECK(cmp.ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("duality pairing: trivial cases and the exact single-node value") {
  const auto hg = torus16();
  const auto u = pm(hg, 2, 5, 3.0);
  const auto v1 = pm(hg, 9, 5, 4.0);
  CHECK(duality_pairing(u, v1) == 0.0);

  const auto v2 = pm(hg, 2, 5, -1.5);
  const double what = hg->pairing_weight(2);
  CHECK(duality_pairing(u, v2) == doctest::Approx(3.0 * -1.5 * what).epsilon(1e-15));
  CHECK(what == doctest::Approx(hg->space().measure(2) * hg->log_step()).epsilon(1e-15));

  const auto w = random_u(torus8x8(), 1, 5);
  CHECK_THROWS_AS(duality_pairing(u, w), std::invalid_argument);
}

TEST_CASE("duality pairing obeys the T^1 x T^inf bound with a moderate constant") {
  const auto hg = torus16();
  const auto X = BanachSpace::lq(2, 2);
  for (std::uint64_t seed : {1001ull, 1002ull, 1003ull}) {
    const auto u = random_u(hg, 2, seed);
    const auto v = random_u(hg, 2, seed * 7 + 1);
    const double pair = std::abs(duality_pairing(u, v));
    const double t1 = tent_norm(u, 1.0, 1.0, X).value;
    const double tinf = tent_norm_inf(v, X).value;
    CHECK(pair <= 32.0 * t1 * tinf);
    CHECK(t1 > 0.0);
    CHECK(tinf > 0.0);
  }
}

TEST_CASE("Fubini form of the squared T^2 norm") {
  for (const auto& hg : {torus16(), torus8x8(), kite()}) {
    const auto X = BanachSpace::weighted_lq(2, 2.0, Eigen::Vector2d(0.75, 1.5));
    const auto u = random_u(hg, 2, 88);
    const double direct = tent_norm(u, 2.0, 1.0, X).value;
    const double fub = std::sqrt(tent_norm2_sq_fubini(u, X));
    CHECK(fub == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("restriction to a tent localizes the functional in the base set") {
  const auto hg = torus16();
  const auto& sp = hg->space();
  const auto X = BanachSpace::lq(2, 2);
  const auto u = random_u(hg, 2, 314, 120);
  const SetM E = SetM::from_indices(sp.points(), {2, 3, 4, 5, 6, 11, 12});
  const auto uT = restrict_to(u, tent(hg, E));
  if (!uT.support().empty()) {
    const Eigen::VectorXd sq = a_functional_sq_all(uT, 1.0, X);
    for (int x = 0; x < sp.points(); ++x)
      if (!E.contains(x)) CHECK(sq[x] == 0.0);
    // T^1 against mu(E)^(1/2) T^2, exactly as computed.
    double muE = 0.0;
    for (int x : E.indices()) muE += sp.measure(x);
    const double T1 = tent_norm(uT, 1.0, 1.0, X).value;
    const double T2 = tent_norm(uT, 2.0, 1.0, X).value;
    CHECK(T1 <= std::sqrt(muE) * T2 * (1.0 + 1e-12));
  }
}

TEST_CASE("compact sub-region bounds on the exact path") {
  const auto hg = torus8x8();
  const auto& sp = hg->space();
  const auto X = BanachSpace::lq(2, 2);
  const auto u = random_u(hg, 2, 271, 90);

  // K exhausts the support from below; at K = supp the norms agree.
  const Region full = u.support();
  for (double p : {1.0, 2.0, 3.0}) {
    const double whole = tent_norm(u, p, 1.0, X).value;
    CHECK(tent_norm(restrict_to(u, full), p, 1.0, X).value ==
          doctest::Approx(whole).epsilon(1e-13));
  }

  for (std::uint64_t s : {1ull, 2ull, 3ull}) {
    const Region K = random_region(hg, 5'000 + s);
    const auto uK = restrict_to(u, K);
    if (uK.support().empty()) continue;
    const double gam = gamma_norm_exact(uK, Region(hg, true), X);
    const SetM S = surround_set(uK.support());
    double muS = 0.0;
    for (int x : S.indices()) muS += sp.measure(x);
    for (double p : {1.0, 2.0, 3.0}) {
      const double tp = tent_norm(uK, p, 1.0, X).value;
      CHECK(tp <= tent_norm(u, p, 1.0, X).value * (1.0 + 1e-12));
      CHECK(tp <= std::pow(muS, 1.0 / p) * gam * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("surround set matches brute force") {
  for (const auto& hg : {torus16(), kite()}) {
    const auto& sp = hg->space();
    const Region K = random_region(hg, 31);
    const SetM got = surround_set(K);
    for (int x = 0; x < sp.points(); ++x) {
      bool want = false;
      for (int node : K.node_indices()) {
        const int y = hg->node_point(node);
        if (1.0 * hg->t(hg->node_level(node)) > sp.distance(x, y)) {
          want = true;
          break;
        }
      }
      CHECK(got.contains(x) == want);
    }
  }
}

TEST_CASE("aperture fit: unit ratio at alpha one, point-mass slope within gate") {
  const auto hg = HalfGrid::geometric(SpaceGrid::torus({64}, 1.0 / 64));
  const auto X = BanachSpace::lq(1, 2);
  // t ~ 2.8 cells: alpha = 8 stays clear of wrap-around saturation.
  std::vector<TentFunction<double>> corpus;
  corpus.push_back(pm(hg, 10, 10, 1.0));
  corpus.push_back(pm(hg, 40, 12, -0.5));
  const std::vector<double> alphas = {1.0, 2.0, 4.0, 8.0};
  const auto rep = aperture_exponent_fit(corpus, alphas, 1.0, X);
  for (int i = 0; i < rep.ratios.rows(); ++i) CHECK(rep.ratios(i, 0) == 1.0);
  CHECK(rep.max_slope <= 1.5);
  CHECK(rep.max_slope > 0.5);

  // Ratios follow the volume growth of the dilated ball exactly.
  const auto& sp = hg->space();
  const double t0 = hg->t(10);
  for (size_t a = 0; a < alphas.size(); ++a)
    CHECK(rep.ratios(0, static_cast<int>(a)) ==
          doctest::Approx(sp.volume(10, alphas[a] * t0) / sp.volume(10, t0)).epsilon(1e-10));

  CHECK_THROWS_AS(
      aperture_exponent_fit({TentFunction<double>::zero(hg, 1)}, alphas, 1.0, X),
      std::invalid_argument);
}

TEST_CASE("pointwise truncation bound with cover certificates") {
  const auto hg = torus16();
  const auto X = BanachSpace::lq(2, 2);
  const auto u = random_u(hg, 2, 606, 80);
  const Eigen::VectorXd A = a_functional_sq_all(u, 1.0, X).cwiseSqrt();

  // lambda above the peak: nothing is removed, ratio is at most one.
  const double peak = A.maxCoeff();
  const auto quiet = pointwise_truncation_bound(u, peak * 1.01, 0.5, X);
  CHECK(quiet.level_set.empty());
  CHECK(quiet.ratio <= 1.0);
  CHECK(quiet.ratio == doctest::Approx(peak / (peak * 1.01)).epsilon(1e-12));

  // lambda at the median: certificate caps the truncated functional.
  std::vector<double> sorted(A.data(), A.data() + A.size());
  std::sort(sorted.begin(), sorted.end());
  const double lambda = std::max(1e-9, sorted[sorted.size() / 2]);
  const auto rep = pointwise_truncation_bound(u, lambda, 0.5, X);
  CHECK(!rep.level_set.empty());
  CHECK(rep.cover_sizes.size() == static_cast<size_t>(rep.level_set.count()));
  CHECK(rep.ratio <= static_cast<double>(rep.max_cover + 1));
}

TEST_CASE("averaging identity holds literally") {
  const auto hg = HalfGrid::geometric(SpaceGrid::torus({8}, 1.0 / 8));
  const auto raw = random_u(hg, 1, 19, 50);
  // Short-mantissa values keep the literal ball averages exact; the cell
  // width is a power of two, so every product and partial sum is exact.
  Eigen::MatrixXd q = raw.values();
  for (int i = 0; i < q.size(); ++i) q(i) = std::round(q(i) * 1024.0) / 1024.0;
  const TentFunction<double> u(hg, std::move(q));
  CHECK(averaging_projection_deviation(u, 1.0) == 0.0);
  CHECK(averaging_projection_deviation(u, 2.0) == 0.0);
  // Full-mantissa values cost at most a rounding step per average.
  CHECK(averaging_projection_deviation(raw, 2.0) <= 1e-14);
  const auto mass = pm(hg, 4, 6, 1.75);
  CHECK(averaging_projection_deviation(mass, 2.0) == 0.0);

  const auto g = kite();
  const auto ug = random_u(g, 1, 23, 30);
  double scale = ug.values().cwiseAbs().maxCoeff();
  CHECK(averaging_projection_deviation(ug, 1.5) <= 1e-13 * std::max(1.0, scale));
}
