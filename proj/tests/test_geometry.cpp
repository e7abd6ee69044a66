#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tentlab/rng.hpp"
#include "tentlab/space.hpp"

using namespace tentlab;

namespace {

std::shared_ptr<const SpaceGrid> torus8() { return SpaceGrid::torus({8}, 1.0); }

std::shared_ptr<const SpaceGrid> path_graph(int n) {
  std::vector<SpaceGrid::GraphEdge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return SpaceGrid::graph(n, edges, Eigen::VectorXd::Ones(n));
}

std::shared_ptr<const SpaceGrid> kite_graph() {
  std::vector<SpaceGrid::GraphEdge> edges = {
      {0, 1, 1.0}, {1, 2, 0.5}, {2, 3, 1.5}, {3, 4, 1.0}, {1, 3, 1.0}};
  Eigen::VectorXd mu(5);
  mu << 1.0, 2.0, 1.0, 0.5, 1.0;
  return SpaceGrid::graph(5, edges, mu);
}

// Brute-force oracle for ball volume: sum of measures over d(x, y) < r.
double volume_oracle(const SpaceGrid& g, int x, double r) {
  double s = 0.0;
  for (int y = 0; y < g.points(); ++y)
    if (g.distance(x, y) < r) s += g.measure(y);
  return s;
}

// Brute-force oracle for the centered maximal extension.
SetM maximal_oracle(const SpaceGrid& g, const SetM& E, double sigma) {
  SetM out(g.points());
  for (int x = 0; x < g.points(); ++x) {
    for (double r : g.radius_ladder()) {
      double cnt = 0.0, tot = 0.0;
      for (int y = 0; y < g.points(); ++y) {
        if (g.distance(x, y) < r) {
          tot += g.measure(y);
          if (E.contains(y)) cnt += g.measure(y);
        }
      }
      if (tot > 0.0 && cnt > sigma * tot) {
        out.add(x);
        break;
      }
    }
  }
  return out;
}

SetM random_set(const SpaceGrid& g, std::uint64_t seed, double density) {
  SetM E(g.points());
  for (int i = 0; i < g.points(); ++i)
    if (rng::uniform01(seed, 7, i) < density) E.add(i);
  return E;
}

}  // namespace

TEST_CASE("torus metric and measure basics") {
  auto g = torus8();
  CHECK(g->points() == 8);
  CHECK(g->distance(0, 1) == 1.0);
  CHECK(g->distance(0, 7) == 1.0);
  CHECK(g->distance(0, 4) == 4.0);
  CHECK(g->diameter() == 4.0);
  CHECK(g->min_positive_distance() == 1.0);
  CHECK(g->total_measure() == 8.0);

  // Open ball: radius 1.5 catches offsets -1..1, radius 4 misses the antipode.
  CHECK(g->ball_points(0, 1.5).count() == 3);
  CHECK(g->ball_points(0, 4.0).count() == 7);
  CHECK(g->ball_points(0, 4.5).count() == 8);
  CHECK(g->volume(0, 1.5) == 3.0);
  CHECK(g->volume(0, 4.0) == 7.0);
  CHECK(g->volume(0, 4.5) == 8.0);
  CHECK(g->volume(0, 0.5) == 1.0);

  // Ladder: half-integer radii 0.5 .. 4.5.
  CHECK(g->radius_ladder().size() == 9);
  CHECK(g->radius_ladder().front() == 0.5);
  CHECK(g->radius_ladder().back() == 4.5);
}

TEST_CASE("torus 2-d coordinates and wrap") {
  auto g = SpaceGrid::torus({4, 6}, 0.5);
  CHECK(g->points() == 24);
  const int a = g->index_of({0, 0});
  const int b = g->index_of({3, 5});
  CHECK(g->distance(a, b) == 0.5);  // wraps to offset (-1, -1)
  const int c = g->index_of({2, 3});
  CHECK(g->distance(a, c) == 1.5);  // offsets (2, 3), axis cap (2, 3) -> max 3 cells
  CHECK(g->coords_of(c) == std::vector<int>{2, 3});
  CHECK(g->ball_points(a, 0.75).count() == 9);
  CHECK(g->volume(a, 0.75) == doctest::Approx(9 * 0.25).epsilon(1e-15));
}

TEST_CASE("closed-form volume matches enumeration") {
  auto g2 = SpaceGrid::torus({6, 8}, 0.25);
  for (int x : {0, 7, 23, 40}) {
    for (double r : g2->radius_ladder()) {
      CHECK(g2->volume(x, r) == doctest::Approx(volume_oracle(*g2, x, r)).epsilon(1e-13));
      CHECK(g2->ball_points(x, r).count() ==
            static_cast<int>(volume_oracle(*g2, x, r) / g2->measure(0) + 0.5));
    }
  }
  auto k = kite_graph();
  for (int x = 0; x < k->points(); ++x)
    for (double r : k->radius_ladder())
      CHECK(k->volume(x, r) == doctest::Approx(volume_oracle(*k, x, r)).epsilon(1e-13));
}

TEST_CASE("doubling exponent stays near the dimension") {
  auto g1 = SpaceGrid::torus({64}, 1.0 / 64);
  CHECK(g1->doubling_exponent() == 1.0);  // lattice dimension is exact on tori
  const double n1 = doubling_exponent_estimate(*g1, g1->doubling_ladder());
  CHECK(n1 > 0.5);
  CHECK(n1 <= 1.5);

  auto g2 = SpaceGrid::torus({16, 16}, 1.0 / 16);
  CHECK(g2->doubling_exponent() == 2.0);
  const double n2 = doubling_exponent_estimate(*g2, g2->doubling_ladder());
  CHECK(n2 > 1.0);
  CHECK(n2 <= 2.5);

  auto p = path_graph(16);
  CHECK(p->doubling_exponent() <= 1.5);
  CHECK(p->doubling_exponent() > 0.5);
  CHECK(p->translation_defect() >= 0.0);

  auto g = SpaceGrid::torus({32}, 0.125);
  CHECK(g->translation_defect() == 0.0);
}

TEST_CASE("maximal extension matches worked example and oracle") {
  auto g = torus8();
  SetM E = SetM::from_indices(8, {0});

  // sigma = 0.4: only the point itself qualifies.
  SetM e4 = maximal_extension(*g, E, 0.4);
  CHECK(e4.indices() == std::vector<int>{0});

  // sigma = 0.3: the 3-cell ball around each neighbor holds fraction 1/3.
  SetM e3 = maximal_extension(*g, E, 0.3);
  CHECK(e3.indices() == std::vector<int>{0, 1, 7});

  CHECK(E.subset_of(e4));
  CHECK(e4.subset_of(e3));  // smaller sigma only grows the set

  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto t = SpaceGrid::torus({5, 7}, 1.0);
    SetM R = random_set(*t, seed, 0.3);
    if (R.empty()) R.add(3);
    for (double sigma : {0.25, 0.5, 0.75}) {
      SetM got = maximal_extension(*t, R, sigma);
      SetM want = maximal_oracle(*t, R, sigma);
      CHECK(got == want);
      CHECK(R.subset_of(got));
    }
    auto k = kite_graph();
    SetM Rk = random_set(*k, seed, 0.4);
    if (Rk.empty()) Rk.add(1);
    for (double sigma : {0.3, 0.5, 0.8}) {
      SetM got = maximal_extension(*k, Rk, sigma);
      SetM want = maximal_oracle(*k, Rk, sigma);
      CHECK(got == want);
    }
  }
}

TEST_CASE("maximal extension weak-type mass stays bounded") {
  auto g = SpaceGrid::torus({64}, 1.0 / 64);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SetM E = random_set(*g, seed, 0.1);
    if (E.empty()) continue;
    SetM ext = maximal_extension(*g, E, 0.5);
    double me = 0.0, mx = 0.0;
    for (int i = 0; i < 64; ++i) {
      if (E.contains(i)) me += g->measure(i);
      if (ext.contains(i)) mx += g->measure(i);
    }
    worst = std::max(worst, mx * 0.5 / me);
  }
  CHECK(worst > 0.0);
  CHECK(worst <= 10.0);  // measured weak (1,1) constant, generous cap
}

TEST_CASE("whitney decomposition invariants") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    auto g = SpaceGrid::torus({64}, 1.0 / 64);
    SetM E = random_set(*g, seed, 0.45);
    if (E.empty() || E.full()) continue;
    auto balls = whitney_decomposition(*g, E);
    REQUIRE(!balls.empty());

    Eigen::VectorXd delta;
    distance_to_set(*g, E.complement(), &delta, nullptr);

    SetM covered(g->points());
    for (const auto& b : balls) {
      CHECK(E.contains(b.center));
      CHECK(delta[b.center] == doctest::Approx(2.0 * b.radius).epsilon(1e-12));
      for (int i : g->ball_points(b.center, b.radius).indices()) {
        CHECK(E.contains(i));  // each ball sits inside E
        covered.add(i);
      }
    }
    CHECK(E.subset_of(covered));

    // Selection order guarantee: the first ball covering y is at least as
    // large as half the distance from y to the complement.
    for (int y : E.indices()) {
      for (const auto& b : balls) {
        if (g->distance(y, b.center) < b.radius) {
          CHECK(b.radius >= 0.5 * delta[y] - 1e-12);
          break;
        }
      }
    }

    CHECK(cover_overlap(*g, balls, 3.0) <= 12);
  }

  // Full set: one ball past the diameter.
  auto g = torus8();
  SetM full(8, true);
  auto balls = whitney_decomposition(*g, full);
  REQUIRE(balls.size() == 1);
  CHECK(g->ball_points(balls[0].center, balls[0].radius).count() == 8);

  CHECK(whitney_decomposition(*g, SetM(8)).empty());
}

TEST_CASE("whitney on a 2-d torus") {
  auto g = SpaceGrid::torus({16, 16}, 1.0 / 16);
  SetM E(g->points());
  for (int i = 0; i < g->points(); ++i) {
    auto c = g->coords_of(i);
    if (c[0] >= 2 && c[0] < 10 && c[1] >= 3 && c[1] < 9) E.add(i);
  }
  auto balls = whitney_decomposition(*g, E);
  REQUIRE(!balls.empty());
  SetM covered(g->points());
  for (const auto& b : balls)
    for (int i : g->ball_points(b.center, b.radius).indices()) {
      CHECK(E.contains(i));
      covered.add(i);
    }
  CHECK(E.subset_of(covered));
  CHECK(cover_overlap(*g, balls, 3.0) <= 30);
}

TEST_CASE("dyadic cubes partition and nest") {
  auto g = SpaceGrid::torus({16}, 1.0);
  auto lv2 = dyadic_cubes(*g, 2);
  CHECK(lv2.size() == 4);
  for (const auto& c : lv2) CHECK(c.size() == 4);

  auto lv3 = dyadic_cubes(*g, 3);
  CHECK(lv3.size() == 8);
  // Every finer cube sits inside exactly one coarser cube.
  for (const auto& fine : lv3) {
    int hits = 0;
    for (const auto& coarse : lv2) {
      bool inside = std::all_of(fine.begin(), fine.end(), [&](int p) {
        return std::find(coarse.begin(), coarse.end(), p) != coarse.end();
      });
      if (inside) ++hits;
    }
    CHECK(hits == 1);
  }

  auto g2 = SpaceGrid::torus({8, 8}, 1.0);
  auto cubes = dyadic_cubes(*g2, 1);
  CHECK(cubes.size() == 4);
  int total = 0;
  for (const auto& c : cubes) total += static_cast<int>(c.size());
  CHECK(total == 64);

  CHECK_THROWS_AS(dyadic_cubes(*SpaceGrid::torus({12}, 1.0), 1), std::invalid_argument);
  CHECK_THROWS_AS(dyadic_cubes(*SpaceGrid::torus({4, 8}, 1.0), 1), std::invalid_argument);
  CHECK_THROWS_AS(dyadic_cubes(*g, 5), std::invalid_argument);
}

TEST_CASE("distance transform is exact") {
  auto g = SpaceGrid::torus({9, 7}, 0.5);
  SetM S = SetM::from_indices(g->points(), {0, 17, 40});
  Eigen::VectorXd dist;
  std::vector<int> wit;
  distance_to_set(*g, S, &dist, &wit);
  for (int y = 0; y < g->points(); ++y) {
    double best = 1e300;
    for (int s : S.indices()) best = std::min(best, g->distance(y, s));
    CHECK(dist[y] == doctest::Approx(best).epsilon(1e-13));
    CHECK(S.contains(wit[y]));
    CHECK(g->distance(y, wit[y]) == doctest::Approx(best).epsilon(1e-13));
  }

  auto k = kite_graph();
  SetM Sk = SetM::from_indices(5, {4});
  distance_to_set(*k, Sk, &dist, &wit);
  CHECK(dist[0] == doctest::Approx(3.0));  // 0-1 (1.0) + 1-3 (1.0) + 3-4 (1.0)
  CHECK(dist[2] == doctest::Approx(2.5));
  CHECK(wit[0] == 4);
}

TEST_CASE("graph construction rejects bad input") {
  CHECK_THROWS_AS(SpaceGrid::graph(3, {{0, 1, 1.0}}, Eigen::VectorXd::Ones(3)),
                  std::invalid_argument);  // disconnected
  CHECK_THROWS_AS(SpaceGrid::graph(2, {{0, 1, -1.0}}, Eigen::VectorXd::Ones(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid::graph(2, {{0, 1, 1.0}}, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid::torus({1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SpaceGrid::torus({8}, 0.0), std::invalid_argument);
}

TEST_CASE("set operations") {
  SetM a = SetM::from_indices(6, {0, 2, 4});
  SetM b = SetM::from_indices(6, {2, 3});
  CHECK(a.unite(b).indices() == std::vector<int>{0, 2, 3, 4});
  CHECK(a.intersect(b).indices() == std::vector<int>{2});
  CHECK(a.complement().indices() == std::vector<int>{1, 3, 5});
  CHECK(b.subset_of(a.unite(b)));
  CHECK(!b.subset_of(a));
  CHECK(a.count() == 3);
  CHECK(!a.empty());
  CHECK(SetM(4).empty());
  CHECK(SetM(4, true).full());
}

TEST_CASE("space descriptions") {
  CHECK(torus8()->description() == "torus-8");
  CHECK(SpaceGrid::torus({16, 16}, 1.0)->description() == "torus-16x16");
  CHECK(kite_graph()->description() == "graph-5");
}
