#include "tentlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "box_sums.hpp"

namespace tentlab {

namespace {

// Per-axis halfwidth in cells of the open ball of radius r: the largest m
// with m * cell < r.  -1 encodes the empty ball.
int ball_halfwidth(double r, double cell) {
  if (r <= 0.0) return -1;
  return static_cast<int>(std::ceil(r / cell)) - 1;
}

}  // namespace

std::shared_ptr<const SpaceGrid> SpaceGrid::torus(std::vector<int> sides, double cell) {
  if (sides.empty()) throw std::invalid_argument("torus: need at least one axis");
  if (cell <= 0.0) throw std::invalid_argument("torus: cell width must be positive");
  std::int64_t n = 1;
  for (int s : sides) {
    if (s < 2) throw std::invalid_argument("torus: every side needs at least two cells");
    n *= s;
    if (n > (std::int64_t(1) << 26)) throw std::invalid_argument("torus: too many points");
  }
  auto g = std::shared_ptr<SpaceGrid>(new SpaceGrid());
  g->kind_ = Kind::Torus;
  g->sides_ = std::move(sides);
  g->cell_ = cell;
  g->npoints_ = static_cast<int>(n);
  const int d = static_cast<int>(g->sides_.size());
  g->strides_.assign(d, 1);
  for (int a = d - 2; a >= 0; --a) g->strides_[a] = g->strides_[a + 1] * g->sides_[a + 1];
  const double mu = std::pow(cell, d);
  g->measures_ = Eigen::VectorXd::Constant(g->npoints_, mu);
  g->total_measure_ = mu * static_cast<double>(n);
  int kmax = 0;
  for (int s : g->sides_) kmax = std::max(kmax, s / 2);
  g->diameter_ = cell * kmax;
  g->min_dist_ = cell;
  // Half-integer multiples of the cell width from cell/2 to diameter + cell/2
  // realize every distinct ball, boundary cases on both sides included.
  for (int twice = 1; twice <= 2 * kmax + 1; ++twice)
    g->radius_ladder_.push_back(0.5 * cell * twice);
  g->doubling_exp_ = static_cast<double>(d);
  g->translation_defect_ = 0.0;
  return g;
}

std::shared_ptr<const SpaceGrid> SpaceGrid::graph(int nvertices, std::vector<GraphEdge> edges,
                                                  Eigen::VectorXd measures) {
  if (nvertices < 1 || nvertices > 4096)
    throw std::invalid_argument("graph: vertex count must be in [1, 4096]");
  if (measures.size() != nvertices || (measures.array() <= 0.0).any())
    throw std::invalid_argument("graph: need one positive measure per vertex");
  std::vector<std::vector<std::pair<int, double>>> adj(nvertices);
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= nvertices || e.v < 0 || e.v >= nvertices || e.u == e.v)
      throw std::invalid_argument("graph: bad edge endpoints");
    if (e.length <= 0.0) throw std::invalid_argument("graph: edge lengths must be positive");
    adj[e.u].push_back({e.v, e.length});
    adj[e.v].push_back({e.u, e.length});
  }
  auto g = std::shared_ptr<SpaceGrid>(new SpaceGrid());
  g->kind_ = Kind::Graph;
  g->npoints_ = nvertices;
  g->edges_ = std::move(edges);
  g->measures_ = std::move(measures);
  g->total_measure_ = g->measures_.sum();
  g->dist_.resize(nvertices, nvertices);

  const double inf = std::numeric_limits<double>::infinity();
  using Item = std::pair<double, int>;
  for (int src = 0; src < nvertices; ++src) {
    Eigen::VectorXd dist = Eigen::VectorXd::Constant(nvertices, inf);
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [dv, v] = pq.top();
      pq.pop();
      if (dv > dist[v]) continue;
      for (auto [w, len] : adj[v]) {
        if (dv + len < dist[w]) {
          dist[w] = dv + len;
          pq.push({dist[w], w});
        }
      }
    }
    g->dist_.row(src) = dist;
  }
  if (!g->dist_.allFinite()) throw std::invalid_argument("graph: must be connected");

  g->diameter_ = g->dist_.maxCoeff();
  double mind = inf;
  for (int i = 0; i < nvertices; ++i)
    for (int j = i + 1; j < nvertices; ++j) mind = std::min(mind, g->dist_(i, j));
  g->min_dist_ = nvertices > 1 ? mind : 1.0;

  // Sorted unique distances, merging float twins.
  std::vector<double> ds;
  for (int i = 0; i < nvertices; ++i)
    for (int j = i + 1; j < nvertices; ++j) ds.push_back(g->dist_(i, j));
  std::sort(ds.begin(), ds.end());
  std::vector<double> uniq;
  for (double v : ds)
    if (uniq.empty() || v - uniq.back() > 1e-12 * std::max(1.0, g->diameter_)) uniq.push_back(v);
  if (!uniq.empty()) {
    g->radius_ladder_.push_back(uniq.front() / 2);
    for (size_t k = 0; k < uniq.size(); ++k) {
      g->radius_ladder_.push_back(uniq[k]);
      if (k + 1 < uniq.size()) g->radius_ladder_.push_back(0.5 * (uniq[k] + uniq[k + 1]));
    }
    g->radius_ladder_.push_back(uniq.back() + uniq.front() / 2);
  } else {
    g->radius_ladder_.push_back(1.0);
  }

  // Per vertex: all vertices by increasing distance, with cumulative measure.
  g->by_distance_.resize(nvertices);
  g->cum_measure_.resize(nvertices);
  for (int i = 0; i < nvertices; ++i) {
    auto& ord = g->by_distance_[i];
    ord.resize(nvertices);
    std::iota(ord.begin(), ord.end(), 0);
    const auto row = g->dist_.row(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      if (row[a] != row[b]) return row[a] < row[b];
      return a < b;
    });
    auto& cum = g->cum_measure_[i];
    cum.resize(nvertices);
    double s = 0.0;
    for (int k = 0; k < nvertices; ++k) {
      s += g->measures_[ord[k]];
      cum[k] = s;
    }
  }
  return g;
}

int SpaceGrid::dims() const {
  if (!is_torus()) throw std::logic_error("dims: torus only");
  return static_cast<int>(sides_.size());
}

const std::vector<int>& SpaceGrid::sides() const {
  if (!is_torus()) throw std::logic_error("sides: torus only");
  return sides_;
}

double SpaceGrid::cell() const {
  if (!is_torus()) throw std::logic_error("cell: torus only");
  return cell_;
}

int SpaceGrid::index_of(const std::vector<int>& coords) const {
  const int d = dims();
  if (static_cast<int>(coords.size()) != d) throw std::invalid_argument("index_of: wrong arity");
  int idx = 0;
  for (int a = 0; a < d; ++a) {
    int c = coords[a] % sides_[a];
    if (c < 0) c += sides_[a];
    idx += c * strides_[a];
  }
  return idx;
}

std::vector<int> SpaceGrid::coords_of(int idx) const {
  const int d = dims();
  std::vector<int> out(d);
  for (int a = 0; a < d; ++a) out[a] = (idx / strides_[a]) % sides_[a];
  return out;
}

const std::vector<SpaceGrid::GraphEdge>& SpaceGrid::edges() const {
  if (is_torus()) throw std::logic_error("edges: graph only");
  return edges_;
}

double SpaceGrid::distance(int i, int j) const {
  if (is_torus()) {
    int best = 0;
    for (size_t a = 0; a < sides_.size(); ++a) {
      int diff = (i / strides_[a]) % sides_[a] - (j / strides_[a]) % sides_[a];
      if (diff < 0) diff = -diff;
      best = std::max(best, std::min(diff, sides_[a] - diff));
    }
    return cell_ * best;
  }
  return dist_(i, j);
}

SetM SpaceGrid::ball_points(int center, double r) const {
  SetM out(npoints_);
  if (is_torus()) {
    const int m = ball_halfwidth(r, cell_);
    if (m < 0) return out;
    std::vector<int> hw(sides_.size(), m);
    detail::for_each_box_point(sides_, strides_, coords_of(center), hw,
                               [&](int idx) { out.add(idx); });
    return out;
  }
  for (int j = 0; j < npoints_; ++j)
    if (dist_(center, j) < r) out.add(j);
  return out;
}

double SpaceGrid::volume(int center, double r) const {
  if (is_torus()) {
    const int m = ball_halfwidth(r, cell_);
    if (m < 0) return 0.0;
    double cells = 1.0;
    for (int s : sides_) cells *= std::min(2 * m + 1, s);
    return cells * measures_[0];
  }
  const auto& ord = by_distance_[center];
  const auto row = dist_.row(center);
  // First position whose distance is >= r.
  auto it = std::partition_point(ord.begin(), ord.end(), [&](int v) { return row[v] < r; });
  const int k = static_cast<int>(it - ord.begin());
  return k == 0 ? 0.0 : cum_measure_[center][k - 1];
}

std::vector<double> SpaceGrid::doubling_ladder() const {
  std::vector<double> out;
  if (is_torus()) {
    // Midpoint radii h(k + 1/2) with both r and 2r short of wrapping: the
    // k = 0 step probes below the lattice scale and is skipped.
    int smin = sides_[0];
    for (int s : sides_) smin = std::min(smin, s);
    const int kcap = std::max(1, (smin - 1) / 4);
    for (int k = 1; k <= kcap; ++k) out.push_back(cell_ * (k + 0.5));
    return out;
  }
  for (double r : radius_ladder_)
    if (r > min_dist_ && 2.0 * r <= 0.5 * diameter_) out.push_back(r);
  if (out.empty()) out.push_back(0.75 * min_dist_ + 0.25 * diameter_);
  return out;
}

double SpaceGrid::doubling_exponent() const {
  if (doubling_exp_ < 0.0) doubling_exp_ = doubling_exponent_estimate(*this, doubling_ladder());
  return doubling_exp_;
}

double SpaceGrid::translation_defect() const {
  if (translation_defect_ < 0.0)
    translation_defect_ = translation_defect_estimate(*this, doubling_ladder());
  return translation_defect_;
}

std::string SpaceGrid::description() const {
  if (is_torus()) {
    std::string s = "torus-";
    for (size_t a = 0; a < sides_.size(); ++a) {
      if (a) s += "x";
      s += std::to_string(sides_[a]);
    }
    return s;
  }
  return "graph-" + std::to_string(npoints_);
}

double doubling_exponent_estimate(const SpaceGrid& space, const std::vector<double>& ladder) {
  double worst = 0.0;
  for (int x = 0; x < space.points(); ++x) {
    for (double r : ladder) {
      const double v1 = space.volume(x, r);
      const double v2 = space.volume(x, 2.0 * r);
      if (v1 > 0.0) worst = std::max(worst, std::log2(v2 / v1));
    }
  }
  return worst;
}

double translation_defect_estimate(const SpaceGrid& space, const std::vector<double>& ladder) {
  if (space.is_torus()) return 0.0;  // volumes are center-independent
  double worst = 0.0;
  for (int x = 0; x < space.points(); ++x) {
    for (int y = 0; y < space.points(); ++y) {
      if (x == y) continue;
      const double d = space.distance(x, y);
      for (double r : ladder) {
        const double vx = space.volume(x, r);
        const double vy = space.volume(y, r);
        if (vx > vy && vy > 0.0) worst = std::max(worst, std::log(vx / vy) / std::log1p(d / r));
      }
    }
  }
  return worst;
}

SetM maximal_extension(const SpaceGrid& space, const SetM& E, double sigma) {
  if (E.size() != space.points()) throw std::invalid_argument("maximal_extension: size mismatch");
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("maximal_extension: sigma must be in (0, 1)");
  const int n = space.points();
  SetM out(n);
  if (E.empty()) return out;

  if (space.is_torus()) {
    std::vector<std::int64_t> field(n, 0);
    for (int i = 0; i < n; ++i) field[i] = E.contains(i) ? 1 : 0;
    detail::TorusPrefix<std::int64_t> pre(space.sides(), field);
    const int d = space.dims();
    // Distinct halfwidths m = 0 .. kmax realize every centered ball.
    int kmax = 0;
    for (int s : space.sides()) kmax = std::max(kmax, s / 2);
    std::vector<int> hw(d);
    for (int x = 0; x < n; ++x) {
      const auto cx = space.coords_of(x);
      for (int m = 0; m <= kmax && !out.contains(x); ++m) {
        std::fill(hw.begin(), hw.end(), m);
        double cells = 1.0;
        for (int s : space.sides()) cells *= std::min(2 * m + 1, s);
        const double cnt = static_cast<double>(pre.box(cx, hw));
        if (cnt > sigma * cells) out.add(x);
      }
    }
    return out;
  }

  std::vector<int> ord(n);
  for (int x = 0; x < n; ++x) {
    // Walk vertices by increasing distance; every centered ball is a prefix
    // ending just before a distance jump.
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      const double da = space.distance(x, a), db = space.distance(x, b);
      if (da != db) return da < db;
      return a < b;
    });
    double cnt = 0.0, tot = 0.0;
    double prev = -1.0;
    for (int k = 0; k < n && !out.contains(x); ++k) {
      const int v = ord[k];
      const double dv = space.distance(x, v);
      if (k > 0 && dv > prev && cnt > sigma * tot) out.add(x);
      prev = dv;
      cnt += E.contains(v) ? space.measure(v) : 0.0;
      tot += space.measure(v);
    }
    if (!out.contains(x) && cnt > sigma * tot) out.add(x);
  }
  return out;
}

void distance_to_set(const SpaceGrid& space, const SetM& S, Eigen::VectorXd* dist,
                     std::vector<int>* witness) {
  if (S.size() != space.points()) throw std::invalid_argument("distance_to_set: size mismatch");
  if (S.empty()) throw std::invalid_argument("distance_to_set: set must be nonempty");
  const int n = space.points();
  const double inf = std::numeric_limits<double>::infinity();
  dist->setConstant(n, inf);
  if (witness) witness->assign(n, -1);

  if (space.is_torus()) {
    // Multi-source BFS over king moves; step count times the cell width is
    // the exact wrap-around l-infinity distance.
    const int d = space.dims();
    const auto& sides = space.sides();
    std::vector<std::vector<int>> offsets;
    {
      std::vector<int> off(d, -1);
      while (true) {
        bool allzero = true;
        for (int v : off) allzero = allzero && v == 0;
        if (!allzero) offsets.push_back(off);
        int a = d - 1;
        while (a >= 0) {
          if (++off[a] <= 1) break;
          off[a] = -1;
          --a;
        }
        if (a < 0) break;
      }
    }
    std::vector<int> frontier, next;
    for (int i = 0; i < n; ++i) {
      if (S.contains(i)) {
        (*dist)[i] = 0.0;
        if (witness) (*witness)[i] = i;
        frontier.push_back(i);
      }
    }
    double level = 0.0;
    std::vector<int> coords(d);
    while (!frontier.empty()) {
      level += space.cell();
      next.clear();
      for (int v : frontier) {
        const auto cv = space.coords_of(v);
        for (const auto& off : offsets) {
          for (int a = 0; a < d; ++a) {
            int c = cv[a] + off[a];
            if (c < 0) c += sides[a];
            if (c >= sides[a]) c -= sides[a];
            coords[a] = c;
          }
          const int w = space.index_of(coords);
          if ((*dist)[w] == inf) {
            (*dist)[w] = level;
            if (witness) (*witness)[w] = (*witness)[v];
            next.push_back(w);
          }
        }
      }
      frontier.swap(next);
    }
    return;
  }

  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
  for (int i = 0; i < n; ++i) {
    if (S.contains(i)) {
      (*dist)[i] = 0.0;
      if (witness) (*witness)[i] = i;
      pq.push({0.0, i});
    }
  }
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : space.edges()) {
    adj[e.u].push_back({e.v, e.length});
    adj[e.v].push_back({e.u, e.length});
  }
  while (!pq.empty()) {
    auto [dv, v] = pq.top();
    pq.pop();
    if (dv > (*dist)[v]) continue;
    for (auto [w, len] : adj[v]) {
      if (dv + len < (*dist)[w]) {
        (*dist)[w] = dv + len;
        if (witness) (*witness)[w] = (*witness)[v];
        pq.push({(*dist)[w], w});
      }
    }
  }
}

std::vector<Ball> whitney_decomposition(const SpaceGrid& space, const SetM& E) {
  if (E.size() != space.points()) throw std::invalid_argument("whitney: size mismatch");
  std::vector<Ball> balls;
  if (E.empty()) return balls;
  if (E.full()) {
    // No complement to stand off from: one ball strictly beyond the diameter
    // covers everything.
    balls.push_back({0, space.diameter() + 0.5 * space.min_positive_distance()});
    return balls;
  }
  Eigen::VectorXd delta;
  distance_to_set(space, E.complement(), &delta, nullptr);
  std::vector<int> order = E.indices();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (delta[a] != delta[b]) return delta[a] > delta[b];
    return a < b;
  });
  std::vector<std::uint8_t> covered(space.points(), 0);
  for (int c : order) {
    if (covered[c]) continue;
    const double r = 0.5 * delta[c];
    balls.push_back({c, r});
    for (int i : space.ball_points(c, r).indices()) covered[i] = 1;
  }
  return balls;
}

int cover_overlap(const SpaceGrid& space, const std::vector<Ball>& balls, double factor) {
  int worst = 0;
  for (int x = 0; x < space.points(); ++x) {
    int c = 0;
    for (const auto& b : balls)
      if (space.distance(x, b.center) < factor * b.radius) ++c;
    worst = std::max(worst, c);
  }
  return worst;
}

std::vector<std::vector<int>> dyadic_cubes(const SpaceGrid& space, int level) {
  if (!space.is_torus()) throw std::invalid_argument("dyadic_cubes: torus only");
  const int d = space.dims();
  const int s = space.sides()[0];
  for (int sa : space.sides())
    if (sa != s) throw std::invalid_argument("dyadic_cubes: sides must be equal");
  if (s & (s - 1)) throw std::invalid_argument("dyadic_cubes: side must be a power of two");
  if (level < 0 || (1 << level) > s) throw std::invalid_argument("dyadic_cubes: bad level");
  const int side = s >> level;       // cells per cube edge
  const int percube = 1 << level;    // cubes per axis
  std::int64_t ncubes = 1;
  for (int a = 0; a < d; ++a) ncubes *= percube;
  std::vector<std::vector<int>> cubes(static_cast<size_t>(ncubes));
  for (int i = 0; i < space.points(); ++i) {
    const auto c = space.coords_of(i);
    int q = 0;
    for (int a = 0; a < d; ++a) q = q * percube + c[a] / side;
    cubes[q].push_back(i);
  }
  return cubes;
}

}  // namespace tentlab
