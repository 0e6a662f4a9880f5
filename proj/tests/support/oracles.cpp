#include "oracles.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace oracle {

std::vector<TreeVertex> tree_neighbors(const TreeVertex& v, int q) {
  std::vector<TreeVertex> out{v.predecessor()};
  for (int s = 0; s < q; ++s) out.push_back(v.child(static_cast<dlh::Symbol>(s)));
  return out;
}

std::vector<DLVertex> dl_neighbors(const DLVertex& x, int q, int r) {
  std::vector<DLVertex> out;
  for (int s = 0; s < q; ++s) {
    DLVertex y = x;
    y.pos = x.pos + 1;
    y.set_lamp(x.pos + 1, static_cast<dlh::Symbol>(s));
    out.push_back(y);
  }
  for (int s = 0; s < r; ++s) {
    DLVertex y = x;
    y.pos = x.pos - 1;
    y.set_lamp(x.pos, static_cast<dlh::Symbol>(s));
    out.push_back(y);
  }
  return out;
}

namespace {

template <class V, class Next>
std::map<V, int> bfs(const V& src, int radius, Next next) {
  std::map<V, int> dist{{src, 0}};
  std::deque<V> frontier{src};
  while (!frontier.empty()) {
    V v = frontier.front();
    frontier.pop_front();
    const int d = dist[v];
    if (d == radius) continue;
    for (const auto& u : next(v)) {
      if (dist.emplace(u, d + 1).second) frontier.push_back(u);
    }
  }
  return dist;
}

}  // namespace

std::map<TreeVertex, int> tree_bfs(const TreeVertex& src, int q, int radius) {
  return bfs(src, radius, [q](const TreeVertex& v) { return tree_neighbors(v, q); });
}

std::map<DLVertex, int> dl_bfs(const DLVertex& src, int q, int r, int radius) {
  return bfs(src, radius, [q, r](const DLVertex& v) { return dl_neighbors(v, q, r); });
}

std::int64_t tree_up(const TreeVertex& x, const TreeVertex& y) {
  TreeVertex a = x;
  TreeVertex b = y;
  while (a.hor() > b.hor()) a = a.predecessor();
  while (b.hor() > a.hor()) b = b.predecessor();
  while (!(a == b)) {
    a = a.predecessor();
    b = b.predecessor();
  }
  return x.hor() - a.hor();
}

dlh::UpQuadruple dl_quadruple(const DLVertex& x, const DLVertex& y) {
  using dlh::Side;
  const auto x1 = dlh::project(x, Side::One), y1 = dlh::project(y, Side::One);
  const auto x2 = dlh::project(x, Side::Two), y2 = dlh::project(y, Side::Two);
  return {tree_up(x1, y1), tree_up(y1, x1), tree_up(x2, y2), tree_up(y2, x2)};
}

std::map<TreeVertex, double> tree_distribution(const dlh::TreeWalk& w, int n) {
  const int reach = static_cast<int>(w.range());
  std::map<TreeVertex, double> dist{{TreeVertex{}, 1.0}};
  for (int step = 0; step < n; ++step) {
    std::map<TreeVertex, double> next;
    for (const auto& [x, px] : dist) {
      const auto ball = tree_bfs(x, w.q(), reach);
      std::map<dlh::UpPair, std::vector<TreeVertex>> classes;
      for (const auto& [y, d] : ball) classes[{tree_up(x, y), tree_up(y, x)}].push_back(y);
      for (const auto& [c, mass] : w.mass()) {
        const auto& members = classes.at(c);
        for (const auto& y : members) next[y] += px * mass / static_cast<double>(members.size());
      }
    }
    dist = std::move(next);
  }
  return dist;
}

std::map<DLVertex, double> dl_distribution(const dlh::QuadrupleMeasure& w, int n) {
  const int reach = static_cast<int>(w.range());
  std::map<DLVertex, double> dist{{DLVertex{}, 1.0}};
  for (int step = 0; step < n; ++step) {
    std::map<DLVertex, double> next;
    for (const auto& [x, px] : dist) {
      for (const auto& [y, d] : dl_bfs(x, w.q(), w.r(), reach)) {
        const auto it = w.per_vertex().find(dl_quadruple(x, y));
        if (it != w.per_vertex().end()) next[y] += px * it->second;
      }
    }
    dist = std::move(next);
  }
  return dist;
}

std::vector<double> nearest_neighbour_coefficients(int q, double p_down, int max_j, int steps, int cutoff) {
  const int amax = max_j + 60;
  const auto idx = [cutoff](int a, int b) { return static_cast<std::size_t>(a) * (cutoff + 1) + b; };
  std::vector<double> m(static_cast<std::size_t>(amax + 1) * (cutoff + 1), 0.0);
  std::vector<double> escaped(amax + 1, 0.0);
  m[idx(0, 0)] = 1.0;
  const double p_up = 1.0 - p_down;
  for (int n = 0; n < steps; ++n) {
    std::vector<double> next(m.size(), 0.0);
    for (int a = 0; a <= amax; ++a) {
      for (int b = 0; b < cutoff; ++b) {
        const double v = m[idx(a, b)];
        if (v == 0.0) continue;
        if (b > 0) {
          next[idx(a, b - 1)] += v * p_up;
          next[idx(a, b + 1)] += v * p_down;
        } else {
          next[idx(std::min(a + 1, amax), 0)] += v * p_up;
          if (a == 0) {
            next[idx(0, 1)] += v * p_down;
          } else {
            next[idx(a - 1, 0)] += v * p_down / q;
            next[idx(a, 1)] += v * p_down * (q - 1) / q;
          }
        }
      }
    }
    for (int a = 0; a <= amax; ++a) {
      escaped[a] += next[idx(a, cutoff)];
      next[idx(a, cutoff)] = 0.0;
    }
    m = std::move(next);
  }
  std::vector<double> out(max_j + 1, 0.0);
  for (int a = 0; a <= max_j; ++a) {
    out[a] = escaped[a];
    for (int b = 0; b <= cutoff; ++b) out[a] += m[idx(a, b)];
  }
  return out;
}

double bisect_phi_root(const std::map<std::int64_t, double>& mu, double lo, double hi) {
  const auto f = [&](double c) {
    double s = 0.0;
    for (const auto& [n, p] : mu) s += p * std::exp(c * static_cast<double>(n));
    return s - 1.0;
  };
  double flo = f(lo);
  if (flo * f(hi) > 0) throw std::invalid_argument("bisect_phi_root: no sign change");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
