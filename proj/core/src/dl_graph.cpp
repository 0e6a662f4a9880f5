#include "dlharmonic/dl_graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "dlharmonic/errors.hpp"

namespace dlh {

namespace {

void require_group(int q, int r) {
  if (q != r) {
    throw ColorMismatch("lamplighter group law needs q == r (got q=" + std::to_string(q) + ", r=" +
                        std::to_string(r) + ")");
  }
}

}  // namespace

void validate_vertex(const DLVertex& x, int q, int r) {
  if (q < 2 || r < 2) throw InvalidInput("branchings q and r must be at least 2");
  for (const auto& [code, state] : x.lamps) {
    const int bound = code <= x.pos ? q : r;
    if (state >= static_cast<Symbol>(bound)) {
      throw InvalidInput("lamps." + std::to_string(code) + ": state " + std::to_string(state) +
                         (code <= x.pos ? " exceeds green range q=" : " exceeds red range r=") +
                         std::to_string(bound));
    }
  }
}

TreeVertex project(const DLVertex& x, Side side) {
  std::map<std::int64_t, Symbol> word;
  if (side == Side::One) {
    // word(i) = eta(k - i - 1/2), i.e. code k - i
    for (auto it = x.lamps.begin(); it != x.lamps.end() && it->first <= x.pos; ++it) {
      word[x.pos - it->first] = it->second;
    }
    return TreeVertex(x.pos, word);
  }
  // word(i) = eta(k + i + 1/2), i.e. code k + 1 + i
  for (auto it = x.lamps.upper_bound(x.pos); it != x.lamps.end(); ++it) {
    word[it->first - x.pos - 1] = it->second;
  }
  return TreeVertex(-x.pos, word);
}

DLVertex compose(const TreeVertex& x1, const TreeVertex& x2) {
  if (x1.hor() + x2.hor() != 0) {
    throw HorocycleMismatch("hor(x1) + hor(x2) = " + std::to_string(x1.hor() + x2.hor()) + ", expected 0");
  }
  DLVertex x;
  x.pos = x1.hor();
  for (const auto& [i, s] : x1.sparse_word()) x.lamps[x.pos - i] = s;
  for (const auto& [i, s] : x2.sparse_word()) x.lamps[x.pos + 1 + i] = s;
  return x;
}

std::vector<DLVertex> neighbors(const DLVertex& x, int q, int r) {
  std::vector<DLVertex> out;
  out.reserve(static_cast<std::size_t>(q + r));
  // right move across edge [k, k+1]: lamp at code k+1 becomes green
  for (int s = 0; s < q; ++s) {
    DLVertex y = x;
    y.pos = x.pos + 1;
    y.set_lamp(x.pos + 1, static_cast<Symbol>(s));
    out.push_back(std::move(y));
  }
  // left move across edge [k-1, k]: lamp at code k becomes red
  for (int s = 0; s < r; ++s) {
    DLVertex y = x;
    y.pos = x.pos - 1;
    y.set_lamp(x.pos, static_cast<Symbol>(s));
    out.push_back(std::move(y));
  }
  return out;
}

FlagData flags(const DLVertex& x, const DLVertex& y) {
  FlagData f;
  f.fl1 = std::min(x.pos, y.pos);
  f.fl2 = std::max(x.pos, y.pos);
  auto visit = [&](std::int64_t code) {
    f.fl1 = std::min(f.fl1, code - 1);
    f.fl2 = std::max(f.fl2, code);
  };
  for (const auto& [code, s] : x.lamps) {
    if (y.lamp(code) != s) visit(code);
  }
  for (const auto& [code, s] : y.lamps) {
    if (x.lamp(code) != s) visit(code);
  }
  f.up1 = x.pos - f.fl1;
  f.up2 = f.fl2 - x.pos;
  return f;
}

UpQuadruple up_quadruple(const DLVertex& x, const DLVertex& y) {
  const TreeVertex x1 = project(x, Side::One), y1 = project(y, Side::One);
  const TreeVertex x2 = project(x, Side::Two), y2 = project(y, Side::Two);
  return {up(x1, y1), up(y1, x1), up(x2, y2), up(y2, x2)};
}

std::int64_t dl_distance(const DLVertex& x, const DLVertex& y) {
  const TreeVertex x1 = project(x, Side::One), y1 = project(y, Side::One);
  const TreeVertex x2 = project(x, Side::Two), y2 = project(y, Side::Two);
  return tree_distance(x1, y1) + tree_distance(x2, y2) - std::abs(x1.hor() - y1.hor());
}

DLVertex group_multiply(const DLVertex& x, const DLVertex& y, int q, int r) {
  require_group(q, r);
  DLVertex out = x;
  out.pos = x.pos + y.pos;
  for (const auto& [code, s] : y.lamps) {
    const std::int64_t c = code + x.pos;  // T_k shifts code m to m + k
    out.set_lamp(c, static_cast<Symbol>((out.lamp(c) + s) % static_cast<Symbol>(q)));
  }
  return out;
}

DLVertex group_inverse(const DLVertex& x, int q, int r) {
  require_group(q, r);
  // (eta, k)^{-1} = (-T_{-k} eta, -k)
  DLVertex out;
  out.pos = -x.pos;
  for (const auto& [code, s] : x.lamps) {
    out.set_lamp(code - x.pos, static_cast<Symbol>((static_cast<Symbol>(q) - s) % static_cast<Symbol>(q)));
  }
  return out;
}

TreeVertex induced_tree_action(const DLVertex& g, const TreeVertex& v, Side side, int q, int r) {
  require_group(q, r);
  const DLVertex lift = side == Side::One ? compose(v, TreeVertex(-v.hor(), {})) : compose(TreeVertex(-v.hor(), {}), v);
  return project(group_multiply(g, lift, q, r), side);
}

BoundaryPoint induced_boundary_action(const DLVertex& g, const BoundaryPoint& xi, Side side, int q, int r) {
  require_group(q, r);
  if (xi.continuation == Continuation::Unknown) {
    return {induced_tree_action(g, xi.anchor, side, q, r), Continuation::Unknown};
  }
  // Descend along the zero continuation until the lamps of g no longer touch
  // the symbols below the anchor.
  std::int64_t depth = 0;
  if (!g.lamps.empty()) {
    const std::int64_t lo = g.lamps.begin()->first;
    const std::int64_t hi = g.lamps.rbegin()->first;
    if (side == Side::One) {
      // symbol i of a tree-1 vertex at level h meets code h + pos(g) - i
      depth = std::max<std::int64_t>(0, hi - g.pos - xi.anchor.hor() + 1);
    } else {
      // symbol i of a tree-2 vertex at level h meets code pos(g) - h + 1 + i
      depth = std::max<std::int64_t>(0, g.pos - lo + 2 - xi.anchor.hor());
    }
  }
  return {induced_tree_action(g, geodesic_toward(xi, depth), side, q, r), Continuation::Zero};
}

}  // namespace dlh
