#include "dlharmonic/tree_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dlharmonic/errors.hpp"

namespace dlh {

namespace {

void strip_leading_zeros(std::vector<Symbol>& digits) {
  auto first = std::find_if(digits.begin(), digits.end(), [](Symbol s) { return s != 0; });
  digits.erase(digits.begin(), first);
}

// Level carried by digits()[0].
Level front_level(const TreeVertex& v) {
  return v.hor() - static_cast<Level>(v.word_length()) + 1;
}

}  // namespace

TreeVertex::TreeVertex(Level hor, const std::map<std::int64_t, Symbol>& word) : hor_(hor) {
  std::int64_t top = -1;
  for (const auto& [m, s] : word) {
    if (m < 0) throw InvalidInput("word index " + std::to_string(m) + " is negative");
    if (s != 0) top = std::max(top, m);
  }
  digits_.assign(static_cast<std::size_t>(top + 1), 0);
  for (const auto& [m, s] : word) {
    if (s != 0) digits_[static_cast<std::size_t>(top - m)] = s;
  }
}

TreeVertex TreeVertex::from_digits(Level hor, std::vector<Symbol> digits) {
  strip_leading_zeros(digits);
  TreeVertex v;
  v.hor_ = hor;
  v.digits_ = std::move(digits);
  return v;
}

Symbol TreeVertex::symbol(std::int64_t m) const noexcept {
  const auto n = static_cast<std::int64_t>(digits_.size());
  if (m < 0 || m >= n) return 0;
  return digits_[static_cast<std::size_t>(n - 1 - m)];
}

Symbol TreeVertex::level_symbol(Level j) const noexcept { return symbol(hor_ - j); }

std::map<std::int64_t, Symbol> TreeVertex::sparse_word() const {
  std::map<std::int64_t, Symbol> out;
  const auto n = static_cast<std::int64_t>(digits_.size());
  for (std::int64_t i = 0; i < n; ++i) {
    if (digits_[static_cast<std::size_t>(i)] != 0) out[n - 1 - i] = digits_[static_cast<std::size_t>(i)];
  }
  return out;
}

void TreeVertex::move_up() noexcept {
  if (!digits_.empty()) digits_.pop_back();
  --hor_;
}

void TreeVertex::move_down(Symbol s) {
  if (!digits_.empty() || s != 0) digits_.push_back(s);
  ++hor_;
}

TreeVertex TreeVertex::predecessor() const {
  TreeVertex v = *this;
  v.move_up();
  return v;
}

TreeVertex TreeVertex::child(Symbol s) const {
  TreeVertex v = *this;
  v.move_down(s);
  return v;
}

TreeVertex TreeVertex::ancestor_at(Level level) const {
  if (level > hor_) throw std::invalid_argument("ancestor_at: level below the vertex");
  TreeVertex v;
  v.hor_ = level;
  const Level keep = level - front_level(*this) + 1;
  if (keep > 0) {
    v.digits_.assign(digits_.begin(), digits_.begin() + keep);
  }
  return v;
}

std::size_t TreeVertex::hash() const noexcept {
  std::size_t h = std::hash<Level>{}(hor_);
  for (Symbol s : digits_) {
    h ^= std::hash<Symbol>{}(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

void validate_vertex(const TreeVertex& v, int q) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
  for (Symbol s : v.digits()) {
    if (s >= static_cast<Symbol>(q)) {
      throw InvalidInput("symbol " + std::to_string(s) + " outside alphabet of size " + std::to_string(q));
    }
  }
}

TreeVertex predecessor(const TreeVertex& v) { return v.predecessor(); }

std::vector<TreeVertex> successors(const TreeVertex& v, int q) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
  std::vector<TreeVertex> out;
  out.reserve(static_cast<std::size_t>(q));
  for (int s = 0; s < q; ++s) out.push_back(v.child(static_cast<Symbol>(s)));
  return out;
}

Level confluent_level(const TreeVertex& x, const TreeVertex& y) {
  const Level top = std::min(x.hor(), y.hor());
  const Level lo = std::min(front_level(x), front_level(y));
  for (Level j = lo; j <= top; ++j) {
    if (x.level_symbol(j) != y.level_symbol(j)) return j - 1;
  }
  return top;
}

TreeVertex confluent(const TreeVertex& x, const TreeVertex& y) {
  return x.ancestor_at(confluent_level(x, y));
}

std::int64_t up(const TreeVertex& x, const TreeVertex& y) { return x.hor() - confluent_level(x, y); }

std::int64_t tree_distance(const TreeVertex& x, const TreeVertex& y) {
  const Level c = confluent_level(x, y);
  return (x.hor() - c) + (y.hor() - c);
}

bool is_ancestor(const TreeVertex& a, const TreeVertex& v) {
  return a.hor() <= v.hor() && confluent_level(a, v) == a.hor();
}

std::uint64_t cone_count(int q, std::int64_t k, std::int64_t r) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
  if (k < 0 || r < 0) throw InvalidInput("cone indices must be nonnegative");
  if (r == 0) return 1;
  const auto uq = static_cast<std::uint64_t>(q);
  std::uint64_t n = (k == 0) ? uq : uq - 1;
  for (std::int64_t i = 1; i < r; ++i) {
    if (n > std::numeric_limits<std::uint64_t>::max() / uq) {
      throw std::overflow_error("cone_count overflows 64 bits");
    }
    n *= uq;
  }
  return n;
}

double cone_size(int q, std::int64_t k, std::int64_t r) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
  if (k < 0 || r < 0) throw InvalidInput("cone indices must be nonnegative");
  if (r == 0) return 1.0;
  const double base = (k == 0) ? q : q - 1;
  return base * std::pow(static_cast<double>(q), static_cast<double>(r - 1));
}

void for_each_in_cone(const ConeSpec& spec, int q, const std::function<void(const TreeVertex&)>& f) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
  if (spec.k < 0 || spec.r < 0) throw InvalidInput("cone indices must be nonnegative");
  const TreeVertex top = spec.base.ancestor_at(spec.base.hor() - spec.k);
  if (spec.r == 0) {
    f(top);
    return;
  }
  // The first step down may not return toward base when k >= 1.
  const bool exclude = spec.k >= 1;
  const Symbol banned = exclude ? spec.base.symbol(spec.k - 1) : 0;

  std::vector<Symbol> choice(static_cast<std::size_t>(spec.r), 0);
  auto advance = [&](std::size_t i) {
    // odometer over the r new symbols, first one skipping `banned`
    while (true) {
      ++choice[i];
      if (i == 0 && exclude && choice[0] == banned) ++choice[0];
      if (choice[i] < static_cast<Symbol>(q)) return true;
      if (i == 0) return false;
      choice[i] = 0;
      --i;
    }
  };
  if (exclude && banned == 0) choice[0] = 1;
  while (true) {
    TreeVertex y = top;
    for (Symbol s : choice) y.move_down(s);
    f(y);
    if (!advance(choice.size() - 1)) break;
    // reset positions after the one that advanced are already zero
  }
}

std::vector<TreeVertex> enumerate_cone(const ConeSpec& spec, int q) {
  std::vector<TreeVertex> out;
  for_each_in_cone(spec, q, [&](const TreeVertex& y) { out.push_back(y); });
  return out;
}

TreeVertex geodesic_toward(const BoundaryPoint& xi, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("geodesic_toward: negative depth");
  if (n > 0 && xi.continuation == Continuation::Unknown) {
    throw InsufficientDepth("boundary point known only down to horocycle " + std::to_string(xi.anchor.hor()));
  }
  TreeVertex v = xi.anchor;
  for (std::int64_t i = 0; i < n; ++i) v.move_down(0);
  return v;
}

TreeVertex confluent_with_boundary(const TreeVertex& x, const BoundaryPoint& xi) {
  if (xi.continuation == Continuation::Zero) {
    const std::int64_t n = std::max<std::int64_t>(0, x.hor() - xi.anchor.hor() + 1);
    return confluent(x, geodesic_toward(xi, n));
  }
  TreeVertex c = confluent(x, xi.anchor);
  if (c.hor() == xi.anchor.hor() && x.hor() > xi.anchor.hor()) {
    throw InsufficientDepth("x lies below the known prefix of the boundary point");
  }
  return c;
}

std::int64_t up_to_boundary(const TreeVertex& x, const BoundaryPoint& xi) {
  return x.hor() - confluent_with_boundary(x, xi).hor();
}

bool in_cylinder(const BoundaryPoint& xi, const TreeVertex& v, std::int64_t l) {
  return up_to_boundary(v, xi) == l;
}

}  // namespace dlh
