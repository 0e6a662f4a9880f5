#include "dlharmonic/walk_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dlharmonic/errors.hpp"

namespace dlh {

namespace {

template <class Map>
void check_mass(const Map& mass, double tol, const char* what) {
  if (mass.empty()) throw InvalidInput(std::string(what) + ": empty support");
  double total = 0.0;
  for (const auto& [key, p] : mass) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput(std::string(what) + ": negative or non-finite mass");
    total += p;
  }
  if (std::abs(total - 1.0) > tol) {
    throw InvalidInput(std::string(what) + ": total mass " + std::to_string(total) + " differs from 1");
  }
}

template <class Map>
Map drop_zeros(Map m) {
  std::erase_if(m, [](const auto& kv) { return kv.second == 0.0; });
  return m;
}

std::int64_t quad_distance(const UpQuadruple& c) {
  return (c.k1 + c.l1) + (c.k2 + c.l2) - std::abs(c.l1 - c.k1);
}

}  // namespace

// ---------------------------------------------------------------- ZWalk

ZWalk::ZWalk(std::map<std::int64_t, double> mass, double tol) : mass_(std::move(mass)) {
  check_mass(mass_, tol, "mu_tilde");
  mass_ = drop_zeros(std::move(mass_));
}

double ZWalk::operator()(std::int64_t n) const {
  auto it = mass_.find(n);
  return it == mass_.end() ? 0.0 : it->second;
}

bool ZWalk::irreducible() const {
  bool pos = false, neg = false;
  std::int64_t g = 0;
  for (const auto& [n, p] : mass_) {
    if (n > 0) pos = true;
    if (n < 0) neg = true;
    g = std::gcd(g, n);
  }
  return pos && neg && g == 1;
}

ZWalk ZWalk::reflected() const {
  std::map<std::int64_t, double> m;
  for (const auto& [n, p] : mass_) m[-n] = p;
  return ZWalk(std::move(m), kDerivedMassTolerance);
}

// ---------------------------------------------------------------- TreeWalk

TreeWalk::TreeWalk(int q, std::map<UpPair, double> mass, double tol) : q_(q), mass_(std::move(mass)) {
  if (q < 2) throw InvalidInput("q: branching must be at least 2");
  for (const auto& [c, p] : mass_) {
    if (c.k < 0 || c.r < 0) throw InvalidInput("tree walk: class indices must be nonnegative");
  }
  check_mass(mass_, tol, "tree walk");
  mass_ = drop_zeros(std::move(mass_));
}

double TreeWalk::per_vertex(UpPair c) const {
  auto it = mass_.find(c);
  if (it == mass_.end()) return 0.0;
  return it->second / cone_size(q_, c.k, c.r);
}

std::int64_t TreeWalk::range() const {
  std::int64_t out = 0;
  for (const auto& [c, p] : mass_) out = std::max(out, c.k + c.r);
  return out;
}

// ---------------------------------------------------------------- QuadrupleMeasure

QuadrupleMeasure::QuadrupleMeasure(int q, int r, std::map<UpQuadruple, double> per_vertex, double tol)
    : q_(q), r_(r), per_vertex_(drop_zeros(std::move(per_vertex))) {
  if (q < 2) throw InvalidInput("q: branching must be at least 2");
  if (r < 2) throw InvalidInput("r: branching must be at least 2");
  std::map<UpQuadruple, double> masses;
  for (const auto& [c, p] : per_vertex_) {
    if (c.k1 < 0 || c.l1 < 0 || c.k2 < 0 || c.l2 < 0) {
      throw InvalidInput("quadruples: indices must be nonnegative");
    }
    if (c.k1 + c.k2 != c.l1 + c.l2) {
      throw InvalidInput("quadruples: (k1,l1,k2,l2) = (" + std::to_string(c.k1) + "," + std::to_string(c.l1) + "," +
                         std::to_string(c.k2) + "," + std::to_string(c.l2) + ") violates k1+k2 = l1+l2");
    }
    masses[c] = p * class_size(c);
  }
  check_mass(masses, tol, "quadruples");
}

double QuadrupleMeasure::class_size(const UpQuadruple& c) const {
  return cone_size(q_, c.k1, c.l1) * cone_size(r_, c.k2, c.l2);
}

double QuadrupleMeasure::class_mass(const UpQuadruple& c) const {
  auto it = per_vertex_.find(c);
  return it == per_vertex_.end() ? 0.0 : it->second * class_size(c);
}

std::int64_t QuadrupleMeasure::range() const {
  std::int64_t out = 0;
  for (const auto& [c, p] : per_vertex_) out = std::max(out, quad_distance(c));
  return out;
}

// ---------------------------------------------------------------- constructions

QuadrupleMeasure switch_walk(const ZWalk& mu_tilde, int q, int r) {
  std::map<UpQuadruple, double> m;
  for (const auto& [jump, p] : mu_tilde.mass()) {
    if (jump > 0) {
      m[{0, jump, jump, 0}] = p / cone_size(q, 0, jump);
    } else if (jump < 0) {
      m[{-jump, 0, 0, -jump}] = p / cone_size(r, 0, -jump);
    } else {
      m[{0, 0, 0, 0}] = p;
    }
  }
  return QuadrupleMeasure(q, r, std::move(m), kDerivedMassTolerance);
}

double transition_prob(const QuadrupleMeasure& w, const DLVertex& x, const DLVertex& y) {
  auto it = w.per_vertex().find(up_quadruple(x, y));
  return it == w.per_vertex().end() ? 0.0 : it->second;
}

double transition_prob(const TreeWalk& w, const TreeVertex& x, const TreeVertex& y) {
  return w.per_vertex({up(x, y), up(y, x)});
}

TreeWalk project_to_tree(const QuadrupleMeasure& w, Side side) {
  std::map<UpPair, double> mu;
  for (const auto& [c, p] : w.per_vertex()) {
    const UpPair key = side == Side::One ? UpPair{c.k1, c.l1} : UpPair{c.k2, c.l2};
    mu[key] += w.class_mass(c);
  }
  return TreeWalk(side == Side::One ? w.q() : w.r(), std::move(mu), kDerivedMassTolerance);
}

ZWalk project_to_z(const TreeWalk& w) {
  std::map<std::int64_t, double> mu;
  for (const auto& [c, p] : w.mass()) mu[c.r - c.k] += p;
  return ZWalk(std::move(mu), kDerivedMassTolerance);
}

ZWalk z_law(const QuadrupleMeasure& w) {
  std::map<std::int64_t, double> mu;
  for (const auto& [c, p] : w.per_vertex()) mu[c.l1 - c.k1] += w.class_mass(c);
  return ZWalk(std::move(mu), kDerivedMassTolerance);
}

// ---------------------------------------------------------------- functionals

double phi(const ZWalk& w, double c) {
  double s = 0.0;
  for (const auto& [n, p] : w.mass()) s += p * std::exp(c * static_cast<double>(n));
  return s;
}

double drift(const ZWalk& w) {
  double s = 0.0;
  for (const auto& [n, p] : w.mass()) s += p * static_cast<double>(n);
  return s;
}

double moment(const TreeWalk& w, double t) {
  double s = 0.0;
  for (const auto& [c, p] : w.mass()) s += p * std::pow(static_cast<double>(c.k + c.r), t);
  return s;
}

double moment(const QuadrupleMeasure& w, double t) {
  double s = 0.0;
  for (const auto& [c, p] : w.per_vertex()) {
    s += w.class_mass(c) * std::pow(static_cast<double>(quad_distance(c)), t);
  }
  return s;
}

double exp_moment(const QuadrupleMeasure& w, double c) {
  const double cp = std::max(c, 0.0), cm = std::min(c, 0.0);
  double s = 0.0;
  for (const auto& [k, p] : w.per_vertex()) {
    const double d1 = static_cast<double>(k.k1 + k.l1), d2 = static_cast<double>(k.k2 + k.l2);
    const double h1 = static_cast<double>(k.l1 - k.k1), h2 = static_cast<double>(k.l2 - k.k2);
    s += w.class_mass(k) * (d1 * std::exp(cp * h1) + d2 * std::exp(cm * h2));
  }
  return s;
}

double hor_moment(const TreeWalk& w, double c) {
  double s = 0.0;
  for (const auto& [k, p] : w.mass()) {
    s += p * static_cast<double>(k.k + k.r) * std::exp(c * static_cast<double>(k.r - k.k));
  }
  return s;
}

std::optional<double> find_c0(const ZWalk& w, const RootOptions& opts) {
  const double alpha = drift(w);
  if (std::abs(alpha) <= opts.drift_tolerance) return std::nullopt;
  const bool has_pos = w.mass().rbegin()->first > 0, has_neg = w.mass().begin()->first < 0;
  if (!has_pos || !has_neg) return std::nullopt;  // phi is monotone

  // (phi(c) - 1) / c is increasing in c (secant slopes of a convex function
  // through (0, 1)), equals alpha at 0 and vanishes exactly at c0.
  auto secant = [&](double c) {
    if (c == 0.0) return alpha;
    double s = 0.0;
    for (const auto& [n, p] : w.mass()) {
      const double x = c * static_cast<double>(n);
      s += p * static_cast<double>(n) * (x == 0.0 ? 1.0 : std::expm1(x) / x);
    }
    return s;
  };

  const double dir = alpha > 0 ? -1.0 : 1.0;
  double near = 0.0, far = dir;
  while (secant(far) * alpha > 0) {
    near = far;
    far *= 2.0;
    if (std::abs(far) > opts.search_limit) {
      if (secant(dir * opts.search_limit) * alpha > 0) {
        throw NoBracket("no root of phi(c) = 1 with |c| <= " + std::to_string(opts.search_limit));
      }
      far = dir * opts.search_limit;
      break;
    }
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (near + far);
    if (mid == near || mid == far) break;
    if (secant(mid) * alpha > 0) {
      near = mid;
    } else {
      far = mid;
    }
  }
  const double c0 = std::abs(phi(w, near) - 1.0) <= std::abs(phi(w, far) - 1.0) ? near : far;
  if (std::abs(phi(w, c0) - 1.0) > opts.tolerance) {
    throw NoBracket("bisection stalled at c = " + std::to_string(c0));
  }
  return c0;
}

TreeWalk conjugate(const TreeWalk& w, double c0) {
  std::map<UpPair, double> mu;
  double total = 0.0;
  for (const auto& [c, p] : w.mass()) {
    const double v = p * std::exp(c0 * static_cast<double>(c.r - c.k));
    mu[c] = v;
    total += v;
  }
  if (std::abs(total - 1.0) > kDerivedMassTolerance) {
    throw NotStochastic("conjugation by c0 = " + std::to_string(c0) + " gives total mass " + std::to_string(total));
  }
  return TreeWalk(w.q(), std::move(mu), kDerivedMassTolerance);
}

QuadrupleMeasure conjugate(const QuadrupleMeasure& w, double c0) {
  std::map<UpQuadruple, double> m;
  double total = 0.0;
  for (const auto& [c, p] : w.per_vertex()) {
    const double v = p * std::exp(c0 * static_cast<double>(c.l1 - c.k1));
    m[c] = v;
    total += v * w.class_size(c);
  }
  if (std::abs(total - 1.0) > kDerivedMassTolerance) {
    throw NotStochastic("conjugation by c0 = " + std::to_string(c0) + " gives total mass " + std::to_string(total));
  }
  return QuadrupleMeasure(w.q(), w.r(), std::move(m), kDerivedMassTolerance);
}

// ---------------------------------------------------------------- exact one-step laws

std::vector<std::pair<TreeVertex, double>> transitions(const TreeWalk& w, const TreeVertex& x) {
  std::vector<std::pair<TreeVertex, double>> out;
  for (const auto& [c, p] : w.mass()) {
    const double pv = w.per_vertex(c);
    for_each_in_cone({x, c.k, c.r}, w.q(), [&](const TreeVertex& y) { out.emplace_back(y, pv); });
  }
  return out;
}

std::vector<std::pair<DLVertex, double>> transitions(const QuadrupleMeasure& w, const DLVertex& x) {
  std::vector<std::pair<DLVertex, double>> out;
  const TreeVertex x1 = project(x, Side::One), x2 = project(x, Side::Two);
  for (const auto& [c, p] : w.per_vertex()) {
    const auto ys2 = enumerate_cone({x2, c.k2, c.l2}, w.r());
    for_each_in_cone({x1, c.k1, c.l1}, w.q(), [&](const TreeVertex& y1) {
      for (const auto& y2 : ys2) out.emplace_back(compose(y1, y2), p);
    });
  }
  return out;
}

// ---------------------------------------------------------------- sampling

void move_uniform_in_cone(TreeVertex& x, UpPair c, int q, Rng& rng) {
  Symbol banned = 0;
  for (std::int64_t i = 0; i < c.k; ++i) {
    banned = x.symbol(0);
    x.move_up();
  }
  if (c.r == 0) return;
  if (c.k >= 1) {
    // first step avoids the branch we came from
    std::uniform_int_distribution<Symbol> first(0, static_cast<Symbol>(q - 2));
    Symbol s = first(rng);
    if (s >= banned) ++s;
    x.move_down(s);
  } else {
    std::uniform_int_distribution<Symbol> any(0, static_cast<Symbol>(q - 1));
    x.move_down(any(rng));
  }
  std::uniform_int_distribution<Symbol> any(0, static_cast<Symbol>(q - 1));
  for (std::int64_t i = 1; i < c.r; ++i) x.move_down(any(rng));
}

namespace {

template <class Key, class Weights>
std::discrete_distribution<std::size_t> make_picker(const std::vector<Key>&, const Weights& weights) {
  return std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

}  // namespace

TreeStepSampler::TreeStepSampler(const TreeWalk& w) : q_(w.q()) {
  std::vector<double> weights;
  for (const auto& [c, p] : w.mass()) {
    classes_.push_back(c);
    weights.push_back(p);
  }
  pick_ = make_picker(classes_, weights);
}

UpPair TreeStepSampler::step(TreeVertex& x, Rng& rng) const {
  const UpPair c = classes_[pick_(rng)];
  move_uniform_in_cone(x, c, q_, rng);
  return c;
}

DLStepSampler::DLStepSampler(const QuadrupleMeasure& w) : q_(w.q()), r_(w.r()) {
  std::vector<double> weights;
  for (const auto& [c, p] : w.per_vertex()) {
    classes_.push_back(c);
    weights.push_back(w.class_mass(c));
  }
  pick_ = make_picker(classes_, weights);
}

// Only codes in (pos - k1, pos + k2] change: tree 1 rewrites them upward from
// pos - k1 + 1, tree 2 downward from pos + k2. The draws happen in the same
// order as moving the two projections with move_uniform_in_cone.
void DLStepSampler::step_in_place(DLVertex& x, Rng& rng) const {
  const UpQuadruple c = classes_[pick_(rng)];
  const std::int64_t lo = x.pos - c.k1 + 1, hi = x.pos + c.k2;
  const Symbol banned1 = x.lamp(lo), banned2 = x.lamp(hi);
  const auto draw = [&rng](int q, bool avoid, Symbol banned) {
    if (avoid) {
      std::uniform_int_distribution<Symbol> first(0, static_cast<Symbol>(q - 2));
      Symbol s = first(rng);
      return s >= banned ? s + 1 : s;
    }
    return std::uniform_int_distribution<Symbol>(0, static_cast<Symbol>(q - 1))(rng);
  };
  const std::int64_t pos = x.pos - c.k1 + c.l1;
  for (std::int64_t i = 0; i < c.l1; ++i) x.set_lamp(lo + i, draw(q_, i == 0 && c.k1 >= 1, banned1));
  for (std::int64_t i = 0; i < c.l2; ++i) x.set_lamp(hi - i, draw(r_, i == 0 && c.k2 >= 1, banned2));
  x.pos = pos;
}

DLVertex DLStepSampler::step(const DLVertex& x, Rng& rng) const {
  DLVertex y = x;
  step_in_place(y, rng);
  return y;
}

TreeVertex sample_step(const TreeWalk& w, const TreeVertex& x, Rng& rng) {
  TreeVertex y = x;
  TreeStepSampler(w).step(y, rng);
  return y;
}

DLVertex sample_step(const QuadrupleMeasure& w, const DLVertex& x, Rng& rng) {
  return DLStepSampler(w).step(x, rng);
}

}  // namespace dlh
