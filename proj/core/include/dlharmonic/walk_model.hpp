#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "dlharmonic/dl_graph.hpp"
#include "dlharmonic/rng.hpp"
#include "dlharmonic/tree_geometry.hpp"

namespace dlh {

/// Normalization slack accepted for measures built from user input.
inline constexpr double kInputMassTolerance = 1e-12;
/// Normalization slack accepted for measures derived by projection or conjugation.
inline constexpr double kDerivedMassTolerance = 1e-10;

/// An up-pair (k, r) = (up(x,y), up(y,x)) on a tree.
struct UpPair {
  std::int64_t k = 0;
  std::int64_t r = 0;
  friend bool operator==(const UpPair&, const UpPair&) = default;
  friend auto operator<=>(const UpPair&, const UpPair&) = default;
};

/// Law mu~ of the horocycle increments. Finite support.
class ZWalk {
 public:
  explicit ZWalk(std::map<std::int64_t, double> mass, double tol = kInputMassTolerance);

  const std::map<std::int64_t, double>& mass() const noexcept { return mass_; }
  double operator()(std::int64_t n) const;

  /// The induced walk on Z is irreducible: both signs occur and the jumps have gcd 1.
  bool irreducible() const;

  /// Reflection n -> -n.
  ZWalk reflected() const;

 private:
  std::map<std::int64_t, double> mass_;
};

/// Semi-isotropic walk on T_q given by class masses mu_{k,r} (the total over
/// T_{k,r}(x), not the per-vertex probability).
class TreeWalk {
 public:
  TreeWalk(int q, std::map<UpPair, double> mass, double tol = kInputMassTolerance);

  int q() const noexcept { return q_; }
  const std::map<UpPair, double>& mass() const noexcept { return mass_; }

  /// mu_{k,r} / |T_{k,r}|.
  double per_vertex(UpPair c) const;

  /// max(k + r) over the support.
  std::int64_t range() const;

 private:
  int q_;
  std::map<UpPair, double> mass_;
};

/// The defining measure of a semi-isotropic walk on DL(q,r): per-vertex
/// transition probabilities indexed by up-quadruples with k1 + k2 = l1 + l2.
class QuadrupleMeasure {
 public:
  QuadrupleMeasure(int q, int r, std::map<UpQuadruple, double> per_vertex, double tol = kInputMassTolerance);

  int q() const noexcept { return q_; }
  int r() const noexcept { return r_; }
  const std::map<UpQuadruple, double>& per_vertex() const noexcept { return per_vertex_; }

  /// Number of targets of one quadruple class from any vertex.
  double class_size(const UpQuadruple& c) const;
  /// per-vertex probability times class size.
  double class_mass(const UpQuadruple& c) const;

  std::int64_t range() const;

 private:
  int q_;
  int r_;
  std::map<UpQuadruple, double> per_vertex_;
};

/// mu = sum_m mu~(m) mu_m: a jump by m re-randomizes every lamp it crosses
/// into the colour of its new side.
QuadrupleMeasure switch_walk(const ZWalk& mu_tilde, int q, int r);

double transition_prob(const QuadrupleMeasure& w, const DLVertex& x, const DLVertex& y);
double transition_prob(const TreeWalk& w, const TreeVertex& x, const TreeVertex& y);

/// Projection P_side of a DL walk onto its factor tree.
TreeWalk project_to_tree(const QuadrupleMeasure& w, Side side);

/// mu~(n) = sum_{r-k=n} mu_{k,r}.
ZWalk project_to_z(const TreeWalk& w);

/// Law of hor(x1) increments read directly off the quadruple measure.
ZWalk z_law(const QuadrupleMeasure& w);

/// phi(c) = sum_m mu~(m) e^{cm}; +inf on overflow.
double phi(const ZWalk& w, double c);

/// alpha = sum_n n mu~(n).
double drift(const ZWalk& w);

/// m_t = sum_x d(o,x)^t p(o,x) with the tree metric.
double moment(const TreeWalk& w, double t);
/// m_t with the DL metric.
double moment(const QuadrupleMeasure& w, double t);

/// m^{(c)}(P) = sum (d(o1,x1) e^{c+ hor(x1)} + d(o2,x2) e^{c- hor(x2)}) p(o,x).
double exp_moment(const QuadrupleMeasure& w, double c);

/// sum_x d(o,x) p(o,x) e^{c hor(x)} on a tree.
double hor_moment(const TreeWalk& w, double c);

struct RootOptions {
  double drift_tolerance = 1e-12;  // |alpha| below this counts as zero drift
  double search_limit = 50.0;      // bracket expansion stops at |c| = limit
  double tolerance = 1e-12;        // required |phi(c0) - 1|
};

/// The nonzero root c0 of phi(c) = 1, or nullopt when c = 0 is the only root
/// (zero drift, or a one-signed support). Throws NoBracket if the root lies
/// beyond the search limit.
std::optional<double> find_c0(const ZWalk& w, const RootOptions& opts = {});

/// mu#_{k,r} = mu_{k,r} e^{c0 (r-k)}. Throws NotStochastic unless phi(c0) = 1.
TreeWalk conjugate(const TreeWalk& w, double c0);
/// p#(x,y) = p(x,y) e^{c0 (hor(y1) - hor(x1))}.
QuadrupleMeasure conjugate(const QuadrupleMeasure& w, double c0);

/// Exact one-step law from x as (target, probability) pairs.
std::vector<std::pair<TreeVertex, double>> transitions(const TreeWalk& w, const TreeVertex& x);
std::vector<std::pair<DLVertex, double>> transitions(const QuadrupleMeasure& w, const DLVertex& x);

/// Draws a class by its total mass, then a uniform target inside the class.
class TreeStepSampler {
 public:
  explicit TreeStepSampler(const TreeWalk& w);

  /// Moves x in place; returns the class that was drawn.
  UpPair step(TreeVertex& x, Rng& rng) const;

 private:
  int q_;
  std::vector<UpPair> classes_;
  mutable std::discrete_distribution<std::size_t> pick_;
};

class DLStepSampler {
 public:
  explicit DLStepSampler(const QuadrupleMeasure& w);

  DLVertex step(const DLVertex& x, Rng& rng) const;
  void step_in_place(DLVertex& x, Rng& rng) const;

 private:
  int q_;
  int r_;
  std::vector<UpQuadruple> classes_;
  mutable std::discrete_distribution<std::size_t> pick_;
};

/// Moves a tree vertex to a uniform element of T_{k,r}(x).
void move_uniform_in_cone(TreeVertex& x, UpPair c, int q, Rng& rng);

TreeVertex sample_step(const TreeWalk& w, const TreeVertex& x, Rng& rng);
DLVertex sample_step(const QuadrupleMeasure& w, const DLVertex& x, Rng& rng);

}  // namespace dlh
