#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "dlharmonic/boundary_analysis.hpp"
#include "dlharmonic/dl_graph.hpp"
#include "dlharmonic/rng.hpp"
#include "dlharmonic/tree_geometry.hpp"
#include "dlharmonic/walk_model.hpp"

namespace dlh {

struct TrajectoryParams {
  std::uint64_t steps = 10'000;     // hard cap per run
  std::uint64_t window = 50;        // confluents unchanged for this many steps
  std::int64_t depth_margin = 30;   // hor(Z_n) - hor(v ^ Z_n) required for every reference v
  std::uint64_t seed = 0;

  void validate() const;
};

/// Z_0 = x0, ..., Z_steps drawn from Rng(seed).
std::vector<TreeVertex> simulate(const TreeWalk& w, const TreeVertex& x0, std::uint64_t steps, std::uint64_t seed);
std::vector<DLVertex> simulate(const QuadrupleMeasure& w, const DLVertex& x0, std::uint64_t steps, std::uint64_t seed);

/// The same trajectories without storing them; visit(n, Z_n) for n = 0..steps.
void simulate(const TreeWalk& w, const TreeVertex& x0, std::uint64_t steps, std::uint64_t seed,
              const std::function<void(std::uint64_t, const TreeVertex&)>& visit);
void simulate(const QuadrupleMeasure& w, const DLVertex& x0, std::uint64_t steps, std::uint64_t seed,
              const std::function<void(std::uint64_t, const DLVertex&)>& visit);

struct LimitResult {
  bool converged = false;
  std::uint64_t steps = 0;
  /// The stabilized geodesic prefix, anchored depth_margin/2 levels above
  /// Z_n and below every reference confluent. Continuation is Unknown.
  BoundaryPoint limit;
};

/// Runs the walk from x0 until the confluents of Z_n with every reference
/// vertex stay fixed for `window` steps and Z_n sits `depth_margin` levels
/// below all of them. Unconverged runs are reported, never retried.
LimitResult boundary_limit(const TreeWalk& w, const TreeVertex& x0, const std::vector<TreeVertex>& refs,
                           const TrajectoryParams& p, Rng& rng);

/// A binomial frequency, optionally scaled by a deterministic factor.
struct Estimate {
  std::uint64_t hits = 0;
  std::uint64_t runs = 0;
  double value = 0.0;
  double stderr_ = 0.0;
};

Estimate make_estimate(std::uint64_t hits, std::uint64_t runs, double scale = 1.0);

struct RatioEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // delta method, independent numerator and denominator
};

RatioEstimate ratio(const Estimate& num, const Estimate& den);

/// Maps a boundary limit to a bin, or nullopt for "no bin". Must be pure;
/// it is called concurrently when threads > 1.
using LimitClassifier = std::function<std::optional<std::size_t>(const BoundaryPoint&)>;

struct BinCounts {
  std::uint64_t runs = 0;
  std::uint64_t unconverged = 0;
  std::vector<std::uint64_t> hits;

  Estimate estimate(std::size_t bin, double scale = 1.0) const { return make_estimate(hits.at(bin), runs, scale); }
};

/// Run i uses the engine seeded with derive_seed(p.seed, i), so counts do
/// not depend on the thread count.
BinCounts count_boundary_limits(const TreeWalk& w, const TreeVertex& x0, const std::vector<TreeVertex>& refs,
                                std::uint64_t runs, const TrajectoryParams& p, std::size_t bins,
                                const LimitClassifier& classify, unsigned threads = 1);

/// Frequencies of up(o, Z_inf) = j for j <= max_j; estimates a_j under the
/// total-mass-one normalization.
std::vector<Estimate> estimate_boundary_coefficients(const TreeWalk& w, std::uint64_t runs, std::int64_t max_j,
                                                     const TrajectoryParams& p, BinCounts* raw = nullptr,
                                                     unsigned threads = 1);

/// nu_start(Omega_k(o) ^ Omega_l(x)) from runs started at `start`.
Estimate estimate_cylinder_measure(const TreeWalk& w, const TreeVertex& start, const TreeVertex& x, std::int64_t k,
                                   std::int64_t l, std::uint64_t runs, const TrajectoryParams& p,
                                   unsigned threads = 1);

/// nu_x(Omega_k(o) ^ Omega_l(x)) from runs started at x. With c0 != 0 the
/// walk must be the conjugated one and the estimate carries e^{c0 hor(x)}.
Estimate estimate_harmonic_measure(const TreeWalk& w, const TreeVertex& x, std::int64_t k, std::int64_t l,
                                   std::uint64_t runs, const TrajectoryParams& p, double c0 = 0.0,
                                   unsigned threads = 1);

// ---------------------------------------------------------------- exact class dynamics

/// Counts of single-step targets by class displacement. For a vertex y with
/// (up(o,y), up(y,o)) = c and a step class s = (kappa, rho), counts(c, s)
/// lists (c' - c, #{y' in T_s(y) : class of y' is c'}). Counts depend on c
/// only through (min(a, kappa+rho+1), min(b, kappa+1)), which bounds the memo.
class TreePairCounter {
 public:
  using Row = std::vector<std::pair<UpPair, double>>;

  explicit TreePairCounter(int q, std::size_t memory_cap = 1u << 22);

  const Row& counts(UpPair c, UpPair step);

  /// The same counts by direct enumeration from the unreduced representative.
  Row enumerate(UpPair c, UpPair step) const;

  /// A vertex y with up(o,y) = c.k and up(y,o) = c.r.
  static TreeVertex representative(UpPair c);

  int q() const noexcept { return q_; }
  std::size_t size() const noexcept { return memo_.size(); }

 private:
  int q_;
  std::size_t cap_;
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>, Row> memo_;
};

/// Per-vertex probabilities p^(n)(o, y) by the class of y relative to o.
struct ClassDistribution {
  std::uint64_t horizon = 0;
  std::map<UpPair, double> table;
};

struct DLClassDistribution {
  std::uint64_t horizon = 0;
  std::map<UpQuadruple, double> table;
};

ClassDistribution initial_tree_distribution();
DLClassDistribution initial_dl_distribution();

ClassDistribution class_collapsed_step(const TreeWalk& w, const ClassDistribution& d, TreePairCounter& counter);
DLClassDistribution class_collapsed_step(const QuadrupleMeasure& w, const DLClassDistribution& d,
                                         TreePairCounter& counter1, TreePairCounter& counter2);

/// sum over classes of per-vertex probability times class size.
double total_mass(const ClassDistribution& d, int q);
double total_mass(const DLClassDistribution& d, int q, int r);

/// Partial Green sums G_N(c) = sum_{n <= N} p^(n)(o, y) for every class c,
/// from a dense class-space recursion.
class GreenTable {
 public:
  GreenTable(const TreeWalk& w, std::uint64_t n_max, std::size_t memory_cap = 1u << 24);

  struct Value {
    double sum = 0.0;
    double last_increment = 0.0;  // p^(N)(x, y)
  };

  /// G_N(x, y), using semi-isotropy to move x to o.
  Value partial(const TreeVertex& x, const TreeVertex& y) const;
  Value at(UpPair c) const;

  std::uint64_t n_max() const noexcept { return n_max_; }

 private:
  std::uint64_t n_max_;
  std::int64_t width_ = 0;
  std::vector<double> sum_;
  std::vector<double> last_;
};

GreenTable::Value green_partial(const TreeWalk& w, const TreeVertex& x, const TreeVertex& y, std::uint64_t n_max);

/// sum_{n=1}^{N} p^(n)(o, o) on DL from the class recursion.
double dl_return_partial(const QuadrupleMeasure& w, std::uint64_t n_max);

struct MartinRow {
  std::int64_t n = 0;
  double estimate = 0.0;  // G_N(x, y_n) / G_N(o, y_n)
  double target = 0.0;    // K(x, xi)
  double rel_err = 0.0;
  double last_increment = 0.0;
};

struct MartinReport {
  std::vector<MartinRow> rows;
  double final_rel_err = 0.0;
  /// err_{i+1} <= err_i + slack for consecutive depths.
  bool trending_down = true;
};

MartinReport martin_convergence_test(const TreeWalk& w, const BoundaryCoefficients& c, const TreeVertex& x,
                                     const BoundaryPoint& xi, const std::vector<std::int64_t>& depths,
                                     std::uint64_t n_max, double slack = 1e-9);

struct TransienceReport {
  std::uint64_t runs = 0;
  std::uint64_t steps = 0;
  double mean_returns_half = 0.0;  // returns to the start within steps/2
  double stderr_half = 0.0;
  double mean_returns = 0.0;       // returns within steps
  double stderr_ = 0.0;
};

TransienceReport transience_diagnostic(const TreeWalk& w, std::uint64_t runs, std::uint64_t steps,
                                       std::uint64_t seed);
TransienceReport transience_diagnostic(const QuadrupleMeasure& w, std::uint64_t runs, std::uint64_t steps,
                                       std::uint64_t seed);

}  // namespace dlh
