#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dlharmonic/dl_graph.hpp"
#include "dlharmonic/tree_geometry.hpp"
#include "dlharmonic/walk_model.hpp"

namespace dlh {

enum class DriftCase { PositiveDrift, ZeroDrift, NegativeDriftConjugated };

std::string to_string(DriftCase c);

/// Drift classification of a tree walk. For PositiveDrift, c0 holds the
/// negative root of phi(c) = 1 when one exists; for NegativeDriftConjugated it
/// holds the positive root used for conjugation.
struct TreeCase {
  DriftCase drift = DriftCase::ZeroDrift;
  double alpha = 0.0;
  std::optional<double> c0;
};

TreeCase classify_tree_case(const TreeWalk& w, const RootOptions& opts = {});

enum class Normalization { TotalMassOne, AZeroOne };

std::string to_string(Normalization n);

/// The coefficients a_j = nu(Omega_j) of the invariant boundary measure,
/// truncated at J. In the conjugated case they belong to the conjugated walk.
struct BoundaryCoefficients {
  int q = 2;
  std::vector<double> a;
  TreeCase tcase;
  Normalization normalization = Normalization::TotalMassOne;
  double residual = 0.0;  // max |F(a)_j - a_j| over the truncated system
  std::uint64_t iterations = 0;

  std::size_t truncation() const noexcept { return a.empty() ? 0 : a.size() - 1; }
};

struct SolverOptions {
  std::size_t truncation = 200;
  double tolerance = 1e-8;            // accepted residual
  double iterate_tolerance = 1e-15;   // relative change between sweeps
  std::uint64_t max_iterations = 2'000'000;
  RootOptions root;
};

/// How the truncated system reads coefficients beyond J.
enum class TailClosure {
  Zero,    // a_j = 0 for j > J
  Linear,  // a_{J+i} = a_J + i (a_J - a_{J-1})
};

/// One application of the linear map whose fixed points are the coefficient
/// vectors: out_j is the right-hand side of the j-th equation.
std::vector<double> coefficient_map(const TreeWalk& w, const std::vector<double>& a, TailClosure tail);

/// Classifies the walk, conjugates it if the drift is negative and solves the
/// truncated system. Power iteration with a zero tail in the summable cases;
/// a direct solve with a linear tail when the drift vanishes.
BoundaryCoefficients solve_coefficients(const TreeWalk& w, const SolverOptions& opts = {});

/// Same, with the classification already known.
BoundaryCoefficients solve_coefficients(const TreeWalk& w, const TreeCase& tcase, const SolverOptions& opts = {});

/// The walk whose coefficients are solved for: w itself, or w conjugated by c0.
TreeWalk solver_walk(const TreeWalk& w, const TreeCase& tcase);

struct CoefficientResiduals {
  double root_equation = 0.0;   // the a_0 equation
  double level_equations = 0.0; // max over the a_j equations, j >= 1
  double tail_recurrence = 0.0; // max |a_j - sum_n a_{j+n} mu~(n)| for N < j < J - N
};

/// Residuals against the walk the coefficients were solved for.
CoefficientResiduals coefficient_residuals(const BoundaryCoefficients& c, const TreeWalk& solved_walk);

/// sign(k-l+m) sign(k) sign(l), with the two boundary exceptions.
int epsilon(std::int64_t k, std::int64_t l, std::int64_t m);

/// b(m) (a_l/a_k) q^(k-l+m) (q/(q-1))^eps(k,l,m). Throws TruncationExceeded
/// when k or l exceeds J.
double kernel_value(const BoundaryCoefficients& c, std::int64_t k, std::int64_t l, std::int64_t m);

/// K(x, xi) with k = up(o,xi), l = up(x,xi), m = hor(x).
double kernel_at(const BoundaryCoefficients& c, const TreeVertex& x, const BoundaryPoint& xi);

/// Exponents c with phi(c) = 1; the positive harmonic functions on Z are the
/// convex combinations of the e^{cm}.
std::vector<double> minimal_z_harmonics(const ZWalk& w, const RootOptions& opts = {});

/// max over |m| <= radius of |sum_n mu~(n) e^{c(m+n)} - e^{cm}| / e^{cm}.
double z_harmonic_defect(const ZWalk& w, double c, std::int64_t radius = 20);

// ---------------------------------------------------------------- harmonic functions

class HarmonicFunction;

struct TreeKernelTerm {
  std::shared_ptr<const BoundaryCoefficients> coeffs;
  BoundaryPoint xi;
};
struct ExponentialTerm {
  double c = 0.0;  // x -> e^{c hor(x)}
};
struct ConstantTerm {};
struct WeightedHarmonic;
struct MixtureTerm {
  std::vector<WeightedHarmonic> parts;
};

/// A positive function on a tree or on DL. DL-domain functions read the
/// factor named by `side`; mixtures evaluate each part on its own side.
class HarmonicFunction {
 public:
  enum class Domain { Tree, DL };
  using Kind = std::variant<TreeKernelTerm, ExponentialTerm, ConstantTerm, MixtureTerm>;

  static HarmonicFunction tree_kernel(std::shared_ptr<const BoundaryCoefficients> coeffs, BoundaryPoint xi,
                                      Side side = Side::One);
  static HarmonicFunction exponential(double c, Side side = Side::One);
  static HarmonicFunction constant(Domain domain = Domain::Tree);
  /// Throws InvalidInput unless all weights are positive and all parts share a domain.
  static HarmonicFunction mixture(std::vector<WeightedHarmonic> parts);

  const Kind& kind() const noexcept { return kind_; }
  Domain domain() const noexcept { return domain_; }
  Side side() const noexcept { return side_; }

  double operator()(const TreeVertex& x) const;
  double operator()(const DLVertex& x) const;

  std::string describe() const;

 private:
  friend HarmonicFunction lift_to_dl(const HarmonicFunction& h);
  HarmonicFunction(Kind kind, Domain domain, Side side) : kind_(std::move(kind)), domain_(domain), side_(side) {}

  Kind kind_;
  Domain domain_;
  Side side_;
};

struct WeightedHarmonic {
  double weight = 1.0;
  HarmonicFunction h;
};

/// x1 x2 -> h(x_side).
HarmonicFunction lift_to_dl(const HarmonicFunction& h);

// ---------------------------------------------------------------- classification

enum class FamilyKind { Kernel, Exponential, Constant };

/// One family of minimal harmonic functions. Kernel families are indexed by
/// the boundary of their tree; the other kinds are single functions.
struct FamilyDescriptor {
  FamilyKind kind = FamilyKind::Constant;
  HarmonicFunction::Domain domain = HarmonicFunction::Domain::Tree;
  Side side = Side::One;
  std::shared_ptr<const BoundaryCoefficients> coeffs;  // Kernel only
  double c = 0.0;                                      // Exponential only

  /// The member at xi (ignored for non-kernel kinds).
  HarmonicFunction member(const BoundaryPoint& xi = {}) const;
  std::string label() const;
};

struct TreeClassification {
  TreeCase tcase;
  std::shared_ptr<const BoundaryCoefficients> coeffs;
  std::vector<FamilyDescriptor> families;
};

TreeClassification tree_minimal_families(const TreeWalk& w, const SolverOptions& opts = {});

enum class DLCase { I, II };

struct DLClassification {
  DLCase dl_case = DLCase::I;
  double alpha = 0.0;
  std::optional<double> c0;
  double m1 = 0.0;
  double m2_eps = 0.0;    // m_{2.5}
  double m_c0 = 0.0;      // exponential moment at c0 (case II only)
  TreeClassification tree1;
  TreeClassification tree2;
  std::vector<FamilyDescriptor> families;  // all on the DL domain
};

/// Throws Unclassifiable when the drift is nonzero and phi(c) = 1 has no
/// nonzero root.
DLClassification enumerate_minimal_families(const QuadrupleMeasure& w, const SolverOptions& opts = {});

// ---------------------------------------------------------------- exact checks

/// max over xs of |sum_y p(x,y) h(y) - h(x)| / h(x).
double harmonicity_defect(const TreeWalk& w, const std::function<double(const TreeVertex&)>& h,
                          const std::vector<TreeVertex>& xs);
double harmonicity_defect(const QuadrupleMeasure& w, const std::function<double(const DLVertex&)>& h,
                          const std::vector<DLVertex>& xs);

/// Ball of the given radius around o, then `deep` random vertices at distance
/// up to 2 * deep_extent, drawn from the seed.
std::vector<TreeVertex> tree_check_vertices(int q, int radius, int deep, std::int64_t deep_extent, std::uint64_t seed);
std::vector<DLVertex> dl_check_vertices(int q, int r, int radius, int deep, std::int64_t deep_extent,
                                        std::uint64_t seed);

/// Ball around c in T_q (BFS over predecessor and successors).
std::vector<TreeVertex> tree_ball(const TreeVertex& c, int q, int radius);
std::vector<DLVertex> dl_ball(const DLVertex& c, int q, int r, int radius);

/// max over xs of |K(x, g xi) - K(g^-1 x, xi) / K(g^-1 o, xi)| relative to
/// K(x, g xi). Requires the group case q == r.
double cocycle_check(const BoundaryCoefficients& c, const DLVertex& g, const BoundaryPoint& xi,
                     const std::vector<TreeVertex>& xs, Side side);

}  // namespace dlh
