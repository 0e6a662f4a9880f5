#include "dlharmonic/boundary_analysis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "dlharmonic/errors.hpp"
#include "dlharmonic/rng.hpp"

namespace dlh {

std::string to_string(DriftCase c) {
  switch (c) {
    case DriftCase::PositiveDrift: return "PositiveDrift";
    case DriftCase::ZeroDrift: return "ZeroDrift";
    case DriftCase::NegativeDriftConjugated: return "NegativeDriftConjugated";
  }
  return "?";
}

std::string to_string(Normalization n) {
  return n == Normalization::TotalMassOne ? "TotalMassOne" : "AZeroOne";
}

TreeCase classify_tree_case(const TreeWalk& w, const RootOptions& opts) {
  const ZWalk z = project_to_z(w);
  TreeCase out;
  out.alpha = drift(z);
  if (std::abs(out.alpha) <= opts.drift_tolerance) {
    out.drift = DriftCase::ZeroDrift;
    return out;
  }
  std::optional<double> c0;
  try {
    c0 = find_c0(z, opts);
  } catch (const NoBracket& e) {
    if (out.alpha < 0) throw Unclassifiable(std::string("negative drift and ") + e.what());
    throw;
  }
  if (out.alpha > 0) {
    out.drift = DriftCase::PositiveDrift;
    out.c0 = c0;
    return out;
  }
  if (!c0) {
    std::ostringstream msg;
    msg << "drift " << out.alpha << " < 0 and phi(c) = 1 has no positive root";
    throw Unclassifiable(msg.str());
  }
  out.drift = DriftCase::NegativeDriftConjugated;
  out.c0 = c0;
  return out;
}

// ---------------------------------------------------------------- coefficient system

std::vector<double> coefficient_map(const TreeWalk& w, const std::vector<double>& a, TailClosure tail) {
  if (a.size() < 2) throw InvalidInput("coefficient truncation must be at least 1");
  const auto J = static_cast<std::int64_t>(a.size()) - 1;
  const double q = w.q();
  const double slope = a[J] - a[J - 1];

  std::vector<double> prefix(a.size());
  std::partial_sum(a.begin(), a.end(), prefix.begin());

  auto A = [&](std::int64_t i) -> double {
    if (i <= J) return a[static_cast<std::size_t>(i)];
    return tail == TailClosure::Zero ? 0.0 : a[J] + static_cast<double>(i - J) * slope;
  };
  // a_0 + ... + a_r
  auto S = [&](std::int64_t r) -> double {
    if (r <= J) return prefix[static_cast<std::size_t>(r)];
    if (tail == TailClosure::Zero) return prefix[J];
    const auto n = static_cast<double>(r - J);
    return prefix[J] + n * a[J] + slope * n * (n + 1) / 2;
  };

  std::vector<double> out(a.size(), 0.0);
  for (const auto& [c, m] : w.mass()) {
    const std::int64_t k = c.k, r = c.r;
    if (k >= 1 && r >= 1) out[0] += A(r) * m / ((q - 1) * std::pow(q, static_cast<double>(k - 1)));
    if (k >= 1 && r == 0) out[0] += a[0] * m / std::pow(q, static_cast<double>(k));
    if (k == 0) out[0] += S(r) * m;

    for (std::int64_t j = 1; j <= J; ++j) {
      double v = 0.0;
      if (k <= j - 1) {
        v += A(j + r - k) * m;
      } else if (k >= j + 1 && r >= 1) {
        v += A(r) * m / std::pow(q, static_cast<double>(k - j));
      }
      if (k >= j && r == 0) v += (q - 1) / q * a[0] * m / std::pow(q, static_cast<double>(k - j));
      if (k == j && r >= 1) v += (S(r - 1) + (q - 2) / (q - 1) * A(r)) * m;
      out[static_cast<std::size_t>(j)] += v;
    }
  }
  return out;
}

TreeWalk solver_walk(const TreeWalk& w, const TreeCase& tcase) {
  if (tcase.drift == DriftCase::NegativeDriftConjugated) return conjugate(w, *tcase.c0);
  return w;
}

namespace {

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  double out = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) out = std::max(out, std::abs(x[i] - y[i]));
  return out;
}

// Damped power iteration a <- (a + F(a)) / 2 with sum(a) = 1; damping removes
// any periodicity without moving the fixed ray.
BoundaryCoefficients solve_summable(const TreeWalk& w, const SolverOptions& opts) {
  const std::size_t n = opts.truncation + 1;
  const ZWalk z = project_to_z(w);
  std::optional<double> rate;
  try {
    rate = find_c0(z, opts.root);
  } catch (const NoBracket&) {
  }
  // start from the tail decay e^{c j}, c < 0 the root of phi(c) = 1
  const double decay = rate && *rate < 0 ? *rate : -1.0;
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = std::exp(decay * static_cast<double>(j));

  auto normalize = [](std::vector<double>& v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= s;
  };
  normalize(a);

  constexpr double kNegligible = 1e-250;  // components below this are not tracked
  std::uint64_t it = 0;
  double change = 0.0;
  for (; it < opts.max_iterations; ++it) {
    std::vector<double> b = coefficient_map(w, a, TailClosure::Zero);
    for (std::size_t j = 0; j < n; ++j) b[j] = 0.5 * (a[j] + b[j]);
    normalize(b);
    change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (b[j] < kNegligible) continue;
      change = std::max(change, std::abs(b[j] - a[j]) / b[j]);
    }
    a = std::move(b);
    if (change < opts.iterate_tolerance) break;
  }
  const double residual = max_abs_diff(coefficient_map(w, a, TailClosure::Zero), a);
  if (it == opts.max_iterations || residual > opts.tolerance) throw NoConvergence(it, residual);

  BoundaryCoefficients out;
  out.q = w.q();
  out.a = std::move(a);
  out.normalization = Normalization::TotalMassOne;
  out.residual = residual;
  out.iterations = it + 1;
  return out;
}

// Zero drift: nu is infinite and a_j levels off, so a zero tail biases the
// whole vector. Solve (I - M) a = 0 with a_0 = 1 directly, extrapolating the
// tail linearly.
BoundaryCoefficients solve_recurrent(const TreeWalk& w, const SolverOptions& opts) {
  const std::size_t n = opts.truncation + 1;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<double> unit(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    unit[i] = 1.0;
    const std::vector<double> col = coefficient_map(w, unit, TailClosure::Linear);
    for (std::size_t j = 0; j < n; ++j) system(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) -= col[j];
    unit[i] = 0.0;
  }
  const auto last = static_cast<Eigen::Index>(n - 1);
  system.row(last).setZero();
  system(last, 0) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  rhs(last) = 1.0;
  const Eigen::VectorXd sol = system.partialPivLu().solve(rhs);

  std::vector<double> a(sol.data(), sol.data() + sol.size());
  const double residual = max_abs_diff(coefficient_map(w, a, TailClosure::Linear), a);
  if (!std::isfinite(residual) || residual > opts.tolerance) throw NoConvergence(1, residual);

  BoundaryCoefficients out;
  out.q = w.q();
  out.a = std::move(a);
  out.normalization = Normalization::AZeroOne;
  out.residual = residual;
  out.iterations = 1;
  return out;
}

}  // namespace

BoundaryCoefficients solve_coefficients(const TreeWalk& w, const SolverOptions& opts) {
  return solve_coefficients(w, classify_tree_case(w, opts.root), opts);
}

BoundaryCoefficients solve_coefficients(const TreeWalk& w, const TreeCase& tcase, const SolverOptions& opts) {
  if (opts.truncation < 2) throw InvalidInput("J: truncation must be at least 2");
  const TreeWalk solved = solver_walk(w, tcase);
  BoundaryCoefficients out =
      tcase.drift == DriftCase::ZeroDrift ? solve_recurrent(solved, opts) : solve_summable(solved, opts);
  out.tcase = tcase;
  return out;
}

CoefficientResiduals coefficient_residuals(const BoundaryCoefficients& c, const TreeWalk& solved_walk) {
  const TailClosure tail =
      c.normalization == Normalization::AZeroOne ? TailClosure::Linear : TailClosure::Zero;
  const std::vector<double> f = coefficient_map(solved_walk, c.a, tail);
  CoefficientResiduals out;
  out.root_equation = std::abs(f[0] - c.a[0]);
  for (std::size_t j = 1; j < f.size(); ++j) out.level_equations = std::max(out.level_equations, std::abs(f[j] - c.a[j]));

  const ZWalk z = project_to_z(solved_walk);
  const std::int64_t N = solved_walk.range();  // p(x,y) = 0 beyond distance N
  const auto J = static_cast<std::int64_t>(c.truncation());
  for (std::int64_t j = N + 1; j < J - N; ++j) {
    double s = 0.0;
    for (const auto& [jump, p] : z.mass()) s += c.a[static_cast<std::size_t>(j + jump)] * p;
    out.tail_recurrence = std::max(out.tail_recurrence, std::abs(s - c.a[static_cast<std::size_t>(j)]));
  }
  return out;
}

// ---------------------------------------------------------------- kernels

int epsilon(std::int64_t k, std::int64_t l, std::int64_t m) {
  if (k < 0 || l < 0) throw InvalidInput("epsilon: k and l must be nonnegative");
  (void)m;
  return (l >= 1 ? 1 : 0) - (k >= 1 ? 1 : 0);
}

double kernel_value(const BoundaryCoefficients& c, std::int64_t k, std::int64_t l, std::int64_t m) {
  const auto J = static_cast<std::int64_t>(c.truncation());
  if (k < 0 || l < 0) throw InvalidInput("kernel: k and l must be nonnegative");
  if (k > J || l > J) {
    throw TruncationExceeded("kernel needs a_" + std::to_string(std::max(k, l)) + " but coefficients stop at J = " +
                             std::to_string(J));
  }
  const double q = c.q;
  double v = c.a[static_cast<std::size_t>(l)] / c.a[static_cast<std::size_t>(k)];
  v *= std::pow(q, static_cast<double>(k - l + m));
  v *= std::pow(q / (q - 1), epsilon(k, l, m));
  if (c.tcase.drift == DriftCase::NegativeDriftConjugated) v *= std::exp(*c.tcase.c0 * static_cast<double>(m));
  return v;
}

double kernel_at(const BoundaryCoefficients& c, const TreeVertex& x, const BoundaryPoint& xi) {
  return kernel_value(c, up_to_boundary(TreeVertex(), xi), up_to_boundary(x, xi), x.hor());
}

std::vector<double> minimal_z_harmonics(const ZWalk& w, const RootOptions& opts) {
  std::vector<double> out{0.0};
  if (auto c0 = find_c0(w, opts)) out.push_back(*c0);
  return out;
}

double z_harmonic_defect(const ZWalk& w, double c, std::int64_t radius) {
  double worst = 0.0;
  for (std::int64_t m = -radius; m <= radius; ++m) {
    const double here = std::exp(c * static_cast<double>(m));
    double s = 0.0;
    for (const auto& [n, p] : w.mass()) s += p * std::exp(c * static_cast<double>(m + n));
    worst = std::max(worst, std::abs(s - here) / here);
  }
  return worst;
}

// ---------------------------------------------------------------- harmonic functions

HarmonicFunction HarmonicFunction::tree_kernel(std::shared_ptr<const BoundaryCoefficients> coeffs, BoundaryPoint xi,
                                               Side side) {
  if (!coeffs) throw InvalidInput("tree kernel without coefficients");
  return HarmonicFunction(TreeKernelTerm{std::move(coeffs), std::move(xi)}, Domain::Tree, side);
}

HarmonicFunction HarmonicFunction::exponential(double c, Side side) {
  return HarmonicFunction(ExponentialTerm{c}, Domain::Tree, side);
}

HarmonicFunction HarmonicFunction::constant(Domain domain) {
  return HarmonicFunction(ConstantTerm{}, domain, Side::One);
}

HarmonicFunction HarmonicFunction::mixture(std::vector<WeightedHarmonic> parts) {
  if (parts.empty()) throw InvalidInput("mixture needs at least one part");
  const Domain d = parts.front().h.domain();
  for (const auto& p : parts) {
    if (!(p.weight > 0)) throw InvalidInput("mixture weights must be positive");
    if (p.h.domain() != d) throw InvalidInput("mixture parts live on different domains");
  }
  return HarmonicFunction(MixtureTerm{std::move(parts)}, d, Side::One);
}

double HarmonicFunction::operator()(const TreeVertex& x) const {
  if (domain_ != Domain::Tree) throw InvalidInput("DL function evaluated at a tree vertex");
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TreeKernelTerm>) {
          return kernel_at(*t.coeffs, x, t.xi);
        } else if constexpr (std::is_same_v<T, ExponentialTerm>) {
          return std::exp(t.c * static_cast<double>(x.hor()));
        } else if constexpr (std::is_same_v<T, ConstantTerm>) {
          return 1.0;
        } else {
          double s = 0.0;
          for (const auto& p : t.parts) s += p.weight * p.h(x);
          return s;
        }
      },
      kind_);
}

double HarmonicFunction::operator()(const DLVertex& x) const {
  if (domain_ != Domain::DL) throw InvalidInput("tree function evaluated on DL; lift it first");
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TreeKernelTerm>) {
          return kernel_at(*t.coeffs, project(x, side_), t.xi);
        } else if constexpr (std::is_same_v<T, ExponentialTerm>) {
          const auto h = side_ == Side::One ? x.pos : -x.pos;
          return std::exp(t.c * static_cast<double>(h));
        } else if constexpr (std::is_same_v<T, ConstantTerm>) {
          return 1.0;
        } else {
          double s = 0.0;
          for (const auto& p : t.parts) s += p.weight * p.h(x);
          return s;
        }
      },
      kind_);
}

std::string HarmonicFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  const char* where = domain_ == Domain::DL ? (side_ == Side::One ? "(x1)" : "(x2)") : "(x)";
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, TreeKernelTerm>) {
          os << "K" << static_cast<int>(side_) << where << " at xi anchored at hor " << t.xi.anchor.hor();
        } else if constexpr (std::is_same_v<T, ExponentialTerm>) {
          os << "exp(" << t.c << " hor" << where << ")";
        } else if constexpr (std::is_same_v<T, ConstantTerm>) {
          os << "1";
        } else {
          for (std::size_t i = 0; i < t.parts.size(); ++i) {
            if (i) os << " + ";
            os << t.parts[i].weight << " * [" << t.parts[i].h.describe() << "]";
          }
        }
      },
      kind_);
  return os.str();
}

HarmonicFunction lift_to_dl(const HarmonicFunction& h) {
  if (h.domain() == HarmonicFunction::Domain::DL) return h;
  if (const auto* mix = std::get_if<MixtureTerm>(&h.kind())) {
    std::vector<WeightedHarmonic> parts;
    for (const auto& p : mix->parts) parts.push_back({p.weight, lift_to_dl(p.h)});
    return HarmonicFunction::mixture(std::move(parts));
  }
  return HarmonicFunction(h.kind(), HarmonicFunction::Domain::DL, h.side());
}

// ---------------------------------------------------------------- classification

HarmonicFunction FamilyDescriptor::member(const BoundaryPoint& xi) const {
  HarmonicFunction h = HarmonicFunction::constant();
  switch (kind) {
    case FamilyKind::Kernel: h = HarmonicFunction::tree_kernel(coeffs, xi, side); break;
    case FamilyKind::Exponential: h = HarmonicFunction::exponential(c, side); break;
    case FamilyKind::Constant: break;
  }
  return domain == HarmonicFunction::Domain::DL ? lift_to_dl(h) : h;
}

std::string FamilyDescriptor::label() const {
  std::ostringstream os;
  os.precision(17);
  const bool dl = domain == HarmonicFunction::Domain::DL;
  switch (kind) {
    case FamilyKind::Kernel: os << "kernel" << (dl ? std::to_string(static_cast<int>(side)) : ""); break;
    case FamilyKind::Exponential: os << "exp(" << c << " hor)"; break;
    case FamilyKind::Constant: os << "constant"; break;
  }
  return os.str();
}

TreeClassification tree_minimal_families(const TreeWalk& w, const SolverOptions& opts) {
  TreeClassification out;
  out.tcase = classify_tree_case(w, opts.root);
  out.coeffs = std::make_shared<const BoundaryCoefficients>(solve_coefficients(w, out.tcase, opts));
  FamilyDescriptor kernel;
  kernel.kind = FamilyKind::Kernel;
  kernel.coeffs = out.coeffs;
  out.families.push_back(kernel);
  if (out.tcase.drift == DriftCase::PositiveDrift) {
    if (out.tcase.c0) {
      FamilyDescriptor e;
      e.kind = FamilyKind::Exponential;
      e.c = *out.tcase.c0;
      out.families.push_back(e);
    }
  } else {
    out.families.push_back(FamilyDescriptor{});
  }
  return out;
}

DLClassification enumerate_minimal_families(const QuadrupleMeasure& w, const SolverOptions& opts) {
  DLClassification out;
  const ZWalk z = z_law(w);
  out.alpha = drift(z);
  const bool zero = std::abs(out.alpha) <= opts.root.drift_tolerance;
  if (!zero) {
    try {
      out.c0 = find_c0(z, opts.root);
    } catch (const NoBracket& e) {
      throw Unclassifiable(e.what());
    }
    if (!out.c0) {
      std::ostringstream msg;
      msg << "drift " << out.alpha << " != 0 and phi(c) = 1 has no nonzero root";
      throw Unclassifiable(msg.str());
    }
  }
  out.dl_case = zero ? DLCase::I : DLCase::II;
  out.m1 = moment(w, 1.0);
  out.m2_eps = moment(w, 2.5);
  if (out.c0) out.m_c0 = exp_moment(w, *out.c0);

  out.tree1 = tree_minimal_families(project_to_tree(w, Side::One), opts);
  out.tree2 = tree_minimal_families(project_to_tree(w, Side::Two), opts);
  for (auto [side, tree] : {std::pair{Side::One, &out.tree1}, std::pair{Side::Two, &out.tree2}}) {
    FamilyDescriptor f;
    f.kind = FamilyKind::Kernel;
    f.domain = HarmonicFunction::Domain::DL;
    f.side = side;
    f.coeffs = tree->coeffs;
    out.families.push_back(f);
  }
  if (zero) {
    FamilyDescriptor f;
    f.domain = HarmonicFunction::Domain::DL;
    out.families.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------- exact checks

double harmonicity_defect(const TreeWalk& w, const std::function<double(const TreeVertex&)>& h,
                          const std::vector<TreeVertex>& xs) {
  double worst = 0.0;
  for (const auto& x : xs) {
    long double s = 0.0L;
    for (const auto& [y, p] : transitions(w, x)) s += static_cast<long double>(p) * h(y);
    const double hx = h(x);
    worst = std::max(worst, static_cast<double>(std::abs(s - hx) / hx));
  }
  return worst;
}

double harmonicity_defect(const QuadrupleMeasure& w, const std::function<double(const DLVertex&)>& h,
                          const std::vector<DLVertex>& xs) {
  double worst = 0.0;
  for (const auto& x : xs) {
    long double s = 0.0L;
    for (const auto& [y, p] : transitions(w, x)) s += static_cast<long double>(p) * h(y);
    const double hx = h(x);
    worst = std::max(worst, static_cast<double>(std::abs(s - hx) / hx));
  }
  return worst;
}

namespace {

template <class V, class Next>
std::vector<V> bfs_ball(const V& c, int radius, Next next) {
  std::set<V> seen{c};
  std::vector<V> frontier{c};
  for (int d = 0; d < radius; ++d) {
    std::vector<V> fresh;
    for (const auto& v : frontier) {
      for (auto& u : next(v)) {
        if (seen.insert(u).second) fresh.push_back(std::move(u));
      }
    }
    frontier = std::move(fresh);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

std::vector<TreeVertex> tree_ball(const TreeVertex& c, int q, int radius) {
  return bfs_ball(c, radius, [q](const TreeVertex& v) {
    std::vector<TreeVertex> out = successors(v, q);
    out.push_back(v.predecessor());
    return out;
  });
}

std::vector<DLVertex> dl_ball(const DLVertex& c, int q, int r, int radius) {
  return bfs_ball(c, radius, [q, r](const DLVertex& v) { return neighbors(v, q, r); });
}

std::vector<TreeVertex> tree_check_vertices(int q, int radius, int deep, std::int64_t deep_extent,
                                            std::uint64_t seed) {
  std::vector<TreeVertex> out = tree_ball(TreeVertex(), q, radius);
  Rng rng(seed);
  std::uniform_int_distribution<std::int64_t> len(1, std::max<std::int64_t>(1, deep_extent));
  for (int i = 0; i < deep; ++i) {
    TreeVertex x;
    const std::int64_t k = len(rng), l = len(rng);
    move_uniform_in_cone(x, {k, l}, q, rng);
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<DLVertex> dl_check_vertices(int q, int r, int radius, int deep, std::int64_t deep_extent,
                                        std::uint64_t seed) {
  std::vector<DLVertex> out = dl_ball(dl_root(), q, r, radius);
  Rng rng(seed);
  std::uniform_int_distribution<std::int64_t> len(0, std::max<std::int64_t>(1, deep_extent));
  for (int i = 0; i < deep; ++i) {
    TreeVertex x1, x2;
    move_uniform_in_cone(x1, {len(rng), len(rng)}, q, rng);
    const std::int64_t k2 = std::max<std::int64_t>(0, x1.hor()) + len(rng);
    move_uniform_in_cone(x2, {k2, k2 - x1.hor()}, r, rng);
    out.push_back(compose(x1, x2));
  }
  return out;
}

double cocycle_check(const BoundaryCoefficients& c, const DLVertex& g, const BoundaryPoint& xi,
                     const std::vector<TreeVertex>& xs, Side side) {
  const int q = c.q;
  const DLVertex ginv = group_inverse(g, q, q);
  const BoundaryPoint gxi = induced_boundary_action(g, xi, side, q, q);
  const double norm = kernel_at(c, induced_tree_action(ginv, TreeVertex(), side, q, q), xi);
  double worst = 0.0;
  for (const auto& x : xs) {
    const double lhs = kernel_at(c, x, gxi);
    const double rhs = kernel_at(c, induced_tree_action(ginv, x, side, q, q), xi) / norm;
    worst = std::max(worst, std::abs(lhs - rhs) / lhs);
  }
  return worst;
}

}  // namespace dlh
