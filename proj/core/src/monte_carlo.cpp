#include "dlharmonic/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "dlharmonic/errors.hpp"

namespace dlh {

void TrajectoryParams::validate() const {
  if (window < 1) throw InvalidInput("window: must be at least 1");
  if (depth_margin < 1) throw InvalidInput("depth_margin: must be at least 1");
  if (steps < 1) throw InvalidInput("steps: must be at least 1");
}

void simulate(const TreeWalk& w, const TreeVertex& x0, std::uint64_t steps, std::uint64_t seed,
              const std::function<void(std::uint64_t, const TreeVertex&)>& visit) {
  Rng rng(seed);
  TreeStepSampler sampler(w);
  TreeVertex z = x0;
  visit(0, z);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    sampler.step(z, rng);
    visit(n, z);
  }
}

void simulate(const QuadrupleMeasure& w, const DLVertex& x0, std::uint64_t steps, std::uint64_t seed,
              const std::function<void(std::uint64_t, const DLVertex&)>& visit) {
  Rng rng(seed);
  DLStepSampler sampler(w);
  DLVertex z = x0;
  visit(0, z);
  for (std::uint64_t n = 1; n <= steps; ++n) {
    sampler.step_in_place(z, rng);
    visit(n, z);
  }
}

std::vector<TreeVertex> simulate(const TreeWalk& w, const TreeVertex& x0, std::uint64_t steps, std::uint64_t seed) {
  std::vector<TreeVertex> out;
  out.reserve(steps + 1);
  simulate(w, x0, steps, seed, [&out](std::uint64_t, const TreeVertex& z) { out.push_back(z); });
  return out;
}

std::vector<DLVertex> simulate(const QuadrupleMeasure& w, const DLVertex& x0, std::uint64_t steps,
                               std::uint64_t seed) {
  std::vector<DLVertex> out;
  out.reserve(steps + 1);
  simulate(w, x0, steps, seed, [&out](std::uint64_t, const DLVertex& z) { out.push_back(z); });
  return out;
}

namespace {

LimitResult run_to_limit(const TreeStepSampler& sampler, const TreeVertex& x0, const std::vector<TreeVertex>& refs,
                         const TrajectoryParams& p, Rng& rng) {
  TreeVertex z = x0;
  std::vector<Level> conf(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) conf[i] = confluent_level(refs[i], z);
  std::uint64_t stable = 0;
  for (std::uint64_t n = 1; n <= p.steps; ++n) {
    sampler.step(z, rng);
    bool same = true;
    Level highest = std::numeric_limits<Level>::min();
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const Level c = confluent_level(refs[i], z);
      if (c != conf[i]) {
        same = false;
        conf[i] = c;
      }
      highest = std::max(highest, c);
    }
    stable = same ? stable + 1 : 0;
    if (stable >= p.window && z.hor() - highest >= p.depth_margin) {
      return {true, n, {z.ancestor_at(z.hor() - p.depth_margin / 2), Continuation::Unknown}};
    }
  }
  return {false, p.steps, {z, Continuation::Unknown}};
}

}  // namespace

LimitResult boundary_limit(const TreeWalk& w, const TreeVertex& x0, const std::vector<TreeVertex>& refs,
                           const TrajectoryParams& p, Rng& rng) {
  p.validate();
  return run_to_limit(TreeStepSampler(w), x0, refs, p, rng);
}

Estimate make_estimate(std::uint64_t hits, std::uint64_t runs, double scale) {
  Estimate e;
  e.hits = hits;
  e.runs = runs;
  if (runs == 0) return e;
  const double f = static_cast<double>(hits) / static_cast<double>(runs);
  e.value = scale * f;
  e.stderr_ = scale * std::sqrt(f * (1.0 - f) / static_cast<double>(runs));
  return e;
}

RatioEstimate ratio(const Estimate& num, const Estimate& den) {
  RatioEstimate r;
  if (den.value == 0.0) throw InvalidInput("ratio: empty denominator cylinder");
  r.value = num.value / den.value;
  const double rn = num.value > 0 ? num.stderr_ / num.value : 0.0;
  const double rd = den.stderr_ / den.value;
  r.stderr_ = std::abs(r.value) * std::sqrt(rn * rn + rd * rd);
  return r;
}

BinCounts count_boundary_limits(const TreeWalk& w, const TreeVertex& x0, const std::vector<TreeVertex>& refs,
                                std::uint64_t runs, const TrajectoryParams& p, std::size_t bins,
                                const LimitClassifier& classify, unsigned threads) {
  p.validate();
  threads = std::max(1u, threads);
  std::vector<BinCounts> partial(threads);
  std::vector<std::exception_ptr> errors(threads);

  auto work = [&](unsigned t) {
    try {
      TreeStepSampler sampler(w);
      BinCounts& out = partial[t];
      out.hits.assign(bins, 0);
      for (std::uint64_t i = t; i < runs; i += threads) {
        Rng rng(derive_seed(p.seed, i));
        const LimitResult res = run_to_limit(sampler, x0, refs, p, rng);
        ++out.runs;
        if (!res.converged) {
          ++out.unconverged;
          continue;
        }
        if (auto b = classify(res.limit)) ++out.hits.at(*b);
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  BinCounts total;
  total.hits.assign(bins, 0);
  for (const auto& c : partial) {
    total.runs += c.runs;
    total.unconverged += c.unconverged;
    for (std::size_t b = 0; b < bins; ++b) total.hits[b] += c.hits[b];
  }
  return total;
}

std::vector<Estimate> estimate_boundary_coefficients(const TreeWalk& w, std::uint64_t runs, std::int64_t max_j,
                                                     const TrajectoryParams& p, BinCounts* raw, unsigned threads) {
  const TreeVertex o;
  const auto bins = static_cast<std::size_t>(max_j + 1);
  const BinCounts counts = count_boundary_limits(
      w, o, {o}, runs, p, bins,
      [&](const BoundaryPoint& xi) -> std::optional<std::size_t> {
        const std::int64_t k = up_to_boundary(o, xi);
        if (k > max_j) return std::nullopt;
        return static_cast<std::size_t>(k);
      },
      threads);
  std::vector<Estimate> out;
  for (std::size_t j = 0; j < bins; ++j) out.push_back(counts.estimate(j));
  if (raw) *raw = counts;
  return out;
}

Estimate estimate_cylinder_measure(const TreeWalk& w, const TreeVertex& start, const TreeVertex& x, std::int64_t k,
                                   std::int64_t l, std::uint64_t runs, const TrajectoryParams& p, unsigned threads) {
  const TreeVertex o;
  const BinCounts counts = count_boundary_limits(
      w, start, {o, x}, runs, p, 1,
      [&](const BoundaryPoint& xi) -> std::optional<std::size_t> {
        if (up_to_boundary(o, xi) == k && up_to_boundary(x, xi) == l) return 0;
        return std::nullopt;
      },
      threads);
  return counts.estimate(0);
}

Estimate estimate_harmonic_measure(const TreeWalk& w, const TreeVertex& x, std::int64_t k, std::int64_t l,
                                   std::uint64_t runs, const TrajectoryParams& p, double c0, unsigned threads) {
  Estimate e = estimate_cylinder_measure(w, x, x, k, l, runs, p, threads);
  const double scale = std::exp(c0 * static_cast<double>(x.hor()));
  e.value *= scale;
  e.stderr_ *= scale;
  return e;
}

// ---------------------------------------------------------------- class dynamics

TreePairCounter::TreePairCounter(int q, std::size_t memory_cap) : q_(q), cap_(memory_cap) {
  if (q < 2) throw InvalidInput("branching q must be at least 2");
}

TreeVertex TreePairCounter::representative(UpPair c) {
  if (c.r == 0) return TreeVertex(-c.k, {});
  std::vector<Symbol> digits(static_cast<std::size_t>(c.r), 0);
  digits[0] = 1;  // leave o's ancestral line at level 1 - k
  return TreeVertex::from_digits(c.r - c.k, std::move(digits));
}

TreePairCounter::Row TreePairCounter::enumerate(UpPair c, UpPair step) const {
  const TreeVertex o;
  std::map<UpPair, double> tally;
  for_each_in_cone({representative(c), step.k, step.r}, q_, [&](const TreeVertex& y) {
    ++tally[{up(o, y) - c.k, up(y, o) - c.r}];
  });
  return {tally.begin(), tally.end()};
}

const TreePairCounter::Row& TreePairCounter::counts(UpPair c, UpPair step) {
  const UpPair reduced{std::min(c.k, step.k + step.r + 1), std::min(c.r, step.k + 1)};
  const auto key = std::make_tuple(reduced.k, reduced.r, step.k, step.r);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  if (memo_.size() >= cap_) {
    throw DepthExceeded("pair-count memo reached its cap of " + std::to_string(cap_) + " entries");
  }
  return memo_.emplace(key, enumerate(reduced, step)).first->second;
}

ClassDistribution initial_tree_distribution() { return {0, {{{0, 0}, 1.0}}}; }
DLClassDistribution initial_dl_distribution() { return {0, {{{0, 0, 0, 0}, 1.0}}}; }

// Works on class masses M(c) = p(c) |T_c|: a single source in c sends
// step_pv * N(c, s, c') to class c', and all |T_c| sources behave alike.
ClassDistribution class_collapsed_step(const TreeWalk& w, const ClassDistribution& d, TreePairCounter& counter) {
  const int q = w.q();
  std::map<UpPair, double> mass;
  for (const auto& [c, pv] : d.table) {
    const double source = pv * cone_size(q, c.k, c.r);
    for (const auto& [s, ms] : w.mass()) {
      const double step_pv = w.per_vertex(s);
      for (const auto& [delta, n] : counter.counts(c, s)) {
        mass[{c.k + delta.k, c.r + delta.r}] += source * step_pv * n;
      }
    }
  }
  ClassDistribution out{d.horizon + 1, {}};
  for (const auto& [c, m] : mass) out.table[c] = m / cone_size(q, c.k, c.r);
  return out;
}

DLClassDistribution class_collapsed_step(const QuadrupleMeasure& w, const DLClassDistribution& d,
                                         TreePairCounter& counter1, TreePairCounter& counter2) {
  std::map<UpQuadruple, double> mass;
  for (const auto& [c, pv] : d.table) {
    const double source = pv * w.class_size(c);
    for (const auto& [s, step_pv] : w.per_vertex()) {
      const auto& rows1 = counter1.counts({c.k1, c.l1}, {s.k1, s.l1});
      const auto& rows2 = counter2.counts({c.k2, c.l2}, {s.k2, s.l2});
      for (const auto& [d1, n1] : rows1) {
        for (const auto& [d2, n2] : rows2) {
          mass[{c.k1 + d1.k, c.l1 + d1.r, c.k2 + d2.k, c.l2 + d2.r}] += source * step_pv * n1 * n2;
        }
      }
    }
  }
  DLClassDistribution out{d.horizon + 1, {}};
  for (const auto& [c, m] : mass) out.table[c] = m / w.class_size(c);
  return out;
}

double total_mass(const ClassDistribution& d, int q) {
  double s = 0.0;
  for (const auto& [c, pv] : d.table) s += pv * cone_size(q, c.k, c.r);
  return s;
}

double total_mass(const DLClassDistribution& d, int q, int r) {
  double s = 0.0;
  for (const auto& [c, pv] : d.table) s += pv * cone_size(q, c.k1, c.l1) * cone_size(r, c.k2, c.l2);
  return s;
}

// ---------------------------------------------------------------- Green sums

GreenTable::GreenTable(const TreeWalk& w, std::uint64_t n_max, std::size_t memory_cap) : n_max_(n_max) {
  const int q = w.q();
  const std::int64_t R = std::max<std::int64_t>(1, w.range());
  width_ = static_cast<std::int64_t>(n_max) * R + 1;
  const auto cells = static_cast<std::size_t>(width_) * static_cast<std::size_t>(width_);
  if (cells > memory_cap) {
    throw DepthExceeded("Green table needs " + std::to_string(cells) + " cells, cap is " +
                        std::to_string(memory_cap));
  }
  auto idx = [this](std::int64_t a, std::int64_t b) {
    return static_cast<std::size_t>(a) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(b);
  };
  // 1 / |T_{a,b}| depends on a only through a > 0
  std::vector<double> inv_below(static_cast<std::size_t>(width_)), inv_side(static_cast<std::size_t>(width_));
  for (std::int64_t b = 0; b < width_; ++b) {
    inv_below[static_cast<std::size_t>(b)] = 1.0 / cone_size(q, 0, b);
    inv_side[static_cast<std::size_t>(b)] = 1.0 / cone_size(q, 1, b);
  }
  auto inv_size = [&](std::int64_t a, std::int64_t b) {
    return a == 0 ? inv_below[static_cast<std::size_t>(b)] : inv_side[static_cast<std::size_t>(b)];
  };

  // Rows for every reduced source class, resolved once per step class.
  TreePairCounter counter(q);
  struct StepRows {
    UpPair step;
    double pv;
    std::vector<std::vector<const TreePairCounter::Row*>> rows;  // [min(a, k+r+1)][min(b, k+1)]
  };
  std::vector<StepRows> steps;
  for (const auto& [s, m] : w.mass()) {
    StepRows sr{s, w.per_vertex(s), {}};
    sr.rows.resize(static_cast<std::size_t>(s.k + s.r + 2));
    for (std::int64_t a = 0; a <= s.k + s.r + 1; ++a) {
      for (std::int64_t b = 0; b <= s.k + 1; ++b) sr.rows[static_cast<std::size_t>(a)].push_back(&counter.counts({a, b}, s));
    }
    steps.push_back(std::move(sr));
  }

  sum_.assign(cells, 0.0);
  last_.assign(cells, 0.0);
  std::vector<double> mass(cells, 0.0), next(cells, 0.0);
  mass[idx(0, 0)] = 1.0;
  std::int64_t max_a = 0, max_b = 0;
  for (std::uint64_t n = 0;; ++n) {
    for (std::int64_t a = 0; a <= max_a; ++a) {
      for (std::int64_t b = 0; b <= max_b; ++b) {
        const double m = mass[idx(a, b)];
        const double pv = m * inv_size(a, b);
        sum_[idx(a, b)] += pv;
        if (n == n_max) last_[idx(a, b)] = pv;
      }
    }
    if (n == n_max) break;
    std::int64_t new_a = max_a, new_b = max_b;
    for (std::int64_t a = 0; a <= max_a; ++a) {
      for (std::int64_t b = 0; b <= max_b; ++b) {
        const double m = mass[idx(a, b)];
        if (m == 0.0) continue;
        for (const auto& sr : steps) {
          const auto ra = static_cast<std::size_t>(std::min(a, sr.step.k + sr.step.r + 1));
          const auto rb = static_cast<std::size_t>(std::min(b, sr.step.k + 1));
          for (const auto& [d, cnt] : *sr.rows[ra][rb]) {
            const std::int64_t a2 = a + d.k, b2 = b + d.r;
            next[idx(a2, b2)] += m * sr.pv * cnt;
            new_a = std::max(new_a, a2);
            new_b = std::max(new_b, b2);
          }
        }
      }
    }
    max_a = new_a;
    max_b = new_b;
    mass.swap(next);
    std::fill(next.begin(), next.end(), 0.0);
  }
}

GreenTable::Value GreenTable::at(UpPair c) const {
  if (c.k < 0 || c.r < 0) throw InvalidInput("Green table: negative class index");
  if (c.k >= width_ || c.r >= width_) return {};  // unreachable within n_max steps
  const auto i = static_cast<std::size_t>(c.k) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.r);
  return {sum_[i], last_[i]};
}

GreenTable::Value GreenTable::partial(const TreeVertex& x, const TreeVertex& y) const {
  return at({up(x, y), up(y, x)});
}

GreenTable::Value green_partial(const TreeWalk& w, const TreeVertex& x, const TreeVertex& y, std::uint64_t n_max) {
  return GreenTable(w, n_max).partial(x, y);
}

double dl_return_partial(const QuadrupleMeasure& w, std::uint64_t n_max) {
  TreePairCounter c1(w.q()), c2(w.r());
  DLClassDistribution d = initial_dl_distribution();
  double s = 0.0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    d = class_collapsed_step(w, d, c1, c2);
    if (auto it = d.table.find({0, 0, 0, 0}); it != d.table.end()) s += it->second;
  }
  return s;
}

MartinReport martin_convergence_test(const TreeWalk& w, const BoundaryCoefficients& c, const TreeVertex& x,
                                     const BoundaryPoint& xi, const std::vector<std::int64_t>& depths,
                                     std::uint64_t n_max, double slack) {
  const GreenTable green(w, n_max);
  const TreeVertex o;
  const double target = kernel_at(c, x, xi);
  MartinReport out;
  for (const std::int64_t n : depths) {
    const TreeVertex y = geodesic_toward(xi, n);
    const auto gx = green.partial(x, y);
    const auto go = green.partial(o, y);
    if (go.sum == 0.0) throw DepthExceeded("y_n unreachable from o within N_max steps");
    MartinRow row;
    row.n = n;
    row.estimate = gx.sum / go.sum;
    row.target = target;
    row.rel_err = std::abs(row.estimate - target) / target;
    row.last_increment = std::max(gx.last_increment, go.last_increment);
    if (!out.rows.empty() && row.rel_err > out.rows.back().rel_err + slack) out.trending_down = false;
    out.rows.push_back(row);
  }
  if (!out.rows.empty()) out.final_rel_err = out.rows.back().rel_err;
  return out;
}

namespace {

template <class Vertex, class Sampler, class Step>
TransienceReport count_returns(const Vertex& start, const Sampler& sampler, Step step, std::uint64_t runs,
                               std::uint64_t steps, std::uint64_t seed) {
  TransienceReport out;
  out.runs = runs;
  out.steps = steps;
  const std::uint64_t half = steps / 2;
  double s_half = 0, ss_half = 0, s_full = 0, ss_full = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    Rng rng(derive_seed(seed, i));
    Vertex z = start;
    double r_half = 0, r_full = 0;
    for (std::uint64_t n = 1; n <= steps; ++n) {
      step(sampler, z, rng);
      if (z == start) {
        r_full += 1;
        if (n <= half) r_half += 1;
      }
    }
    s_half += r_half;
    ss_half += r_half * r_half;
    s_full += r_full;
    ss_full += r_full * r_full;
  }
  const auto n = static_cast<double>(std::max<std::uint64_t>(runs, 1));
  auto se = [n](double s, double ss) { return std::sqrt(std::max(0.0, ss / n - (s / n) * (s / n)) / n); };
  out.mean_returns_half = s_half / n;
  out.stderr_half = se(s_half, ss_half);
  out.mean_returns = s_full / n;
  out.stderr_ = se(s_full, ss_full);
  return out;
}

}  // namespace

TransienceReport transience_diagnostic(const TreeWalk& w, std::uint64_t runs, std::uint64_t steps,
                                       std::uint64_t seed) {
  return count_returns(
      TreeVertex(), TreeStepSampler(w), [](const TreeStepSampler& s, TreeVertex& z, Rng& rng) { s.step(z, rng); },
      runs, steps, seed);
}

TransienceReport transience_diagnostic(const QuadrupleMeasure& w, std::uint64_t runs, std::uint64_t steps,
                                       std::uint64_t seed) {
  return count_returns(
      dl_root(), DLStepSampler(w), [](const DLStepSampler& s, DLVertex& z, Rng& rng) { s.step_in_place(z, rng); }, runs,
      steps, seed);
}

}  // namespace dlh
