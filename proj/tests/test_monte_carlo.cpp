#include "doctest.h"

#include <cmath>
#include <set>

#include "dlharmonic/errors.hpp"
#include "dlharmonic/monte_carlo.hpp"
#include "support/oracles.hpp"

using namespace dlh;

namespace {

TreeWalk drift04() { return TreeWalk(2, {{{0, 1}, 0.7}, {{1, 0}, 0.3}}); }
TreeWalk down_only() { return TreeWalk(2, {{{0, 1}, 1.0}}); }
ZWalk two_point(double p) { return ZWalk({{1, p}, {-1, 1.0 - p}}); }

TrajectoryParams params(std::uint64_t seed) {
  TrajectoryParams p;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("trajectories") {
  const TreeWalk lazy(2, {{{0, 0}, 1.0}});
  const auto path = simulate(lazy, TreeVertex(2, {{0, 1}}), 50, 1);
  CHECK(path.size() == 51);
  for (const auto& v : path) CHECK(v == TreeVertex(2, {{0, 1}}));
  CHECK(simulate(drift04(), TreeVertex{}, 200, 7) == simulate(drift04(), TreeVertex{}, 200, 7));
  CHECK(simulate(switch_walk(two_point(0.6), 2, 3), dl_root(), 200, 7) ==
        simulate(switch_walk(two_point(0.6), 2, 3), dl_root(), 200, 7));
}

TEST_CASE("law of large numbers for the horocycle") {
  const TreeWalk w(3, {{{0, 1}, 0.5}, {{1, 0}, 0.3}, {{1, 2}, 0.2}});
  const ZWalk z = project_to_z(w);
  const double alpha = drift(z);
  double var = 0.0;
  for (const auto& [n, p] : z.mass()) var += p * (n - alpha) * (n - alpha);
  const int runs = 100, n = 10'000;
  double mean = 0.0;
  for (int i = 0; i < runs; ++i) mean += static_cast<double>(simulate(w, TreeVertex{}, n, derive_seed(3, i)).back().hor()) / n;
  mean /= runs;
  CHECK(std::abs(mean - alpha) < 3.0 * std::sqrt(var / n / runs));
}

TEST_CASE("boundary limits") {
  TrajectoryParams p = params(1);
  p.window = 10;
  p.depth_margin = 30;
  Rng rng(1);
  const auto r = boundary_limit(down_only(), TreeVertex{}, {TreeVertex{}}, p, rng);
  CHECK(r.converged);
  CHECK(r.steps == 30);
  CHECK(up_to_boundary(TreeVertex{}, r.limit) == 0);
  CHECK(r.limit.continuation == Continuation::Unknown);

  p.steps = 5;
  Rng rng2(1);
  CHECK_FALSE(boundary_limit(down_only(), TreeVertex{}, {TreeVertex{}}, p, rng2).converged);

  TrajectoryParams bad;
  bad.window = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("boundary-hit frequencies track the solved coefficients") {
  const auto w = drift04();
  const auto c = solve_coefficients(w);
  BinCounts raw;
  const std::uint64_t runs = 100'000;
  const auto est = estimate_boundary_coefficients(w, runs, 8, params(2024), &raw);
  CHECK(raw.unconverged < runs / 1000);
  for (std::size_t j = 0; j < est.size(); ++j) {
    const double sigma = std::sqrt(c.a[j] * (1 - c.a[j]) / runs);
    CHECK(std::abs(est[j].value - c.a[j]) < 4 * sigma);
  }

  const auto all = count_boundary_limits(w, TreeVertex{}, {TreeVertex{}}, 2000, params(5), 1,
                                         [](const BoundaryPoint&) { return std::optional<std::size_t>(0); });
  CHECK(all.unconverged == 0);
  CHECK(all.estimate(0).value == 1.0);
}

TEST_CASE("counts do not depend on the thread count") {
  const auto w = drift04();
  const auto classify = [](const BoundaryPoint& xi) -> std::optional<std::size_t> {
    return static_cast<std::size_t>(std::min<std::int64_t>(up_to_boundary(TreeVertex{}, xi), 4));
  };
  const auto a = count_boundary_limits(w, TreeVertex{}, {TreeVertex{}}, 5000, params(8), 5, classify, 1);
  const auto b = count_boundary_limits(w, TreeVertex{}, {TreeVertex{}}, 5000, params(8), 5, classify, 3);
  CHECK(a.hits == b.hits);
  CHECK(a.unconverged == b.unconverged);
}

TEST_CASE("ratio estimates") {
  const auto r = ratio(make_estimate(300, 1000), make_estimate(600, 1000));
  CHECK(r.value == doctest::Approx(0.5));
  CHECK(r.stderr_ > 0.0);
  CHECK(make_estimate(10, 100, 2.0).value == doctest::Approx(0.2));
}

TEST_CASE("pair counter reductions agree with direct enumeration") {
  for (int q : {2, 3}) {
    TreePairCounter counter(q);
    for (std::int64_t a = 0; a <= 6; ++a) {
      for (std::int64_t b = 0; b <= 6; ++b) {
        for (UpPair s : {UpPair{0, 1}, UpPair{1, 0}, UpPair{1, 1}, UpPair{2, 1}, UpPair{1, 3}, UpPair{3, 2}}) {
          auto fast = counter.counts({a, b}, s);
          auto slow = counter.enumerate({a, b}, s);
          std::sort(fast.begin(), fast.end());
          std::sort(slow.begin(), slow.end());
          CHECK(fast == slow);
        }
      }
    }
    CHECK(counter.size() < 7 * 7 * 6);
  }
  TreePairCounter capped(2, 1);
  CHECK_NOTHROW(capped.counts({0, 0}, {0, 1}));
  CHECK_THROWS_AS(capped.counts({0, 0}, {1, 0}), DepthExceeded);
}

TEST_CASE("class-collapsed dynamics") {
  SUBCASE("one step down from o") {
    TreePairCounter counter(3);
    const auto d = class_collapsed_step(TreeWalk(3, {{{0, 1}, 1.0}}), initial_tree_distribution(), counter);
    CHECK(d.table.at({0, 1}) == doctest::Approx(1.0 / 3));
  }
  SUBCASE("horizon 3 equals brute-force enumeration on trees") {
    for (const TreeWalk& w : {drift04(), TreeWalk(3, {{{0, 1}, 0.4}, {{1, 1}, 0.3}, {{2, 1}, 0.2}, {{1, 0}, 0.1}})}) {
      TreePairCounter counter(w.q());
      auto d = initial_tree_distribution();
      for (int n = 0; n < 3; ++n) d = class_collapsed_step(w, d, counter);
      const auto brute = oracle::tree_distribution(w, 3);
      std::set<UpPair> seen;
      for (const auto& [y, p] : brute) {
        const UpPair c{oracle::tree_up(TreeVertex{}, y), oracle::tree_up(y, TreeVertex{})};
        seen.insert(c);
        CHECK(std::abs(d.table.at(c) - p) < 1e-12);
      }
      for (const auto& [c, p] : d.table) CHECK((seen.count(c) == 1 || p < 1e-15));
    }
  }
  SUBCASE("horizon 3 equals brute-force enumeration on DL") {
    for (const QuadrupleMeasure& w :
         {switch_walk(two_point(0.7), 2, 2), switch_walk(ZWalk({{2, 0.5}, {-1, 0.5}}), 2, 2),
          QuadrupleMeasure(2, 3, {{{0, 1, 1, 0}, 0.3}, {{1, 0, 0, 1}, 0.1}, {{1, 1, 1, 1}, 0.05}})}) {
      TreePairCounter c1(w.q()), c2(w.r());
      auto d = initial_dl_distribution();
      for (int n = 0; n < 3; ++n) d = class_collapsed_step(w, d, c1, c2);
      const auto brute = oracle::dl_distribution(w, 3);
      for (const auto& [y, p] : brute) CHECK(std::abs(d.table.at(oracle::dl_quadruple(dl_root(), y)) - p) < 1e-12);
      CHECK(std::abs(total_mass(d, w.q(), w.r()) - 1.0) < 1e-12);
    }
  }
  SUBCASE("mass is conserved") {
    const TreeWalk w(2, {{{0, 2}, 0.4}, {{1, 0}, 0.3}, {{1, 1}, 0.3}});
    TreePairCounter counter(2);
    auto d = initial_tree_distribution();
    for (int n = 1; n <= 40; ++n) {
      d = class_collapsed_step(w, d, counter);
      CHECK(std::abs(total_mass(d, 2) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("Green partial sums") {
  const auto w = drift04();
  CHECK(green_partial(w, TreeVertex{}, TreeVertex{}, 0).sum == 1.0);
  const TreeVertex y(3, {{1, 1}});
  double prev = 0.0;
  for (std::uint64_t n : {5, 10, 20, 40, 80}) {
    const double s = green_partial(w, TreeVertex{}, y, n).sum;
    CHECK(s >= prev);
    prev = s;
  }
  const auto g = green_partial(w, TreeVertex{}, y, 200);
  CHECK(g.last_increment < 1e-10);

  // The dense table agrees with the sparse class recursion.
  const GreenTable table(w, 12);
  TreePairCounter counter(2);
  auto d = initial_tree_distribution();
  std::map<UpPair, double> sums = d.table;
  for (int n = 1; n <= 12; ++n) {
    d = class_collapsed_step(w, d, counter);
    for (const auto& [c, p] : d.table) sums[c] += p;
  }
  for (const auto& [c, s] : sums) CHECK(std::abs(table.at(c).sum - s) < 1e-13);
}

TEST_CASE("Martin ratios converge to the kernel") {
  const auto w = drift04();
  const auto c = solve_coefficients(w);
  const BoundaryPoint xi{};
  const auto at_o = martin_convergence_test(w, c, TreeVertex{}, xi, {4, 6, 8, 10}, 300);
  for (const auto& row : at_o.rows) {
    CHECK(row.estimate == 1.0);
    CHECK(row.target == 1.0);
  }
  const auto off = martin_convergence_test(w, c, TreeVertex(1, {{0, 1}}), xi, {4, 6, 8, 10}, 300);
  CHECK(off.trending_down);
  CHECK(off.final_rel_err < 0.05);
}

TEST_CASE("transience diagnostic") {
  const auto none = transience_diagnostic(down_only(), 100, 100, 1);
  CHECK(none.mean_returns == 0.0);

  const auto w = switch_walk(two_point(0.5), 2, 2);
  const auto t = transience_diagnostic(w, 20'000, 40, 2);
  const auto t2 = transience_diagnostic(w, 20'000, 80, 2);
  CHECK(t2.mean_returns - t.mean_returns < 0.2 * t.mean_returns);  // returns taper off
  const double exact = dl_return_partial(w, 40);
  CHECK(std::abs(t.mean_returns - exact) < 4 * t.stderr_);
}
