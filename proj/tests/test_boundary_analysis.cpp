#include "doctest.h"

#include <cmath>
#include <random>

#include "dlharmonic/boundary_analysis.hpp"
#include "dlharmonic/errors.hpp"
#include "support/oracles.hpp"

using namespace dlh;

namespace {

ZWalk two_point(double p) { return ZWalk({{1, p}, {-1, 1.0 - p}}); }

TreeWalk drift04() { return TreeWalk(2, {{{0, 1}, 0.7}, {{1, 0}, 0.3}}); }

int sgn(std::int64_t v) { return (v > 0) - (v < 0); }

// The exponent exactly as displayed in the source formula, exceptions included.
int displayed_epsilon(std::int64_t k, std::int64_t l, std::int64_t m) {
  if (1 <= l && l <= m) return 1;
  if (1 <= k && k <= -m) return -1;
  return sgn(k - l + m) * sgn(k) * sgn(l);
}

double max_defect(const TreeWalk& w, const std::function<double(const TreeVertex&)>& h, int radius) {
  return harmonicity_defect(w, h, tree_ball(TreeVertex{}, w.q(), radius));
}

}  // namespace

TEST_CASE("drift cases of the tree projections") {
  const auto c1 = classify_tree_case(project_to_tree(switch_walk(two_point(0.7), 2, 2), Side::One));
  CHECK(c1.drift == DriftCase::PositiveDrift);
  CHECK(c1.alpha == doctest::Approx(0.4));
  CHECK(classify_tree_case(project_to_tree(switch_walk(two_point(0.5), 2, 2), Side::One)).drift ==
        DriftCase::ZeroDrift);
  const auto c3 = classify_tree_case(project_to_tree(switch_walk(two_point(0.3), 2, 2), Side::One));
  CHECK(c3.drift == DriftCase::NegativeDriftConjugated);
  REQUIRE(c3.c0);
  CHECK(*c3.c0 == doctest::Approx(std::log(7.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("coefficients of the drift-0.4 walk match the exact hitting chain") {
  const auto ref = oracle::nearest_neighbour_coefficients(2, 0.7, 12);
  const auto c = solve_coefficients(drift04());
  CHECK(c.normalization == Normalization::TotalMassOne);
  for (std::size_t j = 0; j < ref.size(); ++j) CHECK(std::abs(c.a[j] - ref[j]) < 1e-12);

  // Frozen from the oracle: a_0 = 8/11, a_1 = 12/77, then geometric with ratio 3/7.
  CHECK(std::abs(c.a[0] - 8.0 / 11.0) < 1e-14);
  CHECK(std::abs(c.a[1] - 12.0 / 77.0) < 1e-14);
  for (std::size_t j = 2; j <= 20; ++j) CHECK(std::abs(c.a[j] / c.a[j - 1] - 3.0 / 7.0) < 1e-9);
}

TEST_CASE("solver residuals") {
  const auto w = project_to_tree(switch_walk(two_point(0.7), 2, 2), Side::One);
  const auto c = solve_coefficients(w);
  CHECK(c.truncation() == 200);
  const auto res = coefficient_residuals(c, solver_walk(w, c.tcase));
  CHECK(res.root_equation < 1e-8);
  CHECK(res.level_equations < 1e-8);
  CHECK(res.tail_recurrence < 1e-6);

  const TreeWalk general(3, {{{0, 1}, 0.3}, {{1, 0}, 0.25}, {{1, 2}, 0.2}, {{2, 1}, 0.15}, {{0, 2}, 0.1}});
  for (const TreeWalk& t : {general, project_to_tree(switch_walk(two_point(0.5), 2, 3), Side::Two),
                            project_to_tree(switch_walk(ZWalk({{2, 0.5}, {-1, 0.5}}), 2, 3), Side::Two)}) {
    const auto ct = solve_coefficients(t);
    const auto rt = coefficient_residuals(ct, solver_walk(t, ct.tcase));
    CHECK(rt.root_equation < 1e-8);
    CHECK(rt.level_equations < 1e-8);
    CHECK(rt.tail_recurrence < 1e-6);
  }
}

TEST_CASE("zero-drift coefficients level off and are independent of the truncation") {
  const TreeWalk sym(2, {{{0, 1}, 0.5}, {{1, 0}, 0.5}});
  const auto c = solve_coefficients(sym);
  CHECK(c.normalization == Normalization::AZeroOne);
  CHECK(c.a[0] == 1.0);
  for (std::size_t j = 1; j < 50; ++j) CHECK(c.a[j] == doctest::Approx(0.5).epsilon(1e-12));
  SolverOptions small;
  small.truncation = 40;
  const auto c40 = solve_coefficients(sym, small);
  for (std::size_t j = 0; j <= 40; ++j) CHECK(c40.a[j] == doctest::Approx(c.a[j]).epsilon(1e-12));
}

TEST_CASE("epsilon") {
  CHECK(epsilon(2, 2, 0) == 0);
  CHECK(epsilon(0, 1, 2) == 1);
  CHECK(epsilon(1, 0, -1) == -1);
  CHECK(displayed_epsilon(2, 2, 0) == 0);
  CHECK(displayed_epsilon(0, 1, 2) == 1);
  CHECK(displayed_epsilon(1, 0, -1) == -1);
}

TEST_CASE("the displayed exponent is not harmonic; the implemented one is") {
  const TreeWalk w = drift04();
  const auto c = solve_coefficients(w);
  const BoundaryPoint xi{};
  const auto with = [&](auto eps) {
    return [&, eps](const TreeVertex& x) {
      const auto k = up_to_boundary(TreeVertex{}, xi), l = up_to_boundary(x, xi), m = x.hor();
      return c.a[l] / c.a[k] * std::pow(2.0, static_cast<double>(k - l + m)) * std::pow(2.0, eps(k, l, m));
    };
  };
  // They disagree at (k, l, m) = (0, 1, 0), the sibling of o.
  CHECK(epsilon(0, 1, 0) == 1);
  CHECK(displayed_epsilon(0, 1, 0) == 0);
  CHECK(max_defect(w, with(displayed_epsilon), 2) > 0.1);
  CHECK(max_defect(w, with([](auto k, auto l, auto m) { return epsilon(k, l, m); }), 2) < 1e-14);
  CHECK(max_defect(w, [&](const TreeVertex& x) { return kernel_at(c, x, xi); }, 2) < 1e-14);
}

TEST_CASE("kernel values") {
  for (const TreeWalk& w : {drift04(), TreeWalk(3, {{{0, 1}, 0.6}, {{1, 0}, 0.25}, {{1, 1}, 0.15}})}) {
    const auto c = solve_coefficients(w);
    CHECK(kernel_value(c, 3, 3, 0) == doctest::Approx(1.0));
    CHECK(kernel_value(c, 0, 0, 1) == doctest::Approx(w.q()));
    const BoundaryPoint xi{TreeVertex(1, {{0, 1}})};
    CHECK(kernel_at(c, TreeVertex{}, xi) == doctest::Approx(1.0));
    double prev = 0.0;
    for (std::int64_t n = 0; n <= 30; n += 5) {
      const double v = kernel_at(c, geodesic_toward(xi, n), xi);
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev > 1e6);
    CHECK_THROWS_AS(kernel_value(c, 201, 0, 0), TruncationExceeded);
  }
}

TEST_CASE("kernel is constant on cylinders and harmonic at sampled vertices") {
  const TreeWalk w(3, {{{0, 1}, 0.5}, {{1, 0}, 0.2}, {{1, 1}, 0.1}, {{2, 1}, 0.1}, {{0, 2}, 0.1}});
  const auto c = solve_coefficients(w);
  const BoundaryPoint a{TreeVertex(2, {{1, 1}})};
  const BoundaryPoint b{TreeVertex(5, {{0, 2}, {4, 1}})};  // through a's anchor, then off its continuation
  const auto xs = tree_check_vertices(3, 2, 50, 12, 4);
  for (const auto& x : xs) {
    if (up_to_boundary(x, a) == up_to_boundary(x, b) && up_to_boundary(TreeVertex{}, a) == up_to_boundary(TreeVertex{}, b)) {
      CHECK(kernel_at(c, x, a) == doctest::Approx(kernel_at(c, x, b)).epsilon(1e-14));
    }
  }
  for (const auto& xi : {a, b}) {
    CHECK(harmonicity_defect(w, [&](const TreeVertex& x) { return kernel_at(c, x, xi); }, xs) < 1e-10);
  }
}

TEST_CASE("minimal harmonic functions on Z") {
  CHECK(minimal_z_harmonics(two_point(0.5)) == std::vector<double>{0.0});
  const auto e = minimal_z_harmonics(two_point(0.7));
  REQUIRE(e.size() == 2);
  CHECK(e[1] == doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-12));
  for (double c : e) CHECK(z_harmonic_defect(two_point(0.7), c) < 1e-12);
  for (double c : minimal_z_harmonics(ZWalk({{2, 0.5}, {-1, 0.5}}))) {
    CHECK(z_harmonic_defect(ZWalk({{2, 0.5}, {-1, 0.5}}), c) < 1e-12);
  }
}

TEST_CASE("lifting tree functions to DL") {
  const auto w = switch_walk(two_point(0.7), 2, 3);
  const auto t1 = project_to_tree(w, Side::One);
  const auto c = std::make_shared<const BoundaryCoefficients>(solve_coefficients(t1));
  const auto xs = dl_check_vertices(2, 3, 2, 50, 12, 8);

  const auto one = lift_to_dl(HarmonicFunction::constant());
  CHECK(std::holds_alternative<ConstantTerm>(one.kind()));
  CHECK(one.domain() == HarmonicFunction::Domain::DL);

  const auto k = lift_to_dl(HarmonicFunction::tree_kernel(c, BoundaryPoint{TreeVertex(-1, {{0, 1}})}));
  CHECK(harmonicity_defect(w, [&](const DLVertex& x) { return k(x); }, xs) < 1e-10);

  const auto ex = lift_to_dl(HarmonicFunction::exponential(0.3));
  for (const auto& x : xs) CHECK(ex(x) == doctest::Approx(std::exp(0.3 * project(x, Side::One).hor())));
  CHECK_THROWS_AS(ex(TreeVertex{}), InvalidInput);
}

TEST_CASE("DL classification") {
  const auto sym = enumerate_minimal_families(switch_walk(two_point(0.5), 2, 2));
  CHECK(sym.dl_case == DLCase::I);
  CHECK(std::any_of(sym.families.begin(), sym.families.end(),
                    [](const FamilyDescriptor& f) { return f.kind == FamilyKind::Constant; }));

  const auto up = enumerate_minimal_families(switch_walk(two_point(0.7), 2, 2));
  CHECK(up.dl_case == DLCase::II);
  REQUIRE(up.c0);
  CHECK(*up.c0 == doctest::Approx(std::log(3.0 / 7.0)).epsilon(1e-12));
  CHECK(std::none_of(up.families.begin(), up.families.end(),
                     [](const FamilyDescriptor& f) { return f.kind == FamilyKind::Constant; }));
  CHECK(up.families.size() == 2);

  CHECK_THROWS_AS(enumerate_minimal_families(switch_walk(ZWalk({{1, 1.0}}), 2, 2)), Unclassifiable);
}

TEST_CASE("every enumerated family member is harmonic") {
  for (double p : {0.5, 0.7, 0.3}) {
    const auto w = switch_walk(two_point(p), 2, 3);
    const auto cls = enumerate_minimal_families(w);
    const auto xs = dl_check_vertices(2, 3, 3, 50, 12, 99);
    for (const auto& f : cls.families) {
      for (const auto& xi : {BoundaryPoint{}, BoundaryPoint{TreeVertex(-2, {{0, 1}, {1, 1}})}}) {
        const auto h = f.member(xi);
        CHECK(harmonicity_defect(w, [&](const DLVertex& x) { return h(x); }, xs) < 1e-10);
      }
    }
  }
}

TEST_CASE("conjugation covariance of the enumeration") {
  const auto w = switch_walk(ZWalk({{1, 0.3}, {-2, 0.2}, {2, 0.1}, {-1, 0.4}}), 2, 2);
  const auto cls = enumerate_minimal_families(w);
  REQUIRE(cls.c0);
  const double c0 = *cls.c0;
  const auto conj = enumerate_minimal_families(conjugate(w, c0));
  REQUIRE(cls.families.size() == conj.families.size());
  const auto xs = dl_check_vertices(2, 2, 2, 30, 10, 5);
  const BoundaryPoint xi{TreeVertex(1, {{0, 1}})};
  for (std::size_t i = 0; i < cls.families.size(); ++i) {
    CHECK(cls.families[i].label() == conj.families[i].label());
    const auto h = cls.families[i].member(xi);
    const auto hc = conj.families[i].member(xi);
    for (const auto& x : xs) {
      const double expected = std::exp(c0 * project(x, Side::One).hor()) * hc(x);
      CHECK(std::abs(h(x) - expected) <= 1e-10 * expected);
    }
  }
}

TEST_CASE("group cocycle identity for kernels") {
  const int q = 2;
  const auto w = switch_walk(two_point(0.7), q, q);
  const auto c = solve_coefficients(project_to_tree(w, Side::One));
  const auto xs = tree_check_vertices(q, 1, 20, 8, 3);
  const BoundaryPoint xi{TreeVertex(-1, {{0, 1}})};
  CHECK(cocycle_check(c, dl_root(), xi, xs, Side::One) < 1e-14);
  CHECK(cocycle_check(c, DLVertex{1, {}}, xi, xs, Side::One) < 1e-10);
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    DLVertex g;
    for (int s = 0; s < 8; ++s) {
      const auto nb = neighbors(g, q, q);
      g = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
    }
    CHECK(cocycle_check(c, g, xi, xs, Side::One) < 1e-10);
  }
}
