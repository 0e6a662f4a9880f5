#include "doctest.h"

#include <random>
#include <set>

#include "dlharmonic/dl_graph.hpp"
#include "dlharmonic/errors.hpp"
#include "support/oracles.hpp"

using namespace dlh;

namespace {

DLVertex lamps(std::int64_t pos, std::map<std::int64_t, Symbol> l) { return DLVertex{pos, std::move(l)}; }

DLVertex random_dl(std::mt19937_64& rng, int q, int r, int steps) {
  DLVertex x;
  for (int i = 0; i < steps; ++i) {
    const auto nb = oracle::dl_neighbors(x, q, r);
    x = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
  }
  return x;
}

}  // namespace

TEST_CASE("projections of simple vertices") {
  const DLVertex o = dl_root();
  CHECK(project(o, Side::One) == TreeVertex{});
  CHECK(project(o, Side::Two) == TreeVertex{});
  const DLVertex x = lamps(1, {{1, 1}});
  CHECK(project(x, Side::One) == TreeVertex(1, {{0, 1}}));
  CHECK(project(x, Side::Two) == TreeVertex(-1, {}));
}

TEST_CASE("projections sit on opposite horocycles and compose back") {
  for (auto [q, r] : {std::pair{2, 2}, std::pair{2, 3}}) {
    for (const auto& [x, d] : oracle::dl_bfs(dl_root(), q, r, 3)) {
      const auto x1 = project(x, Side::One), x2 = project(x, Side::Two);
      CHECK(x1.hor() + x2.hor() == 0);
      CHECK(compose(x1, x2) == x);
    }
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_dl(rng, q, r, 12);
      CHECK(compose(project(x, Side::One), project(x, Side::Two)) == x);
    }
  }
  CHECK(compose(TreeVertex{}, TreeVertex{}) == dl_root());
  CHECK_THROWS_AS(compose(TreeVertex(1, {}), TreeVertex{}), HorocycleMismatch);
}

TEST_CASE("neighbours") {
  CHECK(neighbors(dl_root(), 2, 3).size() == 5);
  for (auto [q, r] : {std::pair{2, 2}, std::pair{2, 3}}) {
    const auto ball = oracle::dl_bfs(dl_root(), q, r, 3);
    for (const auto& [x, d] : ball) {
      const auto nb = neighbors(x, q, r);
      const auto ref = oracle::dl_neighbors(x, q, r);
      CHECK(std::set<DLVertex>(nb.begin(), nb.end()) == std::set<DLVertex>(ref.begin(), ref.end()));
      for (const auto& y : nb) {
        const auto back = neighbors(y, q, r);
        CHECK(std::find(back.begin(), back.end(), x) != back.end());
        for (Side s : {Side::One, Side::Two}) CHECK(tree_distance(project(x, s), project(y, s)) == 1);
      }
    }
  }
}

TEST_CASE("flags") {
  const DLVertex o = dl_root();
  const auto f0 = flags(o, o);
  CHECK(f0.fl1 == 0);
  CHECK(f0.fl2 == 0);
  CHECK(f0.up1 == 0);
  CHECK(f0.up2 == 0);
  const auto f = flags(o, lamps(0, {{1, 1}}));
  CHECK(f.fl1 == 0);
  CHECK(f.fl2 == 1);

  // Scan flags equal the horocycles of the tree confluents.
  for (auto [q, r] : {std::pair{2, 2}, std::pair{2, 3}}) {
    const auto ball = oracle::dl_bfs(o, q, r, 3);
    for (const auto& [x, dx] : ball) {
      for (const auto& [y, dy] : ball) {
        const auto g = flags(x, y);
        CHECK(g.fl1 == confluent(project(x, Side::One), project(y, Side::One)).hor());
        CHECK(g.fl2 == -confluent(project(x, Side::Two), project(y, Side::Two)).hor());
        const auto qd = up_quadruple(x, y);
        CHECK(qd == oracle::dl_quadruple(x, y));
        CHECK(qd.k1 + qd.k2 == qd.l1 + qd.l2);
      }
    }
  }
}

TEST_CASE("distance formula equals BFS distance on the radius-4 ball") {
  CHECK(dl_distance(dl_root(), dl_root()) == 0);
  CHECK(dl_distance(dl_root(), lamps(2, {{1, 1}, {2, 1}})) == 2);
  for (auto [q, r] : {std::pair{2, 2}, std::pair{2, 3}}) {
    const auto ball = oracle::dl_bfs(dl_root(), q, r, 4);
    // Check from a sample of sources so the run stays short; every target in the ball is covered.
    std::size_t i = 0;
    for (const auto& [x, dx] : ball) {
      if (i++ % 7 != 0) continue;
      const auto from_x = oracle::dl_bfs(x, q, r, 8);
      for (const auto& [y, dy] : ball) CHECK(dl_distance(x, y) == from_x.at(y));
    }
  }
}

TEST_CASE("lamplighter group law") {
  const int q = 2;
  const DLVertex o = dl_root();
  const DLVertex a = lamps(1, {{1, 1}});
  const DLVertex b = lamps(-1, {{1, 1}});
  CHECK(group_multiply(a, b, q, q) == lamps(0, {{1, 1}, {2, 1}}));
  CHECK(group_multiply(a, o, q, q) == a);
  CHECK(group_multiply(o, a, q, q) == a);
  CHECK_THROWS_AS(group_multiply(a, b, 2, 3), ColorMismatch);

  std::mt19937_64 rng(9);
  for (int qq : {2, 3}) {
    for (int i = 0; i < 1000; ++i) {
      const auto x = random_dl(rng, qq, qq, 10);
      const auto y = random_dl(rng, qq, qq, 10);
      const auto z = random_dl(rng, qq, qq, 10);
      CHECK(group_multiply(x, group_inverse(x, qq, qq), qq, qq) == o);
      CHECK(group_multiply(group_multiply(x, y, qq, qq), z, qq, qq) ==
            group_multiply(x, group_multiply(y, z, qq, qq), qq, qq));
    }
  }
}

TEST_CASE("left multiplication acts on the factor trees by isometries") {
  const int q = 2;
  std::mt19937_64 rng(21);
  const DLVertex o = dl_root();
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_dl(rng, q, q, 8);
    const auto x = random_dl(rng, q, q, 8);
    const auto y = random_dl(rng, q, q, 8);
    for (Side s : {Side::One, Side::Two}) {
      const auto v = project(x, s), w = project(y, s);
      CHECK(induced_tree_action(o, v, s, q, q) == v);
      const auto gv = induced_tree_action(g, v, s, q, q);
      CHECK(gv == project(group_multiply(g, x, q, q), s));
      CHECK(tree_distance(gv, induced_tree_action(g, w, s, q, q)) == tree_distance(v, w));
    }
    CHECK(induced_tree_action(g, project(x, Side::One), Side::One, q, q).hor() ==
          project(x, Side::One).hor() + g.pos);
  }
}

TEST_CASE("validate_vertex enforces lamp colours") {
  CHECK_NOTHROW(validate_vertex(lamps(0, {{0, 1}, {1, 2}}), 2, 3));
  CHECK_THROWS_AS(validate_vertex(lamps(0, {{0, 2}}), 2, 3), InvalidInput);
}
