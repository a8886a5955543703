#include "reachguard/error.hpp"
#include "reachguard/geometry.hpp"

#include <doctest.h>

#include <random>

using namespace reachguard;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

Box box(std::initializer_list<double> lo, std::initializer_list<double> hi) { return Box(v(lo), v(hi)); }

Vector uniform_in(const Box& b, std::mt19937_64& rng) {
  Vector x(b.dim());
  for (Eigen::Index j = 0; j < b.dim(); ++j) x[j] = std::uniform_real_distribution<>(b.lo()[j], b.hi()[j])(rng);
  return x;
}

}  // namespace

TEST_CASE("box invariants") {
  CHECK_THROWS_AS(box({1.0}, {0.0}), Error);
  CHECK_THROWS_AS(Box(Vector(0), Vector(0)), Error);
  CHECK_THROWS_AS(box({0.0, 0.0}, {1.0}), Error);
}

TEST_CASE("box_hull") {
  CHECK(box_hull(box({0, 0}, {1, 1}), box({2, -1}, {3, 0})) == box({0, -1}, {3, 1}));
  const Box b = box({0.2, -3}, {0.4, 7});
  CHECK(box_hull(b, b) == b);
  CHECK(box_hull(box({0}, {1}), box({0.5}, {0.7})) == box({0}, {1}));
  CHECK_THROWS_AS(box_hull(box({0}, {1}), box({0, 0}, {1, 1})), Error);
}

TEST_CASE("box_hull contains convex combinations") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Box a = bloat(Box::point(uniform_in(box({-5, -5, -5}, {5, 5, 5}), rng)), 0.3);
    const Box b = bloat(Box::point(uniform_in(box({-5, -5, -5}, {5, 5, 5}), rng)), 0.7);
    const Box h = box_hull(a, b);
    for (int k = 0; k < 100; ++k) {
      const double s = std::uniform_real_distribution<>(0, 1)(rng);
      const Vector x = s * uniform_in(a, rng) + (1 - s) * uniform_in(b, rng);
      CHECK(h.contains(x));
    }
  }
}

TEST_CASE("bloat") {
  CHECK(bloat(box({0, 0}, {1, 1}), 0.5) == box({-0.5, -0.5}, {1.5, 1.5}));
  const Box b = box({1, 2}, {3, 4});
  CHECK(bloat(b, 0.0) == b);
  const Box c = bloat(box({1}, {1}), 0.12157);
  CHECK(c.lo()[0] == doctest::Approx(0.87843).epsilon(1e-12));
  CHECK(c.hi()[0] == doctest::Approx(1.12157).epsilon(1e-12));
  CHECK_THROWS_AS(bloat(b, -1.0), Error);
  CHECK_THROWS_AS(bloat(b, std::numeric_limits<double>::infinity()), Error);
}

TEST_CASE("bloat contains the l2 neighbourhood") {
  std::mt19937_64 rng(12);
  std::normal_distribution<> g;
  const Box b = box({-1, 0, 2}, {0, 0.5, 2.1});
  const double r = 0.4;
  const Box big = bloat(b, r);
  for (int k = 0; k < 1000; ++k) {
    Vector dir(3);
    for (auto& d : dir) d = g(rng);
    const Vector x = uniform_in(b, rng) + std::uniform_real_distribution<>(0, r)(rng) * dir.normalized();
    CHECK(big.contains(x));
  }
}

TEST_CASE("diameter") {
  CHECK(diameter(box({0, 0}, {3, 4})) == 5.0);
  CHECK(diameter(Box::point(v({1, 2, 3}))) == 0.0);
  CHECK(diameter(box({0}, {1e-7})) == doctest::Approx(1e-7));
}

TEST_CASE("ball and halfspace invariants") {
  CHECK_THROWS_AS(Ball(v({0}), -1.0), Error);
  CHECK_THROWS_AS(HalfspaceSet({}), Error);
  CHECK_THROWS_AS(HalfspaceSet({{v({0, 0}), 1.0}}), Error);
  CHECK_THROWS_AS(Cover(v({0}), 0.1, 0.0, box({-0.1}, {0.1})), Error);
  CHECK_THROWS_AS(Cover(v({0}), -0.1, 1e-3, box({-0.1}, {0.1})), Error);
  const Ball ball(v({1, 1}), 1.0);
  CHECK(ball.contains(v({1.6, 1.8})));
  CHECK_FALSE(ball.contains(v({1.8, 1.8})));
}

TEST_CASE("partition_cover examples") {
  SUBCASE("unit square") {
    const Cover c = Cover::circumscribing(box({0, 0}, {1, 1}), 1e-3);
    CHECK(c.delta == doctest::Approx(std::sqrt(2.0) / 2));
    const auto kids = partition_cover(c, box({0, 0}, {1, 1}));
    REQUIRE(kids.size() == 4);
    for (const auto& k : kids) {
      CHECK(k.delta == doctest::Approx(std::sqrt(2.0) / 4));
      CHECK(k.epsilon == doctest::Approx(5e-4));
      CHECK(k.depth == 1);
      CHECK(diameter(k.cell) == doctest::Approx(std::sqrt(2.0) / 2));
    }
    CHECK(kids[0].theta.isApprox(v({0.25, 0.25})));
    CHECK(kids[3].theta.isApprox(v({0.75, 0.75})));
  }
  SUBCASE("interval") {
    const Cover c(v({0.5}), 0.5, 1e-2, box({0}, {1}));
    const auto kids = partition_cover(c, box({0}, {1}));
    REQUIRE(kids.size() == 2);
    CHECK(kids[0].theta[0] == doctest::Approx(0.25));
    CHECK(kids[1].theta[0] == doctest::Approx(0.75));
    CHECK(kids[0].delta == doctest::Approx(0.25));
  }
  SUBCASE("floor") {
    const Cover c(v({0.5}), 0.5, 1e-2, box({0}, {1}));
    CHECK_THROWS_AS(partition_cover(c, box({0}, {1}), 0.3), Error);
    try {
      partition_cover(c, box({0}, {1}), 0.3);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kRefinementLimit);
    }
  }
  SUBCASE("children missing the region are dropped") {
    const Cover c(v({0.0, 0.0}), 1.0, 1e-2, box({-1, -1}, {1, 1}));
    const auto kids = partition_cover(c, box({0.2, 0.2}, {0.9, 0.9}));
    CHECK(kids.size() == 4);  // clipped region is bisected itself
    for (const auto& k : kids) CHECK(box({0.2, 0.2}, {0.9, 0.9}).contains(k.cell));
  }
}

TEST_CASE("partition_cover children cover parent ball within the region") {
  std::mt19937_64 rng(13);
  const Vector theta = v({0.3, -0.2});
  const double delta = 0.8;
  const Box region = box({0.0, -1.0}, {1.2, 0.2});
  const Cover c(theta, delta, 1e-3, Box::around(theta, delta));
  const auto kids = partition_cover(c, region);
  const Ball parent(theta, delta);
  int uncovered = 0, sampled = 0;
  const Box sample_box = Box::around(theta, delta);
  while (sampled < 10000) {
    const Vector x = uniform_in(sample_box, rng);
    if (!parent.contains(x) || !region.contains(x)) continue;
    ++sampled;
    bool hit = false;
    for (const auto& k : kids) hit = hit || Ball(k.theta, k.delta).contains(x, 1e-12);
    if (!hit) ++uncovered;
  }
  CHECK(uncovered == 0);
}

TEST_CASE("classify_against_unsafe") {
  const auto u = HalfspaceSet::coordinate_above(1, 0, 2.0);
  CHECK(classify_against_unsafe(box({0}, {1}), u) == UnsafeRelation::kDisjoint);
  CHECK(classify_against_unsafe(box({3}, {4}), u) == UnsafeRelation::kContained);
  CHECK(classify_against_unsafe(box({1.5}, {2.5}), u) == UnsafeRelation::kOverlaps);
  // exact ties land on the conservative side of the rounding guard
  CHECK(classify_against_unsafe(box({1}, {2}), u) == UnsafeRelation::kOverlaps);
  CHECK(classify_against_unsafe(box({1}, {2 - 1e-9}), u) == UnsafeRelation::kDisjoint);
  CHECK_THROWS_AS(classify_against_unsafe(box({0, 0}, {1, 1}), u), Error);
}

TEST_CASE("classify_against_unsafe matches a grid oracle") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<> U(-2, 2);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Vector lo(2), hi(2);
    for (int j = 0; j < 2; ++j) {
      const double a = U(rng), b = U(rng);
      lo[j] = std::min(a, b);
      hi[j] = std::max(a, b);
    }
    const Box b(lo, hi);
    std::vector<HalfspaceSet::Halfspace> hs;
    const int m = 1 + trial % 3;
    for (int k = 0; k < m; ++k) hs.push_back({v({U(rng), U(rng)}), U(rng)});
    const HalfspaceSet u(hs);

    // Linear functions attain their extremes at corners; the grid includes them.
    bool any_in = false, all_in_one = false;
    std::vector<bool> all_in(hs.size(), true);
    constexpr int g = 40;
    for (int a = 0; a <= g; ++a) {
      for (int c = 0; c <= g; ++c) {
        const Vector x = lo + (hi - lo).cwiseProduct(v({a / double(g), c / double(g)}));
        any_in = any_in || u.contains(x);
        for (std::size_t k = 0; k < hs.size(); ++k) all_in[k] = all_in[k] && hs[k].normal.dot(x) > hs[k].offset;
      }
    }
    for (bool f : all_in) all_in_one = all_in_one || f;
    const auto expect = all_in_one ? UnsafeRelation::kContained
                        : any_in   ? UnsafeRelation::kOverlaps
                                   : UnsafeRelation::kDisjoint;
    if (classify_against_unsafe(b, u) != expect) ++mismatches;
  }
  CHECK(mismatches == 0);
}
