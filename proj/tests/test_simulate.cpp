#include "reachguard/error.hpp"
#include "reachguard/simulate.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace reachguard;

namespace {

Vector v(std::initializer_list<double> xs) {
  Vector out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

const double kSqrt3 = std::sqrt(3.0);

// Closed forms.
Vector decay(double t) { return v({std::exp(-t)}); }
Vector growth(double t) { return v({std::exp(t)}); }
Vector linosc(double t) { return v({std::cos(kSqrt3 * t), -std::sin(kSqrt3 * t) / kSqrt3}); }

// e^{At} x0 through the complex eigendecomposition.
Vector expm_apply(const Matrix& a, const Vector& x0, double t) {
  Eigen::EigenSolver<Matrix> es(a);
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  const Eigen::VectorXcd vals = es.eigenvalues();
  const Eigen::VectorXcd c = vecs.partialPivLu().solve(x0.cast<std::complex<double>>());
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x0.size());
  for (Eigen::Index k = 0; k < vals.size(); ++k) y += c[k] * std::exp(vals[k] * t) * vecs.col(k);
  return y.real();
}

void check_trace_shape(const SimulationTrace& tr, const Vector& x0) {
  REQUIRE(tr.entries.size() >= 2);
  CHECK(tr.entries.front().t == 0.0);
  CHECK(tr.entries.back().t == tr.T);
  CHECK(tr.entries.front().r.contains(x0));
  CHECK(tr.pads.size() == tr.intervals());
  for (std::size_t i = 1; i < tr.entries.size(); ++i) {
    const double gap = tr.entries[i].t - tr.entries[i - 1].t;
    CHECK(gap > 0.0);
    CHECK(gap <= tr.tau * (1 + 1e-12));
  }
  for (const auto& e : tr.entries) CHECK(diameter(e.r) <= tr.epsilon);
}

void check_containment(const SimulationTrace& tr, const std::function<Vector(double)>& exact, std::mt19937_64& rng) {
  int grid_miss = 0, intra_miss = 0;
  for (std::size_t i = 0; i < tr.entries.size(); ++i) {
    if (!tr.entries[i].r.contains(exact(tr.entries[i].t))) ++grid_miss;
  }
  for (std::size_t i = 1; i <= tr.intervals(); ++i) {
    const Box seg = tr.segment_hull(i);
    std::uniform_real_distribution<> U(tr.entries[i - 1].t, tr.entries[i].t);
    for (int k = 0; k < 50; ++k) {
      if (!seg.contains(exact(U(rng)))) ++intra_miss;
    }
  }
  CHECK(grid_miss == 0);
  CHECK(intra_miss == 0);
}

}  // namespace

TEST_CASE("decay1d reaches 1/e") {
  const auto m = get_model("decay1d");
  const auto tr = simulate_trace(m, v({1.0}), 0.1, 1e-4, 1.0);
  check_trace_shape(tr, v({1.0}));
  CHECK(tr.entries.size() == 11);
  CHECK(tr.entries.back().r.contains(v({std::exp(-1.0)})));
  CHECK(tr.entries.back().r.contains(v({0.36788}), 1e-5));
}

TEST_CASE("linosc returns after one period") {
  const auto m = get_model("linosc");
  const double period = 2 * std::numbers::pi / kSqrt3;
  const auto tr = simulate_trace(m, v({1.0, 0.0}), 0.05, 1e-4, period);
  check_trace_shape(tr, v({1.0, 0.0}));
  CHECK(tr.entries.back().r.contains(v({1.0, 0.0})));
}

TEST_CASE("T equal to tau gives a single interval") {
  for (const char* name : {"decay1d", "vanderpol", "lorenz"}) {
    const auto m = get_model(name);
    const auto tr = simulate_trace(m, m.default_center, 0.3, 1e-3, 0.3);
    REQUIRE(tr.entries.size() == 2);
    CHECK(tr.entries[0].t == 0.0);
    CHECK(tr.entries[1].t == 0.3);
  }
}

TEST_CASE("grid is forced to multiples of tau with a short last interval") {
  const auto m = get_model("decay1d");
  const auto tr = simulate_trace(m, v({1.0}), 0.3, 1e-4, 1.0);
  REQUIRE(tr.entries.size() == 5);
  CHECK(tr.entries[3].t == doctest::Approx(0.9));
  CHECK(tr.entries[4].t == 1.0);
  check_trace_shape(tr, v({1.0}));
}

TEST_CASE("closed-form containment at grid times and between them") {
  std::mt19937_64 rng(41);
  SUBCASE("decay1d") {
    const auto tr = simulate_trace(get_model("decay1d"), v({1.0}), 0.1, 1e-6, 3.0);
    check_containment(tr, decay, rng);
  }
  SUBCASE("growth1d") {
    const auto tr = simulate_trace(get_model("growth1d"), v({1.0}), 0.25, 1e-5, 2.0);
    check_containment(tr, growth, rng);
  }
  SUBCASE("linosc") {
    const auto tr = simulate_trace(get_model("linosc"), v({1.0, 0.0}), 0.2, 1e-5, 10.0);
    check_containment(tr, linosc, rng);
  }
  SUBCASE("linosc, coarse grid") {
    const auto tr = simulate_trace(get_model("linosc"), v({1.0, 0.0}), 0.5, 1e-3, 10.0);
    check_containment(tr, linosc, rng);
  }
}

TEST_CASE("halving eps shrinks the boxes") {
  const auto m = get_model("vanderpol");
  double prev = 0.0;
  for (double eps : {1e-3, 5e-4, 2.5e-4}) {
    const auto tr = simulate_trace(m, m.default_center, 0.1, eps, 2.0);
    double widest = 0.0;
    for (const auto& e : tr.entries) widest = std::max(widest, diameter(e.r));
    if (prev > 0.0) {
      CHECK(widest <= prev / 2 * 4);
      CHECK(widest >= prev / 2 / 4);
    }
    prev = widest;
  }
}

TEST_CASE("reference_trajectory") {
  SUBCASE("decay1d closed form") {
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(0.1 * k);
    const auto pts = reference_trajectory(get_model("decay1d"), v({1.0}), times, 1e-5);
    REQUIRE(pts.size() == times.size());
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(std::abs(pts[k][0] - std::exp(-times[k])) <= 1e-6);
  }
  SUBCASE("linear system against the matrix exponential") {
    const auto m = get_model("linosc");
    Matrix a(2, 2);
    a << 0, 3, -1, 0;
    const Vector x0 = v({0.4, -1.2});
    const std::vector<double> times = {0.0, 0.37, 1.0, 2.5, 7.0};
    const auto pts = reference_trajectory(m, x0, times, 1e-5);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK((pts[k] - expm_apply(a, x0, times[k])).norm() <= 1e-6);
    }
  }
  SUBCASE("determinism") {
    const auto m = get_model("lorenz");
    const std::vector<double> times = {0.0, 0.5, 1.0};
    const auto a = reference_trajectory(m, m.default_center, times, 1e-6);
    const auto b = reference_trajectory(m, m.default_center, times, 1e-6);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(a[k] == b[k]);
  }
  SUBCASE("piecewise-constant input") {
    const auto m = get_model("decayinput");
    const InputSignal u{{0.0, 0.5}, {v({0.1}), v({-0.1})}};
    const auto pts = reference_trajectory(m, v({1.0}), {1.0}, 1e-6, &u);
    // x(0.5) = e^{-0.5} + 0.1 (1 - e^{-0.5}); then relax toward -0.1
    const double x05 = std::exp(-0.5) + 0.1 * (1 - std::exp(-0.5));
    const double x1 = x05 * std::exp(-0.5) - 0.1 * (1 - std::exp(-0.5));
    CHECK(std::abs(pts[0][0] - x1) <= 1e-6);
  }
}

TEST_CASE("simulation errors") {
  const auto g = get_model("growth1d");
  try {
    simulate_trace(g, v({1.0}), 0.1, 1e-4, 10.0);
    FAIL("expected a domain exit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDomainExit);
  }
  CHECK_THROWS_AS(simulate_trace(g, v({1.0}), 0.0, 1e-4, 1.0), Error);
  CHECK_THROWS_AS(simulate_trace(g, v({1.0}), 0.1, -1.0, 1.0), Error);
  CHECK_THROWS_AS(simulate_trace(g, v({100.0}), 0.1, 1e-4, 1.0), Error);
  CHECK_THROWS_AS(simulate_trace(g, v({1.0, 2.0}), 0.1, 1e-4, 1.0), Error);
  CHECK_THROWS_AS(InputSignal({0.0}, {}).at(0.0), Error);
}

TEST_CASE("input signal lookup") {
  const InputSignal u{{0.0, 1.0, 2.5}, {v({1}), v({2}), v({3})}};
  CHECK(u.at(0.0)[0] == 1);
  CHECK(u.at(0.99)[0] == 1);
  CHECK(u.at(1.0)[0] == 2);
  CHECK(u.at(100.0)[0] == 3);
  CHECK(InputSignal::constant(v({0.2})).at(7.0)[0] == 0.2);
}
