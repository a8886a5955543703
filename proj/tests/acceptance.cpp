// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "reachguard/intervals.hpp"
#include "reachguard/isdf.hpp"
#include "reachguard/ldf.hpp"
#include "reachguard/linalg.hpp"
#include "reachguard/verify.hpp"

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>

using namespace reachguard;
using namespace reachguard::testing;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s < budget_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %d %s: %s [%.2f s of %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), s, budget_s,
              in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector uniform_in(const Box& b, std::mt19937_64& rng) {
  Vector x(b.dim());
  for (Eigen::Index j = 0; j < b.dim(); ++j) x[j] = std::uniform_real_distribution<>(b.lo()[j], b.hi()[j])(rng);
  return x;
}

Outcome linosc_exponent() {
  const auto m = get_model("linosc");
  const auto tr = simulate_trace(m, m.default_center, 0.05, 1e-6, 5.0);
  const auto c = compute_ldf(tr, m, 0.1, 1e-6);
  double worst = 0.0;
  for (double b : c.b) worst = std::max(worst, std::abs(b - 1.0));
  return {worst <= 1e-6, fmt("%zu intervals, max |b - 1| = %.2e", c.b.size(), worst)};
}

Outcome ct_gain() {
  const auto m = get_model("linosc");
  const double delta = 0.1;
  const auto tr = simulate_trace(m, m.default_center, 0.01, 1e-8, 10.0);
  const auto c = compute_ldf_ct(tr, m, delta, 1e-8, static_cast<int>(tr.intervals()));
  if (c.blocks.size() != 1) return {false, fmt("%zu blocks", c.blocks.size())};
  double worst = 0.0;
  for (double b : c.b) worst = std::max(worst, std::abs(b));
  const double k = c.blocks[0].k;
  const double r = build_reachtube(tr, c).prime_deltas.back();
  const bool ok = worst <= 1e-6 && std::abs(k - std::sqrt(3.0)) <= 1e-6 && r <= std::sqrt(3.0) * delta + 1e-4;
  return {ok, fmt("max |b| = %.2e, K = %.9f, terminal radius %.6f (limit %.6f)", worst, k, r,
                  std::sqrt(3.0) * delta + 1e-4)};
}

Outcome soundness_fuzz() {
  struct Case {
    const char* model;
    double delta, T, tau, eps0, thr;
  };
  const Case cases[] = {{"decay1d", 0.05, 5.0, 0.05, 1e-6, 2.0},
                        {"linosc", 0.05, 5.0, 0.05, 5e-6, 2.0},
                        {"vanderpol", 0.05, 5.0, 0.02, 1e-6, 2.0},
                        {"lorenz", 0.01, 1.0, 0.01, 1e-6, 25.0}};
  std::mt19937_64 rng(2023);
  bool ok = true;
  std::string detail;
  for (const auto& k : cases) {
    const auto p = problem(k.model, k.delta, k.T, k.tau, k.eps0, k.thr);
    const auto v = verify_safety(p);
    if (v.status != Status::kSafe) {
      ok = false;
      detail += fmt("%s %s; ", k.model, to_string(v.status));
      continue;
    }
    const auto rep = check_safe_verdict(p, v, rng, 100, 200);
    ok = ok && rep.violations() == 0;
    detail += fmt("%s SAFE (%d sims) %d/%d violations; ", k.model, v.num_sims, rep.violations(), rep.samples);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome weyl() {
  std::mt19937_64 rng(7);
  std::normal_distribution<> N;
  int violations = 0, eig_mismatch = 0;
  double worst = -1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    auto sym = [&](double scale) {
      Matrix m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = scale * N(rng);
      return Matrix(0.5 * (m + m.transpose()));
    };
    const Matrix a = sym(1.0), e = sym(trial % 2 ? 1e-3 : 1.0);
    const auto r = weyl_shift_bounds(a, e);
    worst = std::max(worst, r.max_violation);
    if (!r.holds(1e-9)) ++violations;
    // independent eigensolver on A + E
    Eigen::SelfAdjointEigenSolver<Matrix> es(a + e);
    Vector ref = es.eigenvalues().reverse();
    if ((ref - r.eig_sum).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, ref.cwiseAbs().maxCoeff())) ++eig_mismatch;
  }
  return {violations == 0 && eig_mismatch == 0,
          fmt("1000 pairs, %d violations, worst margin %.2e, %d eigenvalue mismatches", violations, worst,
              eig_mismatch)};
}

double terminal_diameter(const Verdict& v) {
  Box hull = v.tubes.front().tube.segments.back().box;
  for (const auto& ct : v.tubes) hull = box_hull(hull, ct.tube.segments.back().box);
  return diameter(hull);
}

Outcome convergence_trend() {
  bool ok = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string detail;
  for (double delta : {0.4, 0.2, 0.1}) {
    const auto v = verify_safety(problem("vanderpol", delta, 5.0, 0.02, 1e-5, 2.0));
    if (v.status != Status::kSafe) return {false, fmt("delta %.1f: %s", delta, to_string(v.status))};
    const double d = terminal_diameter(v);
    ok = ok && d < prev;
    prev = d;
    detail += fmt("delta %.1f dia %.4f (%d sims); ", delta, d, v.num_sims);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome verdicts() {
  const auto safe = verify_safety(problem("decay1d", 0.1, 1.0, 0.01, 1e-5, 2.0));
  const auto up = problem("growth1d", 0.1, 1.0, 0.01, 1e-5, 2.0);
  const auto unsafe = verify_safety(up);
  bool witness_ok = false;
  double wt = 0.0;
  if (unsafe.status == Status::kUnsafe) {
    const auto& w = *unsafe.witness;
    wt = w.t;
    const auto x = reference_trajectory(up.system, w.cover.theta, {w.t}, w.cover.epsilon / 10);
    witness_ok = up.unsafe.contains(x[0]) && w.box.contains(x[0]) &&
                 classify_against_unsafe(w.box, up.unsafe) == UnsafeRelation::kContained;
  }
  auto vp = problem("vanderpol", 0.5, 10.0, 0.02, 1e-5, 2.0);
  vp.workers = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  const auto van = verify_safety(vp);
  const bool ok = safe.status == Status::kSafe && unsafe.status == Status::kUnsafe && witness_ok &&
                  van.status == Status::kSafe;
  return {ok, fmt("decay1d %s, growth1d %s (witness t = %.3f, %s), vanderpol %s (%d sims, %d refinements)",
                  to_string(safe.status), to_string(unsafe.status), wt, witness_ok ? "confirmed" : "not confirmed",
                  to_string(van.status), van.num_sims, van.num_refinements)};
}

Outcome refinement_pressure() {
  int prev = 0;
  bool ok = true;
  std::string detail;
  for (double thr : {-4.4, -4.56, -4.58}) {
    const auto v = verify_safety(problem("vanderpol", 0.2, 5.0, 0.02, 1e-5, thr));
    ok = ok && v.status == Status::kSafe && v.num_sims >= prev;
    prev = v.num_sims;
    detail += fmt("x1 > %.2f %s %d sims; ", thr, to_string(v.status), v.num_sims);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome is_discrepancy() {
  const auto m = get_model("decayinput");
  const Box in(Vector::Constant(1, -0.1), Vector::Constant(1, 0.1));
  const double T = 2.0;
  const auto tr = simulate_trace(m, m.default_center, 0.01, 1e-6, T, in.center());
  const auto c = compute_is_ldf(tr, m, 0.1, 1e-6, in);
  double a_err = 0.0, m_err = 0.0;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    a_err = std::max(a_err, std::abs(c.a[i] + 0.5));
    m_err = std::max(m_err, std::abs(c.M[i] - 1.0));
  }
  std::mt19937_64 rng(8);
  int violations = 0, checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const InputSignal u1 = InputSignal::constant(Vector::Zero(1));
    const InputSignal u2 = random_signal(T, -0.1, 0.1, rng);
    const double x1 = 1.0, x2 = 1.0 + std::uniform_real_distribution<>(-0.1, 0.1)(rng);
    for (int k = 0; k < 50; ++k) {
      const double t = std::uniform_real_distribution<>(0.0, T)(rng);
      const double dist = std::abs(decay_closed_form(x1, u1, t) - decay_closed_form(x2, u2, t));
      ++checks;
      if (dist > eval_is_discrepancy(c, std::abs(x1 - x2), integrals_until(c, u1, u2, t), t) + 1e-5) ++violations;
    }
  }
  const bool ok = violations == 0 && a_err <= 1e-6 && m_err <= 1e-6;
  return {ok, fmt("max |a + 0.5| = %.2e, max |M - 1| = %.2e, %d/%d violations", a_err, m_err, violations, checks)};
}

Outcome interval_dominance() {
  std::mt19937_64 rng(9);
  int violations = 0, boxes = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (const char* name : {"vanderpol", "lorenz"}) {
    const auto m = get_model(name);
    const int per_axis = m.n == 2 ? 100 : 22;  // >= 10^4 points
    const Vector q = 0.25 * m.domain.width();
    const Box inner(m.domain.lo() + q, m.domain.hi() - q);
    for (int k = 0; k < 50; ++k) {
      const Box s = Box::around(uniform_in(inner, rng), std::uniform_real_distribution<>(0.01, 1.0)(rng));
      const Matrix jc = m.jac(s.center());
      const double bound = jacobian_error_bound(m, s, jc), oracle = grid_oracle(m, s, jc, per_axis);
      ++boxes;
      if (bound < oracle) ++violations;
      if (oracle > 0) tightest = std::min(tightest, bound / oracle);
    }
  }
  return {violations == 0, fmt("%d boxes, %d violations, min bound/oracle %.3f", boxes, violations, tightest)};
}

}  // namespace

int main() {
  criterion(1, "linear oscillator exponent", 1, linosc_exponent);
  criterion(2, "coordinate-transform gain", 1, ct_gain);
  criterion(3, "soundness fuzz", 120, soundness_fuzz);
  criterion(4, "Weyl inequality", 5, weyl);
  criterion(5, "convergence trend", 60, convergence_trend);
  criterion(6, "verdict reproduction", 120, verdicts);
  criterion(7, "refinement pressure", 180, refinement_pressure);
  criterion(8, "IS-discrepancy soundness", 30, is_discrepancy);
  criterion(9, "interval dominance", 60, interval_dominance);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
