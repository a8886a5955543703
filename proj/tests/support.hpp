#pragma once

#include "reachguard/intervals.hpp"
#include "reachguard/isdf.hpp"
#include "reachguard/linalg.hpp"
#include "reachguard/simulate.hpp"
#include "reachguard/verify.hpp"

#include <algorithm>
#include <random>

namespace reachguard::testing {

inline Vector sample_ball(const Vector& c, double r, std::mt19937_64& rng) {
  std::normal_distribution<> N;
  Vector d(c.size());
  for (Eigen::Index j = 0; j < d.size(); ++j) d[j] = N(rng);
  const double u = std::uniform_real_distribution<>(0.0, 1.0)(rng);
  return c + r * std::pow(u, 1.0 / static_cast<double>(c.size())) * d / d.norm();
}

struct SoundnessReport {
  int states = 0;
  int samples = 0;
  int uncovered = 0;       // initial state in no stored cover ball
  int outside_tube = 0;
  int inside_unsafe = 0;
  int violations() const { return uncovered + outside_tube + inside_unsafe; }
};

// Re-integrate random initial states from the problem's initial ball at eps/10
// of the cover that owns them and check every sample time against that cover's tube.
inline SoundnessReport check_safe_verdict(const VerificationProblem& p, const Verdict& v, std::mt19937_64& rng,
                                          int states = 100, int times_per_state = 200) {
  SoundnessReport rep;
  for (int s = 0; s < states; ++s) {
    const Vector x0 = sample_ball(p.theta_center, p.delta, rng);
    ++rep.states;
    const CoverTube* owner = nullptr;
    for (const auto& ct : v.tubes) {
      if (Ball(ct.cover.theta, ct.cover.delta).contains(x0)) {
        owner = &ct;
        break;
      }
    }
    if (!owner) {
      ++rep.uncovered;
      continue;
    }
    std::vector<double> times(static_cast<std::size_t>(times_per_state));
    std::uniform_real_distribution<> U(0.0, p.T);
    for (auto& t : times) t = U(rng);
    std::sort(times.begin(), times.end());
    const auto xs = reference_trajectory(p.system, x0, times, owner->cover.epsilon / 10);
    const auto& segs = owner->tube.segments;
    for (std::size_t k = 0; k < times.size(); ++k) {
      ++rep.samples;
      const auto it = std::lower_bound(segs.begin(), segs.end(), times[k],
                                       [](const TubeSegment& sg, double t) { return sg.t_hi < t; });
      if (it == segs.end() || !it->box.contains(xs[k])) ++rep.outside_tube;
      if (p.unsafe.contains(xs[k])) ++rep.inside_unsafe;
    }
  }
  return rep;
}

inline VerificationProblem problem(const std::string& model, double delta, double T, double tau, double eps0,
                                   double threshold) {
  VerificationProblem p;
  p.system = get_model(model);
  p.theta_center = p.system.default_center;
  p.delta = delta;
  p.T = T;
  p.tau = tau;
  p.epsilon0 = eps0;
  p.unsafe = HalfspaceSet::coordinate_above(p.system.n, 0, threshold);
  return p;
}

// x' = -x + u with piecewise-constant u: exact solution.
inline double decay_closed_form(double x0, const InputSignal& u, double t) {
  double x = x0, s = 0.0;
  for (std::size_t k = 0; k < u.breakpoints.size() && s < t; ++k) {
    const double end = k + 1 < u.breakpoints.size() ? std::min(u.breakpoints[k + 1], t) : t;
    const double c = u.values[k][0];
    x = c + (x - c) * std::exp(-(end - s));
    s = end;
  }
  return x;
}

inline InputSignal random_signal(double T, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<> U(lo, hi), B(0.0, T);
  InputSignal u;
  u.breakpoints = {0.0};
  const int pieces = 1 + static_cast<int>(rng() % 8);
  for (int k = 1; k < pieces; ++k) u.breakpoints.push_back(B(rng));
  std::sort(u.breakpoints.begin(), u.breakpoints.end());
  for (std::size_t k = 0; k < u.breakpoints.size(); ++k) u.values.push_back(Vector::Constant(1, U(rng)));
  return u;
}

// integral of |u1 - u2| over [a, b] for piecewise-constant signals
inline double deviation_integral(const InputSignal& u1, const InputSignal& u2, double a, double b) {
  std::vector<double> cuts = {a, b};
  for (const auto* u : {&u1, &u2})
    for (double t : u->breakpoints)
      if (t > a && t < b) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k - 1] + cuts[k]);
    sum += (u1.at(mid) - u2.at(mid)).norm() * (cuts[k] - cuts[k - 1]);
  }
  return sum;
}

inline std::vector<double> integrals_until(const ISCoefficients& c, const InputSignal& u1, const InputSignal& u2,
                                           double t) {
  std::vector<double> out;
  for (std::size_t i = 1; i < c.times.size() && c.times[i - 1] < t; ++i) {
    out.push_back(deviation_integral(u1, u2, c.times[i - 1], std::min(t, c.times[i])));
  }
  while (out.size() < c.a.size()) out.push_back(0.0);
  return out;
}

inline double deviation_norm(const DynamicalSystem& m, const Vector& x, const Matrix& jc) {
  const Matrix j = m.jac(x, m.nominal_input());
  return spectral_norm((j + j.transpose()) - (jc + jc.transpose()));
}

// Max of the deviation norm over a regular grid with `per_axis` points per axis.
inline double grid_oracle(const DynamicalSystem& m, const Box& s, const Matrix& jc, int per_axis) {
  const auto n = s.dim();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double best = 0.0;
  while (true) {
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      x[j] = s.lo()[j] + s.width()[j] * idx[static_cast<std::size_t>(j)] / (per_axis - 1);
    }
    best = std::max(best, deviation_norm(m, x, jc));
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return best;
}

}  // namespace reachguard::testing
