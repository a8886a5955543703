#include "reachguard/ldf.hpp"

#include "enclosure.hpp"
#include "reachguard/error.hpp"
#include "reachguard/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reachguard {

double lipschitz_over(const DynamicalSystem& m, const Box& s, const std::optional<Box>& inputs) {
  double sq = 0.0;
  for (const Interval& iv : jacobian_enclosure(m, s, inputs)) sq += iv.mag() * iv.mag();
  if (m.p > 0)
    for (const Interval& iv : jacobian_u_enclosure(m, s, inputs)) sq += iv.mag() * iv.mag();
  const double l = std::sqrt(sq);
  if (!std::isfinite(l)) throw Error(ErrorCode::kUnboundedInterval, m.name + ": unbounded Jacobian enclosure");
  return l;
}

namespace detail {

Box gronwall_enclosure(const DynamicalSystem& m, const Box& hull, double start, double dt, double input_dia,
                       const std::optional<Box>& inputs, const LdfOptions& opts) {
  auto radius = [&](double lip) {
    const double r = (start + input_dia * lip * dt) * std::exp(lip * dt) * (1.0 + 1e-9);
    if (!std::isfinite(r) || r > opts.delta_cap) {
      throw Error(ErrorCode::kDeltaCap, m.name + ": enclosure radius exceeds the cap");
    }
    return r;
  };
  auto exits = [&](const Box& s) { return !m.domain.contains(s); };

  if (opts.enclosure != Enclosure::kGlobalLipschitz) {
    try {
      const Box seed = bloat(hull, start);
      if (!exits(seed)) {
        double guess = 1.1 * lipschitz_over(m, seed, inputs);
        for (int it = 0; it < 8 && guess < m.lipschitz; ++it) {
          const Box s = bloat(hull, radius(guess));
          if (exits(s)) break;
          const double ls = lipschitz_over(m, s, inputs);
          if (ls <= guess) return s;
          guess = 1.5 * ls;
        }
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnboundedInterval && e.code() != ErrorCode::kDeltaCap) throw;
    }
  }
  const Box s = bloat(hull, radius(m.lipschitz));
  if (exits(s)) throw Error(ErrorCode::kDomainExit, m.name + ": bloated enclosure leaves the model domain");
  return s;
}

double lognorm_bound(const DynamicalSystem& m, const Box& s) {
  const Matrix jc = m.jac(s.center());
  return sym_part_max_eig(jc) + jacobian_error_bound(m, s, jc) / 2.0 + rounding_slack(jc);
}

Box state_enclosure(const DynamicalSystem& m, const Box& hull, double start, double dt, const LdfOptions& opts) {
  if (opts.enclosure != Enclosure::kLogNorm) return gronwall_enclosure(m, hull, start, dt, 0.0, std::nullopt, opts);

  // While both trajectories stay in the convex set S their distance grows at
  // rate at most mu(S); if mu(S) <= guess the bloat below keeps them inside.
  auto radius = [&](double mu) {
    const double r = start * std::exp(std::max(mu, 0.0) * dt) * (1.0 + 1e-9);
    check_radius(m, r, opts.delta_cap);
    return r;
  };
  const Box seed = bloat(hull, radius(0.0));
  if (!m.domain.contains(seed)) {
    throw Error(ErrorCode::kDomainExit, m.name + ": bloated enclosure leaves the model domain");
  }
  try {
    double guess = lognorm_bound(m, seed);
    guess += 0.05 * std::abs(guess) + 1e-3;
    for (int it = 0; it < 8; ++it) {
      const Box s = bloat(hull, radius(guess));
      if (!m.domain.contains(s)) break;
      const double mu = lognorm_bound(m, s);
      if (mu <= guess) return s;
      guess = mu + 0.1 * std::abs(mu) + 1e-3;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnboundedInterval && e.code() != ErrorCode::kDeltaCap) throw;
  }
  LdfOptions coarser = opts;
  coarser.enclosure = Enclosure::kLocalLipschitz;
  return gronwall_enclosure(m, hull, start, dt, 0.0, std::nullopt, coarser);
}

double rounding_slack(const Matrix& j) { return 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + j.norm()); }

void check_radius(const DynamicalSystem& m, double r, double cap) {
  if (!std::isfinite(r) || r > cap) throw Error(ErrorCode::kDeltaCap, m.name + ": discrepancy radius exceeds the cap");
}

}  // namespace detail

namespace {

void check_inputs(const SimulationTrace& trace, const DynamicalSystem& m, double delta, double eps) {
  if (trace.entries.size() < 2) throw Error(ErrorCode::kInvalidArgument, "ldf: trace needs at least two entries");
  if (trace.entries.front().r.dim() != m.n) throw Error(ErrorCode::kDimensionMismatch, "ldf: trace dimension");
  if (!(delta >= 0.0) || !(eps >= 0.0) || !std::isfinite(delta + eps)) {
    throw Error(ErrorCode::kInvalidArgument, "ldf: delta and eps must be non-negative");
  }
}

// Upper bound on ||sym(P D P^-1)|| for D ranging over the interval matrix
// J(S) - Jc: each transformed entry is a fixed linear combination of the D_kl.
double transformed_error_bound(const std::vector<Interval>& d, const Transform& t) {
  const Eigen::Index n = t.p.rows();
  Matrix bounds(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      double lo = 0.0, hi = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index l = 0; l < n; ++l) {
          const double c = 0.5 * (t.p(a, k) * t.p_inv(l, b) + t.p(b, k) * t.p_inv(l, a));
          const Interval& iv = d[static_cast<std::size_t>(k * n + l)];
          lo += c >= 0.0 ? c * iv.lo : c * iv.hi;
          hi += c >= 0.0 ? c * iv.hi : c * iv.lo;
        }
      }
      bounds(a, b) = bounds(b, a) = std::max(std::abs(lo), std::abs(hi));
    }
  }
  const double terms = static_cast<double>(n * n);
  return entrywise_norm_upper(bounds) * (1.0 + 8.0 * terms * std::numeric_limits<double>::epsilon());
}

}  // namespace

DiscrepancyCoefficients compute_ldf(const SimulationTrace& trace, const DynamicalSystem& m, double delta, double eps,
                                    const LdfOptions& opts) {
  check_inputs(trace, m, delta, eps);
  DiscrepancyCoefficients c;
  c.delta0 = delta;
  c.eps = eps;
  for (const auto& e : trace.entries) c.times.push_back(e.t);
  c.deltas.push_back(delta);

  double d = delta;
  for (std::size_t i = 1; i <= trace.intervals(); ++i) {
    const double dt = c.times[i] - c.times[i - 1];
    const double start = d + eps;
    const Box s = detail::at_interval(i, c.times[i - 1], [&] {
      return detail::state_enclosure(m, trace.segment_hull(i), start, dt, opts);
    });
    const double b = detail::lognorm_bound(m, s);
    d = start * std::exp(b * dt);
    detail::check_radius(m, d, opts.delta_cap);
    c.b.push_back(b);
    c.enclosures.push_back(s);
    c.starts.push_back(start);
    c.deltas.push_back(d);
  }
  return c;
}

DiscrepancyCoefficients compute_ldf_ct(const SimulationTrace& trace, const DynamicalSystem& m, double delta,
                                       double eps, int step, const LdfOptions& opts) {
  check_inputs(trace, m, delta, eps);
  if (step < 1) throw Error(ErrorCode::kInvalidArgument, "compute_ldf_ct: step must be >= 1");
  DiscrepancyCoefficients c;
  c.delta0 = delta;
  c.eps = eps;
  for (const auto& e : trace.entries) c.times.push_back(e.t);
  c.deltas.push_back(delta);

  const std::size_t k = trace.intervals();
  const auto stride = static_cast<std::size_t>(step);
  double d = delta;
  std::optional<Transform> prev;
  for (std::size_t first = 0; first < k; first += stride) {
    const std::size_t last = std::min(first + stride, k);
    Vector avg = Vector::Zero(m.n);
    for (std::size_t j = first; j <= last; ++j) avg += trace.entries[j].r.center();
    avg /= static_cast<double>(last - first + 1);
    if (!m.domain.contains(avg)) avg = trace.entries[first].r.center();
    const Transform tf = real_block_transform(m.jac(avg));
    const double kk = tf.cond;
    // d is measured in the previous frame; ||P x|| <= ||P P_prev^-1|| ||P_prev x||.
    const double gain = prev ? std::min(kk, spectral_norm(tf.p * prev->p_inv) * (1.0 + 1e-12)) : kk;
    c.blocks.push_back({first, last, kk, gain, tf});
    prev = tf;

    // Radii inside the block are measured in ||P x||, which dominates ||x||
    // because ||P^-1|| = 1.
    for (std::size_t i = first + 1; i <= last; ++i) {
      const double dt = c.times[i] - c.times[i - 1];
      const bool entering = i == first + 1;
      const double start_x = entering ? d + eps : d + kk * eps;
      const double start_y = entering ? gain * d + kk * eps : d + kk * eps;
      const Box s = detail::at_interval(i, c.times[i - 1], [&] {
        return detail::state_enclosure(m, trace.segment_hull(i), start_x, dt, opts);
      });
      const Matrix jc = m.jac(s.center());
      double b = 0.0;
      if (tf.identity_fallback) {
        b = detail::lognorm_bound(m, s);
      } else {
        const Matrix jt = tf.p * jc * tf.p_inv;
        auto dev = jacobian_enclosure(m, s);
        Matrix dmag(m.n, m.n);
        for (int r = 0; r < m.n; ++r) {
          for (int q = 0; q < m.n; ++q) {
            auto& iv = dev[static_cast<std::size_t>(r * m.n + q)];
            iv = iv - widen(jc(r, q), jc(r, q));
            dmag(r, q) = iv.mag();
          }
        }
        const double per_entry = transformed_error_bound(dev, tf);
        const double norm_product = kk * entrywise_norm_upper(dmag) * (1.0 + 1e-12);
        b = sym_part_max_eig(jt) + std::min(per_entry, norm_product) + detail::rounding_slack(jt) * kk;
      }
      d = start_y * std::exp(b * dt);
      detail::check_radius(m, d, opts.delta_cap);
      c.b.push_back(b);
      c.enclosures.push_back(s);
      c.starts.push_back(start_y);
      c.deltas.push_back(d);
    }
  }
  return c;
}

double eval_discrepancy(const DiscrepancyCoefficients& c, double dist0, double t) {
  if (c.times.size() < 2 || c.b.size() != c.times.size() - 1) {
    throw Error(ErrorCode::kInvalidArgument, "eval_discrepancy: malformed coefficients");
  }
  if (!(dist0 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eval_discrepancy: dist0 must be non-negative");
  if (!(t >= c.times.front()) || !(t <= c.times.back())) {
    throw Error(ErrorCode::kInvalidArgument, "eval_discrepancy: t out of range");
  }
  if (t == c.times.front()) return dist0;

  double exponent = 0.0;
  for (std::size_t i = 1; i < c.times.size(); ++i) {
    if (t <= c.times[i]) {
      exponent += c.b[i - 1] * (t - c.times[i - 1]);
      break;
    }
    exponent += c.b[i - 1] * (c.times[i] - c.times[i - 1]);
  }
  double gain = 1.0;
  for (const auto& blk : c.blocks)
    if (c.times[blk.start] < t) gain *= blk.gain;
  return dist0 * gain * std::exp(exponent);
}

Reachtube build_reachtube(const SimulationTrace& trace, const DiscrepancyCoefficients& c) {
  if (c.deltas.size() != trace.entries.size() || c.starts.size() != trace.intervals()) {
    throw Error(ErrorCode::kInvalidArgument, "build_reachtube: coefficients do not match the trace");
  }
  Reachtube tube;
  tube.deltas = c.deltas;
  for (std::size_t i = 1; i <= trace.intervals(); ++i) {
    const double prime = std::max(c.deltas[i], c.starts[i - 1]);
    tube.prime_deltas.push_back(prime);
    tube.segments.push_back({bloat(trace.segment_hull(i), prime), trace.entries[i - 1].t, trace.entries[i].t});
  }
  return tube;
}

}  // namespace reachguard
