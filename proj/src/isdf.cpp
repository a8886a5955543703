#include "reachguard/isdf.hpp"

#include "enclosure.hpp"
#include "reachguard/error.hpp"
#include "reachguard/intervals.hpp"

#include <algorithm>
#include <cmath>

namespace reachguard {

ISCoefficients compute_is_ldf(const SimulationTrace& trace, const DynamicalSystem& m, double delta, double eps,
                              const Box& input_box, const LdfOptions& opts) {
  if (m.p < 1) throw Error(ErrorCode::kInvalidArgument, m.name + ": IS-discrepancy needs a model with inputs");
  if (input_box.dim() != m.p) throw Error(ErrorCode::kDimensionMismatch, "compute_is_ldf: input box dimension");
  if (trace.entries.size() < 2) throw Error(ErrorCode::kInvalidArgument, "compute_is_ldf: trace too short");
  if (!(delta >= 0.0) || !(eps >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "compute_is_ldf: negative radius");

  ISCoefficients c;
  c.delta0 = delta;
  c.eps = eps;
  c.input_box = input_box;
  c.l = diameter(input_box);
  for (const auto& e : trace.entries) c.times.push_back(e.t);
  c.deltas.push_back(delta);

  const Vector nominal = input_box.center();
  double d = delta;
  for (std::size_t i = 1; i <= trace.intervals(); ++i) {
    const double dt = c.times[i] - c.times[i - 1];
    const Box s = detail::at_interval(i, c.times[i - 1], [&] {
      return detail::gronwall_enclosure(m, trace.segment_hull(i), d + eps, dt, c.l, input_box, opts);
    });
    const Matrix jc = m.jac(s.center(), nominal);
    const double lambda = sym_part_max_eig(jc) + jacobian_error_bound(m, s, jc, input_box) / 2.0;
    const double a = lambda + 0.5 + detail::rounding_slack(jc);

    double sq = 0.0;
    for (const Interval& iv : jacobian_u_enclosure(m, s, input_box)) sq += iv.mag() * iv.mag();
    const double gain = std::sqrt(sq);
    if (!std::isfinite(gain)) throw Error(ErrorCode::kUnboundedInterval, m.name + ": unbounded input Jacobian");

    const double grow = std::exp(a * dt);
    const double start = d + eps;
    d = start * grow + gain * grow * c.l * dt;
    detail::check_radius(m, d, opts.delta_cap);
    c.a.push_back(a);
    c.M.push_back(gain);
    c.enclosures.push_back(s);
    c.starts.push_back(start + gain * c.l * dt);
    c.deltas.push_back(d);
  }
  return c;
}

double eval_is_discrepancy(const ISCoefficients& c, double dist0, std::span<const double> input_dev_integrals,
                           double t) {
  if (c.times.size() < 2 || c.a.size() != c.times.size() - 1 || c.M.size() != c.a.size()) {
    throw Error(ErrorCode::kInvalidArgument, "eval_is_discrepancy: malformed coefficients");
  }
  if (!(t >= c.times.front()) || !(t <= c.times.back())) {
    throw Error(ErrorCode::kInvalidArgument, "eval_is_discrepancy: t out of range");
  }
  if (!(dist0 >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eval_is_discrepancy: dist0 must be non-negative");
  if (t == c.times.front()) return dist0;

  double beta = dist0;
  for (std::size_t i = 1; i < c.times.size(); ++i) {
    if (i > input_dev_integrals.size()) {
      throw Error(ErrorCode::kInvalidArgument, "eval_is_discrepancy: missing input integral");
    }
    const double w = input_dev_integrals[i - 1];
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "eval_is_discrepancy: negative input integral");
    const double span = std::min(t, c.times[i]) - c.times[i - 1];
    const double grow = std::exp(c.a[i - 1] * span);
    beta = beta * grow + c.M[i - 1] * grow * w;
    if (t <= c.times[i]) break;
  }
  return beta;
}

Reachtube build_input_reachtube(const SimulationTrace& trace, const ISCoefficients& c) {
  if (c.deltas.size() != trace.entries.size() || c.starts.size() != trace.intervals()) {
    throw Error(ErrorCode::kInvalidArgument, "build_input_reachtube: coefficients do not match the trace");
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
