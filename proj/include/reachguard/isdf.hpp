#pragma once

#include "reachguard/ldf.hpp"

#include <span>
#include <vector>

namespace reachguard {

struct ISCoefficients {
  std::vector<double> a;
  std::vector<double> M;
  std::vector<double> times;
  double delta0 = 0.0;
  double eps = 0.0;
  Box input_box = Box::point(Vector::Zero(1));
  double l = 0.0;  // dia(input_box)

  std::vector<Box> enclosures;
  std::vector<double> deltas;  // Delta_0 .. Delta_k
  std::vector<double> starts;  // Delta_{i-1} + eps + M[i] l tau_i
};

/// The trace must be simulated under the constant input input_box.center().
ISCoefficients compute_is_ldf(const SimulationTrace& trace, const DynamicalSystem& m, double delta, double eps,
                              const Box& input_box, const LdfOptions& opts = {});

/// input_dev_integrals[i-1] is the integral of ||u1 - u2|| over interval i;
/// for the active interval it covers [t_{i-1}, t].
double eval_is_discrepancy(const ISCoefficients& c, double dist0, std::span<const double> input_dev_integrals,
                           double t);

Reachtube build_input_reachtube(const SimulationTrace& trace, const ISCoefficients& c);

}  // namespace reachguard
