#pragma once

#include "reachguard/geometry.hpp"
#include "reachguard/models.hpp"

#include <optional>
#include <vector>

namespace reachguard {

struct TraceEntry {
  Box r;
  double t = 0.0;
};

/// Time-stamped boxes around one numerical trajectory. Each R_i is the
/// numerical state widened by eps/(2 sqrt n) per coordinate, so dia(R_i) <= eps.
struct SimulationTrace {
  std::vector<TraceEntry> entries;
  /// pads[i-1]: how far the trajectory may leave hull(R_{i-1}, R_i) between grid
  /// times, estimated from the integrator's internal steps.
  std::vector<double> pads;
  std::vector<Vector> points;
  double tau = 0.0;
  double epsilon = 0.0;
  double T = 0.0;
  Vector origin;

  std::size_t intervals() const { return entries.size() - 1; }
  /// bloat(hull(R_{i-1}, R_i), pads[i-1]) for i in 1..intervals().
  Box segment_hull(std::size_t i) const;
};

/// Piecewise-constant input: values[k] holds on [breakpoints[k], breakpoints[k+1]).
/// breakpoints[0] must be 0; the last value extends to infinity.
struct InputSignal {
  std::vector<double> breakpoints;
  std::vector<Vector> values;

  static InputSignal constant(const Vector& u);
  Vector at(double t) const;
};

/// Grid t_i = min(i tau, T). Models with inputs are driven by `input`, or by
/// their nominal input when absent.
SimulationTrace simulate_trace(const DynamicalSystem& m, const Vector& x0, double tau, double eps, double T,
                               const std::optional<Vector>& input = std::nullopt);

/// Point states at `times` (non-decreasing, >= 0), integrated with tolerance
/// derived from tight_eps.
std::vector<Vector> reference_trajectory(const DynamicalSystem& m, const Vector& x0, const std::vector<double>& times,
                                         double tight_eps, const InputSignal* input = nullptr);

}  // namespace reachguard
