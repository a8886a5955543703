#pragma once

#include "reachguard/geometry.hpp"
#include "reachguard/linalg.hpp"
#include "reachguard/models.hpp"
#include "reachguard/simulate.hpp"

#include <optional>
#include <vector>

namespace reachguard {

/// How the one-step set S_i is bloated around hull(R_{i-1}, R_i).
///  kGlobalLipschitz: (Delta + eps) e^{L tau} with the model's domain-wide L.
///  kLocalLipschitz:  same with a Lipschitz bound of the Jacobian over S itself.
///  kLogNorm:         (Delta + eps) max(1, e^{mu tau}) with mu the symmetric-part
///                    eigenvalue bound over S itself (the b[i] formula).
/// The local variants are found by fixed-point iteration and fall back to the
/// next coarser one when it does not close.
enum class Enclosure { kLogNorm, kLocalLipschitz, kGlobalLipschitz };

struct LdfOptions {
  Enclosure enclosure = Enclosure::kLogNorm;
  double delta_cap = 1e12;
};

/// Intervals [start, end) of the trace handled in one transformed frame.
struct TransformBlock {
  std::size_t start = 0;
  std::size_t end = 0;
  double k = 1.0;     // cond(P)
  double gain = 1.0;  // ||P P_prev^-1||, or k for the first block; applied to Delta on entry
  Transform transform;
};

struct DiscrepancyCoefficients {
  std::vector<double> b;      // one per trace interval
  std::vector<double> times;  // trace grid
  double delta0 = 0.0;
  double eps = 0.0;
  std::vector<TransformBlock> blocks;  // empty without coordinate transformation

  // Per-interval byproducts of the computation, consumed by build_reachtube.
  std::vector<Box> enclosures;  // S_i
  std::vector<double> deltas;   // Delta_0 .. Delta_k
  std::vector<double> starts;   // radius entering interval i, in the working norm
};

struct TubeSegment {
  Box box;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct Reachtube {
  std::vector<TubeSegment> segments;
  std::vector<double> deltas;        // Delta_0 .. Delta_k
  std::vector<double> prime_deltas;  // Delta'_1 .. Delta'_k
};

/// Frobenius bound of the interval Jacobian [J_x J_u] over s (x inputs).
double lipschitz_over(const DynamicalSystem& m, const Box& s, const std::optional<Box>& inputs = std::nullopt);

DiscrepancyCoefficients compute_ldf(const SimulationTrace& trace, const DynamicalSystem& m, double delta, double eps,
                                    const LdfOptions& opts = {});

/// Blocks of `step` intervals, each in the real block frame of the Jacobian
/// at the block's average trace center.
DiscrepancyCoefficients compute_ldf_ct(const SimulationTrace& trace, const DynamicalSystem& m, double delta,
                                       double eps, int step, const LdfOptions& opts = {});

double eval_discrepancy(const DiscrepancyCoefficients& c, double dist0, double t);

Reachtube build_reachtube(const SimulationTrace& trace, const DiscrepancyCoefficients& c);

}  // namespace reachguard
