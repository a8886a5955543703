#pragma once

#include "reachguard/error.hpp"
#include "reachguard/ldf.hpp"

#include <string>

namespace reachguard::detail {

/// Box around `hull` holding every trajectory that starts within `start` of
/// the nominal one and runs for dt, with inputs of diameter input_dia.
/// Lipschitz based; the local constant is tried first unless opts asks for
/// the global one.
Box gronwall_enclosure(const DynamicalSystem& m, const Box& hull, double start, double dt, double input_dia,
                       const std::optional<Box>& inputs, const LdfOptions& opts);

/// Input-free enclosure following opts.enclosure.
Box state_enclosure(const DynamicalSystem& m, const Box& hull, double start, double dt, const LdfOptions& opts);

/// lambda_max(sym J(center s)) + jacobian_error_bound / 2 over s.
double lognorm_bound(const DynamicalSystem& m, const Box& s);

double rounding_slack(const Matrix& j);

void check_radius(const DynamicalSystem& m, double r, double cap);

/// Runs f, prefixing any library error with the interval it concerns.
template <class F>
auto at_interval(std::size_t i, double t, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "interval " + std::to_string(i) + " (t = " + std::to_string(t) + "): " + e.what());
  }
}

}  // namespace reachguard::detail
