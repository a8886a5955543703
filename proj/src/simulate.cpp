#include "reachguard/simulate.hpp"

#include "reachguard/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace reachguard {

Box SimulationTrace::segment_hull(std::size_t i) const {
  if (i < 1 || i > intervals()) throw Error(ErrorCode::kInvalidArgument, "segment_hull: index out of range");
  return bloat(box_hull(entries[i - 1].r, entries[i].r), pads[i - 1]);
}

InputSignal InputSignal::constant(const Vector& u) { return InputSignal{{0.0}, {u}}; }

Vector InputSignal::at(double t) const {
  if (values.empty() || breakpoints.size() != values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "InputSignal: breakpoints and values differ in length");
  }
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  const auto k = it == breakpoints.begin() ? 0 : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  return values[k];
}

namespace {

// Dormand-Prince 5(4), FSAL.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Step {
  Vector y0, f0, y1, f1;
  double h;
};

class Integrator {
 public:
  Integrator(const DynamicalSystem& m, double atol) : m_(m), atol_(atol), xu_(static_cast<std::size_t>(m.n + m.p)) {}

  void set_input(const Vector& u) { u_ = u; }

  Vector eval(const Vector& y) {
    std::copy(y.data(), y.data() + y.size(), xu_.begin());
    if (m_.p > 0) std::copy(u_.data(), u_.data() + u_.size(), xu_.begin() + m_.n);
    Vector out(m_.n);
    m_.rhs(std::span<const double>(xu_), std::span<double>(out.data(), static_cast<std::size_t>(m_.n)));
    return out;
  }

  // Advance (t, y) to t_end exactly. on_step sees every accepted step.
  template <class OnStep>
  void advance(Vector& y, double& t, double t_end, OnStep&& on_step) {
    const double span = t_end - t;
    if (span <= 0.0) return;
    Vector f = eval(y);
    if (h_ <= 0.0) h_ = std::min(span, 1e-3);
    const double h_min = 1e-13 * std::max(1.0, std::abs(t_end));
    while (t < t_end) {
      double h = std::min(h_, t_end - t);
      const bool last = h >= t_end - t;
      const Vector k1 = f;
      const Vector k2 = eval(y + h * a21 * k1);
      const Vector k3 = eval(y + h * (a31 * k1 + a32 * k2));
      const Vector k4 = eval(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vector k5 = eval(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vector k6 = eval(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Vector y1 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vector k7 = eval(y1);
      const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double ratio = err.cwiseAbs().maxCoeff() / atol_;

      if (!y1.allFinite() || !std::isfinite(ratio)) {
        if (h <= h_min) fail(ErrorCode::kNonFinite, "non-finite state", t);
        h_ = h * 0.1;
        continue;
      }
      if (ratio <= 1.0) {
        const double t1 = last ? t_end : t + h;
        if (!m_.domain.contains(y1)) fail(ErrorCode::kDomainExit, "trajectory left the model domain", t1);
        on_step(Step{y, f, y1, k7, t1 - t});
        y = y1;
        f = k7;
        t = t1;
        const double grow = ratio == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(ratio, -0.2));
        if (!last || grow < 1.0) h_ = h * std::max(grow, 0.2);
      } else {
        if (h <= h_min) fail(ErrorCode::kStepUnderflow, "step size underflow", t);
        h_ = std::max(h * std::max(0.2, 0.9 * std::pow(ratio, -0.2)), h_min);
      }
    }
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const char* what, double t) const {
    std::ostringstream os;
    os << m_.name << ": " << what << " at t = " << t;
    throw Error(code, os.str());
  }

  const DynamicalSystem& m_;
  double atol_;
  std::vector<double> xu_;
  Vector u_;
  double h_ = 0.0;
};

double tolerance_for(double eps, int n) {
  const double r = eps / (2.0 * std::sqrt(static_cast<double>(n)));
  return std::max(r * 1e-4, 1e-13);
}

void check_start(const DynamicalSystem& m, const Vector& x0) {
  if (x0.size() != m.n) throw Error(ErrorCode::kDimensionMismatch, m.name + ": initial state dimension");
  if (!x0.allFinite()) throw Error(ErrorCode::kNonFinite, m.name + ": non-finite initial state");
  if (!m.domain.contains(x0)) throw Error(ErrorCode::kDomainExit, m.name + ": initial state outside the domain");
}

}  // namespace

SimulationTrace simulate_trace(const DynamicalSystem& m, const Vector& x0, double tau, double eps, double T,
                               const std::optional<Vector>& input) {
  if (!(tau > 0.0) || !(eps > 0.0) || !(T > 0.0) || !std::isfinite(tau + eps + T)) {
    throw Error(ErrorCode::kInvalidArgument, "simulate_trace: tau, eps and T must be positive");
  }
  check_start(m, x0);

  const int n = m.n;
  const double r = eps / (2.0 * std::sqrt(static_cast<double>(n))) * (1.0 - 1e-12);
  const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(T / tau - 1e-9)));

  Integrator integ(m, tolerance_for(eps, n));
  if (m.p > 0) {
    const Vector u = input.value_or(m.nominal_input());
    if (u.size() != m.p) throw Error(ErrorCode::kDimensionMismatch, m.name + ": input dimension");
    integ.set_input(u);
  }

  SimulationTrace tr;
  tr.tau = tau;
  tr.epsilon = eps;
  tr.T = T;
  tr.origin = x0;
  tr.entries.reserve(k + 1);
  tr.points.reserve(k + 1);
  tr.entries.push_back({bloat(Box::point(x0), r), 0.0});
  tr.points.push_back(x0);

  Vector y = x0;
  double t = 0.0;
  std::vector<Step> steps;
  for (std::size_t i = 1; i <= k; ++i) {
    const double ti = i == k ? T : std::min(static_cast<double>(i) * tau, T);
    steps.clear();
    integ.advance(y, t, ti, [&](const Step& s) { steps.push_back(s); });
    tr.entries.push_back({bloat(Box::point(y), r), ti});
    tr.points.push_back(y);

    const Box hull = box_hull(tr.entries[i - 1].r, tr.entries[i].r);
    double pad = 0.0;
    for (const Step& s : steps) {
      // Chord-to-arc deviation over a step is about h^2/8 |y''|; doubled.
      const Vector rho = (0.25 * s.h * (s.f1 - s.f0).cwiseAbs()).array() + r;
      for (const Vector* p : {&s.y0, &s.y1}) {
        const Vector below = hull.lo() - (*p - rho);
        const Vector above = (*p + rho) - hull.hi();
        pad = std::max({pad, below.maxCoeff(), above.maxCoeff()});
      }
    }
    tr.pads.push_back(pad);
  }
  return tr;
}

std::vector<Vector> reference_trajectory(const DynamicalSystem& m, const Vector& x0, const std::vector<double>& times,
                                         double tight_eps, const InputSignal* input) {
  if (!(tight_eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "reference_trajectory: tolerance must be positive");
  check_start(m, x0);
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reference_trajectory: times must be sorted and non-negative");
  }

  std::vector<double> stops(times);
  if (input && m.p > 0) {
    for (double b : input->breakpoints)
      if (b > 0.0 && (times.empty() || b < times.back())) stops.push_back(b);
    std::sort(stops.begin(), stops.end());
  }

  Integrator integ(m, tolerance_for(tight_eps, m.n));
  std::vector<Vector> out;
  out.reserve(times.size());
  Vector y = x0;
  double t = 0.0;
  std::size_t next = 0;
  auto noop = [](const Step&) {};
  for (double stop : stops) {
    if (stop > t) {
      if (m.p > 0) integ.set_input(input ? input->at(0.5 * (t + stop)) : m.nominal_input());
      integ.advance(y, t, stop, noop);
    }
    while (next < times.size() && times[next] <= t) {
      out.push_back(y);
      ++next;
    }
  }
  return out;
}

}  // namespace reachguard
