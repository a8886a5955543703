#include "reachguard/intervals.hpp"

#include "reachguard/error.hpp"
#include "reachguard/linalg.hpp"
#include "reachguard/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace reachguard {

namespace {

constexpr int kUlps = 4;
constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double x) {
  for (int i = 0; i < kUlps; ++i) x = std::nextafter(x, -kInf);
  return x;
}

double up(double x) {
  for (int i = 0; i < kUlps; ++i) x = std::nextafter(x, kInf);
  return x;
}

Interval checked(Interval r) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw Error(ErrorCode::kUnboundedInterval, "interval evaluation produced a non-finite bound");
  }
  return r;
}

}  // namespace

Interval::Interval(double l, double h) : lo(l), hi(h) {
  if (std::isnan(l) || std::isnan(h)) throw Error(ErrorCode::kNonFinite, "Interval: NaN bound");
  if (l > h) throw Error(ErrorCode::kInvalidArgument, "Interval: lo > hi");
}

double Interval::mag() const { return std::max(std::abs(lo), std::abs(hi)); }

Interval widen(double lo, double hi) { return checked(Interval(down(lo), up(hi))); }

Interval operator+(const Interval& a, const Interval& b) { return widen(a.lo + b.lo, a.hi + b.hi); }
Interval operator-(const Interval& a, const Interval& b) { return widen(a.lo - b.hi, a.hi - b.lo); }
Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

Interval operator*(const Interval& a, const Interval& b) {
  const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) throw Error(ErrorCode::kDivisionByZero, "interval division by an interval containing 0");
  const double p[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

Interval ipow(const Interval& a, int exponent) {
  if (exponent < 0) throw Error(ErrorCode::kInvalidArgument, "ipow: negative exponent");
  if (exponent == 0) return Interval(1.0);
  if (exponent == 1) return a;
  const double l = std::pow(a.lo, exponent);
  const double h = std::pow(a.hi, exponent);
  if (exponent % 2 == 1) return widen(l, h);
  if (a.lo >= 0.0) return widen(l, h);
  if (a.hi <= 0.0) return widen(h, l);
  return Interval(0.0, up(std::max(l, h)));
}

namespace {

// Range of sin over [lo, hi] shifted by `phase` (cos x = sin(x + pi/2)).
// Endpoints are evaluated with the unshifted function; only the search for
// interior extrema works on the shifted arguments.
Interval sin_range(double lo, double hi, double phase, double (*fn)(double)) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (hi - lo >= kTwoPi) return Interval(-1.0, 1.0);
  const double a = lo + phase;
  const double b = hi + phase;
  double l = std::min(fn(lo), fn(hi));
  double h = std::max(fn(lo), fn(hi));
  const double margin = 1e-12 * (1.0 + std::abs(a) + std::abs(b));
  const double k0 = std::floor((a - margin - std::numbers::pi / 2) / std::numbers::pi);
  for (double k = k0; std::numbers::pi / 2 + k * std::numbers::pi <= b + margin; k += 1.0) {
    const double c = std::numbers::pi / 2 + k * std::numbers::pi;
    if (c < a - margin) continue;
    const bool is_max = std::fmod(std::abs(k), 2.0) == 0.0;
    if (is_max) h = 1.0;
    else l = -1.0;
  }
  // libm sin/cos are accurate to an ulp or two of the result; near a zero
  // that is far below 4 ulps of 1, so pad absolutely as well.
  constexpr double kAbs = 4.0 * std::numeric_limits<double>::epsilon();
  return Interval(std::max(-1.0, down(l) - kAbs), std::min(1.0, up(h) + kAbs));
}

}  // namespace

Interval isin(const Interval& a) { return sin_range(a.lo, a.hi, 0.0, [](double x) { return std::sin(x); }); }
Interval icos(const Interval& a) {
  return sin_range(a.lo, a.hi, std::numbers::pi / 2, [](double x) { return std::cos(x); });
}

Interval iexp(const Interval& a) {
  return checked(Interval(std::max(0.0, down(std::exp(a.lo))), up(std::exp(a.hi))));
}

// ---------------------------------------------------------------------------

struct Expr::Node {
  Op op;
  double value = 0.0;
  int index = -1;  // variable index, or exponent for kPow
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  int max_var = -1;
};

Expr Expr::constant(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "Expr: non-finite constant");
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable(int index) {
  if (index < 0) throw Error(ErrorCode::kInvalidArgument, "Expr: negative variable index");
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->index = index;
  n->max_var = index;
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr a) {
  if (op != Op::kNeg && op != Op::kSin && op != Op::kCos && op != Op::kExp) {
    throw Error(ErrorCode::kInvalidArgument, "Expr::unary: not a unary operator");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->max_var = a.node_->max_var;
  n->lhs = std::move(a.node_);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  if (op != Op::kAdd && op != Op::kSub && op != Op::kMul && op != Op::kDiv) {
    throw Error(ErrorCode::kInvalidArgument, "Expr::binary: not a binary operator");
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->max_var = std::max(a.node_->max_var, b.node_->max_var);
  n->lhs = std::move(a.node_);
  n->rhs = std::move(b.node_);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  if (exponent < 0) throw Error(ErrorCode::kInvalidArgument, "Expr::power: negative exponent");
  auto n = std::make_shared<Node>();
  n->op = Op::kPow;
  n->index = exponent;
  n->max_var = base.node_->max_var;
  n->lhs = std::move(base.node_);
  return Expr(std::move(n));
}

Expr::Op Expr::op() const { return node_->op; }
int Expr::max_variable() const { return node_->max_var; }

double Expr::eval(std::span<const double> vars) const {
  if (node_->max_var >= static_cast<int>(vars.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "Expr::eval: too few variables");
  }
  struct Rec {
    static double go(const Node& n, std::span<const double> v) {
      switch (n.op) {
        case Op::kConst: return n.value;
        case Op::kVar: return v[static_cast<std::size_t>(n.index)];
        case Op::kAdd: return go(*n.lhs, v) + go(*n.rhs, v);
        case Op::kSub: return go(*n.lhs, v) - go(*n.rhs, v);
        case Op::kMul: return go(*n.lhs, v) * go(*n.rhs, v);
        case Op::kDiv: return go(*n.lhs, v) / go(*n.rhs, v);
        case Op::kNeg: return -go(*n.lhs, v);
        case Op::kPow: {
          const double b = go(*n.lhs, v);
          double r = 1.0;
          for (int i = 0; i < n.index; ++i) r *= b;
          return r;
        }
        case Op::kSin: return std::sin(go(*n.lhs, v));
        case Op::kCos: return std::cos(go(*n.lhs, v));
        case Op::kExp: return std::exp(go(*n.lhs, v));
      }
      return 0.0;
    }
  };
  return Rec::go(*node_, vars);
}

Interval Expr::eval(std::span<const Interval> vars) const {
  if (node_->max_var >= static_cast<int>(vars.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "Expr::eval: too few variables");
  }
  struct Rec {
    static Interval go(const Node& n, std::span<const Interval> v) {
      switch (n.op) {
        case Op::kConst: {
          // Integers are exact; other literals may carry decimal rounding.
          if (n.value == std::trunc(n.value) && std::abs(n.value) < 0x1p52) return Interval(n.value);
          return widen(n.value, n.value);
        }
        case Op::kVar: return v[static_cast<std::size_t>(n.index)];
        case Op::kAdd: return go(*n.lhs, v) + go(*n.rhs, v);
        case Op::kSub: return go(*n.lhs, v) - go(*n.rhs, v);
        case Op::kMul: {
          // x*x is a square, not a product of independent factors.
          if (n.lhs == n.rhs) return ipow(go(*n.lhs, v), 2);
          return go(*n.lhs, v) * go(*n.rhs, v);
        }
        case Op::kDiv: return go(*n.lhs, v) / go(*n.rhs, v);
        case Op::kNeg: return -go(*n.lhs, v);
        case Op::kPow: return ipow(go(*n.lhs, v), n.index);
        case Op::kSin: return isin(go(*n.lhs, v));
        case Op::kCos: return icos(go(*n.lhs, v));
        case Op::kExp: return iexp(go(*n.lhs, v));
      }
      return Interval();
    }
  };
  return Rec::go(*node_, vars);
}

std::string Expr::to_string(int num_states) const {
  struct Rec {
    static void go(const Node& n, int ns, std::ostringstream& os) {
      switch (n.op) {
        case Op::kConst: os.precision(17); os << n.value; return;
        case Op::kVar:
          if (n.index < ns) os << 'x' << (n.index + 1);
          else os << 'u' << (n.index - ns + 1);
          return;
        case Op::kAdd: case Op::kSub: case Op::kMul: case Op::kDiv: {
          const char sym = n.op == Op::kAdd ? '+' : n.op == Op::kSub ? '-' : n.op == Op::kMul ? '*' : '/';
          os << '(';
          go(*n.lhs, ns, os);
          os << ' ' << sym << ' ';
          go(*n.rhs, ns, os);
          os << ')';
          return;
        }
        case Op::kNeg: os << "(-"; go(*n.lhs, ns, os); os << ')'; return;
        case Op::kPow: os << '('; go(*n.lhs, ns, os); os << ")^" << n.index; return;
        case Op::kSin: os << "sin("; go(*n.lhs, ns, os); os << ')'; return;
        case Op::kCos: os << "cos("; go(*n.lhs, ns, os); os << ')'; return;
        case Op::kExp: os << "exp("; go(*n.lhs, ns, os); os << ')'; return;
      }
    }
  };
  std::ostringstream os;
  Rec::go(*node_, num_states, os);
  return os.str();
}

Interval eval_interval(const Expr& e, const Box& box, const std::optional<Box>& inputs) {
  std::vector<Interval> vars;
  vars.reserve(static_cast<std::size_t>(box.dim() + (inputs ? inputs->dim() : 0)));
  for (Eigen::Index j = 0; j < box.dim(); ++j) vars.emplace_back(box.lo()[j], box.hi()[j]);
  if (inputs) {
    for (Eigen::Index j = 0; j < inputs->dim(); ++j) vars.emplace_back(inputs->lo()[j], inputs->hi()[j]);
  }
  if (e.max_variable() >= static_cast<int>(vars.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "eval_interval: box does not cover every variable");
  }
  return e.eval(std::span<const Interval>(vars));
}

namespace {

std::vector<Interval> variables_for(const DynamicalSystem& m, const Box& s, const std::optional<Box>& inputs) {
  if (s.dim() != m.n) throw Error(ErrorCode::kDimensionMismatch, "jacobian bound: box dimension");
  std::vector<Interval> vars;
  for (Eigen::Index j = 0; j < s.dim(); ++j) vars.emplace_back(s.lo()[j], s.hi()[j]);
  if (m.p > 0) {
    const Box in = inputs ? *inputs : Box::point(m.nominal_input());
    if (in.dim() != m.p) throw Error(ErrorCode::kDimensionMismatch, "jacobian bound: input box dimension");
    for (Eigen::Index j = 0; j < in.dim(); ++j) vars.emplace_back(in.lo()[j], in.hi()[j]);
  }
  return vars;
}

}  // namespace

std::vector<Interval> jacobian_enclosure(const DynamicalSystem& m, const Box& s, const std::optional<Box>& inputs) {
  const auto vars = variables_for(m, s, inputs);
  std::vector<Interval> out;
  out.reserve(m.jac_x_exprs.size());
  for (const auto& e : m.jac_x_exprs) out.push_back(e.eval(std::span<const Interval>(vars)));
  return out;
}

std::vector<Interval> jacobian_u_enclosure(const DynamicalSystem& m, const Box& s, const std::optional<Box>& inputs) {
  const auto vars = variables_for(m, s, inputs);
  std::vector<Interval> out;
  out.reserve(m.jac_u_exprs.size());
  for (const auto& e : m.jac_u_exprs) out.push_back(e.eval(std::span<const Interval>(vars)));
  return out;
}

double jacobian_error_bound(const DynamicalSystem& m, const Box& s, const Matrix& j_center,
                            const std::optional<Box>& inputs) {
  const int n = m.n;
  if (j_center.rows() != n || j_center.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "jacobian_error_bound: center Jacobian size");
  }
  const auto vars = variables_for(m, s, inputs);
  const std::span<const Interval> v(vars);
  Matrix bounds = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto& eij = m.jac_x_exprs[static_cast<std::size_t>(i * n + j)];
      Interval sum = eij.eval(v);
      if (i != j) sum = sum + m.jac_x_exprs[static_cast<std::size_t>(j * n + i)].eval(v);
      else sum = sum + sum;
      const double c = j_center(i, j) + j_center(j, i);
      const Interval dev = sum - widen(c, c);
      bounds(i, j) = bounds(j, i) = dev.mag();
    }
  }
  return entrywise_norm_upper(bounds);
}

}  // namespace reachguard
