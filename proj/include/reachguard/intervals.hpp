#pragma once

#include "reachguard/geometry.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reachguard {

/// Closed interval [lo, hi]. Arithmetic rounds outward by widening every
/// primitive result by 4 ulps on each side.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
  Interval(double l, double h);

  double width() const { return hi - lo; }
  double mag() const;  // max(|lo|, |hi|)
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
Interval ipow(const Interval& a, int exponent);
Interval isin(const Interval& a);
Interval icos(const Interval& a);
Interval iexp(const Interval& a);
/// Outward widening used by every primitive.
Interval widen(double lo, double hi);

/// Immutable expression tree over states x1..xn and inputs u1..up.
/// Variable k < n is x_{k+1}; k >= n is u_{k-n+1}.
class Expr {
 public:
  enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kNeg, kPow, kSin, kCos, kExp };

  static Expr constant(double v);
  static Expr variable(int index);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr power(Expr base, int exponent);

  Op op() const;
  /// Largest variable index referenced, or -1.
  int max_variable() const;

  double eval(std::span<const double> vars) const;
  Interval eval(std::span<const Interval> vars) const;
  std::string to_string(int num_states) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Parse infix text: + - * / ^ (integer exponent), sin cos exp, x1..xn, u1..up.
/// Whitespace-insensitive. Throws kParse with the character offset.
Expr parse_expr(std::string_view text, int num_states, int num_inputs = 0);

/// Interval evaluation over a state box (and optional input box).
Interval eval_interval(const Expr& e, const Box& box, const std::optional<Box>& inputs = std::nullopt);

struct DynamicalSystem;

/// Upper bound over x in S of ||(J(x) + J(x)^T) - (Jc + Jc^T)||, from natural
/// interval extension per entry (i <= j, mirrored) and the entrywise norm.
/// Inputs (when the model has them) range over `inputs`, or the model's
/// nominal input when absent.
double jacobian_error_bound(const DynamicalSystem& m, const Box& s, const Matrix& j_center,
                            const std::optional<Box>& inputs = std::nullopt);

/// Entrywise interval enclosure of the state Jacobian over S (x inputs).
std::vector<Interval> jacobian_enclosure(const DynamicalSystem& m, const Box& s,
                                         const std::optional<Box>& inputs = std::nullopt);

/// Same for the input Jacobian (n x p, row-major).
std::vector<Interval> jacobian_u_enclosure(const DynamicalSystem& m, const Box& s,
                                           const std::optional<Box>& inputs = std::nullopt);

}  // namespace reachguard
