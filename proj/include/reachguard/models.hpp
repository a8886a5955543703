#pragma once

#include "reachguard/geometry.hpp"
#include "reachguard/intervals.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reachguard {

/// Textual model description; the form user models arrive in from a config.
struct ModelDefinition {
  std::string name;
  int n = 0;
  int p = 0;
  std::vector<std::string> f;      // n entries
  std::vector<std::string> jac_x;  // n*n, row-major
  std::vector<std::string> jac_u;  // n*p, row-major
  Box domain = Box::point(Vector::Zero(1));
  std::optional<Box> input_box;
  /// Lipschitz constant valid on domain (x input box). Derived from the
  /// interval Jacobian over the domain when absent.
  std::optional<double> lipschitz;
  std::optional<Vector> default_center;
  std::string description;
};

/// ẋ = f(x, u). Immutable after construction; all evaluators are reentrant.
struct DynamicalSystem {
  std::string name;
  std::string description;
  int n = 0;
  int p = 0;
  std::vector<Expr> f_exprs;
  std::vector<Expr> jac_x_exprs;
  std::vector<Expr> jac_u_exprs;
  double lipschitz = 0.0;
  Box domain = Box::point(Vector::Zero(1));
  std::optional<Box> input_box;
  Vector default_center;

  /// `xu` holds the n states followed by the p inputs.
  void rhs(std::span<const double> xu, std::span<double> out) const;
  Vector rhs(const Vector& x, const Vector& u = Vector()) const;
  Matrix jac(const Vector& x, const Vector& u = Vector()) const;
  Matrix jac_u(const Vector& x, const Vector& u = Vector()) const;
  /// Centroid of the input box (empty when p = 0).
  Vector nominal_input() const;
};

DynamicalSystem make_model(const ModelDefinition& def);

/// Builtins: decay1d, growth1d, linosc, vanderpol, brusselator, jetengine,
/// coupledvanderpol, lorenz, decayinput.
DynamicalSystem get_model(const std::string& name);
std::vector<std::string> builtin_model_names();

struct ValidationReport {
  double jac_fd_max_rel_dev = 0.0;     // Jacobian vs central differences
  double lipschitz_min_margin = 0.0;   // min over samples of L - ||J(x)||
  double expr_point_max_dev = 0.0;     // interval Jacobian at a point box vs jac
  int samples = 0;
};

/// Samples 100 deterministic points of the domain and checks the Jacobian
/// against finite differences (1e-4 relative), L >= ||J(x)||, and the
/// interval Jacobian at point boxes (1e-10). Throws kValidation naming the
/// first failed check.
ValidationReport validate_model(const DynamicalSystem& m);

}  // namespace reachguard
