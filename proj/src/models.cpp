#include "reachguard/models.hpp"

#include "reachguard/error.hpp"
#include "reachguard/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace reachguard {

void DynamicalSystem::rhs(std::span<const double> xu, std::span<double> out) const {
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f_exprs[static_cast<std::size_t>(i)].eval(xu);
}

namespace {

std::vector<double> pack(const DynamicalSystem& m, const Vector& x, const Vector& u) {
  if (x.size() != m.n) throw Error(ErrorCode::kDimensionMismatch, m.name + ": state dimension");
  std::vector<double> xu(x.data(), x.data() + x.size());
  if (m.p > 0) {
    const Vector in = u.size() == 0 ? m.nominal_input() : u;
    if (in.size() != m.p) throw Error(ErrorCode::kDimensionMismatch, m.name + ": input dimension");
    xu.insert(xu.end(), in.data(), in.data() + in.size());
  }
  return xu;
}

}  // namespace

Vector DynamicalSystem::rhs(const Vector& x, const Vector& u) const {
  const auto xu = pack(*this, x, u);
  Vector out(n);
  rhs(std::span<const double>(xu), std::span<double>(out.data(), static_cast<std::size_t>(n)));
  return out;
}

Matrix DynamicalSystem::jac(const Vector& x, const Vector& u) const {
  const auto xu = pack(*this, x, u);
  Matrix j(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) j(r, c) = jac_x_exprs[static_cast<std::size_t>(r * n + c)].eval(std::span(xu));
  return j;
}

Matrix DynamicalSystem::jac_u(const Vector& x, const Vector& u) const {
  const auto xu = pack(*this, x, u);
  Matrix j(n, p);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < p; ++c) j(r, c) = jac_u_exprs[static_cast<std::size_t>(r * p + c)].eval(std::span(xu));
  return j;
}

Vector DynamicalSystem::nominal_input() const {
  if (p == 0) return Vector();
  return input_box ? input_box->center() : Vector::Zero(p);
}

namespace {

std::vector<Expr> parse_all(const std::vector<std::string>& src, std::size_t expected, int n, int p,
                            const std::string& model, const char* field) {
  if (src.size() != expected) {
    throw Error(ErrorCode::kValidation, model + ": field '" + field + "' needs " + std::to_string(expected) +
                                            " entries, got " + std::to_string(src.size()));
  }
  std::vector<Expr> out;
  out.reserve(expected);
  for (const auto& s : src) out.push_back(parse_expr(s, n, p));
  return out;
}

std::vector<Interval> box_vars(const Box& x, const std::optional<Box>& u) {
  std::vector<Interval> v;
  for (Eigen::Index j = 0; j < x.dim(); ++j) v.emplace_back(x.lo()[j], x.hi()[j]);
  if (u) for (Eigen::Index j = 0; j < u->dim(); ++j) v.emplace_back(u->lo()[j], u->hi()[j]);
  return v;
}

}  // namespace

DynamicalSystem make_model(const ModelDefinition& def) {
  if (def.n < 1) throw Error(ErrorCode::kValidation, def.name + ": state dimension must be >= 1");
  if (def.p < 0) throw Error(ErrorCode::kValidation, def.name + ": input dimension must be >= 0");
  if (def.domain.dim() != def.n) throw Error(ErrorCode::kValidation, def.name + ": domain dimension");
  if (def.p > 0 && (!def.input_box || def.input_box->dim() != def.p)) {
    throw Error(ErrorCode::kValidation, def.name + ": input_box of dimension p is required");
  }

  DynamicalSystem m;
  m.name = def.name;
  m.description = def.description;
  m.n = def.n;
  m.p = def.p;
  const auto n = static_cast<std::size_t>(def.n);
  const auto p = static_cast<std::size_t>(def.p);
  m.f_exprs = parse_all(def.f, n, def.n, def.p, def.name, "f");
  m.jac_x_exprs = parse_all(def.jac_x, n * n, def.n, def.p, def.name, "jacobian");
  m.jac_u_exprs = parse_all(def.jac_u, n * p, def.n, def.p, def.name, "jacobian_u");
  m.domain = def.domain;
  m.input_box = def.p > 0 ? def.input_box : std::nullopt;
  m.default_center = def.default_center.value_or(def.domain.center());
  if (m.default_center.size() != def.n) throw Error(ErrorCode::kValidation, def.name + ": default center dimension");
  if (!def.domain.contains(m.default_center)) {
    throw Error(ErrorCode::kValidation, def.name + ": default center outside the domain");
  }

  if (def.lipschitz) {
    if (!(*def.lipschitz > 0.0) || !std::isfinite(*def.lipschitz)) {
      throw Error(ErrorCode::kValidation, def.name + ": lipschitz must be positive and finite");
    }
    m.lipschitz = *def.lipschitz;
  } else {
    // Frobenius bound of [J_x J_u] over domain x input box.
    const auto vars = box_vars(m.domain, m.input_box);
    double sq = 0.0;
    for (const auto& e : m.jac_x_exprs) sq += std::pow(e.eval(std::span<const Interval>(vars)).mag(), 2);
    for (const auto& e : m.jac_u_exprs) sq += std::pow(e.eval(std::span<const Interval>(vars)).mag(), 2);
    m.lipschitz = std::max(std::sqrt(sq), 1e-12);
  }
  return m;
}

namespace {

Box cube(int n, double lo, double hi) { return Box(Vector::Constant(n, lo), Vector::Constant(n, hi)); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::map<std::string, ModelDefinition> builtin_definitions() {
  std::map<std::string, ModelDefinition> defs;
  auto add = [&](ModelDefinition d) { defs.emplace(d.name, std::move(d)); };

  add({"decay1d", 1, 0, {"-x1"}, {"-1"}, {}, cube(1, -10, 10), std::nullopt, std::nullopt, vec({1.0}),
       "x' = -x"});
  add({"growth1d", 1, 0, {"x1"}, {"1"}, {}, cube(1, -20, 20), std::nullopt, std::nullopt, vec({1.0}),
       "x' = x"});
  add({"linosc", 2, 0, {"3*x2", "-x1"}, {"0", "3", "-1", "0"}, {}, cube(2, -20, 20), std::nullopt, std::nullopt,
       vec({1.0, 0.0}), "x' = [[0, 3], [-1, 0]] x"});
  // Van der Pol, mu = 1. The default center sits on the slow branch of the
  // relaxation cycle, where every start in B_0.5 stays left of x1 = 2 for T = 10.
  add({"vanderpol", 2, 0, {"x2", "(1 - x1^2)*x2 - x1"}, {"0", "1", "-2*x1*x2 - 1", "1 - x1^2"}, {},
       cube(2, -8, 8), std::nullopt, std::nullopt, vec({-5.8, 0.0}), "x1' = x2, x2' = (1 - x1^2) x2 - x1"});
  // Brusselator with A = 1, B = 1.5.
  add({"brusselator", 2, 0, {"1 + x1^2*x2 - 2.5*x1", "1.5*x1 - x1^2*x2"},
       {"2*x1*x2 - 2.5", "x1^2", "1.5 - 2*x1*x2", "-(x1^2)"}, {}, cube(2, -2, 6), std::nullopt, std::nullopt,
       vec({1.0, 1.0}), "x1' = 1 + x1^2 x2 - 2.5 x1, x2' = 1.5 x1 - x1^2 x2"});
  // Moore-Greitzer jet engine, two-state form.
  add({"jetengine", 2, 0, {"-x2 - 1.5*x1^2 - 0.5*x1^3 - 0.5", "3*x1 - x2"},
       {"-3*x1 - 1.5*x1^2", "-1", "3", "-1"}, {}, cube(2, -4, 4), std::nullopt, std::nullopt, vec({1.0, 1.0}),
       "x1' = -x2 - 1.5 x1^2 - 0.5 x1^3 - 0.5, x2' = 3 x1 - x2"});
  // Two Van der Pol oscillators with diffusive coupling; states (x1, y1, x2, y2).
  add({"coupledvanderpol", 4, 0,
       {"x2", "(1 - x1^2)*x2 - x1 + (x3 - x1)", "x4", "(1 - x3^2)*x4 - x3 + (x1 - x3)"},
       {"0", "1", "0", "0",                                  //
        "-2*x1*x2 - 2", "1 - x1^2", "1", "0",                //
        "0", "0", "0", "1",                                  //
        "1", "0", "-2*x3*x4 - 2", "1 - x3^2"},
       {}, cube(4, -8, 8), std::nullopt, std::nullopt, vec({1.25, 2.25, 1.25, 2.25}),
       "coupled Van der Pol, mu = 1, unit coupling"});
  add({"lorenz", 3, 0, {"10*(x2 - x1)", "x1*(28 - x3) - x2", "x1*x2 - 8/3*x3"},
       {"-10", "10", "0", "28 - x3", "-1", "-x1", "x2", "x1", "-8/3"}, {},
       Box(vec({-40, -40, -20}), vec({40, 40, 80})), std::nullopt, std::nullopt, vec({8.5, 8.5, 27.0}),
       "Lorenz, sigma = 10, rho = 28, beta = 8/3"});
  add({"decayinput", 1, 1, {"-x1 + u1"}, {"-1"}, {"1"}, cube(1, -10, 10), cube(1, -0.1, 0.1), std::nullopt,
       vec({1.0}), "x' = -x + u"});
  return defs;
}

const std::map<std::string, ModelDefinition>& registry() {
  static const auto defs = builtin_definitions();
  return defs;
}

}  // namespace

DynamicalSystem get_model(const std::string& name) {
  const auto& defs = registry();
  const auto it = defs.find(name);
  if (it == defs.end()) throw Error(ErrorCode::kUnknownModel, "unknown model '" + name + "'");
  return make_model(it->second);
}

std::vector<std::string> builtin_model_names() {
  std::vector<std::string> names;
  for (const auto& [name, def] : registry()) names.push_back(name);
  return names;
}

ValidationReport validate_model(const DynamicalSystem& m) {
  std::mt19937_64 rng(0x5eed);
  ValidationReport r;
  r.lipschitz_min_margin = std::numeric_limits<double>::infinity();
  auto sample = [&](const Box& b) {
    Vector x(b.dim());
    for (Eigen::Index j = 0; j < b.dim(); ++j) {
      x[j] = std::uniform_real_distribution<double>(b.lo()[j], b.hi()[j])(rng);
    }
    return x;
  };

  for (int s = 0; s < 100; ++s) {
    const Vector x = sample(m.domain);
    const Vector u = m.p > 0 ? sample(*m.input_box) : Vector();
    const Matrix j = m.jac(x, u);
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());

    Matrix fd(m.n, m.n);
    for (int c = 0; c < m.n; ++c) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[c]));
      Vector xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      fd.col(c) = (m.rhs(xp, u) - m.rhs(xm, u)) / (xp[c] - xm[c]);
    }
    r.jac_fd_max_rel_dev = std::max(r.jac_fd_max_rel_dev, (j - fd).cwiseAbs().maxCoeff() / scale);

    Matrix full = j;
    if (m.p > 0) {
      full.conservativeResize(m.n, m.n + m.p);
      full.rightCols(m.p) = m.jac_u(x, u);
    }
    r.lipschitz_min_margin = std::min(r.lipschitz_min_margin, m.lipschitz - spectral_norm(full));

    const auto enclosure = jacobian_enclosure(m, Box::point(x), m.p > 0 ? std::optional<Box>(Box::point(u)) : std::nullopt);
    for (int a = 0; a < m.n; ++a) {
      for (int b = 0; b < m.n; ++b) {
        const Interval& iv = enclosure[static_cast<std::size_t>(a * m.n + b)];
        const double dev = std::max({std::abs(iv.lo - j(a, b)), std::abs(iv.hi - j(a, b))});
        r.expr_point_max_dev = std::max(r.expr_point_max_dev, iv.contains(j(a, b)) ? dev : 1.0 + dev);
      }
    }
    ++r.samples;
  }

  if (r.jac_fd_max_rel_dev > 1e-4) {
    throw Error(ErrorCode::kValidation, m.name + ": Jacobian disagrees with finite differences (relative deviation " +
                                            std::to_string(r.jac_fd_max_rel_dev) + ")");
  }
  if (r.lipschitz_min_margin < 0.0) {
    throw Error(ErrorCode::kValidation, m.name + ": Lipschitz constant below ||J(x)|| at a sampled point");
  }
  if (r.expr_point_max_dev > 1e-10 * std::max(1.0, m.lipschitz)) {
    throw Error(ErrorCode::kValidation, m.name + ": interval Jacobian at a point box does not reproduce jac");
  }
  return r;
}

}  // namespace reachguard
