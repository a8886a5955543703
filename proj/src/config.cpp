#include "reachguard/config.hpp"

#include "reachguard/error.hpp"
#include "reachguard/isdf.hpp"
#include "reachguard/ldf.hpp"
#include "reachguard/simulate.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

namespace reachguard {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kConfig, "config field '" + field + "': " + why);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(field, "must be finite");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) field_error(field, "expected an integer");
  return j.get<int>();
}

Vector vector_of(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], field);
  return v;
}

std::vector<std::string> strings_of(const json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) field_error(field, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Box box_of(const json& j, const std::string& field) {
  if (!j.is_object()) field_error(field, "expected {\"lo\": [...], \"hi\": [...]}");
  reject_unknown(j, {"lo", "hi"}, field);
  if (!j.contains("lo") || !j.contains("hi")) field_error(field, "needs lo and hi");
  try {
    return Box(vector_of(j["lo"], field + ".lo"), vector_of(j["hi"], field + ".hi"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    field_error(field, e.what());
  }
}

ojson box_json(const Box& b) {
  ojson j;
  j["lo"] = std::vector<double>(b.lo().data(), b.lo().data() + b.lo().size());
  j["hi"] = std::vector<double>(b.hi().data(), b.hi().data() + b.hi().size());
  return j;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ModelDefinition user_model_of(const json& j) {
  reject_unknown(j, {"name", "n", "p", "f", "jacobian", "jacobian_u", "domain", "input_box", "lipschitz",
                     "default_center", "description"},
                 "model");
  ModelDefinition d;
  if (!j.contains("name") || !j["name"].is_string()) field_error("model.name", "required string");
  d.name = j["name"].get<std::string>();
  if (!j.contains("n")) field_error("model.n", "required");
  d.n = integer(j["n"], "model.n");
  d.p = j.contains("p") ? integer(j["p"], "model.p") : 0;
  if (!j.contains("f")) field_error("model.f", "required");
  d.f = strings_of(j["f"], "model.f");
  if (!j.contains("jacobian")) field_error("model.jacobian", "required");
  d.jac_x = strings_of(j["jacobian"], "model.jacobian");
  if (j.contains("jacobian_u")) d.jac_u = strings_of(j["jacobian_u"], "model.jacobian_u");
  if (!j.contains("domain")) field_error("model.domain", "required");
  d.domain = box_of(j["domain"], "model.domain");
  if (j.contains("input_box")) d.input_box = box_of(j["input_box"], "model.input_box");
  if (j.contains("lipschitz")) d.lipschitz = number(j["lipschitz"], "model.lipschitz");
  if (j.contains("default_center")) d.default_center = vector_of(j["default_center"], "model.default_center");
  if (j.contains("description")) {
    if (!j["description"].is_string()) field_error("model.description", "expected a string");
    d.description = j["description"].get<std::string>();
  }
  return d;
}

ojson user_model_json(const ModelDefinition& d) {
  ojson j;
  j["name"] = d.name;
  j["n"] = d.n;
  j["p"] = d.p;
  j["f"] = d.f;
  j["jacobian"] = d.jac_x;
  j["jacobian_u"] = d.jac_u;
  j["domain"] = box_json(d.domain);
  if (d.input_box) j["input_box"] = box_json(*d.input_box);
  if (d.lipschitz) j["lipschitz"] = *d.lipschitz;
  if (d.default_center) j["default_center"] = to_std(*d.default_center);
  j["description"] = d.description;
  return j;
}

bool same_definition(const ModelDefinition& a, const ModelDefinition& b) {
  auto same_vec = [](const std::optional<Vector>& x, const std::optional<Vector>& y) {
    return x.has_value() == y.has_value() && (!x || *x == *y);
  };
  return a.name == b.name && a.n == b.n && a.p == b.p && a.f == b.f && a.jac_x == b.jac_x && a.jac_u == b.jac_u &&
         a.domain == b.domain && a.input_box == b.input_box && a.lipschitz == b.lipschitz &&
         same_vec(a.default_center, b.default_center) && a.description == b.description;
}

HalfspaceSet::Halfspace unsafe_of(const json& j, int n, std::size_t idx) {
  const std::string field = "unsafe[" + std::to_string(idx) + "]";
  if (j.is_string()) {
    static const std::regex shorthand(R"(^\s*x(\d+)\s*>\s*([-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?)\s*$)");
    std::smatch m;
    const std::string s = j.get<std::string>();
    if (!std::regex_match(s, m, shorthand)) field_error(field, "expected \"xj > c\"");
    const int axis = std::stoi(m[1].str());
    if (axis < 1 || axis > n) field_error(field, "state index out of range");
    Vector normal = Vector::Zero(n);
    normal[axis - 1] = 1.0;
    return {normal, std::stod(m[2].str())};
  }
  if (!j.is_object()) field_error(field, "expected {\"normal\": [...], \"offset\": c} or \"xj > c\"");
  reject_unknown(j, {"normal", "offset"}, field);
  if (!j.contains("normal") || !j.contains("offset")) field_error(field, "needs normal and offset");
  HalfspaceSet::Halfspace h{vector_of(j["normal"], field + ".normal"), number(j["offset"], field + ".offset")};
  if (h.normal.size() != n) field_error(field + ".normal", "dimension differs from the model");
  if (h.normal.isZero(0.0)) field_error(field + ".normal", "must be nonzero");
  return h;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

DynamicalSystem RunConfig::system() const { return user_model ? make_model(*user_model) : get_model(model); }

VerificationProblem RunConfig::problem() const {
  VerificationProblem p;
  p.system = system();
  p.theta_center = theta_center;
  p.delta = delta;
  if (unsafe.empty()) throw Error(ErrorCode::kConfig, "config field 'unsafe': required for verification");
  p.unsafe = HalfspaceSet(unsafe);
  p.T = T;
  p.tau = tau;
  p.epsilon0 = epsilon0;
  p.ct_enabled = ct_enabled;
  p.ct_step = ct_step;
  p.max_refinements = max_refinements;
  p.workers = workers;
  return p;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto same_unsafe = [](const auto& x, const auto& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].normal != y[i].normal || x[i].offset != y[i].offset) return false;
    return true;
  };
  const bool models = a.user_model.has_value() == b.user_model.has_value() &&
                      (!a.user_model || same_definition(*a.user_model, *b.user_model));
  return a.model == b.model && models && a.theta_center == b.theta_center && a.delta == b.delta &&
         same_unsafe(a.unsafe, b.unsafe) && a.T == b.T && a.tau == b.tau && a.epsilon0 == b.epsilon0 &&
         a.ct_enabled == b.ct_enabled && a.ct_step == b.ct_step && a.max_refinements == b.max_refinements &&
         a.mode == b.mode && a.output == b.output && a.workers == b.workers && a.seed == b.seed &&
         a.emit_tube == b.emit_tube && a.input_box == b.input_box;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, "config syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " +
                                       e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  reject_unknown(j, {"model", "theta_center", "delta", "unsafe", "T", "tau", "epsilon0", "ct", "max_refinements",
                     "mode", "output", "workers", "seed", "emit_tube", "input_box"},
                 "");

  RunConfig c;
  if (!j.contains("model")) field_error("model", "required");
  DynamicalSystem sys;
  if (j["model"].is_string()) {
    c.model = j["model"].get<std::string>();
    sys = get_model(c.model);
  } else if (j["model"].is_object()) {
    c.user_model = user_model_of(j["model"]);
    c.model = c.user_model->name;
    try {
      sys = make_model(*c.user_model);
    } catch (const Error& e) {
      field_error("model", e.what());
    }
  } else {
    field_error("model", "expected a builtin name or a model object");
  }

  c.theta_center = j.contains("theta_center") ? vector_of(j["theta_center"], "theta_center") : sys.default_center;
  if (c.theta_center.size() != sys.n) field_error("theta_center", "dimension differs from the model");
  if (!j.contains("delta")) field_error("delta", "required");
  c.delta = number(j["delta"], "delta");
  if (!(c.delta > 0.0)) field_error("delta", "must be positive");
  if (!j.contains("T")) field_error("T", "required");
  c.T = number(j["T"], "T");
  if (!(c.T > 0.0)) field_error("T", "must be positive");
  c.tau = j.contains("tau") ? number(j["tau"], "tau") : 0.01 * c.T;
  if (!(c.tau > 0.0) || c.tau > c.T) field_error("tau", "must lie in (0, T]");
  c.epsilon0 = j.contains("epsilon0") ? number(j["epsilon0"], "epsilon0") : 1e-4 * c.delta;
  if (!(c.epsilon0 > 0.0)) field_error("epsilon0", "must be positive");

  if (j.contains("unsafe")) {
    const json& u = j["unsafe"];
    if (u.is_string()) {
      c.unsafe.push_back(unsafe_of(u, sys.n, 0));
    } else if (u.is_array() && !u.empty()) {
      for (std::size_t i = 0; i < u.size(); ++i) c.unsafe.push_back(unsafe_of(u[i], sys.n, i));
    } else {
      field_error("unsafe", "expected a non-empty list of halfspaces");
    }
  }
  if (j.contains("ct")) {
    const json& ct = j["ct"];
    if (!ct.is_object()) field_error("ct", "expected {\"enabled\": bool, \"step\": int}");
    reject_unknown(ct, {"enabled", "step"}, "ct");
    if (ct.contains("enabled")) {
      if (!ct["enabled"].is_boolean()) field_error("ct.enabled", "expected a boolean");
      c.ct_enabled = ct["enabled"].get<bool>();
    }
    if (ct.contains("step")) c.ct_step = integer(ct["step"], "ct.step");
    if (c.ct_step < 1) field_error("ct.step", "must be >= 1");
  }
  if (j.contains("max_refinements")) c.max_refinements = integer(j["max_refinements"], "max_refinements");
  if (c.max_refinements < 0) field_error("max_refinements", "must be >= 0");
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) field_error("mode", "expected a string");
    c.mode = j["mode"].get<std::string>();
  }
  if (c.mode != "verify" && c.mode != "ldf" && c.mode != "isldf") field_error("mode", "expected verify, ldf or isldf");
  if (j.contains("mode") && c.mode == "verify" && c.unsafe.empty()) field_error("unsafe", "required in verify mode");
  if (j.contains("output")) {
    if (!j["output"].is_string() || j["output"].get<std::string>().empty()) field_error("output", "expected a path");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("workers")) c.workers = integer(j["workers"], "workers");
  if (c.workers < 1) field_error("workers", "must be >= 1");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) field_error("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("emit_tube")) {
    if (!j["emit_tube"].is_boolean()) field_error("emit_tube", "expected a boolean");
    c.emit_tube = j["emit_tube"].get<bool>();
  }
  if (j.contains("input_box")) {
    c.input_box = box_of(j["input_box"], "input_box");
    if (c.input_box->dim() != sys.p) field_error("input_box", "dimension differs from the model's input count");
  }
  if (c.mode == "isldf" && sys.p < 1) field_error("mode", "isldf needs a model with inputs");
  if (!sys.domain.contains(Box::around(c.theta_center, c.delta))) {
    field_error("delta", "initial ball leaves the model domain");
  }
  return c;
}

std::string serialize_config(const RunConfig& c) {
  ojson j;
  if (c.user_model) j["model"] = user_model_json(*c.user_model);
  else j["model"] = c.model;
  j["theta_center"] = to_std(c.theta_center);
  j["delta"] = c.delta;
  ojson unsafe = ojson::array();
  for (const auto& h : c.unsafe) unsafe.push_back(ojson{{"normal", to_std(h.normal)}, {"offset", h.offset}});
  if (!c.unsafe.empty()) j["unsafe"] = unsafe;
  j["T"] = c.T;
  j["tau"] = c.tau;
  j["epsilon0"] = c.epsilon0;
  j["ct"] = ojson{{"enabled", c.ct_enabled}, {"step", c.ct_step}};
  j["max_refinements"] = c.max_refinements;
  j["mode"] = c.mode;
  j["output"] = c.output;
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["emit_tube"] = c.emit_tube;
  if (c.input_box) j["input_box"] = box_json(*c.input_box);
  return j.dump(2);
}

void write_tube(std::ostream& os, const std::string& model, int n, const std::vector<CoverTube>& tubes) {
  struct Row {
    double t_lo;
    std::size_t order;
    const TubeSegment* seg;
  };
  std::vector<Row> rows;
  for (const auto& ct : tubes)
    for (const auto& seg : ct.tube.segments) rows.push_back({seg.t_lo, ct.order, &seg});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.t_lo != b.t_lo ? a.t_lo < b.t_lo : a.order < b.order;
  });

  os << "# n=" << n << " model=" << model << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const auto& r : rows) {
    put(r.seg->t_lo);
    os << ' ';
    put(r.seg->t_hi);
    for (Eigen::Index k = 0; k < r.seg->box.dim(); ++k) {
      os << ' ';
      put(r.seg->box.lo()[k]);
      os << ' ';
      put(r.seg->box.hi()[k]);
    }
    os << '\n';
  }
}

std::string report_json(const Verdict& v, const RunConfig& cfg) {
  ojson j;
  j["status"] = to_string(v.status);
  j["num_sims"] = v.num_sims;
  j["num_refinements"] = v.num_refinements;
  j["wall_seconds"] = v.wall_seconds;
  if (v.witness) {
    const Witness& w = *v.witness;
    j["witness"] = ojson{{"theta", to_std(w.cover.theta)},
                         {"delta", w.cover.delta},
                         {"epsilon", w.cover.epsilon},
                         {"index", w.index},
                         {"t", w.t},
                         {"box", box_json(w.box)}};
  }
  if (v.exhausted) {
    j["exhausted"] = ojson{{"undecided", v.exhausted->undecided},
                           {"deepest", v.exhausted->deepest},
                           {"reason", v.exhausted->reason}};
  }
  j["config_echo"] = ojson::parse(serialize_config(cfg));
  return j.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << body;
  if (!f) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

ojson tube_json(const Reachtube& t) {
  ojson j;
  j["deltas"] = t.deltas;
  j["prime_deltas"] = t.prime_deltas;
  return j;
}

int run_verify(const RunConfig& cfg, const std::filesystem::path& dir) {
  const Verdict v = verify_safety(cfg.problem());
  write_file(dir / "report.json", report_json(v, cfg));
  if (cfg.emit_tube) {
    std::ostringstream os;
    write_tube(os, cfg.model, static_cast<int>(cfg.theta_center.size()), v.tubes);
    write_file(dir / "tube.txt", os.str());
  }
  switch (v.status) {
    case Status::kSafe: return 0;
    case Status::kUnsafe: return 1;
    case Status::kUnknown: return 2;
  }
  return 3;
}

int run_ldf(const RunConfig& cfg, const std::filesystem::path& dir) {
  const DynamicalSystem m = cfg.system();
  const SimulationTrace trace = simulate_trace(m, cfg.theta_center, cfg.tau, cfg.epsilon0, cfg.T);
  const auto c = cfg.ct_enabled ? compute_ldf_ct(trace, m, cfg.delta, cfg.epsilon0, cfg.ct_step)
                                : compute_ldf(trace, m, cfg.delta, cfg.epsilon0);
  const Reachtube tube = build_reachtube(trace, c);

  ojson j;
  j["mode"] = "ldf";
  j["model"] = cfg.model;
  j["times"] = c.times;
  j["b"] = c.b;
  ojson blocks = ojson::array();
  for (const auto& b : c.blocks)
    blocks.push_back(ojson{
        {"start", b.start}, {"end", b.end}, {"K", b.k}, {"gain", b.gain}, {"identity", b.transform.identity_fallback}});
  j["blocks"] = blocks;
  j["tube"] = tube_json(tube);
  j["config_echo"] = ojson::parse(serialize_config(cfg));
  write_file(dir / "ldf.json", j.dump(2) + "\n");
  if (cfg.emit_tube) {
    std::ostringstream os;
    write_tube(os, cfg.model, m.n, {{Cover::circumscribing(Box::around(cfg.theta_center, cfg.delta), cfg.epsilon0), tube, 0}});
    write_file(dir / "tube.txt", os.str());
  }
  return 0;
}

int run_isldf(const RunConfig& cfg, const std::filesystem::path& dir) {
  const DynamicalSystem m = cfg.system();
  const Box inputs = cfg.input_box ? *cfg.input_box : *m.input_box;
  const SimulationTrace trace = simulate_trace(m, cfg.theta_center, cfg.tau, cfg.epsilon0, cfg.T, inputs.center());
  const ISCoefficients c = compute_is_ldf(trace, m, cfg.delta, cfg.epsilon0, inputs);
  const Reachtube tube = build_input_reachtube(trace, c);

  ojson j;
  j["mode"] = "isldf";
  j["model"] = cfg.model;
  j["times"] = c.times;
  j["a"] = c.a;
  j["M"] = c.M;
  j["l"] = c.l;
  j["input_box"] = box_json(inputs);
  j["tube"] = tube_json(tube);
  j["config_echo"] = ojson::parse(serialize_config(cfg));
  write_file(dir / "isldf.json", j.dump(2) + "\n");
  if (cfg.emit_tube) {
    std::ostringstream os;
    write_tube(os, cfg.model, m.n, {{Cover::circumscribing(Box::around(cfg.theta_center, cfg.delta), cfg.epsilon0), tube, 0}});
    write_file(dir / "tube.txt", os.str());
  }
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& err) {
  try {
    const std::filesystem::path dir(cfg.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir.string() + ": " + ec.message());
    if (cfg.mode == "verify") return run_verify(cfg, dir);
    if (cfg.mode == "ldf") return run_ldf(cfg, dir);
    if (cfg.mode == "isldf") return run_isldf(cfg, dir);
    throw Error(ErrorCode::kConfig, "unknown mode '" + cfg.mode + "'");
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace reachguard
