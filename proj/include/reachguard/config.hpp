#pragma once

#include "reachguard/geometry.hpp"
#include "reachguard/models.hpp"
#include "reachguard/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace reachguard {

struct RunConfig {
  std::string model;                       // builtin name, or the user model's name
  std::optional<ModelDefinition> user_model;
  Vector theta_center;
  double delta = 0.0;
  std::vector<HalfspaceSet::Halfspace> unsafe;
  double T = 0.0;
  double tau = 0.0;
  double epsilon0 = 0.0;
  bool ct_enabled = false;
  int ct_step = 10;
  int max_refinements = 12;
  std::string mode = "verify";  // verify | ldf | isldf
  std::string output = "reachguard-out";
  int workers = 1;
  std::uint64_t seed = 0;
  bool emit_tube = true;
  std::optional<Box> input_box;

  DynamicalSystem system() const;
  VerificationProblem problem() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// JSON problem file. Unknown keys are rejected; syntax errors carry the line.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

/// `t_lo t_hi lo_1 hi_1 ... lo_n hi_n` per segment, ordered by (t_lo, cover).
void write_tube(std::ostream& os, const std::string& model, int n, const std::vector<CoverTube>& tubes);

/// Report JSON (status, num_sims, num_refinements, wall_seconds, witness?, config_echo).
std::string report_json(const Verdict& v, const RunConfig& cfg);

/// Runs the configured mode, writing artifacts under cfg.output. Returns the
/// process exit code: 0 SAFE (or a completed ldf/isldf run), 1 UNSAFE,
/// 2 UNKNOWN, 3 error (diagnostic written to `err`).
int run(const RunConfig& cfg, std::ostream& err);

}  // namespace reachguard
