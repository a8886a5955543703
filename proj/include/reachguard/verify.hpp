#pragma once

#include "reachguard/geometry.hpp"
#include "reachguard/ldf.hpp"
#include "reachguard/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace reachguard {

struct VerificationProblem {
  DynamicalSystem system;
  Vector theta_center;
  double delta = 0.0;
  HalfspaceSet unsafe{{{Vector::Ones(1), 0.0}}};
  double T = 0.0;
  double tau = 0.0;
  double epsilon0 = 0.0;
  bool ct_enabled = false;
  int ct_step = 10;
  int max_refinements = 12;
  double delta_floor = 1e-6;
  int workers = 1;
  LdfOptions ldf;

  /// Throws kValidation naming the offending field.
  void validate() const;
};

enum class Status { kSafe, kUnsafe, kUnknown };
const char* to_string(Status s);

struct CoverTube {
  Cover cover;
  Reachtube tube;
  std::size_t order = 0;  // creation index of the cover
};

struct Witness {
  Cover cover;
  std::size_t index = 0;  // trace entry k with R_k inside the unsafe set
  double t = 0.0;
  Box box;
};

struct Exhausted {
  int undecided = 0;
  int deepest = 0;
  std::string reason;
};

struct Verdict {
  Status status = Status::kUnknown;
  std::vector<CoverTube> tubes;     // SAFE
  std::optional<Witness> witness;   // UNSAFE
  std::optional<Exhausted> exhausted;  // UNKNOWN
  int num_sims = 0;
  int num_refinements = 0;
  double wall_seconds = 0.0;
};

enum class TubeCheck { kSafeCover, kUnsafeWitness, kUndecided };

struct TubeCheckResult {
  TubeCheck kind = TubeCheck::kUndecided;
  std::size_t index = 0;
};

TubeCheckResult check_tube(const Reachtube& tube, const SimulationTrace& trace, const HalfspaceSet& u);

/// Covers are processed in creation order, one refinement level at a time;
/// each level runs on up to p.workers OpenMP threads.
Verdict verify_safety(const VerificationProblem& p);

/// One cover at a time, in the same order.
Verdict verify_safety_serial(const VerificationProblem& p);

}  // namespace reachguard
