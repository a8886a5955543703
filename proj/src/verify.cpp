#include "reachguard/verify.hpp"

#include "reachguard/error.hpp"
#include "reachguard/simulate.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <sstream>

namespace reachguard {

const char* to_string(Status s) {
  switch (s) {
    case Status::kSafe: return "SAFE";
    case Status::kUnsafe: return "UNSAFE";
    case Status::kUnknown: return "UNKNOWN";
  }
  return "?";
}

void VerificationProblem::validate() const {
  auto bad = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kValidation, "problem field '" + field + "': " + why);
  };
  if (theta_center.size() != system.n) bad("theta_center", "dimension differs from the model");
  if (!theta_center.allFinite()) bad("theta_center", "non-finite entry");
  if (!(delta > 0.0) || !std::isfinite(delta)) bad("delta", "must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) bad("T", "must be positive");
  if (!(tau > 0.0) || tau > T) bad("tau", "must lie in (0, T]");
  if (!(epsilon0 > 0.0) || !std::isfinite(epsilon0)) bad("epsilon0", "must be positive");
  if (unsafe.dim() != system.n) bad("unsafe", "dimension differs from the model");
  if (ct_step < 1) bad("ct.step", "must be >= 1");
  if (max_refinements < 0) bad("max_refinements", "must be >= 0");
  if (!(delta_floor >= 0.0)) bad("delta_floor", "must be non-negative");
  if (workers < 1) bad("workers", "must be >= 1");
  if (!system.domain.contains(Box::around(theta_center, delta))) bad("delta", "initial ball leaves the model domain");
}

TubeCheckResult check_tube(const Reachtube& tube, const SimulationTrace& trace, const HalfspaceSet& u) {
  bool disjoint = true;
  for (const auto& seg : tube.segments) {
    if (classify_against_unsafe(seg.box, u) != UnsafeRelation::kDisjoint) {
      disjoint = false;
      break;
    }
  }
  if (disjoint) return {TubeCheck::kSafeCover, 0};
  for (std::size_t k = 0; k < trace.entries.size(); ++k) {
    if (classify_against_unsafe(trace.entries[k].r, u) == UnsafeRelation::kContained) {
      return {TubeCheck::kUnsafeWitness, k};
    }
  }
  return {TubeCheck::kUndecided, 0};
}

namespace {

struct Outcome {
  TubeCheck kind = TubeCheck::kUndecided;
  std::optional<Reachtube> tube;
  std::optional<Witness> witness;
};

std::string describe(const Cover& c) {
  std::ostringstream os;
  os.precision(17);
  os << "cover theta=[";
  for (Eigen::Index j = 0; j < c.theta.size(); ++j) os << (j ? ", " : "") << c.theta[j];
  os << "] delta=" << c.delta << " eps=" << c.epsilon;
  return os.str();
}

bool refinable(ErrorCode code) {
  return code == ErrorCode::kDomainExit || code == ErrorCode::kDeltaCap || code == ErrorCode::kUnboundedInterval;
}

Outcome process(const VerificationProblem& p, const Cover& c) {
  SimulationTrace trace;
  try {
    trace = simulate_trace(p.system, c.theta, p.tau, c.epsilon, p.T);
  } catch (const Error& e) {
    throw Error(e.code(), describe(c) + ": " + e.what());
  }

  Outcome out;
  std::optional<Reachtube> tube;
  try {
    const auto coeffs = p.ct_enabled ? compute_ldf_ct(trace, p.system, c.delta, c.epsilon, p.ct_step, p.ldf)
                                     : compute_ldf(trace, p.system, c.delta, c.epsilon, p.ldf);
    tube = build_reachtube(trace, coeffs);
  } catch (const Error& e) {
    if (!refinable(e.code())) throw Error(e.code(), describe(c) + ": " + e.what());
  }

  TubeCheckResult r;
  if (tube) {
    r = check_tube(*tube, trace, p.unsafe);
  } else {
    for (std::size_t k = 0; k < trace.entries.size(); ++k) {
      if (classify_against_unsafe(trace.entries[k].r, p.unsafe) == UnsafeRelation::kContained) {
        r = {TubeCheck::kUnsafeWitness, k};
        break;
      }
    }
  }
  out.kind = r.kind;
  if (out.kind == TubeCheck::kSafeCover) out.tube = std::move(tube);
  if (out.kind == TubeCheck::kUnsafeWitness) {
    out.witness = Witness{c, r.index, trace.entries[r.index].t, trace.entries[r.index].r};
  }
  return out;
}

Cover root_cover(const VerificationProblem& p) {
  return Cover(p.theta_center, p.delta, p.epsilon0, Box::around(p.theta_center, p.delta), 0);
}

// Children of an undecided cover, restricted to cells that meet the initial ball.
// Returns false when the cover cannot be refined further.
bool refine(const VerificationProblem& p, const Cover& c, std::vector<Cover>& children) {
  if (c.depth >= p.max_refinements) return false;
  std::vector<Cover> parts;
  try {
    parts = partition_cover(c, Box::around(p.theta_center, p.delta), p.delta_floor);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kRefinementLimit) return false;
    throw;
  }
  for (auto& child : parts)
    if (distance(child.cell, p.theta_center) <= p.delta) children.push_back(std::move(child));
  return true;
}

class Accumulator {
 public:
  explicit Accumulator(const VerificationProblem& p) : p_(p), start_(std::chrono::steady_clock::now()) {}

  // Returns true when the verdict is final (UNSAFE).
  bool take(const Cover& c, std::size_t order, Outcome&& o, std::vector<Cover>& children) {
    switch (o.kind) {
      case TubeCheck::kUnsafeWitness:
        v_.status = Status::kUnsafe;
        v_.witness = std::move(o.witness);
        return true;
      case TubeCheck::kSafeCover:
        v_.tubes.push_back({c, std::move(*o.tube), order});
        return false;
      case TubeCheck::kUndecided:
        if (refine(p_, c, children)) {
          ++v_.num_refinements;
        } else {
          ++undecided_;
          deepest_ = std::max(deepest_, c.depth);
          reason_ = c.depth >= p_.max_refinements ? "max_refinements reached" : "delta floor reached";
        }
        return false;
    }
    return false;
  }

  void count_sims(int k) { v_.num_sims += k; }

  Verdict finish() {
    if (v_.status != Status::kUnsafe) {
      v_.status = undecided_ > 0 ? Status::kUnknown : Status::kSafe;
      if (undecided_ > 0) v_.exhausted = Exhausted{undecided_, deepest_, reason_};
    }
    if (v_.status != Status::kSafe) v_.tubes.clear();
    v_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return std::move(v_);
  }

 private:
  const VerificationProblem& p_;
  std::chrono::steady_clock::time_point start_;
  Verdict v_;
  int undecided_ = 0;
  int deepest_ = 0;
  std::string reason_;
};

}  // namespace

Verdict verify_safety(const VerificationProblem& p) {
  p.validate();
  Accumulator acc(p);
  std::vector<Cover> level{root_cover(p)};
  std::size_t next_order = 0;

  while (!level.empty()) {
    const auto count = static_cast<long>(level.size());
    std::vector<Outcome> outcomes(level.size());
    std::vector<std::exception_ptr> errors(level.size());
#pragma omp parallel for schedule(dynamic) num_threads(p.workers)
    for (long i = 0; i < count; ++i) {
      const auto u = static_cast<std::size_t>(i);
      try {
        outcomes[u] = process(p, level[u]);
      } catch (...) {
        errors[u] = std::current_exception();
      }
    }
    acc.count_sims(static_cast<int>(count));

    std::vector<Cover> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      if (outcomes[i].kind == TubeCheck::kUnsafeWitness) {
        acc.take(level[i], next_order + i, std::move(outcomes[i]), next);
        return acc.finish();
      }
    }
    for (std::size_t i = 0; i < level.size(); ++i) acc.take(level[i], next_order + i, std::move(outcomes[i]), next);
    next_order += level.size();
    level = std::move(next);
  }
  return acc.finish();
}

Verdict verify_safety_serial(const VerificationProblem& p) {
  p.validate();
  Accumulator acc(p);
  std::deque<Cover> queue{root_cover(p)};
  std::size_t order = 0;
  while (!queue.empty()) {
    Cover c = std::move(queue.front());
    queue.pop_front();
    Outcome o = process(p, c);
    acc.count_sims(1);
    std::vector<Cover> children;
    if (acc.take(c, order++, std::move(o), children)) return acc.finish();
    for (auto& child : children) queue.push_back(std::move(child));
  }
  return acc.finish();
}

}  // namespace reachguard
