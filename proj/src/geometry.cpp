#include "reachguard/geometry.hpp"

#include "reachguard/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace reachguard {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kDomainExit: return "domain exit";
    case ErrorCode::kStepUnderflow: return "step underflow";
    case ErrorCode::kDivisionByZero: return "division by zero-containing interval";
    case ErrorCode::kUnboundedInterval: return "unbounded interval";
    case ErrorCode::kDeltaCap: return "discrepancy radius cap exceeded";
    case ErrorCode::kRefinementLimit: return "refinement limit";
    case ErrorCode::kUnknownModel: return "unknown model";
    case ErrorCode::kValidation: return "validation failure";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kConfig: return "configuration error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "error";
}

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(where) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

Box::Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  require_same_dim(lo_.size(), hi_.size(), "Box");
  if (lo_.size() < 1) throw Error(ErrorCode::kInvalidArgument, "Box: dimension must be >= 1");
  for (Eigen::Index j = 0; j < lo_.size(); ++j) {
    if (std::isnan(lo_[j]) || std::isnan(hi_[j])) throw Error(ErrorCode::kNonFinite, "Box: NaN bound");
    if (lo_[j] > hi_[j]) {
      throw Error(ErrorCode::kInvalidArgument, "Box: lo > hi on axis " + std::to_string(j));
    }
  }
}

Box Box::point(const Vector& x) { return Box(x, x); }

Box Box::around(const Vector& center, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "Box::around: negative radius");
  return Box(center.array() - radius, center.array() + radius);
}

bool Box::contains(const Vector& x, double slack) const {
  require_same_dim(dim(), x.size(), "Box::contains");
  return ((x - lo_).array() >= -slack).all() && ((hi_ - x).array() >= -slack).all();
}

bool Box::contains(const Box& other, double slack) const {
  require_same_dim(dim(), other.dim(), "Box::contains");
  return ((other.lo_ - lo_).array() >= -slack).all() && ((hi_ - other.hi_).array() >= -slack).all();
}

bool Box::intersects(const Box& other) const {
  require_same_dim(dim(), other.dim(), "Box::intersects");
  return (lo_.array() <= other.hi_.array()).all() && (other.lo_.array() <= hi_.array()).all();
}

Ball::Ball(Vector c, double r) : center(std::move(c)), radius(r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::kInvalidArgument, "Ball: radius must be >= 0");
}

bool Ball::contains(const Vector& x, double slack) const {
  require_same_dim(center.size(), x.size(), "Ball::contains");
  return (x - center).norm() <= radius + slack;
}

HalfspaceSet::HalfspaceSet(std::vector<Halfspace> halfspaces) : halfspaces_(std::move(halfspaces)) {
  if (halfspaces_.empty()) throw Error(ErrorCode::kInvalidArgument, "HalfspaceSet: at least one halfspace required");
  const auto n = halfspaces_.front().normal.size();
  for (const auto& h : halfspaces_) {
    require_same_dim(n, h.normal.size(), "HalfspaceSet");
    if (h.normal.norm() == 0.0) throw Error(ErrorCode::kInvalidArgument, "HalfspaceSet: zero normal");
    if (!h.normal.allFinite() || !std::isfinite(h.offset)) {
      throw Error(ErrorCode::kNonFinite, "HalfspaceSet: non-finite halfspace");
    }
  }
}

HalfspaceSet HalfspaceSet::coordinate_above(Eigen::Index dim, Eigen::Index axis, double threshold) {
  if (axis < 0 || axis >= dim) throw Error(ErrorCode::kInvalidArgument, "coordinate_above: axis out of range");
  Vector normal = Vector::Zero(dim);
  normal[axis] = 1.0;
  return HalfspaceSet({{normal, threshold}});
}

bool HalfspaceSet::contains(const Vector& x) const {
  for (const auto& h : halfspaces_) {
    if (h.normal.dot(x) > h.offset) return true;
  }
  return false;
}

Cover::Cover(Vector t, double d, double e, Box c, int dep)
    : theta(std::move(t)), delta(d), epsilon(e), cell(std::move(c)), depth(dep) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "Cover: delta must be >= 0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "Cover: epsilon must be > 0");
  require_same_dim(theta.size(), cell.dim(), "Cover");
}

Cover Cover::circumscribing(const Box& cell, double epsilon, int depth) {
  return Cover(cell.center(), 0.5 * diameter(cell), epsilon, cell, depth);
}

Box box_hull(const Box& a, const Box& b) {
  require_same_dim(a.dim(), b.dim(), "box_hull");
  return Box(a.lo().cwiseMin(b.lo()), a.hi().cwiseMax(b.hi()));
}

Box bloat(const Box& b, double r) {
  if (!std::isfinite(r)) throw Error(ErrorCode::kNonFinite, "bloat: non-finite radius");
  if (r < 0.0) throw Error(ErrorCode::kInvalidArgument, "bloat: negative radius");
  return Box(b.lo().array() - r, b.hi().array() + r);
}

double diameter(const Box& b) { return b.width().norm(); }

Box intersect(const Box& a, const Box& b) {
  if (!a.intersects(b)) throw Error(ErrorCode::kInvalidArgument, "intersect: boxes are disjoint");
  return Box(a.lo().cwiseMax(b.lo()), a.hi().cwiseMin(b.hi()));
}

double distance(const Box& b, const Vector& x) {
  require_same_dim(b.dim(), x.size(), "distance");
  const Vector nearest = x.cwiseMax(b.lo()).cwiseMin(b.hi());
  return (x - nearest).norm();
}

std::vector<Cover> partition_cover(const Cover& c, const Box& init_region, double delta_floor) {
  require_same_dim(c.cell.dim(), init_region.dim(), "partition_cover");
  if (!(c.delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "partition_cover: delta must be > 0");

  const Box bounds = Box::around(c.theta, c.delta);
  if (!c.cell.intersects(init_region) || !bounds.intersects(init_region)) return {};
  const Box region = intersect(intersect(c.cell, bounds), init_region);

  const auto n = region.dim();
  const Vector mid = region.center();
  std::vector<Cover> children;
  children.reserve(std::size_t{1} << n);
  for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
    Vector lo(n), hi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool upper = (mask >> j) & 1UL;
      lo[j] = upper ? mid[j] : region.lo()[j];
      hi[j] = upper ? region.hi()[j] : mid[j];
    }
    Cover child = Cover::circumscribing(Box(lo, hi), 0.5 * c.epsilon, c.depth + 1);
    if (child.delta < delta_floor) {
      throw Error(ErrorCode::kRefinementLimit, "partition_cover: child radius " + std::to_string(child.delta) +
                                                   " below floor " + std::to_string(delta_floor));
    }
    if (distance(init_region, child.theta) <= child.delta) children.push_back(std::move(child));
  }
  return children;
}

UnsafeRelation classify_against_unsafe(const Box& b, const HalfspaceSet& u) {
  require_same_dim(b.dim(), u.dim(), "classify_against_unsafe");
  bool disjoint = true;
  for (const auto& h : u.halfspaces()) {
    double lo = 0.0, hi = 0.0, mag = std::abs(h.offset);
    for (Eigen::Index j = 0; j < b.dim(); ++j) {
      const double a = h.normal[j];
      lo += a >= 0.0 ? a * b.lo()[j] : a * b.hi()[j];
      hi += a >= 0.0 ? a * b.hi()[j] : a * b.lo()[j];
      mag += std::abs(a) * std::max(std::abs(b.lo()[j]), std::abs(b.hi()[j]));
    }
    // Rounding guard on the dot products; only matters for exact ties.
    const double guard = 4.0 * std::numeric_limits<double>::epsilon() * mag;
    if (lo - guard > h.offset) return UnsafeRelation::kContained;
    if (hi + guard > h.offset) disjoint = false;
  }
  return disjoint ? UnsafeRelation::kDisjoint : UnsafeRelation::kOverlaps;
}

}  // namespace reachguard
