#pragma once

#include <Eigen/Dense>

#include <vector>

namespace reachguard {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned hyperrectangle [lo, hi]. Every compact set in the verifier
/// (simulation enclosures, covers, tube segments) is carried as a Box.
class Box {
 public:
  Box(Vector lo, Vector hi);
  static Box point(const Vector& x);
  /// Bounding box of the closed l2 ball of `radius` around `center`.
  static Box around(const Vector& center, double radius);

  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  Eigen::Index dim() const { return lo_.size(); }

  Vector center() const { return 0.5 * (lo_ + hi_); }
  Vector width() const { return hi_ - lo_; }

  bool contains(const Vector& x, double slack = 0.0) const;
  bool contains(const Box& other, double slack = 0.0) const;
  bool intersects(const Box& other) const;

  friend bool operator==(const Box& a, const Box& b) { return a.lo_ == b.lo_ && a.hi_ == b.hi_; }

 private:
  Vector lo_;
  Vector hi_;
};

struct Ball {
  Vector center;
  double radius = 0.0;  // l2

  Ball(Vector c, double r);
  bool contains(const Vector& x, double slack = 0.0) const;
};

/// Union of open halfspaces {x : normal . x > offset}.
class HalfspaceSet {
 public:
  struct Halfspace {
    Vector normal;
    double offset = 0.0;
  };

  explicit HalfspaceSet(std::vector<Halfspace> halfspaces);
  /// Shorthand for {x : x[axis] > threshold}.
  static HalfspaceSet coordinate_above(Eigen::Index dim, Eigen::Index axis, double threshold);

  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  Eigen::Index dim() const { return halfspaces_.front().normal.size(); }
  bool contains(const Vector& x) const;

 private:
  std::vector<Halfspace> halfspaces_;
};

/// A ball of initial states B_delta(theta) with its simulation precision.
/// `cell` is the box this cover is responsible for; delta is the radius of
/// the ball circumscribing it (except for the root cover, whose ball is the
/// initial set itself).
struct Cover {
  Vector theta;
  double delta = 0.0;
  double epsilon = 0.0;
  Box cell;
  int depth = 0;

  Cover(Vector theta, double delta, double epsilon, Box cell, int depth = 0);
  /// Cover whose ball circumscribes `cell`.
  static Cover circumscribing(const Box& cell, double epsilon, int depth = 0);
};

enum class UnsafeRelation { kDisjoint, kContained, kOverlaps };

Box box_hull(const Box& a, const Box& b);
Box bloat(const Box& b, double r);
double diameter(const Box& b);
/// Componentwise intersection; throws when empty.
Box intersect(const Box& a, const Box& b);
/// l2 distance from x to the nearest point of b.
double distance(const Box& b, const Vector& x);

/// Bisect the cover's cell (clipped to init_region) along every axis.
/// Children inherit half the parent's epsilon. A child whose radius falls
/// below `delta_floor` raises kRefinementLimit.
std::vector<Cover> partition_cover(const Cover& c, const Box& init_region, double delta_floor = 0.0);

UnsafeRelation classify_against_unsafe(const Box& b, const HalfspaceSet& u);

}  // namespace reachguard
