#pragma once

#include <vector>

#include "dioph/enclosure.hpp"
#include "dioph/rational.hpp"

namespace dioph {

using Point = std::vector<Rational>;

/// Open sup-metric ball B(x, r) = {y : |y - x|_inf < r}, read inside [0,1]^d.
struct Ball {
  Point center;
  Rational radius;

  Ball() = default;
  Ball(Point c, Rational r);
  /// One-dimensional convenience.
  Ball(const Rational& c, const Rational& r) : Ball(Point{c}, r) {}

  std::size_t dim() const { return center.size(); }
  /// cB = B(x, c r).
  Ball scaled(const Rational& c) const { return Ball(center, Rational(radius * c)); }
};

/// A(x, r, R) = B(x, R) \ B(x, r).
struct Annulus {
  Point center;
  Rational inner;
  Rational outer;

  Annulus(Point c, Rational r, Rational R);
};

Rational sup_distance(const Point& a, const Point& b);

/// Lebesgue measure of B intersected with the unit cube (exact).
Rational cube_measure(const Ball& b);

/// B(x, r) ⊂ B(y, s) as subsets of R^d (exact; ignores cube clipping).
bool contains(const Ball& outer, const Ball& inner);
/// B(x, r) ⊂ A(y, s, S), i.e. inside B(y, S) and disjoint from B(y, s).
bool contains(const Annulus& outer, const Ball& inner);
/// Open balls intersect.
bool intersects(const Ball& a, const Ball& b);
/// inf over x in a, y in b of |x - y|_inf, clamped at 0.
Rational gap(const Ball& a, const Ball& b);

/// Ahlfors constants of a delta-regular measure.
struct RegularSpaceParams {
  Rational delta;
  Rational a_lower;
  Rational b_upper;
  Rational r0;

  /// Lebesgue on [0,1]^d under the sup metric: a = 1, b = 2^d, delta = d.
  static RegularSpaceParams lebesgue(unsigned d, Rational r0 = Rational(1, 4));
  void validate() const;
};

struct AhlforsEntry {
  Ball ball;
  Rational measure;
  Enclosure lower;  // a r^delta
  Enclosure upper;  // b r^delta
  bool lower_ok = false;
  bool upper_ok = false;
};

struct AhlforsReport {
  std::vector<AhlforsEntry> entries;
  std::vector<std::size_t> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks a r^delta <= mu(B) <= b r^delta for every ball (report only).
AhlforsReport check_ahlfors(const RegularSpaceParams& params, const std::vector<Ball>& balls,
                            unsigned d);

/// mu(A(x, r, R)) for the cube-clipped annulus (exact).
Rational annulus_measure(const Annulus& a);

}  // namespace dioph
