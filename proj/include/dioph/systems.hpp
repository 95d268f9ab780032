#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dioph/exec.hpp"
#include "dioph/functions.hpp"
#include "dioph/geometry.hpp"

namespace dioph {

/// A point of Q with its weight. `denominator` is q for rationals-d and b^k
/// for base-power; the point is stored in reduced form.
struct Anchor {
  Point xi;
  Rational R;
  Integer denominator;
};

/// (Q, R) on [0,1]^d. Points are deduplicated: a point carries R from its
/// reduced representation only.
struct ApproxSystem {
  enum class Kind { rationals, base_power };

  Kind kind = Kind::base_power;
  unsigned d = 1;
  Integer base = 2;
  Rational separation_c;

  static ApproxSystem rationals(unsigned d, Rational c);
  static ApproxSystem base_power(const Integer& b, Rational c = Rational(1, 2));

  /// r^{(1+d)/(2d)} for rationals-d, r for base-power.
  ApproxFunction default_rho() const;
  /// {b^-n} for base-power; rationals-d has no canonical t.
  ScaleSequence default_scale() const;
  std::string describe() const;
};

struct LayerEnumeration {
  long n = 0;
  std::vector<Anchor> members;
  std::optional<Ball> window;
  Rational expansion;  // window radius was enlarged by this amount
};

/// The reduced-denominator range realised by layer n: for base-power the
/// exponents k, for rationals-d the denominators q, with lo <= hi when nonempty.
struct DenominatorRange {
  Integer lo;
  Integer hi;
  bool empty() const { return lo > hi; }
};

DenominatorRange layer_range(const ApproxSystem& sys, const ScaleSequence& seq, long n);

/// {xi in Q : u_n <= R_xi < u_{n-1}, |xi - window.center| < window.radius + expansion}.
/// Throws DomainError when more than `max_members` points would be produced.
LayerEnumeration enumerate_layer(const ApproxSystem& sys, const ScaleSequence& seq, long n,
                                 const std::optional<Ball>& window = std::nullopt,
                                 const Rational& expansion = Rational(0),
                                 std::size_t max_members = 50'000'000);

/// Number of xi with R_xi >= M (finite for every M > 0).
Integer count_heavy(const ApproxSystem& sys, const Rational& M);

struct SeparationCertificate {
  bool pass = true;
  std::optional<Rational> min_ratio;  // nullopt: no pairs (ratio +inf)
  std::optional<std::pair<Anchor, Anchor>> witness;
  Rational c;
  std::size_t points = 0;
};

/// Checks d(xi, zeta) >= c min{R_xi, R_zeta} over all pairs of the given
/// anchors, returning the minimal ratio and a pair attaining it.
SeparationCertificate verify_separation(const ApproxSystem& sys,
                                        const std::vector<Anchor>& anchors,
                                        Exec exec = Exec::parallel);
SeparationCertificate verify_separation(const ApproxSystem& sys, const LayerEnumeration& a,
                                        Exec exec = Exec::parallel);
SeparationCertificate verify_separation(const ApproxSystem& sys, const LayerEnumeration& a,
                                        const LayerEnumeration& b, Exec exec = Exec::parallel);

/// CSV rows: n, xi_1 .. xi_d, R.
void write_layer_csv(std::ostream& os, const LayerEnumeration& layer, unsigned d);

}  // namespace dioph
