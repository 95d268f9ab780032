#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dioph/rational.hpp"

namespace dioph {

/// Closed rational interval [lo, hi] certified to contain a real value.
/// Degenerate (lo == hi) means the value is known exactly.
struct Enclosure {
  Rational lo;
  Rational hi;

  Enclosure() = default;
  explicit Enclosure(const Rational& exact) : lo(exact), hi(exact) {}
  Enclosure(const Rational& l, const Rational& h);

  bool exact() const { return lo == hi; }
  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
Enclosure operator-(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Enclosure& a, const Enclosure& b);
/// Throws DomainError when b contains zero.
Enclosure operator/(const Enclosure& a, const Enclosure& b);
Enclosure scale(const Enclosure& a, const Rational& c);

/// x^e for x > 0 and rational e, at `bits` of working precision. Exact when
/// the result is rational (e.g. (1/4)^(1/2) = 1/2).
Enclosure pow(const Enclosure& x, const Rational& e, long bits);
Enclosure pow(const Rational& x, const Rational& e, long bits);
/// Natural log of x > 0.
Enclosure log(const Enclosure& x, long bits);

/// A real number given by a refinable enclosure generator.
using Real = std::function<Enclosure(long bits)>;

inline Real constant(const Rational& q) {
  return [q](long) { return Enclosure(q); };
}

enum class Ordering { less, equal, greater };

class UndecidedComparison : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Certified three-way comparison. Precision doubles from 64 bits up to
/// `max_bits`; returns nullopt when the enclosures still overlap.
std::optional<Ordering> try_compare(const Real& a, const Real& b, long max_bits = 8192);
/// As try_compare, throwing UndecidedComparison when undecided.
Ordering compare(const Real& a, const Real& b, long max_bits = 8192);

/// Evaluate with precision doubling until the width is at most `tol`.
Enclosure refine(const Real& x, const Rational& tol, long max_bits = 16384);

std::string to_string(const Enclosure& e);

}  // namespace dioph
