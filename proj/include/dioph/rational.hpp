#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dioph {

using Integer = mpz_class;
/// Canonical arbitrary-precision rational. Every value handed out by this
/// library is canonical (positive denominator, gcd 1).
using Rational = mpq_class;

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// num/den in canonical form. Throws DomainError on den == 0.
Rational make_rational(const Integer& num, const Integer& den);
inline Rational make_rational(long num, long den = 1) {
  return make_rational(Integer(num), Integer(den));
}

/// Parses "p/q", "p", or a finite decimal "0.125" exactly.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);
Rational abs(const Rational& q);
/// q^e for any integer e (q != 0 when e < 0).
Rational pow(const Rational& q, long e);
Integer pow(const Integer& z, unsigned long e);

/// Exact k-th root of a non-negative rational when it is rational.
bool exact_root(const Rational& q, unsigned long k, Rational& out);

/// Smallest e >= 0 such that base^e divides z (z != 0).
unsigned long valuation(const Integer& z, const Integer& base);

/// log2 of a positive rational to double precision; used only for
/// reporting and plotting, never in a decision.
double approx_log2(const Rational& q);
double to_double(const Rational& q);

inline const Rational& min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace dioph
