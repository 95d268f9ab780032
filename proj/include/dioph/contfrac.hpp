#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dioph/enclosure.hpp"
#include "dioph/exec.hpp"
#include "dioph/functions.hpp"

namespace dioph {

/// A real input for classification: a refinable enclosure plus how it was
/// specified. Rational inputs are exact at every precision.
struct Target {
  enum class Source { exact_rational, decimal_literal, quadratic_surd };
  Source source = Source::exact_rational;
  Real value;
  std::string text;

  static Target rational(const Rational& x);
  /// Finite decimal with k fractional digits, read as d +- 10^-k.
  static Target decimal(std::string_view literal);
  /// (a + b sqrt(D)) / c with D >= 0, c != 0.
  static Target surd(const Integer& a, const Integer& b, const Integer& D, const Integer& c);
  /// "p/q", "p", "0.618...", or "surd:a,b,D,c".
  static Target parse(std::string_view text);
};

struct ContinuedFraction {
  Integer a0;
  std::vector<Integer> quotients;  // a_1 .. a_N
  bool complete = false;   // the expansion terminated (rational input)
  bool truncated = false;  // stopped early because precision ran out

  std::string to_string() const;
};

/// Canonical expansion of an enclosure: quotients are emitted while both
/// endpoints agree, so a quotient is never wrong.
ContinuedFraction expand(const Enclosure& x, long depth);
ContinuedFraction expand(const Rational& x, long depth);
/// Expands at increasing precision until `depth` quotients are certified
/// or the input cannot give more.
ContinuedFraction expand(const Target& x, long depth);

struct Convergent {
  Integer p;
  Integer q;
};

std::vector<Convergent> convergents(const ContinuedFraction& cf);
/// Convergents and intermediate fractions with denominator <= q_max.
std::vector<Convergent> best_approximations(const ContinuedFraction& cf, const Integer& q_max);

struct Hit {
  Integer p;
  Integer q;
  Enclosure gap;  // |x - p/q|
};

struct EpsilonRow {
  Rational epsilon;
  long hits = 0;
  long hits_beyond_cutoff = 0;
  long undecided = 0;
};

enum class Verdict { consistent_with_exact, inconsistent, undecided };
std::string to_string(Verdict v);

struct MembershipVerdict {
  std::vector<Hit> hits;
  std::vector<EpsilonRow> epsilon_report;
  std::vector<Convergent> best;
  ContinuedFraction cf;
  long q_max = 0;
  long cutoff = 0;  // floor(sqrt(q_max))
  long top_range_hits = 0;  // hits with q in (q_max/2, q_max]
  long undecided = 0;
  Verdict verdict = Verdict::undecided;
};

/// Every reduced p/q with q <= q_max and |x - p/q| < psi(q), plus the
/// (1 - eps) psi counts. Finite-window semantics: the verdict describes the
/// window only.
MembershipVerdict classify(const Target& x, const ApproxFunction& psi, long q_max,
                           const std::vector<Rational>& epsilons);

std::vector<MembershipVerdict> classify_batch(const std::vector<Target>& xs,
                                              const ApproxFunction& psi, long q_max,
                                              const std::vector<Rational>& epsilons,
                                              Exec exec = Exec::parallel);

}  // namespace dioph
