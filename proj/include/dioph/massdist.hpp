#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dioph/audit.hpp"
#include "dioph/cantor.hpp"
#include "dioph/enclosure.hpp"
#include "dioph/exec.hpp"
#include "dioph/functions.hpp"
#include "dioph/systems.hpp"

namespace dioph {

/// nu per node id. nu[id] is the mass of one G member the node stands for;
/// the node carries weight * nu in total. Degenerate enclosures are exact.
struct MassAssignment {
  std::vector<Enclosure> nu;
  Rational s;
  Rational eta;
  Regime regime = Regime::finite_g;
  bool exact = true;
  bool conserved = true;
  std::optional<std::size_t> conservation_failure;  // parent id

  /// weight * nu.
  Enclosure total(const CantorTree& tree, std::size_t id) const;
};

/// finite-G: nu(B) = r(B)^s / sum_{B' in the parent's local family} r(B')^s * nu(parent);
/// infinite-G: nu(B) = nu(parent) / #G(parent). Ratios of radii raised to s
/// stay exact whenever they are rational.
MassAssignment assign_mass(const CantorTree& tree, const Rational& s, const Rational& eta,
                           long bits = 512);

struct NodeBoundCertificate {
  bool pass = true;
  bool node_bound = true;
  bool level_sums = true;
  std::size_t nodes_checked = 0;
  std::optional<std::size_t> violating_node;
  std::string lhs;
  std::string rhs;
  std::vector<AuditRow> audit;
};

/// nu(B) <= r(B)^s / eta for every node below the root, and the level sums
/// sum_{level 1} r^s >= eta, sum_{children of B} r^s >= r(B)^s.
NodeBoundCertificate verify_node_bound(const MassAssignment& mass, const CantorTree& tree);

struct HolderSample {
  Point center;
  Rational radius;
  Enclosure nu;
  double log2_ratio = 0;  // log2(nu(A) eta / r(A)^s), -inf when nu(A) = 0
};

struct HolderReport {
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double max_log2_ratio = 0;
  std::size_t argmax = 0;
  std::size_t empty = 0;  // samples with nu(A) = 0
  bool sampled_tree = false;
  bool finite = true;
  std::vector<HolderSample> draws;
};

/// nu(A) for the closed ball A: full mass of maximal tree balls inside A plus
/// the full mass of deepest balls meeting its boundary (an upper bound).
Enclosure ball_mass(const MassAssignment& mass, const CantorTree& tree, const Ball& A);

/// Balls centred at deepest-level node centres with radii log-uniform in
/// [finest rho, r(B0)]; reports max nu(A) eta / r(A)^s.
HolderReport verify_holder_general(const MassAssignment& mass, const CantorTree& tree,
                                   std::size_t samples, std::uint64_t seed,
                                   Exec exec = Exec::parallel);

struct BoxCount {
  long exponent = 0;  // box side 2^-exponent
  Integer count;
};

struct BoxCountingResult {
  std::vector<BoxCount> counts;
  double slope = 0;
  double intercept = 0;
  double residual = 0;  // root mean square of the fit in log2 units
};

/// Open balls meeting the half-open dyadic boxes [j 2^-k, (j+1) 2^-k)^d;
/// least-squares slope of log2 N against k. Throws DomainError("insufficient
/// scales") for fewer than three exponents.
BoxCountingResult box_counting(const std::vector<Ball>& balls, const std::vector<long>& exponents);
BoxCountingResult box_counting(const CantorTree& tree, long level,
                               const std::vector<long>& exponents);

/// Tail sum_{q > N} of a monotone power summand bracketed by the integral test.
struct SeriesSum {
  std::string name;
  std::vector<Enclosure> partial;  // partial[i] = sum of the first i + 1 terms
  std::optional<Enclosure> tail;   // [lower, upper] when convergent
  enum class Verdict { convergent, divergent, undecided };
  Verdict verdict = Verdict::undecided;
};

std::string to_string(SeriesSum::Verdict v);

enum class GRegime { zero_divergent, finite_positive, infinite, convergent, undecided };
std::string to_string(GRegime r);

struct SeriesReport {
  SeriesSum g;           // sum g(u_n), n = 1..N
  SeriesSum eta_weight;  // sum over xi with u_N <= R_xi < u_0 of (phi(R_xi) / R_xi)^delta, by layer
  Enclosure g_estimate;  // max g(u_n) over n in [N/2, N]
  GRegime regime = GRegime::undecided;
  std::optional<SeriesSum> psi_s;      // sum q^d psi(q)^s
  std::optional<SeriesSum> psi_cube;   // sum q^{3d} psi(q)^d
  std::optional<SeriesSum> psi_base;   // sum b^{2n} psi(b^n), base-power only
  std::optional<bool> simultaneous_hypothesis;  // sum q^{3d} psi(q)^d < infinity
  std::optional<bool> base_power_hypothesis;    // sum b^{2n} psi(b^n) < infinity
};

/// Partial sums with certified enclosures; power-law summands get an
/// integral-test tail bracket and a verdict.
SeriesReport series_diagnostics(const ApproxFunction& phi, const ApproxFunction& rho,
                                const std::optional<ApproxFunction>& psi, const ApproxSystem& sys,
                                const ScaleSequence& seq, const Rational& s,
                                const Rational& delta, long N);

/// sum_{q >= 1} C q^beta: integral-test verdict and the bracket of the tail beyond N.
SeriesSum power_series(const std::string& name, const Rational& coef, const Rational& beta,
                       long N, long bits = 256);

}  // namespace dioph
