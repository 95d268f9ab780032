#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dioph/exec.hpp"
#include "dioph/functions.hpp"
#include "dioph/geometry.hpp"
#include "dioph/systems.hpp"

namespace dioph {

/// Sorted, pairwise disjoint open intervals.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  static IntervalUnion from(std::vector<std::pair<Rational, Rational>> pieces);

  /// Restriction to (lo, hi).
  IntervalUnion clip(const Rational& lo, const Rational& hi) const;
  Rational measure() const;
  const std::vector<std::pair<Rational, Rational>>& pieces() const { return pieces_; }

 private:
  std::vector<std::pair<Rational, Rational>> pieces_;
};

/// Lebesgue measure of (union of balls) within window and [0,1]^d. `lo == hi`
/// when exact; otherwise a certified bracket.
struct UnionMeasure {
  Rational lo;
  Rational hi;
  bool exact = true;
  bool within_tolerance = true;
};

/// d = 1: interval merge; d = 2: sweepline with a segment tree; d = 3:
/// adaptive dyadic refinement until hi - lo <= tol or `cell_budget` cells.
UnionMeasure union_measure(const std::vector<Ball>& balls, const Ball& window, unsigned d,
                           const Rational& tol = Rational(1, 1000),
                           std::size_t cell_budget = 2'000'000);
/// The refinement engine for any d, exposed for cross-checks.
UnionMeasure union_measure_grid(const std::vector<Ball>& balls, const Ball& window, unsigned d,
                                const Rational& tol, std::size_t cell_budget);

struct UbiquityRow {
  long n = 0;
  std::size_t layer_size = 0;  // 0 when the layer was not enumerated
  Rational ratio;               // exact ratio or a certified lower bound
  std::string method;           // "exact", "dirichlet-bound", "grid-bound", "empty"
  bool pass = false;
};

struct UbiquityReport {
  Ball window;
  Rational kappa;
  std::vector<UbiquityRow> rows;
  std::optional<long> n_B_estimate;  // first n from which every row passes
  bool pass = false;
  std::vector<std::string> notes;
};

struct UbiquityOptions {
  /// Exact union computations are attempted while the layer has at most this many points.
  std::size_t exact_budget = 20'000'000;
  /// Use the Dirichlet lower bound when exact evaluation is over budget.
  bool allow_dirichlet = true;
  Rational grid_tol = Rational(1, 1000);
  Exec exec = Exec::parallel;
};

/// mu(union_{xi in J_u(n)} B(xi, rho(u_{n-1})) ∩ B) / mu(B) for each n in [n_lo, n_hi].
UbiquityReport verify_local_ubiquity(const ApproxSystem& sys, const ApproxFunction& rho,
                                     const ScaleSequence& seq, const Ball& B, long n_lo,
                                     long n_hi, const Rational& kappa,
                                     const UbiquityOptions& opt = {});

/// Lower bound for the rationals-d ratio from Dirichlet's theorem:
/// 1 - sum_{q <= Q} (2rq+3)^d (2 t^{n/(2d)} / q)^d / mu(B) with Q = t^{-(n-1)/2}.
/// nullopt when the window is too close to the cube boundary for the argument.
std::optional<Rational> dirichlet_ratio_bound(const ApproxSystem& sys, const ScaleSequence& seq,
                                              const Ball& B, long n);

struct MinkowskiCount {
  Integer count;
  Rational bound;  // (2 r q + 3)^d
  bool ok = true;
};

/// Number of p/q, -q <= p_i <= q, whose ball of radius `radius` (default
/// 1/q) meets the window; compared against (2rq+3)^d.
MinkowskiCount minkowski_count_bound(long q, const Ball& window, unsigned d,
                                     std::optional<Rational> radius = std::nullopt);

/// Largest t = 2^-k satisfying both inequalities of the selection rule for
/// the given window radius r and every n in [n_lo, n_hi]; k is searched up to k_max.
std::optional<Rational> auto_select_t(unsigned d, const Rational& r, long n_lo, long n_hi,
                                      long k_max = 64);
/// First n >= 1 at which the second inequality holds for this t (nullopt if none up to n_max).
std::optional<long> first_valid_layer(unsigned d, const Rational& t, const Rational& r,
                                      long n_max = 200);
bool selection_rule_holds(unsigned d, const Rational& t, const Rational& r, long n);

}  // namespace dioph
