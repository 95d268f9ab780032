#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dioph/audit.hpp"
#include "dioph/exec.hpp"
#include "dioph/functions.hpp"
#include "dioph/geometry.hpp"
#include "dioph/systems.hpp"

namespace dioph {

enum class Regime { finite_g, infinite_g };
std::string to_string(Regime r);

/// Constants of the construction. a1, alpha and the lambda2 cap are derived
/// from the space constants and the measured kappa, lambda1.
struct ConstructionParams {
  Rational s;
  Rational eta;
  Regime regime = Regime::finite_g;
  RegularSpaceParams space;
  Rational kappa;
  Rational lambda1;
  Rational lambda2;
  Rational c_tilde;  // u_n / u_{n+1} < 1 / c_tilde
  Rational a1;       // 3 a^3 kappa lambda1^delta / (4 b^3 50^delta)
  Rational alpha;    // a1 a / (32 b^2 3^delta)
  Rational lambda2_cap_pow;  // lambda2^delta must stay below a / (a + 3^delta 8 b)

  static ConstructionParams derive(const RegularSpaceParams& space, const Rational& kappa,
                                   const Rational& lambda1, const Rational& lambda2,
                                   const Rational& c_tilde, const Rational& s,
                                   const Rational& eta, Regime regime);
  /// c_l = 1 - 2^-l.
  static Rational c(long l);
  long delta() const;
  /// Throws DomainError("s must lie in (0, delta)") and similar.
  void validate() const;
};

/// gamma and C of a pure power gauge C x^gamma.
struct PowerLaw {
  Rational coef;
  Rational exponent;
};
std::optional<PowerLaw> power_law(const ApproxFunction& f);

/// Subsequence u -> u_{m n} with the smallest m for which the rho-ratio
/// raised to delta drops below the cap. For monotone g the block maximum of
/// every length-m block sits at a fixed phase, so the thinned series still
/// diverges whenever the original one does.
struct Thinning {
  ScaleSequence seq;
  long stride = 1;
  Rational lambda1;
  Rational lambda2;
  Rational c_tilde;
  std::vector<AuditRow> audit;
};
Thinning thin_for_regularity(const ApproxFunction& rho, const ApproxFunction& phi,
                             const ScaleSequence& seq, const RegularSpaceParams& space,
                             const Rational& s);

struct CantorContext {
  ApproxSystem sys;
  ScaleSequence seq;
  ApproxFunction phi;
  ApproxFunction rho;
  ConstructionParams params;
  Ball root;
  long n_max = 4000;
  long k_cap = 1;
  std::size_t population_cap = 16;
  std::size_t exhaustive_limit = 512;
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

/// Thins the sequence for the lambda2 cap and derives every constant from
/// the measured kappa.
struct PreparedContext {
  CantorContext ctx;
  Thinning thinning;
};
PreparedContext prepare_context(const ApproxSystem& sys, const ScaleSequence& seq,
                                const ApproxFunction& phi, const ApproxFunction& rho,
                                const RegularSpaceParams& space, const Rational& kappa,
                                const Rational& s, const Rational& eta, Regime regime,
                                const Ball& root);

/// A selected family of layer points sorted by first coordinate: either an
/// arithmetic progression (base-power fast path) or an explicit list.
class CandidateSet {
 public:
  CandidateSet() = default;
  static CandidateSet progression(const ApproxSystem& sys, Rational first, Rational step,
                                  Integer count);
  static CandidateSet list(std::vector<Anchor> members);

  bool is_progression() const { return progression_; }
  Integer size() const;
  Rational position(const Integer& j) const;
  Anchor at(const Integer& j) const;
  /// Indices j with lo < position(j) < hi as a half-open range [begin, end).
  std::pair<Integer, Integer> open_range(const Rational& lo, const Rational& hi) const;
  const Rational& step() const { return step_; }

 private:
  bool progression_ = false;
  ApproxSystem sys_;
  Rational first_;
  Rational step_;
  Integer count_;
  std::vector<Anchor> members_;
};

/// The point p / b^k of a base-power system with its weight b^-k, k minimal.
Anchor base_power_anchor(const ApproxSystem& sys, const Rational& x);

struct SeparatedSelection {
  std::vector<std::size_t> selected;
  bool covering_verified = false;
};

/// Greedy 5r selection: decreasing radius, first fit. The covering of every
/// input ball by a selected 5-dilation is verified exactly.
SeparatedSelection extract_separated(const std::vector<Ball>& balls);

struct RowLabel {
  long level = 0;
  long sublevel = 0;
};

struct SelectionResult {
  long n = 0;
  CandidateSet qbar;
  Rational separation_radius;  // 5 rho(u_{n-1})
  Rational required;           // (a^2 kappa / b^3)(lambda1/50)^delta mu(B) / rho(u_n)^delta
  bool disjoint = false;
  bool inside = false;
  bool count_ok = false;
  std::vector<AuditRow> audit;
};

/// Points of J_u(n) whose 5 rho(u_{n-1})-ball meets B/2, thinned greedily.
/// With annulus_level = l > 0 only points whose annulus
/// A(xi, c_l phi(R_xi), phi(u_n)) admits a node ball are considered.
/// Throws ConstructionError("lem1-count") on a count shortfall.
SelectionResult lemma1_select(const Ball& B, long n, const CantorContext& ctx, RowLabel label = {},
                              long annulus_level = 0);

/// Smallest n in [n_lo, n_hi] with 50 rho(u_{n-1}) < r(B)/2.
std::optional<long> lemma1_threshold(const Ball& B, const CantorContext& ctx, long n_lo,
                                     long n_hi);

struct PruneResult {
  SelectionResult base;
  std::vector<Integer> bad;  // sorted indices into base.qbar
  Integer survivors;
  Rational required;  // (3 a^2 kappa / 4 b^3)(lambda1/50)^delta mu(B) / rho(u_m)^delta
  bool quarter_ok = false;
  bool count_ok = false;
  std::vector<AuditRow> audit;
};

/// Removes from the layer-m selection every gamma whose
/// phi-ball meets B(eta, c_l phi(R_eta)) for some eta != gamma with
/// u_m <= R_eta < u_{n-1}. Throws ConstructionError("lem2-bad") when
/// #Bad >= #Qbar / 4.
PruneResult lemma2_prune(const Ball& B, const Anchor& xi, long l, long n, long m,
                         const CantorContext& ctx, RowLabel label = {}, long annulus_level = 0);

/// xi + tau e_1 (or -tau when clipped by the cube), tau = (c_l phi(R_xi) + phi(u_n)) / 2.
Point choose_center(const Point& xi, const Rational& R_xi, long l, long n,
                    const CantorContext& ctx);

struct CantorNode {
  std::size_t id = 0;
  long level = 0;
  long sublevel = 0;
  long layer = 0;
  Ball ball;
  Anchor anchor;
  std::optional<std::size_t> parent;
  std::optional<std::size_t> family;
  /// Number of G members this node stands for (1 unless sampled).
  Rational weight{1};
};

struct PruneRecord {
  enum class Reason { bad, u };
  Point anchor;
  Reason reason = Reason::u;
};

/// All children of one parent in one sublevel.
struct Family {
  std::size_t parent = 0;
  long level = 0;
  long sublevel = 0;
  long layer = 0;
  Rational radius;
  std::optional<Enclosure> thickening;
  Integer qbar;
  Integer bad;
  Integer c;
  Rational u;  // exact when u_exact, else a sampled estimate
  bool u_exact = true;
  Rational g;
  std::vector<std::size_t> nodes;
  std::vector<PruneRecord> pruned;

  bool sampled() const { return Rational(static_cast<long>(nodes.size())) != g; }
};

struct LevelRecord {
  long level = 0;
  long n = 0;
  std::map<std::size_t, long> k;  // per parent node id
  bool capped = false;
};

struct CantorTree {
  CantorContext ctx;
  std::vector<CantorNode> nodes;  // node 0 is the root
  std::vector<Family> families;
  std::vector<LevelRecord> levels;  // levels[l - 1] describes level l
  std::vector<AuditRow> audit;

  long depth() const { return static_cast<long>(levels.size()); }
  std::vector<std::size_t> nodes_at(long level) const;
  std::vector<std::size_t> children(std::size_t node) const;
};

CantorTree start_tree(const CantorContext& ctx);
/// Builds level `l` (= depth + 1). Throws ConstructionError naming the
/// failing inequality.
void build_level(CantorTree& tree, long l);
CantorTree build_tree(const CantorContext& ctx, long depth);

struct SeparationAudit {
  bool pass = true;
  std::size_t pairs = 0;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
};
/// Same-parent pairs in sublevels i <= i' are at least 2 rho(u_{n_l + i'})
/// apart, same-sublevel pairs at least 4 rho(u_{n_l + i}).
SeparationAudit check_separation(const CantorTree& tree, long l);

struct WitnessAudit {
  bool pass = true;
  std::size_t nodes = 0;
  std::size_t candidates = 0;
  std::optional<std::size_t> violating_node;
  std::optional<Point> eta;
};
/// Every level-l node ball avoids B(eta, c_{l-1} phi(R_eta)) for all eta
/// with u_{layer} <= R_eta < u_{parent layer - 1}.
WitnessAudit check_exactness(const CantorTree& tree, long l);

}  // namespace dioph
