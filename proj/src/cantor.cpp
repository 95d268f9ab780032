#include "dioph/cantor.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <exception>
#include <functional>
#include <map>
#include <set>

namespace dioph {

namespace {

constexpr long kReportBits = 128;
constexpr std::size_t kScanGuard = 1'000'000;
constexpr std::size_t kExplicitLimit = 1u << 20;

Rational exact_at(const ApproxFunction& f, const Rational& x, const std::string& what) {
  if (auto v = f.exact(x)) return *v;
  throw ConstructionError(what, what + "(" + format_value(x) + ") is irrational");
}

Real mul(Real a, Real b) {
  return [a = std::move(a), b = std::move(b)](long bits) { return a(bits) * b(bits); };
}
Real mul(Real a, Rational q) {
  return [a = std::move(a), q = std::move(q)](long bits) { return scale(a(bits), q); };
}
Real add(Real a, Real b) {
  return [a = std::move(a), b = std::move(b)](long bits) { return a(bits) + b(bits); };
}
Real power(Real a, Rational e) {
  return [a = std::move(a), e = std::move(e)](long bits) { return pow(a(bits), e, bits); };
}
Real power(Rational x, Rational e) {
  return [x = std::move(x), e = std::move(e)](long bits) { return pow(x, e, bits); };
}

std::string show(const Real& x) { return format_value(x(kReportBits)); }

enum class Rel { lt, le, gt, ge };

const char* rel_text(Rel r) {
  switch (r) {
    case Rel::lt:
      return "<";
    case Rel::le:
      return "<=";
    case Rel::gt:
      return ">";
    case Rel::ge:
      return ">=";
  }
  return "?";
}

bool holds(const Real& lhs, const Real& rhs, Rel rel) {
  const auto o = try_compare(lhs, rhs);
  if (!o) return false;
  switch (rel) {
    case Rel::lt:
      return *o == Ordering::less;
    case Rel::le:
      return *o != Ordering::greater;
    case Rel::gt:
      return *o == Ordering::greater;
    case Rel::ge:
      return *o != Ordering::less;
  }
  return false;
}

bool holds(const Rational& lhs, const Rational& rhs, Rel rel) {
  switch (rel) {
    case Rel::lt:
      return lhs < rhs;
    case Rel::le:
      return lhs <= rhs;
    case Rel::gt:
      return lhs > rhs;
    case Rel::ge:
      return lhs >= rhs;
  }
  return false;
}

// Collects rows when a sink is attached; otherwise only tracks the verdict.
class Recorder {
 public:
  explicit Recorder(std::vector<AuditRow>* sink) : sink_(sink) {}

  bool check(const std::string& tag, long level, long sub, const Real& lhs, const Real& rhs,
             Rel rel) {
    const bool pass = holds(lhs, rhs, rel);
    if (sink_) sink_->push_back(make_row(tag, level, sub, show(lhs), show(rhs), rel_text(rel), pass));
    note(tag, pass);
    return pass;
  }
  bool check(const std::string& tag, long level, long sub, const Rational& lhs,
             const Rational& rhs, Rel rel) {
    const bool pass = holds(lhs, rhs, rel);
    if (sink_)
      sink_->push_back(
          make_row(tag, level, sub, format_value(lhs), format_value(rhs), rel_text(rel), pass));
    note(tag, pass);
    return pass;
  }
  void fail() { ok_ = false; }
  bool stop() const { return !ok_ && !sink_; }
  bool ok() const { return ok_; }
  bool recording() const { return sink_ != nullptr; }
  const std::string& first_failure() const { return first_failure_; }
  void push(AuditRow r) {
    if (!r.passed() && r.status != AuditRow::Status::open) note(r.tag, false);
    if (sink_) sink_->push_back(std::move(r));
  }

 private:
  void note(const std::string& tag, bool pass) {
    if (!pass && ok_) first_failure_ = tag;
    ok_ = ok_ && pass;
  }

  std::vector<AuditRow>* sink_;
  std::string first_failure_;
  bool ok_ = true;
};

bool is_base_power_1d(const ApproxSystem& sys) {
  return sys.kind == ApproxSystem::Kind::base_power && sys.d == 1;
}

long to_long(const Integer& z) {
  if (!z.fits_slong_p()) throw DomainError("integer exceeds long range");
  return z.get_si();
}

Integer int_pow(const Integer& b, long e) { return pow(b, static_cast<unsigned long>(e)); }

// Exponents k of the base-power points in layer n: b^-k in [u_n, u_{n-1}).
struct ExpRange {
  long lo = 0;
  long hi = -1;
  bool empty() const { return lo > hi; }
};

ExpRange exponents(const ApproxSystem& sys, const ScaleSequence& seq, long n) {
  // fast path when t = b^-j: u_n = b^{-j e_n}
  const Integer& b = sys.base;
  if (seq.t.get_num() == 1) {
    Integer den = seq.t.get_den();
    long j = 0;
    while (den > 1 && den % b == 0) {
      den /= b;
      ++j;
    }
    if (den == 1 && j > 0) {
      const long e_n = seq.stride * n + seq.offset;
      const long e_prev = seq.stride * (n - 1) + seq.offset;
      if (e_prev < 0) throw DomainError("index before sequence start");
      return {j * e_prev + 1, j * e_n};
    }
  }
  const DenominatorRange r = layer_range(sys, seq, n);
  return {to_long(r.lo), to_long(r.hi)};
}

Rational base_inv_pow(const Integer& b, long k) { return make_rational(Integer(1), int_pow(b, k)); }

Integer mod(const Integer& a, const Integer& m) {
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

// Smallest exponent k in [lo, hi] whose annulus at level l admits a node ball;
// phi is non-decreasing so the admissible exponents form a tail [k, hi].
std::optional<long> admissible_from(const CantorContext& ctx, long l, long n, long lo, long hi) {
  const Rational cl = ConstructionParams::c(l);
  const Rational phin = exact_at(ctx.phi, ctx.seq.at(n), "phi");
  const Rational limit = phin * (1 - (1 - cl) / 4);
  std::optional<long> best;
  for (long k = hi; k >= lo; --k) {
    if (cl * exact_at(ctx.phi, base_inv_pow(ctx.sys.base, k), "phi") < limit)
      best = k;
    else
      break;
  }
  return best;
}

bool admits_center(const CantorContext& ctx, long l, long n, const Rational& R) {
  const Rational cl = ConstructionParams::c(l);
  const Rational phin = exact_at(ctx.phi, ctx.seq.at(n), "phi");
  return cl * exact_at(ctx.phi, R, "phi") < phin * (1 - (1 - cl) / 4);
}

// Nearest E_k point below (dir < 0) or above (dir > 0) position x, skipping
// `skip` when given. E_0 = {0, 1}; E_k = {p / b^k : b does not divide p}.
std::optional<Rational> neighbour(const Integer& b, long k, const Rational& x, int dir,
                                  const std::optional<Rational>& skip) {
  if (k == 0) {
    std::optional<Rational> out;
    for (const Rational& c : {Rational(0), Rational(1)}) {
      if (skip && *skip == c) continue;
      if (dir < 0 && c <= x && (!out || c > *out)) out = c;
      if (dir > 0 && c > x && (!out || c < *out)) out = c;
    }
    return out;
  }
  const Integer bk = int_pow(b, k);
  Integer p = floor(Rational(x * bk));
  if (dir > 0) p += 1;
  for (int step = 0; step < 4; ++step) {
    if (p <= 0 || p >= bk) return std::nullopt;
    if (mod(p, b) != 0) {
      Rational c = make_rational(p, bk);
      if (!(skip && *skip == c)) return c;
    }
    p += dir;
  }
  return std::nullopt;
}

struct Hit {
  Point eta;
  Rational R;
};

// First eta with exponent in [k_lo, k_hi] (base-power, d = 1), eta != exclude,
// and |x - eta| < r + c phi(b^-k). `gamma` (exponent k_gamma) is a system
// point with |x - gamma| <= slack; every other eta then satisfies
// |x - eta| >= b^-max(k, k_gamma) - slack, which prunes most exponents.
std::optional<Hit> interference_base_power(const CantorContext& ctx, const Rational& x,
                                           const Rational& r, const Rational& c, long k_lo,
                                           long k_hi, const Rational& gamma, long k_gamma,
                                           const Rational& slack, bool exclude_gamma,
                                           std::size_t& candidates) {
  const Integer& b = ctx.sys.base;
  const std::optional<Rational> skip =
      exclude_gamma ? std::optional<Rational>(gamma) : std::nullopt;
  if (!exclude_gamma && k_gamma >= k_lo && k_gamma <= k_hi) {
    ++candidates;
    const Rational reach = r + c * exact_at(ctx.phi, base_inv_pow(b, k_gamma), "phi");
    if (abs(Rational(x - gamma)) < reach) return Hit{{gamma}, base_inv_pow(b, k_gamma)};
  }
  if (c == 0) return std::nullopt;
  // below k_gamma the separation b^-k_gamma is fixed while the reach shrinks
  // with k, so once an exponent is pruned every larger one below k_gamma is too
  const Rational floor_sep = base_inv_pow(b, k_gamma) - slack;
  for (long k = k_lo; k <= k_hi; ++k) {
    const Rational Rk = base_inv_pow(b, k);
    const Rational reach = r + c * exact_at(ctx.phi, Rk, "phi");
    if (k < k_gamma) {
      if (floor_sep >= reach) {
        k = k_gamma - 1;
        continue;
      }
    } else if (Rk - slack >= reach) {
      continue;
    }
    for (int dir : {-1, 1}) {
      auto eta = neighbour(b, k, x, dir, skip);
      if (!eta) continue;
      if (*eta == gamma) continue;  // gamma itself was handled above
      ++candidates;
      if (abs(Rational(x - *eta)) < reach) return Hit{{*eta}, Rk};
    }
  }
  return std::nullopt;
}

// Same question answered by enumerating layers [n_from, n_to] explicitly.
std::optional<Hit> interference_explicit(const CantorContext& ctx, const Point& x,
                                         const Rational& r, const Rational& c, long n_from,
                                         long n_to, const std::optional<Point>& exclude,
                                         std::size_t& candidates) {
  const Rational phi_top = exact_at(ctx.phi, ctx.seq.at(n_from - 1), "phi");
  for (long n = n_from; n <= n_to; ++n) {
    const LayerEnumeration layer =
        enumerate_layer(ctx.sys, ctx.seq, n, Ball(x, r), c * phi_top, kExplicitLimit);
    for (const auto& a : layer.members) {
      if (exclude && a.xi == *exclude) continue;
      ++candidates;
      if (sup_distance(x, a.xi) < r + c * exact_at(ctx.phi, a.R, "phi")) return Hit{a.xi, a.R};
    }
  }
  return std::nullopt;
}

long exponent_of(const Anchor& a, const Integer& b) {
  long k = 0;
  Integer d = a.denominator;
  while (d > 1) {
    d /= b;
    ++k;
  }
  return k;
}

}  // namespace

std::string to_string(Regime r) { return r == Regime::finite_g ? "finite-G" : "infinite-G"; }

// ---------------------------------------------------------------- constants

Rational ConstructionParams::c(long l) {
  if (l < 0) throw DomainError("level must be non-negative");
  return 1 - make_rational(Integer(1), pow(Integer(2), static_cast<unsigned long>(l)));
}

long ConstructionParams::delta() const {
  if (space.delta.get_den() != 1) throw DomainError("construction needs an integer delta");
  return to_long(space.delta.get_num());
}

ConstructionParams ConstructionParams::derive(const RegularSpaceParams& space,
                                              const Rational& kappa, const Rational& lambda1,
                                              const Rational& lambda2, const Rational& c_tilde,
                                              const Rational& s, const Rational& eta,
                                              Regime regime) {
  ConstructionParams p;
  p.space = space;
  p.kappa = kappa;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.c_tilde = c_tilde;
  p.s = s;
  p.eta = eta;
  p.regime = regime;
  const long d = p.delta();
  const Rational& a = space.a_lower;
  const Rational& b = space.b_upper;
  p.a1 = 3 * pow(a, 3) * kappa * pow(lambda1, d) / (4 * pow(b, 3) * pow(Rational(50), d));
  p.alpha = p.a1 * a / (32 * b * b * pow(Rational(3), d));
  p.lambda2_cap_pow = a / (a + pow(Rational(3), d) * 8 * b);
  return p;
}

void ConstructionParams::validate() const {
  space.validate();
  const long d = delta();
  if (!(0 < s && s < d)) throw DomainError("s must lie in (0, delta)");
  if (eta < 1) throw DomainError("eta must be at least 1");
  if (!(0 < kappa)) throw DomainError("kappa must be positive");
  if (!(0 < lambda1 && lambda1 <= lambda2 && lambda2 < 1))
    throw DomainError("need 0 < lambda1 <= lambda2 < 1");
  if (!(pow(lambda2, d) < lambda2_cap_pow))
    throw DomainError("lambda2^delta must stay below a / (a + 3^delta 8 b)");
  if (!(0 < c_tilde && c_tilde < 1)) throw DomainError("c_tilde must lie in (0,1)");
  if (!(0 < a1 && a1 < 1)) throw DomainError("a1 must lie in (0,1)");
  if (!(0 < alpha && alpha < 1)) throw DomainError("alpha must lie in (0,1)");
}

std::optional<PowerLaw> power_law(const ApproxFunction& f) {
  if (f.kind() == ApproxFunction::Kind::power ||
      (f.kind() == ApproxFunction::Kind::power_log && f.log_exponent() == 0))
    return PowerLaw{f.coef(), f.exponent()};
  return std::nullopt;
}

Thinning thin_for_regularity(const ApproxFunction& rho, const ApproxFunction& phi,
                             const ScaleSequence& seq, const RegularSpaceParams& space,
                             const Rational& s) {
  const auto pr = power_law(rho);
  if (!pr || pr->exponent <= 0)
    throw ConstructionError("as1", "rho must be an increasing power law to certify regularity");
  if (space.delta.get_den() != 1) throw DomainError("construction needs an integer delta");
  const long d = to_long(space.delta.get_num());
  const Rational& a = space.a_lower;
  const Rational& b = space.b_upper;
  const Rational cap = a / (a + pow(Rational(3), d) * 8 * b);
  // rho(u_{n+1}) / rho(u_n) = t^(stride * gamma_rho), so after taking every
  // m-th term the ratio is its m-th power
  long m = 1;
  for (;; ++m) {
    if (m > 4096) throw ConstructionError("as1", "no stride below 4096 meets the lambda2 cap");
    const Rational e = Rational(seq.stride * m) * pr->exponent * d;
    if (holds(power(seq.t, e), constant(cap), Rel::lt)) break;
  }
  Thinning out;
  out.stride = m;
  out.seq = seq.subsequence(m, 0);
  const Enclosure ratio = pow(seq.t, Rational(seq.stride * m) * pr->exponent, 256);
  out.lambda2 = ratio.hi;
  out.lambda1 = Rational(63, 64) * ratio.lo;
  out.c_tilde = Rational(63, 64) * pow(seq.t, seq.stride * m);
  out.audit.push_back(make_row("as1", 0, 0, format_value(pow(out.lambda2, d)), format_value(cap),
                               "<", pow(out.lambda2, d) < cap));
  out.audit.push_back(make_row("thin", 0, 0, std::to_string(m), "1", ">=", m >= 1));
  // g = phi^s / rho^delta is monotone along u for power gauges, so every
  // block of m consecutive terms has its extreme value at a fixed phase
  const auto pp = power_law(phi);
  out.audit.push_back(make_row("thin-monotone", 0, 0, pp ? "power" : phi.describe(), "power",
                               "=", pp.has_value() && s > 0));
  return out;
}

PreparedContext prepare_context(const ApproxSystem& sys, const ScaleSequence& seq,
                                const ApproxFunction& phi, const ApproxFunction& rho,
                                const RegularSpaceParams& space, const Rational& kappa,
                                const Rational& s, const Rational& eta, Regime regime,
                                const Ball& root) {
  PreparedContext out;
  out.thinning = thin_for_regularity(rho, phi, seq, space, s);
  out.ctx.sys = sys;
  out.ctx.seq = out.thinning.seq;
  out.ctx.phi = phi;
  out.ctx.rho = rho;
  out.ctx.root = root;
  out.ctx.params = ConstructionParams::derive(space, kappa, out.thinning.lambda1,
                                              out.thinning.lambda2, out.thinning.c_tilde, s,
                                              eta, regime);
  out.ctx.params.validate();
  return out;
}

// ------------------------------------------------------------ candidate sets

CandidateSet CandidateSet::progression(const ApproxSystem& sys, Rational first, Rational step,
                                       Integer count) {
  if (step <= 0) throw DomainError("progression step must be positive");
  CandidateSet c;
  c.progression_ = true;
  c.sys_ = sys;
  c.first_ = std::move(first);
  c.step_ = std::move(step);
  c.count_ = std::move(count);
  return c;
}

CandidateSet CandidateSet::list(std::vector<Anchor> members) {
  std::stable_sort(members.begin(), members.end(),
                   [](const Anchor& a, const Anchor& b) { return a.xi < b.xi; });
  CandidateSet c;
  c.members_ = std::move(members);
  c.count_ = static_cast<unsigned long>(c.members_.size());
  return c;
}

Integer CandidateSet::size() const { return count_; }

Rational CandidateSet::position(const Integer& j) const {
  if (progression_) return first_ + Rational(j) * step_;
  return members_.at(j.get_ui()).xi[0];
}

Anchor CandidateSet::at(const Integer& j) const {
  if (j < 0 || j >= count_) throw DomainError("candidate index out of range");
  if (progression_) return base_power_anchor(sys_, position(j));
  return members_.at(j.get_ui());
}

std::pair<Integer, Integer> CandidateSet::open_range(const Rational& lo, const Rational& hi) const {
  if (progression_) {
    Integer begin = floor(Rational((lo - first_) / step_)) + 1;
    Integer end = ceil(Rational((hi - first_) / step_));
    if (begin < 0) begin = 0;
    if (end > count_) end = count_;
    if (end < begin) end = begin;
    return {begin, end};
  }
  auto b = std::upper_bound(members_.begin(), members_.end(), lo,
                            [](const Rational& v, const Anchor& a) { return v < a.xi[0]; });
  auto e = std::lower_bound(members_.begin(), members_.end(), hi,
                            [](const Anchor& a, const Rational& v) { return a.xi[0] < v; });
  if (e < b) e = b;
  return {Integer(static_cast<unsigned long>(b - members_.begin())),
          Integer(static_cast<unsigned long>(e - members_.begin()))};
}

Anchor base_power_anchor(const ApproxSystem& sys, const Rational& x) {
  if (sys.kind != ApproxSystem::Kind::base_power) throw DomainError("not a base-power system");
  if (x < 0 || x > 1) throw DomainError("point outside [0,1]");
  const Integer& b = sys.base;
  const Integer den = x.get_den();
  Integer bk = 1;
  long k = 0;
  if (mpz_popcount(b.get_mpz_t()) == 1 && mpz_popcount(den.get_mpz_t()) == 1) {
    // b = 2^e, den = 2^v: k = ceil(v / e)
    const long e = static_cast<long>(mpz_scan1(b.get_mpz_t(), 0));
    const long v = static_cast<long>(mpz_scan1(den.get_mpz_t(), 0));
    k = (v + e - 1) / e;
    bk = int_pow(b, k);
  } else {
    while (bk % den != 0) {
      bk *= b;
      ++k;
      if (bk > den * den * b) throw DomainError(to_string(x) + " is not a b-adic point");
    }
  }
  return Anchor{{x}, make_rational(Integer(1), bk), bk};
}

// --------------------------------------------------------------- 5r covering

SeparatedSelection extract_separated(const std::vector<Ball>& balls) {
  std::vector<std::size_t> order(balls.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return balls[a].radius > balls[b].radius;
  });
  SeparatedSelection out;
  for (std::size_t i : order) {
    bool free = true;
    for (std::size_t j : out.selected)
      if (intersects(balls[i], balls[j])) {
        free = false;
        break;
      }
    if (free) out.selected.push_back(i);
  }
  out.covering_verified = true;
  for (const auto& ball : balls) {
    bool covered = false;
    for (std::size_t j : out.selected)
      if (contains(balls[j].scaled(5), ball)) {
        covered = true;
        break;
      }
    if (!covered) {
      out.covering_verified = false;
      break;
    }
  }
  return out;
}

// ------------------------------------------------------------------ layer selection

std::optional<long> lemma1_threshold(const Ball& B, const CantorContext& ctx, long n_lo,
                                     long n_hi) {
  for (long n = std::max(n_lo, 1L); n <= n_hi; ++n) {
    const Real lhs = mul(ctx.rho.at(ctx.seq.at(n - 1)), Rational(50));
    if (holds(lhs, constant(B.radius / 2), Rel::lt)) return n;
  }
  return std::nullopt;
}

SelectionResult lemma1_select(const Ball& B, long n, const CantorContext& ctx, RowLabel label,
                              long annulus_level) {
  if (n < 1) throw DomainError("layer index must be at least 1");
  const long d = ctx.params.delta();
  const Rational& a = ctx.params.space.a_lower;
  const Rational& bm = ctx.params.space.b_upper;
  const Rational rho_prev = exact_at(ctx.rho, ctx.seq.at(n - 1), "rho");
  const Rational rho_n = exact_at(ctx.rho, ctx.seq.at(n), "rho");

  SelectionResult res;
  res.n = n;
  res.separation_radius = 5 * rho_prev;
  res.required = a * a * ctx.params.kappa / pow(bm, 3) * pow(Rational(ctx.params.lambda1 / 50), d) *
                 cube_measure(B) / pow(rho_n, d);
  const Rational D = 2 * res.separation_radius;
  const Rational reach = B.radius / 2 + res.separation_radius;

  bool done = false;
  if (is_base_power_1d(ctx.sys)) {
    const ExpRange er = exponents(ctx.sys, ctx.seq, n);
    std::optional<long> klo;
    if (!er.empty())
      klo = annulus_level > 0 ? admissible_from(ctx, annulus_level, n, er.lo, er.hi)
                              : std::optional<long>(er.lo);
    const Integer& b = ctx.sys.base;
    if (!klo) {
      res.qbar = CandidateSet::progression(ctx.sys, Rational(0), D, Integer(0));
      done = true;
    } else if (*klo >= 1 && Rational(D * int_pow(b, *klo - 1)).get_den() == 1) {
      // J' = {p / b^hi : b^(hi - klo + 1) does not divide p}; the greedy scan
      // from the left keeps first, first + D, ... since D is a multiple of b^(1-klo)
      const Integer bh = int_pow(b, er.hi);
      const Integer M = int_pow(b, er.hi - *klo + 1);
      const Rational lo_pos = max(Rational(B.center[0] - reach), Rational(0));
      const Rational hi_pos = min(Rational(B.center[0] + reach), Rational(1));
      Integer p = floor(Rational(lo_pos * bh)) + 1;
      if (mod(p, M) == 0) p += 1;
      const Rational first = make_rational(p, bh);
      Integer count = 0;
      if (first < hi_pos) count = ceil(Rational((hi_pos - first) / D));
      res.qbar = CandidateSet::progression(ctx.sys, first, D, count);
      done = true;
    }
  }
  if (!done) {
    const LayerEnumeration layer = enumerate_layer(
        ctx.sys, ctx.seq, n, Ball(B.center, B.radius / 2), res.separation_radius, kExplicitLimit);
    std::vector<Anchor> pool;
    for (const auto& m : layer.members)
      if (annulus_level <= 0 || admits_center(ctx, annulus_level, n, m.R)) pool.push_back(m);
    std::stable_sort(pool.begin(), pool.end(),
                     [](const Anchor& x, const Anchor& y) { return x.xi < y.xi; });
    std::vector<Anchor> kept;
    if (ctx.sys.d == 1) {
      for (auto& m : pool)
        if (kept.empty() || m.xi[0] - kept.back().xi[0] >= D) kept.push_back(std::move(m));
    } else {
      std::vector<Ball> balls;
      for (const auto& m : pool) balls.emplace_back(m.xi, res.separation_radius);
      SeparatedSelection sel = extract_separated(balls);
      std::sort(sel.selected.begin(), sel.selected.end());
      for (std::size_t i : sel.selected) kept.push_back(pool[i]);
    }
    res.qbar = CandidateSet::list(std::move(kept));
  }

  // (1) disjoint 5 rho(u_{n-1})-balls, (2) rho(u_{n-1})-balls inside B, (3) count
  const Integer count = res.qbar.size();
  if (res.qbar.is_progression()) {
    res.disjoint = res.qbar.step() >= D;
  } else {
    res.disjoint = true;
    const std::size_t c = count.get_ui();
    for (std::size_t i = 0; i < c && res.disjoint; ++i)
      for (std::size_t j = i + 1; j < c; ++j) {
        const Anchor x = res.qbar.at(Integer(static_cast<unsigned long>(i)));
        const Anchor y = res.qbar.at(Integer(static_cast<unsigned long>(j)));
        if (sup_distance(x.xi, y.xi) < D) {
          res.disjoint = false;
          break;
        }
        if (ctx.sys.d == 1) break;  // sorted: the neighbour is the closest
      }
  }
  res.inside = true;
  if (count > 0) {
    std::vector<Integer> probe;
    if (res.qbar.is_progression())
      probe = {Integer(0), Integer(count - 1)};
    else
      for (Integer j = 0; j < count; ++j) probe.push_back(j);
    for (const auto& j : probe)
      if (!contains(B, Ball(res.qbar.at(j).xi, rho_prev))) {
        res.inside = false;
        break;
      }
  }
  res.count_ok = count > 0 && Rational(count) >= res.required;
  res.audit.push_back(make_row("lem1-disjoint", label.level, label.sublevel,
                               format_value(res.qbar.is_progression() ? res.qbar.step() : D),
                               format_value(D), ">=", res.disjoint));
  res.audit.push_back(make_row("lem1-inside", label.level, label.sublevel,
                               format_value(rho_prev), format_value(B.radius), "inside",
                               res.inside));
  res.audit.push_back(make_row("lem1-count", label.level, label.sublevel, format_value(count),
                               format_value(res.required), ">=", res.count_ok));
  if (!res.count_ok)
    throw ConstructionError("lem1-count", "count shortfall: measured " + format_value(count) +
                                              ", required " + format_value(res.required));
  return res;
}

// ------------------------------------------------------------------ interference pruning

PruneResult lemma2_prune(const Ball& B, const Anchor& xi, long l, long n, long m,
                         const CantorContext& ctx, RowLabel label, long annulus_level) {
  if (!(m > n && n >= 1)) throw DomainError("lemma2_prune needs 1 <= n < m");
  const long d = ctx.params.delta();
  const Rational cl = ConstructionParams::c(l);
  const Rational& a = ctx.params.space.a_lower;
  const Rational& bm = ctx.params.space.b_upper;

  PruneResult res;
  const Rational phi_xi = exact_at(ctx.phi, xi.R, "phi");
  const Rational phi_n = exact_at(ctx.phi, ctx.seq.at(n), "phi");
  const bool pre = cl * phi_xi < phi_n && contains(Annulus(xi.xi, cl * phi_xi, phi_n), B);
  res.audit.push_back(make_row("lem2-pre", label.level, label.sublevel, format_value(B.radius),
                               format_value(phi_n), "inside annulus", pre));

  res.base = lemma1_select(B, m, ctx, label, annulus_level);
  for (auto& r : res.base.audit) res.audit.push_back(r);
  const CandidateSet& qbar = res.base.qbar;
  const Integer total = qbar.size();

  std::set<Integer> bad;
  if (is_base_power_1d(ctx.sys) && qbar.is_progression()) {
    const Integer& b = ctx.sys.base;
    const long k_lo = exponents(ctx.sys, ctx.seq, n).lo;
    const ExpRange em = exponents(ctx.sys, ctx.seq, m);
    const long k_hi = em.hi;
    if (total > 0) {
      // every gamma has R_gamma <= b^-lo(m)
      const Rational phi_gamma_max = exact_at(ctx.phi, base_inv_pow(b, em.lo), "phi");
      const Rational hull_lo = qbar.position(0);
      const Rational hull_hi = qbar.position(total - 1);
      for (long k = k_lo; k <= k_hi; ++k) {
        const Rational Rk = base_inv_pow(b, k);
        const Rational w = cl * exact_at(ctx.phi, Rk, "phi") + phi_gamma_max;
        // distinct points of E_k and of the gamma layers are b^-max(k, hi(m))
        // apart; w shrinks with k, so below hi(m) the first pruned k ends the scan
        if (w <= base_inv_pow(b, std::max(k, k_hi))) {
          if (k < k_hi) k = k_hi - 1;
          continue;
        }
        const Rational lo = max(Rational(hull_lo - w), Rational(0));
        const Rational hi = min(Rational(hull_hi + w), Rational(1));
        const Integer bk = int_pow(b, k);
        Integer p = k == 0 ? Integer(0) : ceil(Rational(lo * bk));
        const Integer p_end = k == 0 ? Integer(1) : floor(Rational(hi * bk));
        if (Rational(p_end - p) > kScanGuard)
          throw ConstructionError("lem2-bad", "interference scan exceeds the guard at exponent " +
                                                  std::to_string(k));
        for (; p <= p_end; ++p) {
          if (k > 0 && (p <= 0 || p >= bk || mod(p, b) == 0)) continue;
          const Rational eta = k == 0 ? Rational(p) : make_rational(p, bk);
          if (eta < lo || eta > hi) continue;
          const Rational phi_eta = cl * exact_at(ctx.phi, Rk, "phi");
          auto [jb, je] = qbar.open_range(eta - w, eta + w);
          if (Rational(je - jb) > kScanGuard)
            throw ConstructionError("lem2-bad", "more than the guard of gamma near one eta at exponent " +
                                                    std::to_string(k) + " (#Qbar = " +
                                                    format_value(total) + ")");
          for (Integer j = jb; j < je; ++j) {
            const Anchor g = qbar.at(j);
            if (g.xi[0] == eta) continue;
            if (abs(Rational(g.xi[0] - eta)) < phi_eta + exact_at(ctx.phi, g.R, "phi"))
              bad.insert(j);
          }
        }
      }
    }
  } else {
    const Rational phi_top = exact_at(ctx.phi, ctx.seq.at(n - 1), "phi");
    const Rational phi_gamma_max = exact_at(ctx.phi, ctx.seq.at(m - 1), "phi");
    const Ball window(B.center, B.radius / 2 + res.base.separation_radius);
    for (long layer = n; layer <= m; ++layer) {
      const LayerEnumeration etas = enumerate_layer(ctx.sys, ctx.seq, layer, window,
                                                    cl * phi_top + phi_gamma_max, kExplicitLimit);
      for (const auto& e : etas.members) {
        const Rational phi_eta = cl * exact_at(ctx.phi, e.R, "phi");
        for (Integer j = 0; j < total; ++j) {
          const Anchor g = qbar.at(j);
          if (g.xi == e.xi) continue;
          if (sup_distance(g.xi, e.xi) < phi_eta + exact_at(ctx.phi, g.R, "phi")) bad.insert(j);
        }
      }
    }
  }
  res.bad.assign(bad.begin(), bad.end());
  const Integer nbad = static_cast<unsigned long>(res.bad.size());
  res.survivors = total - nbad;
  res.quarter_ok = 4 * nbad < total;
  res.required = 3 * a * a * ctx.params.kappa / (4 * pow(bm, 3)) *
                 pow(Rational(ctx.params.lambda1 / 50), d) * cube_measure(B) /
                 pow(exact_at(ctx.rho, ctx.seq.at(m), "rho"), d);
  res.count_ok = Rational(res.survivors) >= res.required;
  res.audit.push_back(make_row("lem2-bad", label.level, label.sublevel, format_value(nbad),
                               format_value(Rational(total, 4)), "<", res.quarter_ok));
  res.audit.push_back(make_row("lem2-count", label.level, label.sublevel,
                               format_value(res.survivors), format_value(res.required), ">=",
                               res.count_ok));
  if (!res.quarter_ok)
    throw ConstructionError("lem2-bad", "#Bad = " + format_value(nbad) + " is not below #Qbar/4 = " +
                                            format_value(Rational(total, 4)));
  return res;
}

// ------------------------------------------------------------ centre choice

namespace {

Point center_in_annulus(const Point& xi, const Rational& phiR, const Rational& phin,
                        const Rational& cl) {
  const Rational r = (1 - cl) / 8 * phin;
  if (!(cl * phiR + r < phin - r))
    throw ConstructionError("choose_center", "annulus does not admit interior ball");
  const Rational tau = (cl * phiR + phin) / 2;
  const Annulus ann(xi, cl * phiR, phin);
  for (int sign : {1, -1}) {
    Point x = xi;
    x[0] += sign * tau;
    bool inside = true;
    for (const auto& c : x)
      if (c - r < 0 || c + r > 1) inside = false;
    if (!inside) continue;
    if (!contains(ann, Ball(x, r)))
      throw ConstructionError("choose_center", "node ball escapes the annulus");
    return x;
  }
  throw ConstructionError("choose_center", "annulus does not admit interior ball");
}

}  // namespace

Point choose_center(const Point& xi, const Rational& R_xi, long l, long n,
                    const CantorContext& ctx) {
  if (l < 1) throw DomainError("centres are chosen from level 1 on");
  return center_in_annulus(xi, exact_at(ctx.phi, R_xi, "phi"),
                           exact_at(ctx.phi, ctx.seq.at(n), "phi"), ConstructionParams::c(l));
}

// ------------------------------------------------------------------ the tree

std::vector<std::size_t> CantorTree::nodes_at(long level) const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes)
    if (n.level == level) out.push_back(n.id);
  return out;
}

std::vector<std::size_t> CantorTree::children(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& n : nodes)
    if (n.parent && *n.parent == node) out.push_back(n.id);
  return out;
}

CantorTree start_tree(const CantorContext& ctx) {
  ctx.params.validate();
  if (!is_base_power_1d(ctx.sys) && ctx.sys.d != 1)
    throw DomainError("the construction is implemented for d = 1");
  if (ctx.root.dim() != ctx.sys.d) throw DomainError("root ball dimension differs from system");
  if (ctx.root.radius > ctx.params.space.r0) throw DomainError("root radius exceeds r0");
  for (const auto& c : ctx.root.center)
    if (c - ctx.root.radius < 0 || c + ctx.root.radius > 1)
      throw DomainError("root ball must lie in [0,1]^d");
  if (ctx.population_cap < 1 || ctx.exhaustive_limit < ctx.population_cap)
    throw DomainError("need 1 <= population_cap <= exhaustive_limit");
  if (ctx.k_cap < 1) throw DomainError("k_cap must be at least 1");
  CantorTree t;
  t.ctx = ctx;
  CantorNode root;
  root.ball = ctx.root;
  root.anchor = Anchor{ctx.root.center, Rational(1), Integer(1)};
  t.nodes.push_back(root);
  return t;
}

namespace {

struct ParentClass {
  Rational r;
  Rational mu;
  std::vector<std::size_t> members;
};

// g(u_n) and its supremum along u for power gauges.
Real g_at(const CantorContext& ctx, long n) {
  return g_real(ctx.phi, ctx.rho, ctx.params.s, ctx.params.space.delta, ctx.seq.at(n));
}

Real g_star(const CantorContext& ctx) {
  const auto pp = power_law(ctx.phi);
  const auto pr = power_law(ctx.rho);
  if (!pp || !pr)
    throw ConstructionError("cc1", "sup g cannot be certified for a non-power gauge");
  const Rational e = pp->exponent * ctx.params.s - pr->exponent * ctx.params.space.delta;
  if (e < 0) throw ConstructionError("cc1", "g is unbounded along u; use the infinite-G regime");
  const Real sup = g_at(ctx, 1);  // g(u_n) is non-increasing in n
  const Rational two_mu = 2 * cube_measure(ctx.root);
  return [sup, two_mu](long bits) {
    Enclosure s = sup(bits);
    return Enclosure(max(s.lo, two_mu), max(s.hi, two_mu));
  };
}

// Sum over eta with R_eta < u_{n-1} of (phi(R_eta)/R_eta)^delta (base-power, d = 1).
std::optional<Real> c2_tail(const CantorContext& ctx, long n) {
  const auto pp = power_law(ctx.phi);
  if (!pp || !is_base_power_1d(ctx.sys)) return std::nullopt;
  const long d = ctx.params.delta();
  const Rational b(ctx.sys.base);
  long K = exponents(ctx.sys, ctx.seq, n).lo;
  const Rational e = 1 + d * (1 - pp->exponent);
  if (e >= 0) return std::nullopt;
  const Rational Cd = pow(pp->coef, d);
  Rational head = 0;
  if (K == 0) {
    head = 2 * Cd;  // the two points of E_0
    K = 1;
  }
  return [=](long bits) {
    const Enclosure bKe = pow(b, Rational(K) * e, bits);
    const Enclosure be = pow(b, e, bits);
    const Enclosure one(Rational(1));
    return Enclosure(head) + scale(bKe / (one - be), (b - 1) / b * Cd);
  };
}

// Conditions fixing n_l. Appends rows when `rec` records.
void level_conditions(const CantorTree& tree, long l, long n, const std::vector<ParentClass>& classes,
                      Recorder& rec) {
  const CantorContext& ctx = tree.ctx;
  const ConstructionParams& P = ctx.params;
  const long d = P.delta();
  const Rational& a = P.space.a_lower;
  const Rational& bm = P.space.b_upper;
  const Rational cl = ConstructionParams::c(l);
  const long kmax = P.regime == Regime::finite_g ? ctx.k_cap : 0;
  const Rational three_d = pow(Rational(3), d);

  for (long j = n - 1; j <= n + kmax; ++j) {
    const Rational u = ctx.seq.at(j);
    rec.check("cc2", l, j - n, ctx.phi.at(u), ctx.rho.at(u), Rel::lt);
    if (rec.stop()) return;
  }
  for (const auto& c : classes) {
    rec.check("eq1", l, 0, mul(ctx.rho.at(ctx.seq.at(n - 1)), Rational(50)), constant(c.r / 2),
              Rel::lt);
    if (rec.stop()) return;
    const Real count = mul(power(mul(ctx.rho.at(ctx.seq.at(n)), Rational(1 / c.r)), -d), P.a1);
    rec.check("num1-min", l, 0, count, constant(Rational(1)), Rel::ge);
    if (rec.stop()) return;
  }
  {
    const Rational u = ctx.seq.at(n - 1);
    const auto pp = power_law(ctx.phi);
    const bool ratio_monotone = pp && pp->exponent >= 1;
    rec.push(make_row("c1-monotone", l, 0, pp ? format_value(pp->exponent) : "n/a", "1", ">=",
                      ratio_monotone));
    if (rec.stop()) return;
    rec.check("c1", l, 0, ctx.phi.at(u), constant(P.space.r0), Rel::lt);
    if (rec.stop()) return;
    rec.check("c1", l, 0, ctx.phi.at(u),
              constant(P.c_tilde * ctx.sys.separation_c * (1 - cl) / 4 * u), Rel::lt);
    if (rec.stop()) return;
    const Rational rhs = P.kappa / 4 * pow(Rational(a / bm), 5) *
                         pow(Rational(P.c_tilde * P.lambda1 * ctx.sys.separation_c *
                                      ctx.sys.separation_c * (1 - cl) / 1000000),
                             d);
    if (auto tail = c2_tail(ctx, n)) {
      rec.check("c2", l, 0, *tail, constant(rhs), Rel::lt);
    } else {
      rec.push(make_row("c2", l, 0, "unavailable", format_value(rhs), "<", false));
    }
    if (rec.stop()) return;
  }

  const Real gn = g_at(ctx, n);
  const Real s_factor = power(Rational(8 / (1 - cl)), P.s);
  if (P.regime == Regime::finite_g) {
    const Real G = g_star(ctx);
    const Real node_pow = power(Rational((1 - cl) / 8 * exact_at(ctx.phi, ctx.seq.at(n), "phi")),
                                P.s - d);
    if (l == 1) {
      const Rational mu0 = cube_measure(ctx.root);
      rec.check("eta", l, 0, G, constant(P.eta), Rel::lt);
      if (rec.stop()) return;
      rec.check("cc1", l, 0, gn, G, Rel::le);
      if (rec.stop()) return;
      rec.check("cc1", l, 0, G,
                mul(s_factor, a / (three_d * 8 * bm) * P.eta / (P.alpha * mu0)), Rel::lt);
      if (rec.stop()) return;
      rec.check("cc3", l, 0, node_pow, constant(three_d * P.eta / (P.alpha * mu0)), Rel::gt);
      if (rec.stop()) return;
    } else {
      for (const auto& c : classes) {
        const Real rs_over_mu = mul(power(c.r, P.s), Rational(1 / c.mu));
        rec.check("2cc3", l, 0, node_pow, mul(rs_over_mu, three_d / P.alpha), Rel::gt);
        if (rec.stop()) return;
        rec.check("f4", l, 0, gn, G, Rel::lt);
        if (rec.stop()) return;
        rec.check("f4", l, 0, G,
                  mul(mul(rs_over_mu, s_factor), a / (three_d * 8 * bm) / P.alpha), Rel::lt);
        if (rec.stop()) return;
      }
    }
  } else {
    const Rational r0d = pow(ctx.root.radius, d);
    if (l == 1) {
      rec.check("neq1", l, 0, mul(s_factor, P.eta * 2 / (P.a1 * r0d)), gn, Rel::le);
    } else {
      Rational prod = P.eta / r0d * pow(Rational(2 / P.a1), l);
      for (long i = 1; i < l; ++i) {
        const long ni = tree.levels.at(i - 1).n;
        const Rational ratio = exact_at(ctx.rho, ctx.seq.at(ni), "rho") /
                               exact_at(ctx.phi, ctx.seq.at(ni), "phi");
        prod *= pow(Rational(8 / (1 - ConstructionParams::c(i)) * ratio), d);
      }
      rec.check("neq2", l, 0, mul(s_factor, prod), gn, Rel::le);
    }
  }
}

// Prefactor of the partial sums fixing k_l for one parent class.
Real k_prefactor(const CantorContext& ctx, long l, const ParentClass& c) {
  const ConstructionParams& P = ctx.params;
  const long d = P.delta();
  const Rational cl = ConstructionParams::c(l);
  const Rational base = pow(Rational(3), d) * 2 * P.space.b_upper / P.space.a_lower * P.alpha;
  const Real sf = power(Rational((1 - cl) / 8), P.s);
  if (l == 1) return mul(sf, base * cube_measure(ctx.root) / P.eta);
  return mul(mul(sf, power(c.r, -P.s)), base * c.mu);
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// Distinct uniform indices in [0, n), sorted.
std::vector<Integer> sample_indices(const Integer& n, std::size_t want, std::uint64_t seed) {
  std::vector<Integer> out;
  if (n <= Integer(static_cast<unsigned long>(want))) {
    for (Integer j = 0; j < n; ++j) out.push_back(j);
    return out;
  }
  gmp_randclass rng(gmp_randinit_lc_2exp_size, 128);
  rng.seed(static_cast<unsigned long>(seed));
  std::set<Integer> picked;
  while (picked.size() < want) picked.insert(rng.get_z_range(n));
  out.assign(picked.begin(), picked.end());
  return out;
}

// Index arithmetic of one (parent, sublevel) family: C is spread evenly over
// Q = Qbar \ Bad, C index j -> Q index floor(j #Q / #C) -> Qbar index.
struct FamilyPlan {
  long sublevel = 0;
  long layer = 0;
  CandidateSet qbar;
  std::vector<Integer> bad;
  Integer nq;
  Integer nc;
  Rational radius;
  Rational rho;
  Rational phi;
  std::optional<Real> h;
  Enclosure h_enc;
};

Integer qbar_index(const FamilyPlan& f, const Integer& j) {
  const Integer q = floor(Rational(Rational(j) * f.nq / f.nc));
  Integer t = q;
  for (;;) {
    const auto below = std::upper_bound(f.bad.begin(), f.bad.end(), t) - f.bad.begin();
    const Integer next = q + Integer(static_cast<long>(below));
    if (next == t) return t;
    t = next;
  }
}

std::optional<Integer> c_index(const FamilyPlan& f, const Integer& t) {
  if (std::binary_search(f.bad.begin(), f.bad.end(), t)) return std::nullopt;
  const auto below = std::lower_bound(f.bad.begin(), f.bad.end(), t) - f.bad.begin();
  const Integer q = t - Integer(static_cast<long>(below));
  const Integer j = ceil(Rational(Rational(q) * f.nc / f.nq));
  if (j < f.nc && floor(Rational(Rational(j) * f.nq / f.nc)) == q) return j;
  return std::nullopt;
}

struct Member {
  Point x;
  Anchor anchor;
};

class ParentBuilder {
 public:
  ParentBuilder(const CantorTree& tree, long l, std::size_t parent, long n, long k)
      : tree_(tree), ctx_(tree.ctx), l_(l), parent_(parent), n_(n), k_(k),
        cl_(ConstructionParams::c(l)) {}

  void run();

  std::vector<Family> families;
  std::vector<std::vector<CantorNode>> nodes;  // per family
  std::vector<AuditRow> rows;

 private:
  Member member(std::size_t i, const Integer& j) {
    const FamilyPlan& f = plans_[i];
    const Anchor a = f.qbar.at(qbar_index(f, j));
    auto it = phi_cache_.find(a.R);
    if (it == phi_cache_.end()) it = phi_cache_.emplace(a.R, exact_at(ctx_.phi, a.R, "phi")).first;
    return {center_in_annulus(a.xi, it->second, f.phi, cl_), a};
  }
  bool in_u(std::size_t i, const Integer& j);
  FamilyPlan plan(long i);
  void materialize(std::size_t i);

  const CantorTree& tree_;
  const CantorContext& ctx_;
  long l_;
  std::size_t parent_;
  long n_;
  long k_;
  std::vector<FamilyPlan> plans_;
  Rational cl_;
  std::map<std::pair<std::size_t, Integer>, bool> u_memo_;
  std::map<Rational, Rational> phi_cache_;
};

FamilyPlan ParentBuilder::plan(long i) {
  const CantorNode& par = tree_.nodes[parent_];
  const long m = n_ + i;
  const long d = ctx_.params.delta();
  const RowLabel label{l_, i};
  FamilyPlan f;
  f.sublevel = i;
  f.layer = m;
  f.rho = exact_at(ctx_.rho, ctx_.seq.at(m), "rho");
  f.phi = exact_at(ctx_.phi, ctx_.seq.at(m), "phi");
  f.radius = (1 - ConstructionParams::c(l_)) / 8 * f.phi;
  if (l_ == 1) {
    SelectionResult r = lemma1_select(par.ball, m, ctx_, label, l_);
    rows.insert(rows.end(), r.audit.begin(), r.audit.end());
    f.qbar = std::move(r.qbar);
  } else {
    PruneResult r = lemma2_prune(par.ball, par.anchor, l_ - 1, par.layer, m, ctx_, label, l_);
    rows.insert(rows.end(), r.audit.begin(), r.audit.end());
    f.qbar = std::move(r.base.qbar);
    f.bad = std::move(r.bad);
  }
  f.nq = f.qbar.size() - Integer(static_cast<unsigned long>(f.bad.size()));
  const Rational ratio = par.ball.radius / f.rho;
  const Rational upper = ctx_.params.a1 * pow(ratio, d);
  f.nc = floor(upper);
  const bool sandwich = upper / 2 <= Rational(f.nc) && Rational(f.nc) <= upper;
  rows.push_back(make_row("num1", l_, i, format_value(f.nc), format_value(upper),
                          "in [rhs/2, rhs]", sandwich));
  rows.push_back(make_row("qcount", l_, i, format_value(f.nq), format_value(f.nc), ">=",
                          f.nq >= f.nc));
  if (!sandwich || f.nc < 1)
    throw ConstructionError("num1", "#C = " + format_value(f.nc) + " outside [" +
                                        format_value(Rational(upper / 2)) + ", " +
                                        format_value(upper) + "]");
  if (f.nq < f.nc)
    throw ConstructionError("num1", "#Q = " + format_value(f.nq) + " below #C = " +
                                        format_value(f.nc));
  if (ctx_.params.regime == Regime::finite_g && i < k_) {
    // thickening h = (alpha mu(B) / r(B)^s * r_node^s)^(1/delta), mu(B0)/eta at level 1
    const ConstructionParams& P = ctx_.params;
    const Real pre = l_ == 1 ? constant(P.alpha * cube_measure(ctx_.root) / P.eta)
                             : mul(power(par.ball.radius, -P.s), P.alpha * cube_measure(par.ball));
    const Real h = power(mul(pre, power(f.radius, P.s)), Rational(1, d));
    f.h = h;
    f.h_enc = h(256);
    const bool lo_ok = holds(constant(3 * f.radius), h, Rel::le);
    const bool hi_ok = holds(h, constant(f.rho), Rel::le);
    rows.push_back(make_row("thick", l_, i, show(h), format_value(Rational(3 * f.radius)), ">=",
                            lo_ok));
    rows.push_back(make_row("thick", l_, i, show(h), format_value(f.rho), "<=", hi_ok));
    if (!lo_ok || !hi_ok) throw ConstructionError("thick", "thickening outside [3r, rho]");
  }
  return f;
}

bool ParentBuilder::in_u(std::size_t i, const Integer& j) {
  if (i == 0) return false;
  const auto key = std::make_pair(i, j);
  if (auto it = u_memo_.find(key); it != u_memo_.end()) return it->second;
  const Member y = member(i, j);
  const Rational three_rho = 3 * plans_[i].rho;
  bool hit = false;
  for (std::size_t e = 0; e < i && !hit; ++e) {
    const FamilyPlan& f = plans_[e];
    // centres sit within phi(u_layer) of their anchor
    const Rational w = three_rho + f.h_enc.hi + f.phi;
    auto [tb, te] = f.qbar.open_range(y.x[0] - w, y.x[0] + w);
    for (Integer t = tb; t < te && !hit; ++t) {
      const auto jc = c_index(f, t);
      if (!jc || in_u(e, *jc)) continue;
      const Member x = member(e, *jc);
      const Rational dist = sup_distance(y.x, x.x);
      if (dist < three_rho + f.h_enc.lo) {
        hit = true;
      } else if (dist < three_rho + f.h_enc.hi) {
        hit = holds(constant(dist), add(constant(three_rho), *f.h), Rel::lt);
      }
    }
  }
  u_memo_[key] = hit;
  return hit;
}

void ParentBuilder::materialize(std::size_t i) {
  const FamilyPlan& f = plans_[i];
  const std::uint64_t base_seed = mix(mix(mix(ctx_.seed, static_cast<std::uint64_t>(l_)),
                                          static_cast<std::uint64_t>(parent_)),
                                      static_cast<std::uint64_t>(i));
  Family fam;
  fam.parent = parent_;
  fam.level = l_;
  fam.sublevel = f.sublevel;
  fam.layer = f.layer;
  fam.radius = f.radius;
  if (f.h) fam.thickening = f.h_enc;
  fam.qbar = f.qbar.size();
  fam.bad = static_cast<unsigned long>(f.bad.size());
  fam.c = f.nc;

  // #U: exhaustive when small, otherwise a seeded probe
  bool sampled = false;
  if (i == 0) {
    fam.u = 0;
  } else if (f.nc <= Integer(static_cast<unsigned long>(ctx_.exhaustive_limit))) {
    Integer u = 0;
    for (Integer j = 0; j < f.nc; ++j)
      if (in_u(i, j)) ++u;
    fam.u = Rational(u);
  } else {
    const auto probe = sample_indices(f.nc, ctx_.exhaustive_limit, mix(base_seed, 0x55));
    Integer hits = 0;
    for (const auto& j : probe)
      if (in_u(i, j)) ++hits;
    fam.u = Rational(hits) * Rational(f.nc) / Rational(static_cast<unsigned long>(probe.size()));
    fam.u_exact = false;
    sampled = true;
  }
  fam.g = Rational(f.nc) - fam.u;
  rows.push_back(make_row("set3-U", l_, f.sublevel, format_value(fam.u),
                          format_value(Rational(Rational(f.nc) / 2)), "<",
                          fam.u < Rational(f.nc) / 2, sampled));
  if (!(fam.u < Rational(f.nc) / 2))
    throw ConstructionError("set3-U", "#U = " + format_value(fam.u) + " not below #C/2");

  // population
  std::vector<CantorNode> out;
  auto draw = sample_indices(f.nc, ctx_.population_cap, mix(base_seed, 0xA7));
  std::set<Integer> seen(draw.begin(), draw.end());
  const CantorNode& par = tree_.nodes[parent_];
  std::size_t inl_bad = 0;
  std::size_t nest_bad = 0;
  std::size_t p4_bad = 0;
  std::size_t p4_candidates = 0;
  const Rational cl = ConstructionParams::c(l_);
  gmp_randclass rng(gmp_randinit_lc_2exp_size, 128);
  rng.seed(static_cast<unsigned long>(mix(base_seed, 0x3C)));
  for (std::size_t pos = 0; pos < draw.size(); ++pos) {
    const Integer j = draw[pos];
    const Member mbr = member(i, j);
    if (in_u(i, j)) {
      fam.pruned.push_back({mbr.x, PruneRecord::Reason::u});
      // keep drawing until the population holds a G member
      if (out.empty() && pos + 1 == draw.size() && seen.size() < ctx_.exhaustive_limit &&
          Integer(static_cast<unsigned long>(seen.size())) < f.nc) {
        Integer extra;
        do extra = rng.get_z_range(f.nc);
        while (seen.count(extra));
        seen.insert(extra);
        draw.push_back(extra);
      }
      continue;
    }
    CantorNode node;
    node.level = l_;
    node.sublevel = f.sublevel;
    node.layer = f.layer;
    node.ball = Ball(mbr.x, f.radius);
    node.anchor = mbr.anchor;
    node.parent = parent_;
    const Rational phi_g = exact_at(ctx_.phi, mbr.anchor.R, "phi");
    if (!(contains(Annulus(mbr.anchor.xi, cl * phi_g, f.phi), node.ball) && f.phi <= phi_g))
      ++inl_bad;
    if (!contains(par.ball, node.ball)) ++nest_bad;
    if (l_ >= 2) {
      // property (4) re-checked independently on the materialised anchor
      const Rational c_prev = ConstructionParams::c(l_ - 1);
      std::optional<Hit> hit;
      if (is_base_power_1d(ctx_.sys)) {
        const long kg = exponent_of(mbr.anchor, ctx_.sys.base);
        hit = interference_base_power(ctx_, mbr.anchor.xi[0], phi_g, c_prev,
                                      exponents(ctx_.sys, ctx_.seq, par.layer).lo,
                                      exponents(ctx_.sys, ctx_.seq, f.layer).hi,
                                      mbr.anchor.xi[0], kg, Rational(0), true, p4_candidates);
      } else {
        hit = interference_explicit(ctx_, mbr.anchor.xi, phi_g, c_prev, par.layer, f.layer,
                                    mbr.anchor.xi, p4_candidates);
      }
      if (hit) ++p4_bad;
    }
    out.push_back(std::move(node));
  }
  if (out.empty()) throw ConstructionError("num3", "no G member found among sampled C indices");
  const bool pop_sampled = Rational(static_cast<unsigned long>(out.size())) != fam.g;
  const Rational weight = fam.g / Rational(static_cast<unsigned long>(out.size()));
  for (auto& node : out) node.weight = weight;
  for (std::size_t b = 0; b < f.bad.size() && b < 64; ++b)
    fam.pruned.push_back({f.qbar.at(f.bad[b]).xi, PruneRecord::Reason::bad});

  rows.push_back(make_row("num3", l_, f.sublevel, format_value(fam.g),
                          format_value(Rational(Rational(f.nc) / 2)), ">=",
                          fam.g >= Rational(f.nc) / 2, sampled));
  rows.push_back(make_row("cc2", l_, f.sublevel, format_value(f.phi), format_value(f.rho), "<",
                          f.phi < f.rho));
  rows.push_back(make_row("inl", l_, f.sublevel, std::to_string(inl_bad), "0", "=",
                          inl_bad == 0, pop_sampled));
  rows.push_back(make_row("nest", l_, f.sublevel, std::to_string(nest_bad), "0", "=",
                          nest_bad == 0, pop_sampled));
  if (l_ >= 2)
    rows.push_back(make_row("lem2-p4", l_, f.sublevel, std::to_string(p4_bad), "0", "=",
                            p4_bad == 0, pop_sampled));
  if (inl_bad || nest_bad || p4_bad)
    throw ConstructionError(inl_bad ? "inl" : nest_bad ? "nest" : "lem2-p4",
                            "node containment failed on a materialised node");
  families.push_back(std::move(fam));
  nodes.push_back(std::move(out));
}

void ParentBuilder::run() {
  for (long i = 0; i <= k_; ++i) {
    plans_.push_back(plan(i));
    materialize(plans_.size() - 1);
  }
}

}  // namespace

void build_level(CantorTree& tree, long l) {
  if (l != tree.depth() + 1) throw DomainError("levels are built in order");
  const CantorContext& ctx = tree.ctx;
  const std::vector<std::size_t> parents = tree.nodes_at(l - 1);
  if (parents.empty()) throw ConstructionError("level", "empty previous level");

  std::map<std::pair<Rational, Rational>, std::size_t> index;
  std::vector<ParentClass> classes;
  long min_n = 1;
  for (std::size_t p : parents) {
    const CantorNode& node = tree.nodes[p];
    min_n = std::max(min_n, node.layer + 1);
    const auto key = std::make_pair(node.ball.radius, cube_measure(node.ball));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, classes.size()).first;
      classes.push_back({key.first, key.second, {}});
    }
    classes[it->second].members.push_back(p);
  }

  long n = min_n;
  std::string last_failure;
  for (;; ++n) {
    if (n > ctx.n_max)
      throw ConstructionError("level", "no n in [" + std::to_string(min_n) + ", " +
                                           std::to_string(ctx.n_max) +
                                           "] satisfies the level conditions (last failing: " +
                                           last_failure + ")");
    Recorder probe(nullptr);
    level_conditions(tree, l, n, classes, probe);
    if (probe.ok()) break;
    last_failure = probe.first_failure();
  }
  std::vector<AuditRow> level_rows;
  Recorder rec(&level_rows);
  level_conditions(tree, l, n, classes, rec);

  LevelRecord record;
  record.level = l;
  record.n = n;
  std::vector<long> class_k(classes.size(), 0);
  if (ctx.params.regime == Regime::finite_g) {
    const std::string low_tag = l == 1 ? "cc4" : "f3";
    const std::string high_tag = l == 1 ? "cc5" : "newcc5";
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const Real pre = k_prefactor(ctx, l, classes[c]);
      Real sum = constant(Rational(0));
      std::vector<Real> partial;
      for (long j = 0; j <= ctx.k_cap; ++j) {
        sum = add(sum, g_at(ctx, n + j));
        partial.push_back(mul(pre, sum));
      }
      long k = ctx.k_cap;
      bool closed = false;
      for (long j = 0; j <= ctx.k_cap; ++j)
        if (holds(partial[j], constant(Rational(1, 4)), Rel::ge)) {
          k = j;
          closed = true;
          break;
        }
      if (k >= 1)
        rec.check(low_tag, l, 0, partial[k - 1], constant(Rational(1, 4)), Rel::lt);
      AuditRow high = make_row(high_tag, l, 0, show(partial[k]), "1/4", ">=", closed);
      if (!closed) {
        high.status = AuditRow::Status::open;
        record.capped = true;
      }
      rec.push(high);
      rec.push(make_row("k", l, 0, std::to_string(k), "1", ">=", k >= 1));
      if (k < 1) throw ConstructionError(low_tag, "k_l = 0: the bracket closes at sublevel 0");
      class_k[c] = k;
    }
  }
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (std::size_t p : classes[c].members) record.k[p] = class_k[c];

  // per-parent work is independent
  std::vector<ParentBuilder> builders;
  builders.reserve(parents.size());
  for (std::size_t p : parents) builders.emplace_back(tree, l, p, n, record.k[p]);
  std::vector<std::exception_ptr> errors(parents.size());
  const long count = static_cast<long>(parents.size());
#pragma omp parallel for schedule(dynamic) if (ctx.exec == Exec::parallel)
  for (long i = 0; i < count; ++i) {
    try {
      builders[static_cast<std::size_t>(i)].run();
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  tree.audit.insert(tree.audit.end(), level_rows.begin(), level_rows.end());
  for (auto& b : builders) {
    tree.audit.insert(tree.audit.end(), b.rows.begin(), b.rows.end());
    for (std::size_t f = 0; f < b.families.size(); ++f) {
      Family fam = std::move(b.families[f]);
      const std::size_t fid = tree.families.size();
      for (auto& node : b.nodes[f]) {
        node.id = tree.nodes.size();
        node.family = fid;
        fam.nodes.push_back(node.id);
        tree.nodes.push_back(std::move(node));
      }
      tree.families.push_back(std::move(fam));
    }
  }
  tree.levels.push_back(std::move(record));
}

CantorTree build_tree(const CantorContext& ctx, long depth) {
  CantorTree t = start_tree(ctx);
  for (long l = 1; l <= depth; ++l) build_level(t, l);
  return t;
}

// ------------------------------------------------------------------- audits

SeparationAudit check_separation(const CantorTree& tree, long l) {
  SeparationAudit out;
  if (l < 1 || l > tree.depth()) throw DomainError("level not built");
  const long nl = tree.levels[l - 1].n;
  const CantorContext& ctx = tree.ctx;
  std::map<std::size_t, std::vector<std::size_t>> by_parent;
  for (const auto& node : tree.nodes)
    if (node.level == l) by_parent[*node.parent].push_back(node.id);
  std::map<long, Rational> rho;
  auto rho_at = [&](long i) -> const Rational& {
    auto it = rho.find(i);
    if (it == rho.end()) it = rho.emplace(i, exact_at(ctx.rho, ctx.seq.at(nl + i), "rho")).first;
    return it->second;
  };
  for (auto& [parent, ids] : by_parent) {
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
      return tree.nodes[a].ball.center < tree.nodes[b].ball.center;
    });
    Rational max_bound = 0;
    Rational max_radius = 0;
    for (std::size_t id : ids) {
      const CantorNode& n = tree.nodes[id];
      max_bound = max(max_bound, Rational(4 * rho_at(n.sublevel)));
      max_radius = max(max_radius, n.ball.radius);
    }
    const std::size_t m = ids.size();
    out.pairs += m * (m - 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
      const CantorNode& a = tree.nodes[ids[i]];
      for (std::size_t j = i + 1; j < m; ++j) {
        const CantorNode& b = tree.nodes[ids[j]];
        // sorted by first coordinate: later balls are farther along e_1
        if (ctx.sys.d == 1 && b.ball.center[0] - a.ball.center[0] >= max_bound + 2 * max_radius)
          break;
        const long hi = std::max(a.sublevel, b.sublevel);
        Rational bound = 2 * rho_at(hi);
        if (a.sublevel == b.sublevel) bound = 4 * rho_at(a.sublevel);
        if (gap(a.ball, b.ball) < bound) {
          out.pass = false;
          if (!out.violation) out.violation = std::make_pair(a.id, b.id);
        }
      }
    }
  }
  return out;
}

WitnessAudit check_exactness(const CantorTree& tree, long l) {
  WitnessAudit out;
  if (l < 1 || l > tree.depth()) throw DomainError("level not built");
  const CantorContext& ctx = tree.ctx;
  const Rational c_prev = ConstructionParams::c(l - 1);
  for (const auto& node : tree.nodes) {
    if (node.level != l) continue;
    ++out.nodes;
    const CantorNode& par = tree.nodes[*node.parent];
    if (l == 1) continue;  // c_0 = 0: every forbidden ball is empty
    std::optional<Hit> hit;
    if (is_base_power_1d(ctx.sys)) {
      const Rational slack = abs(Rational(node.ball.center[0] - node.anchor.xi[0]));
      hit = interference_base_power(ctx, node.ball.center[0], node.ball.radius, c_prev,
                                    exponents(ctx.sys, ctx.seq, par.layer).lo,
                                    exponents(ctx.sys, ctx.seq, node.layer).hi,
                                    node.anchor.xi[0], exponent_of(node.anchor, ctx.sys.base),
                                    slack, false, out.candidates);
    } else {
      hit = interference_explicit(ctx, node.ball.center, node.ball.radius, c_prev, par.layer,
                                  node.layer, std::nullopt, out.candidates);
    }
    if (hit) {
      out.pass = false;
      if (!out.violating_node) {
        out.violating_node = node.id;
        out.eta = hit->eta;
      }
    }
  }
  return out;
}

}  // namespace dioph
