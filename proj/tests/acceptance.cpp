// Acceptance run: one line per criterion. Exit status 0 iff the set of
// failing criteria equals the --expect-fail list (default: empty).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dioph/cantor.hpp"
#include "dioph/contfrac.hpp"
#include "dioph/massdist.hpp"
#include "dioph/systems.hpp"
#include "dioph/ubiquity.hpp"
#include "runner.hpp"

using namespace dioph;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

PreparedContext spec_context(const Rational& s) {
  const auto sys = ApproxSystem::base_power(2);
  return prepare_context(sys, sys.default_scale(), ApproxFunction::power(q(1), q(3)),
                         sys.default_rho(), RegularSpaceParams::lebesgue(1), q(1), s, q(1),
                         Regime::finite_g, Ball(q(1, 2), q(1, 8)));
}

const CantorTree& tree_s_half() {
  static const CantorTree t = build_tree(spec_context(q(1, 2)).ctx, 2);
  return t;
}

Rational rho_at(const CantorContext& ctx, long n) { return *ctx.rho.exact(ctx.seq.at(n)); }

// Union of [c - r, c + r] clipped to the window, by sorting and merging.
Rational union_length(std::vector<std::pair<Rational, Rational>> iv, const Rational& lo,
                      const Rational& hi) {
  std::sort(iv.begin(), iv.end());
  Rational total(0), cur_lo(0), cur_hi(0);
  bool open = false;
  for (auto [a, b] : iv) {
    a = max(a, lo);
    b = min(b, hi);
    if (b <= a) continue;
    if (open && a <= cur_hi) {
      cur_hi = max(cur_hi, b);
      continue;
    }
    if (open) total += cur_hi - cur_lo;
    cur_lo = a;
    cur_hi = b;
    open = true;
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

Outcome c1_base_power_ubiquity() {
  const auto sys = ApproxSystem::base_power(2);
  const Ball B(q(1, 2), q(1, 4));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), sys.default_scale(), B, 2, 12, q(1));
  bool pass = rep.rows.size() == 11;
  std::string bad;
  for (const auto& row : rep.rows) {
    // oracle: layer n is {p / 2^n, p odd}; thicken by rho(u_{n-1}) = 2^-(n-1)
    const Rational r = pow(q(2), -(row.n - 1));
    std::vector<std::pair<Rational, Rational>> iv;
    const long den = 1L << row.n;
    for (long p = 1; p < den; p += 2) iv.emplace_back(q(p, den) - r, q(p, den) + r);
    Rational oracle = union_length(iv, q(1, 4), q(3, 4)) / q(1, 2);
    if (row.method != "exact" || row.ratio != 1 || oracle != 1) {
      pass = false;
      bad += " n=" + std::to_string(row.n);
    }
  }
  return {pass, "ratio = 1 exactly on n = 2..12, merged-interval oracle agrees" +
                    (bad.empty() ? std::string() : "; mismatch at" + bad)};
}

Outcome c2_rationals_ubiquity() {
  const Rational r(1, 8);
  auto t = auto_select_t(1, r, 1, 0);
  if (!t) return {false, "no admissible t"};
  auto n0 = first_valid_layer(1, *t, r);
  if (!n0) return {false, "no valid layer"};
  const auto sys = ApproxSystem::rationals(1, q(1, 2));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), ScaleSequence(*t), Ball(q(1, 2), r),
                                   *n0, *n0 + 5, q(1, 2));
  bool pass = rep.rows.size() == 6;
  Rational worst(1);
  std::set<std::string> methods;
  for (const auto& row : rep.rows) {
    pass = pass && row.ratio >= q(1, 2);
    worst = min(worst, row.ratio);
    methods.insert(row.method);
  }
  std::string m;
  for (const auto& s : methods) m += (m.empty() ? "" : "+") + s;
  return {pass, "t = " + to_string(*t) + ", n = " + std::to_string(*n0) + ".." +
                    std::to_string(*n0 + 5) + ", min ratio " + fmt(to_double(worst)) + " (" + m +
                    ")"};
}

Outcome c3_minkowski() {
  std::mt19937_64 rng(2024);
  long violations = 0, mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const unsigned d = 1 + static_cast<unsigned>(rng() % 2);
    const long qq = 1 + static_cast<long>(rng() % 50);
    Point center;
    for (unsigned i = 0; i < d; ++i) center.push_back(q(static_cast<long>(rng() % 1001), 1000));
    const Rational r = q(1 + static_cast<long>(rng() % 300), 1000);
    auto m = minkowski_count_bound(qq, Ball(center, r), d);
    // oracle: scan p in [-q, q]^d, |p_i/q - c_i| < r + 1/q
    long per_axis[2] = {0, 0};
    for (unsigned i = 0; i < d; ++i) {
      for (long p = -qq; p <= qq; ++p) {
        if (abs(Rational(q(p, qq) - center[i])) < r + q(1, qq)) ++per_axis[i];
      }
    }
    long count = d == 1 ? per_axis[0] : per_axis[0] * per_axis[1];
    if (m.count != count) ++mismatches;
    if (!(Rational(count) <= pow(Rational(2 * r * qq + 3), static_cast<long>(d)))) ++violations;
    if (!m.ok) ++violations;
  }
  return {violations == 0 && mismatches == 0,
          "200 trials, " + std::to_string(violations) + " violations, " +
              std::to_string(mismatches) + " count mismatches against a grid scan"};
}

Outcome c4_counting_sandwich() {
  const auto& t = tree_s_half();
  const auto& ctx = t.ctx;
  long families = 0, bad = 0;
  for (const auto& f : t.families) {
    ++families;
    const Rational base = t.nodes[f.parent].ball.radius / rho_at(ctx, f.layer);
    const Rational upper = ctx.params.a1 * base;  // delta = 1
    if (!(upper / 2 <= Rational(f.c) && Rational(f.c) <= upper)) ++bad;
  }
  long k_rows = 0, k_bad = 0, low_rows = 0, low_bad = 0, open_rows = 0;
  for (const auto& r : t.audit) {
    if (r.tag == "k") {
      ++k_rows;
      if (!r.passed()) ++k_bad;
    } else if (r.tag == "cc4" || r.tag == "f3") {
      ++low_rows;
      if (!r.passed()) ++low_bad;
    } else if (r.tag == "cc5" || r.tag == "newcc5") {
      if (r.status == AuditRow::Status::open) ++open_rows;
    }
  }
  bool levels_ok = true;
  for (const auto& rec : t.levels) {
    for (const auto& [id, k] : rec.k) levels_ok = levels_ok && k >= 1;
  }
  const bool pass = bad == 0 && k_bad == 0 && low_bad == 0 && k_rows > 0 && low_rows > 0 &&
                    levels_ok && families > 0;
  return {pass, std::to_string(families) + " sublevels in the sandwich (" + std::to_string(bad) +
                    " outside), " + std::to_string(k_rows) + " k >= 1 rows, cc4/f3 lower side " +
                    std::to_string(low_rows - low_bad) + "/" + std::to_string(low_rows) +
                    "; cc5/newcc5 upper side open on " + std::to_string(open_rows) +
                    " rows (k capped, not counted)"};
}

Outcome c5_pruning_budgets() {
  const auto& t = tree_s_half();
  long bad_rows = 0, bad_fail = 0, u_rows = 0, u_fail = 0;
  for (const auto& r : t.audit) {
    if (r.tag == "lem2-bad") {
      ++bad_rows;
      if (!r.passed()) ++bad_fail;
    } else if (r.tag == "set3-U") {
      ++u_rows;
      if (!r.passed()) ++u_fail;
    }
  }
  // one set3-U row per constructed sublevel, one lem2-bad row per sublevel
  // from level 2 on (level 1 has no forbidden balls to prune against)
  const long families = static_cast<long>(t.families.size());
  const long pruned_families = static_cast<long>(
      std::count_if(t.families.begin(), t.families.end(), [](const Family& f) { return f.level >= 2; }));
  long u_oracle_fail = 0;
  for (const auto& f : t.families) {
    if (f.u_exact && !(Rational(f.u) < Rational(f.c) / 2)) ++u_oracle_fail;
    if (!(Rational(f.bad) * 4 < Rational(f.qbar))) ++u_oracle_fail;
  }
  const bool pass = bad_rows == pruned_families && pruned_families > 0 && u_rows == families && bad_fail == 0 && u_fail == 0 &&
                    u_oracle_fail == 0;
  return {pass, std::to_string(families) + " sublevels (" + std::to_string(pruned_families) +
                    " pruned); lem2-bad rows " +
                    std::to_string(bad_rows - bad_fail) + "/" + std::to_string(bad_rows) +
                    " pass, set3-U rows " + std::to_string(u_rows - u_fail) + "/" +
                    std::to_string(u_rows) + " pass, recount failures " +
                    std::to_string(u_oracle_fail)};
}

Rational ball_gap(const Ball& a, const Ball& b) {
  Rational m(0);
  for (std::size_t i = 0; i < a.dim(); ++i) m = max(m, abs(Rational(a.center[i] - b.center[i])));
  return m - a.radius - b.radius;
}

Outcome c6_separation() {
  const auto& t = tree_s_half();
  const auto& ctx = t.ctx;
  long pairs = 0, violations = 0;
  bool library = true;
  for (long l = 1; l <= t.depth(); ++l) {
    library = library && check_separation(t, l).pass;
    const auto ids = t.nodes_at(l);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto& a = t.nodes[ids[i]];
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const auto& b = t.nodes[ids[j]];
        ++pairs;
        const Rational g = ball_gap(a.ball, b.ball);
        Rational bound(0);
        if (a.parent == b.parent) {
          bound = a.sublevel == b.sublevel ? Rational(4 * rho_at(ctx, a.layer))
                                           : Rational(2 * rho_at(ctx, std::max(a.layer, b.layer)));
        }
        if (g < bound) ++violations;
      }
    }
  }
  return {violations == 0 && library,
          std::to_string(pairs) + " pairs scanned over " + std::to_string(t.depth()) +
              " levels, " + std::to_string(violations) + " violations"};
}

Outcome c7_exactness() {
  const auto& t = tree_s_half();
  const auto& ctx = t.ctx;
  bool library = true;
  for (long l = 1; l <= t.depth(); ++l) library = library && check_exactness(t, l).pass;
  long checked = 0, violations = 0;
  for (const auto& node : t.nodes) {
    if (node.level < 2) continue;  // c_0 = 0 leaves nothing to avoid at level 1
    const auto& par = t.nodes[*node.parent];
    const Rational c = ConstructionParams::c(node.level - 1);
    const Rational lo = ctx.seq.at(node.layer);
    const Rational hi = ctx.seq.at(par.layer - 1);
    const Rational x = node.ball.center[0];
    // every eta = p / 2^k with p odd and u_layer <= 2^-k < u_{parent layer - 1}
    for (long k = 1; k < 4000; ++k) {
      const Rational R = pow(q(2), -k);
      if (R >= hi) continue;
      if (R < lo) break;
      const Integer den = pow(Integer(2), static_cast<unsigned long>(k));
      Integer p = floor(Rational(x * den));
      if (p % 2 == 0) p -= 1;  // nearest odd numerators below and above x 2^k
      const Rational reach = c * *ctx.phi.exact(R) + node.ball.radius;
      for (Integer pp : {Integer(p), Integer(p + 2)}) {
        if (pp < 1 || pp >= den) continue;
        ++checked;
        if (abs(Rational(Rational(pp, den) - x)) < reach) ++violations;
      }
    }
  }
  return {violations == 0 && library,
          std::to_string(checked) + " nearest forbidden balls checked, " +
              std::to_string(violations) + " violations"};
}

Outcome c8_measure() {
  const auto& t = tree_s_half();
  const Rational s(1, 2), eta(1);
  auto mass = assign_mass(t, s, eta);
  // conservation recomputed: children totals sum to the parent's nu
  long cons_bad = 0;
  for (const auto& node : t.nodes) {
    auto kids = t.children(node.id);
    if (kids.empty()) continue;
    Rational sum(0);
    for (auto k : kids) sum += t.nodes[k].weight * mass.nu[k].lo;
    if (sum != mass.nu[node.id].lo) ++cons_bad;
  }
  // nu(B) <= r(B)^(1/2) / eta  <=>  nu^2 eta^2 <= r(B), exact
  long ele_bad = 0, nodes = 0;
  for (const auto& node : t.nodes) {
    if (node.level == 0) continue;
    ++nodes;
    const Rational v = mass.nu[node.id].hi;
    if (!(v * v * eta * eta <= node.ball.radius)) ++ele_bad;
  }
  // level-1 sum of weight r^(1/2) in log space (the margin is many orders)
  double log_sum = -INFINITY;
  for (auto id : t.nodes_at(1)) {
    const auto& n = t.nodes[id];
    double term = approx_log2(n.weight) + 0.5 * approx_log2(n.ball.radius);
    log_sum = std::max(log_sum, term) + std::log2(1 + std::exp2(-std::fabs(log_sum - term)));
  }
  auto cert = verify_node_bound(mass, t);
  auto inflated = mass;
  inflated.eta = pow(q(2), 200);
  const bool control_fails = !verify_node_bound(inflated, t).pass;
  const bool pass = mass.exact && mass.conserved && cons_bad == 0 && ele_bad == 0 &&
                    log_sum >= 0 && cert.pass && control_fails;
  return {pass, "conservation " + std::string(cons_bad == 0 && mass.conserved ? "exact" : "broken") +
                    ", node bound violated at " + std::to_string(ele_bad) + "/" +
                    std::to_string(nodes) + " nodes, level-1 sum of r^s = 2^" +
                    fmt(log_sum, "%.2f") + " vs eta = 1, inflated-eta control " +
                    (control_fails ? "fails" : "passes")};
}

Outcome c9_holder() {
  const auto& t = tree_s_half();
  auto mass = assign_mass(t, q(1, 2), q(1));
  auto a = verify_holder_general(mass, t, 1000, 1);
  auto b = verify_holder_general(mass, t, 1000, 2);
  const double diff = std::fabs(a.max_log2_ratio - b.max_log2_ratio);
  const bool pass = a.finite && b.finite && std::isfinite(a.max_log2_ratio) &&
                    std::isfinite(b.max_log2_ratio) && diff <= 1;
  return {pass, "max log2(nu(A) eta / r(A)^s) = " + fmt(a.max_log2_ratio, "%.2f") +
                    " (seed 1), " + fmt(b.max_log2_ratio, "%.2f") + " (seed 2), 1000 balls each"};
}

// sign of A + B sqrt(D), D >= 0
int surd_sign(const Rational& A, const Rational& B, const Integer& D) {
  const int sa = sgn(A), sb = D == 0 ? 0 : sgn(B);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  const int cmp = sgn(Rational(A * A - B * B * Rational(D)));
  return sa > 0 ? cmp : -cmp;
}

Outcome c10_classify() {
  const auto psi = ApproxFunction::power(q(1), q(-2));
  const long q_max = 200;
  std::mt19937_64 rng(10);
  struct Input {
    Target target;
    Rational a, b, c;
    Integer D;
  };
  std::vector<Input> inputs;
  for (int i = 0; i < 20; ++i) {
    const long den = 1 + static_cast<long>(rng() % 1000);
    const long num = static_cast<long>(rng() % static_cast<unsigned long>(den + 1));
    inputs.push_back({Target::rational(q(num, den)), q(num), q(0), q(den), Integer(0)});
  }
  const long surds[3][4] = {{-1, 1, 5, 2}, {-1, 1, 2, 1}, {-1, 1, 3, 2}};
  for (const auto& s : surds) {
    inputs.push_back({Target::surd(Integer(s[0]), Integer(s[1]), Integer(s[2]), Integer(s[3])),
                      q(s[0]), q(s[1]), q(s[3]), Integer(s[2])});
  }
  long mismatched = 0, total_hits = 0;
  for (const auto& in : inputs) {
    auto v = classify(in.target, psi, q_max, {});
    std::set<std::pair<long, long>> got, want;
    for (const auto& h : v.hits) got.emplace(h.p.get_si(), h.q.get_si());
    for (long qq = 1; qq <= q_max; ++qq) {
      const Rational eps = q(1, qq * qq);
      for (long p = 0; p <= qq; ++p) {
        if (std::gcd(p, qq) != 1) continue;
        // |x - p/q| < eps with x = (a + b sqrt(D)) / c
        const Rational A = in.a / in.c - q(p, qq);
        const Rational B = in.b / in.c;
        if (surd_sign(Rational(A - eps), B, in.D) < 0 && surd_sign(Rational(A + eps), B, in.D) > 0)
          want.emplace(p, qq);
      }
    }
    total_hits += static_cast<long>(want.size());
    if (got != want) ++mismatched;
  }
  // golden ratio (1 + sqrt 5) / 2
  auto cf = expand(Target::surd(Integer(1), Integer(1), Integer(5), Integer(2)), 30);
  bool ones = cf.a0 == 1 && cf.quotients.size() >= 30;
  for (std::size_t i = 0; i < 30 && i < cf.quotients.size(); ++i) ones = ones && cf.quotients[i] == 1;
  auto conv = convergents(cf);
  bool golden = false;
  std::string gap;
  if (conv.size() > 20) {
    const Rational p(conv[20].p), qq(conv[20].q);
    // q^2 |phi - p/q| = q |q (1 + sqrt5)/2 - p|, compared with 1/sqrt5 via enclosures
    const long bits = 256;
    const Enclosure r5 = pow(q(5), q(1, 2), bits);
    const Enclosure val = Enclosure(Rational(qq * qq / 2 - qq * p)) + scale(r5, Rational(qq * qq / 2));
    const Enclosure mag = val.lo < 0 ? scale(val, q(-1)) : val;
    const Enclosure inv = Enclosure(q(1)) / r5;
    const Enclosure diff = mag - inv;
    const Rational tol(1, 1000000);
    golden = diff.hi < tol && diff.lo > -tol;
    gap = fmt(std::fabs(to_double(diff.mid())), "%.2e");
  }
  return {mismatched == 0 && ones && golden,
          "23 inputs, " + std::to_string(total_hits) + " brute-force hits, " +
              std::to_string(mismatched) + " set mismatches; thirty 1s: " +
              (ones ? "yes" : "no") + "; |q_20^2 |x - p_20/q_20| - 1/sqrt5| = " + gap};
}

Outcome c11_series() {
  const Rational taus[] = {q(2), q(5, 2), q(3), q(4)};
  long points = 0, mismatched = 0, cross = 0;
  for (unsigned d = 1; d <= 2; ++d) {
    for (const auto& tau : taus) {
      for (const auto& s : {q(1, 4), q(1, 2), Rational(q(2) / tau), q(3, 4)}) {
        ++points;
        // sum q^d psi(q)^s = sum q^(d - tau s)
        const Rational beta = Rational(d) - tau * s;
        const bool rule_divergent = s <= Rational(d + 1) / tau;
        auto sum = power_series("psi_s", q(1), beta, 200);
        const bool certified = sum.verdict != SeriesSum::Verdict::undecided;
        if (!certified || (sum.verdict == SeriesSum::Verdict::divergent) != rule_divergent)
          ++mismatched;
        if (s < Rational(d) && s > 0) {
          const auto sys = ApproxSystem::rationals(d, q(1, 2));
          auto rep = series_diagnostics(ApproxFunction::power(q(1), q(3)), sys.default_rho(),
                                        ApproxFunction::power(q(1), Rational(-tau)), sys,
                                        ScaleSequence(q(1, 4)), s, Rational(d), 10);
          ++cross;
          if (!rep.psi_s || rep.psi_s->verdict != sum.verdict) ++mismatched;
        }
      }
    }
  }
  // d = 1 boundary s = 2/tau is the last divergent exponent
  bool boundary = true;
  for (const auto& tau : taus) {
    const Rational s = q(2) / tau;
    boundary = boundary &&
               power_series("b", q(1), Rational(1 - tau * s), 50).verdict ==
                   SeriesSum::Verdict::divergent &&
               power_series("b", q(1), Rational(1 - tau * (s + q(1, 1000))), 50).verdict ==
                   SeriesSum::Verdict::convergent;
  }
  return {mismatched == 0 && boundary,
          std::to_string(points) + " grid points (d = 1, 2), " + std::to_string(cross) +
              " cross-checked through series_diagnostics, " + std::to_string(mismatched) +
              " mismatches; boundary s = 2/tau " + (boundary ? "sharp" : "not sharp")};
}

Outcome c12_box_counting() {
  const Rational s(3, 5);
  std::vector<long> exps;
  for (long k = 6; k <= 14; ++k) exps.push_back(k);
  auto ctx = spec_context(s).ctx;
  CantorTree t = build_tree(ctx, 3);
  const double slope3 = box_counting(t, 3, exps).slope;
  const double slope2 = box_counting(t, 2, exps).slope;
  const bool in_band = slope3 >= 0.45 && slope3 <= 0.75;
  const bool trend = slope3 > slope2 && std::fabs(slope3 - 0.6) < std::fabs(slope2 - 0.6);
  return {in_band && trend, "slope over 2^-6..2^-14: " + fmt(slope2, "%.3f") + " at depth 2, " +
                                fmt(slope3, "%.3f") + " at depth 3 (band [0.45, 0.75], s = 0.6)"};
}

Outcome c13_determinism() {
  namespace fs = std::filesystem;
  const char* text = R"({
    "system": {"kind": "base-power", "b": 2},
    "functions": {"phi": {"kind": "power", "coef": "1", "exponent": "3"},
                  "psi": {"kind": "power", "coef": "1", "exponent": "-3"}},
    "params": {"s": "1/2", "depth": 2, "seed": 11},
    "classify": {"targets": ["2/7", "surd:-1,1,5,2"], "q_max": 100},
    "measure": {"holder_samples": 300},
    "output": {"formats": ["json", "csv", "svg"]}
  })";
  std::string blobs[2][2];
  int status[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = fs::temp_directory_path() / ("dioph_acceptance_" + std::to_string(run));
    fs::remove_all(dir);
    auto cfg = cli::parse_config(nlohmann::json::parse(text), std::nullopt, std::nullopt,
                                 dir.string());
    std::ostringstream log, err;
    status[run] = cli::run(cfg, "full-run", log, err, true);
    int k = 0;
    for (const char* f : {"report.json", "audit.csv"}) {
      std::ifstream is(dir / f, std::ios::binary);
      std::ostringstream os;
      os << is.rdbuf();
      blobs[run][k++] = os.str();
    }
  }
  const bool same = status[0] == status[1] && blobs[0][0] == blobs[1][0] &&
                    blobs[0][1] == blobs[1][1] && !blobs[0][0].empty() && !blobs[0][1].empty();
  return {same, "two full-run executions, seed 11: report.json " +
                    std::to_string(blobs[0][0].size()) + " bytes, audit.csv " +
                    std::to_string(blobs[0][1].size()) + " bytes, " +
                    (same ? "byte-identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_fail;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    const std::string key = "--expect-fail=";
    if (a.rfind(key, 0) == 0) {
      std::stringstream ss(a.substr(key.size()));
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) expected_fail.insert(std::stoi(item));
      }
    } else {
      std::cerr << "usage: acceptance [--expect-fail=i,j,...]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "base-power ubiquity exactness", 5, c1_base_power_ubiquity},
      {2, "rationals-1 ubiquity", 60, c2_rationals_ubiquity},
      {3, "Minkowski count bound", 0, c3_minkowski},
      {4, "counting sandwich", 0, c4_counting_sandwich},
      {5, "pruning budgets", 0, c5_pruning_budgets},
      {6, "separation", 0, c6_separation},
      {7, "exactness witness", 0, c7_exactness},
      {8, "measure certificates", 0, c8_measure},
      {9, "general-ball Holder sampling", 0, c9_holder},
      {10, "continued-fraction oracle equivalence", 0, c10_classify},
      {11, "series regime oracle", 0, c11_series},
      {12, "box-counting proxy", 300, c12_box_counting},
      {13, "determinism", 0, c13_determinism},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; runtime limit " + fmt(c.limit_seconds, "%.0f") + " s exceeded";
    }
    if (!o.pass) failed.insert(c.id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name
              << "): " << o.detail << " [" << fmt(secs, "%.2f") << " s]" << std::endl;
  }
  std::cout << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass";
  if (!expected_fail.empty()) {
    std::cout << "; documented as unattainable:";
    for (int i : expected_fail) std::cout << ' ' << i;
  }
  std::cout << std::endl;
  if (failed != expected_fail) {
    std::cout << "failing set differs from the documented set" << std::endl;
    return 1;
  }
  return 0;
}
