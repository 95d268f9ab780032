#include "dioph/massdist.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace dioph {

namespace {

constexpr long kBits = 512;

std::vector<std::vector<std::size_t>> child_lists(const CantorTree& tree) {
  std::vector<std::vector<std::size_t>> out(tree.nodes.size());
  for (const auto& n : tree.nodes)
    if (n.parent) out[*n.parent].push_back(n.id);
  return out;
}

// sum_i w_i r_i^s with the radii grouped; exact when every r_i^s is rational.
Real weighted_power_sum(std::map<Rational, Rational> weight_by_radius, const Rational& s) {
  return [groups = std::move(weight_by_radius), s](long bits) {
    Enclosure sum(Rational(0));
    for (const auto& [r, w] : groups) sum = sum + scale(pow(r, s, bits), w);
    return sum;
  };
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

double log2_of(const Enclosure& e) {
  if (e.hi <= 0) return -std::numeric_limits<double>::infinity();
  return approx_log2(e.hi);
}

}  // namespace

// ------------------------------------------------------------------- mass

Enclosure MassAssignment::total(const CantorTree& tree, std::size_t id) const {
  return scale(nu.at(id), tree.nodes.at(id).weight);
}

MassAssignment assign_mass(const CantorTree& tree, const Rational& s, const Rational& eta,
                           long bits) {
  if (tree.depth() < 1) throw DomainError("mass assignment needs at least one level");
  if (!(s > 0)) throw DomainError("s must be positive");
  MassAssignment m;
  m.s = s;
  m.eta = eta;
  m.regime = tree.ctx.params.regime;
  m.nu.assign(tree.nodes.size(), Enclosure(Rational(0)));
  m.nu[0] = Enclosure(Rational(1));
  const auto children = child_lists(tree);
  std::map<Rational, Enclosure> ratio_pow;

  for (const auto& parent : tree.nodes) {
    const auto& kids = children[parent.id];
    if (kids.empty()) continue;
    const Enclosure& np = m.nu[parent.id];
    if (m.regime == Regime::infinite_g) {
      Rational count = 0;
      for (auto c : kids) count += tree.nodes[c].weight;
      for (auto c : kids) m.nu[c] = scale(np, 1 / count);
    } else {
      // nu(B) / nu(parent) = (r_B / r_ref)^s / sum_{B'} w' (r_B' / r_ref)^s
      const Rational& r_ref = tree.nodes[kids.front()].ball.radius;
      auto factor = [&](std::size_t c) -> const Enclosure& {
        const Rational q = tree.nodes[c].ball.radius / r_ref;
        auto it = ratio_pow.find(q);
        if (it == ratio_pow.end()) it = ratio_pow.emplace(q, pow(q, s, bits)).first;
        return it->second;
      };
      Enclosure sum(Rational(0));
      for (auto c : kids) sum = sum + scale(factor(c), tree.nodes[c].weight);
      for (auto c : kids) m.nu[c] = np * (factor(c) / sum);
    }
    Enclosure back(Rational(0));
    for (auto c : kids) {
      back = back + m.total(tree, c);
      if (!m.nu[c].exact()) m.exact = false;
    }
    const bool ok = m.exact ? back.lo == np.lo && back.hi == np.hi
                            : back.lo <= np.hi && np.lo <= back.hi;
    if (!ok && m.conserved) {
      m.conserved = false;
      m.conservation_failure = parent.id;
    }
  }
  return m;
}

// ------------------------------------------------------------- node bound

NodeBoundCertificate verify_node_bound(const MassAssignment& mass, const CantorTree& tree) {
  if (mass.nu.size() != tree.nodes.size()) throw DomainError("assignment does not match tree");
  NodeBoundCertificate cert;
  const Rational& s = mass.s;
  const Rational& eta = mass.eta;
  const auto children = child_lists(tree);

  for (long l = 1; l <= tree.depth(); ++l) {
    std::size_t violations = 0;
    std::optional<std::size_t> worst;
    double worst_log = -std::numeric_limits<double>::infinity();
    for (auto id : tree.nodes_at(l)) {
      const CantorNode& node = tree.nodes[id];
      const Enclosure nu = mass.nu[id];
      const Real rhs = [r = node.ball.radius, s, eta](long bits) {
        return scale(pow(r, s, bits), 1 / eta);
      };
      ++cert.nodes_checked;
      const auto ord = try_compare(constant(nu.hi), rhs);
      const bool ok = ord && *ord != Ordering::greater;
      const double lg = approx_log2(nu.hi) + approx_log2(eta) - to_double(s) * approx_log2(node.ball.radius);
      if (!ok) {
        ++violations;
        if (cert.node_bound) {
          cert.node_bound = false;
          cert.violating_node = id;
          cert.lhs = format_value(nu);
          cert.rhs = format_value(rhs(256));
        }
      }
      if (lg > worst_log) {
        worst_log = lg;
        worst = id;
      }
    }
    if (worst) {
      const CantorNode& node = tree.nodes[*worst];
      const Enclosure rhs = scale(pow(node.ball.radius, s, 256), 1 / eta);
      cert.audit.push_back(make_row("ele", l, 0, format_value(mass.nu[*worst]), format_value(rhs),
                                    "<=", violations == 0));
    }
  }

  // level sums
  std::map<Rational, Rational> level1;
  for (auto id : tree.nodes_at(1)) level1[tree.nodes[id].ball.radius] += tree.nodes[id].weight;
  if (!level1.empty()) {
    const Real sum = weighted_power_sum(level1, s);
    const auto ord = try_compare(sum, constant(eta));
    const bool ok = ord && *ord != Ordering::less;
    cert.audit.push_back(make_row("lem44", 1, 0, format_value(sum(256)), format_value(eta), ">=", ok));
    cert.level_sums = cert.level_sums && ok;
  }
  for (long l = 2; l <= tree.depth(); ++l) {
    for (auto p : tree.nodes_at(l - 1)) {
      std::map<Rational, Rational> groups;
      for (auto c : children[p]) groups[tree.nodes[c].ball.radius] += tree.nodes[c].weight;
      if (groups.empty()) continue;
      const Real sum = weighted_power_sum(groups, s);
      const Real rhs = [r = tree.nodes[p].ball.radius, s](long bits) { return pow(r, s, bits); };
      const auto ord = try_compare(sum, rhs);
      const bool ok = ord && *ord != Ordering::less;
      cert.audit.push_back(
          make_row("lem44", l, 0, format_value(sum(256)), format_value(rhs(256)), ">=", ok));
      cert.level_sums = cert.level_sums && ok;
    }
  }
  cert.pass = cert.node_bound && cert.level_sums;
  return cert;
}

// ----------------------------------------------------------- general balls

namespace {

Enclosure ball_mass_with(const MassAssignment& mass, const CantorTree& tree,
                         const std::vector<std::vector<std::size_t>>& children, const Ball& A) {
  Enclosure total(Rational(0));
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const Ball& b = tree.nodes[id].ball;
    if (!intersects(A, b)) continue;
    if (contains(A, b) || children[id].empty()) {
      total = total + mass.total(tree, id);
      continue;
    }
    for (auto c : children[id]) stack.push_back(c);
  }
  return total;
}

}  // namespace

Enclosure ball_mass(const MassAssignment& mass, const CantorTree& tree, const Ball& A) {
  return ball_mass_with(mass, tree, child_lists(tree), A);
}

HolderReport verify_holder_general(const MassAssignment& mass, const CantorTree& tree,
                                   std::size_t samples, std::uint64_t seed, Exec exec) {
  if (tree.depth() < 2) throw DomainError("general-ball sampling needs depth >= 2");
  const auto deepest = tree.nodes_at(tree.depth());
  if (deepest.empty()) throw DomainError("deepest level is empty");
  long finest_layer = 0;
  for (auto id : deepest) finest_layer = std::max(finest_layer, tree.nodes[id].layer);
  const CantorContext& ctx = tree.ctx;
  const double lo = approx_log2(*ctx.rho.exact(ctx.seq.at(finest_layer)));
  const double hi = approx_log2(ctx.root.radius);
  const double log_eta = approx_log2(mass.eta);
  const double s = to_double(mass.s);
  const auto children = child_lists(tree);

  HolderReport rep;
  rep.samples = samples;
  rep.seed = seed;
  rep.draws.resize(samples);
  for (const auto& f : tree.families)
    if (f.sampled() || !f.u_exact) rep.sampled_tree = true;

  auto draw = [&](std::size_t i) {
    std::mt19937_64 rng(mix(seed, i));
    const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, deepest.size() - 1)(rng);
    const double x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double e = lo + x * (hi - lo);
    // r = m 2^(E - 30) with m in [2^30, 2^31)
    const double E = std::floor(e);
    const long mant = std::llround(std::exp2(e - E) * 1073741824.0);
    Rational r{Integer(mant)};
    const long shift = static_cast<long>(E) - 30;
    if (shift >= 0)
      r *= Rational(pow(Integer(2), static_cast<unsigned long>(shift)));
    else
      r /= Rational(pow(Integer(2), static_cast<unsigned long>(-shift)));
    HolderSample out;
    out.center = tree.nodes[deepest[pick]].ball.center;
    out.radius = r;
    out.nu = ball_mass_with(mass, tree, children, Ball(out.center, r));
    out.log2_ratio = log2_of(out.nu) + log_eta - s * approx_log2(r);
    rep.draws[i] = std::move(out);
  };

  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < samples; ++i) draw(i);
  } else {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(samples); ++i) {
      try {
        draw(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  }

  rep.max_log2_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    const auto& d = rep.draws[i];
    if (d.nu.hi <= 0) ++rep.empty;
    if (d.log2_ratio > rep.max_log2_ratio) {
      rep.max_log2_ratio = d.log2_ratio;
      rep.argmax = i;
    }
  }
  rep.finite = std::isfinite(rep.max_log2_ratio);
  return rep;
}

// ------------------------------------------------------------ box counting

BoxCountingResult box_counting(const std::vector<Ball>& balls, const std::vector<long>& exponents) {
  if (exponents.size() < 3) throw DomainError("insufficient scales");
  if (balls.empty()) throw DomainError("no balls to count");
  const unsigned d = balls.front().dim();
  BoxCountingResult res;
  for (long k : exponents) {
    if (k < 0) throw DomainError("box exponents must be non-negative");
    const Integer side = pow(Integer(2), static_cast<unsigned long>(k));
    // box j meets the open interval (a, b) iff j <= ceil(b 2^k) - 1 and j >= floor(a 2^k)
    auto range = [&](const Rational& a, const Rational& b) {
      Integer lo = floor(Rational(a * side));
      Integer hi = ceil(Rational(b * side)) - 1;
      if (lo < 0) lo = 0;
      if (hi > side - 1) hi = side - 1;
      return std::make_pair(lo, hi);
    };
    Integer count = 0;
    if (d == 1) {
      std::vector<std::pair<Integer, Integer>> iv;
      for (const auto& b : balls) {
        auto r = range(b.center[0] - b.radius, b.center[0] + b.radius);
        if (r.first <= r.second) iv.push_back(r);
      }
      std::sort(iv.begin(), iv.end());
      Integer cur_lo = -1, cur_hi = -2;
      for (const auto& [a, b] : iv) {
        if (a > cur_hi + 1) {
          if (cur_hi >= cur_lo) count += cur_hi - cur_lo + 1;
          cur_lo = a;
          cur_hi = b;
        } else if (b > cur_hi) {
          cur_hi = b;
        }
      }
      if (cur_hi >= cur_lo) count += cur_hi - cur_lo + 1;
    } else {
      std::set<std::vector<Integer>> boxes;
      for (const auto& b : balls) {
        std::vector<std::pair<Integer, Integer>> r;
        Integer cells = 1;
        for (unsigned i = 0; i < d; ++i) {
          r.push_back(range(b.center[i] - b.radius, b.center[i] + b.radius));
          cells *= r.back().second - r.back().first + 1;
        }
        if (cells > 10'000'000) throw DomainError("box enumeration exceeds the guard");
        std::vector<Integer> idx(d);
        for (unsigned i = 0; i < d; ++i) idx[i] = r[i].first;
        for (;;) {
          boxes.insert(idx);
          unsigned i = 0;
          for (; i < d; ++i) {
            if (idx[i] < r[i].second) {
              ++idx[i];
              break;
            }
            idx[i] = r[i].first;
          }
          if (i == d) break;
        }
      }
      count = static_cast<unsigned long>(boxes.size());
    }
    res.counts.push_back({k, count});
  }
  // least squares of log2 N on k
  const double n = static_cast<double>(res.counts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& c : res.counts) {
    const double x = static_cast<double>(c.exponent);
    const double y = c.count > 0 ? approx_log2(Rational(c.count)) : 0.0;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0) throw DomainError("insufficient scales");
  res.slope = (n * sxy - sx * sy) / den;
  res.intercept = (sy - res.slope * sx) / n;
  double ss = 0;
  for (const auto& c : res.counts) {
    const double y = c.count > 0 ? approx_log2(Rational(c.count)) : 0.0;
    const double e = y - (res.intercept + res.slope * static_cast<double>(c.exponent));
    ss += e * e;
  }
  res.residual = std::sqrt(ss / n);
  return res;
}

BoxCountingResult box_counting(const CantorTree& tree, long level,
                               const std::vector<long>& exponents) {
  if (level < 0 || level > tree.depth()) throw DomainError("level not built");
  std::vector<Ball> balls;
  for (auto id : tree.nodes_at(level)) balls.push_back(tree.nodes[id].ball);
  return box_counting(balls, exponents);
}

// ----------------------------------------------------------------- series

std::string to_string(SeriesSum::Verdict v) {
  switch (v) {
    case SeriesSum::Verdict::convergent:
      return "convergent";
    case SeriesSum::Verdict::divergent:
      return "divergent";
    case SeriesSum::Verdict::undecided:
      return "undecided";
  }
  return "?";
}

std::string to_string(GRegime r) {
  switch (r) {
    case GRegime::zero_divergent:
      return "G=0-divergent";
    case GRegime::finite_positive:
      return "0<G<inf";
    case GRegime::infinite:
      return "G=inf";
    case GRegime::convergent:
      return "convergent-g";
    case GRegime::undecided:
      return "undecided";
  }
  return "?";
}

SeriesSum power_series(const std::string& name, const Rational& coef, const Rational& beta,
                       long N, long bits) {
  if (N < 1) throw DomainError("series needs N >= 1");
  if (coef < 0) throw DomainError("series coefficient must be non-negative");
  SeriesSum out;
  out.name = name;
  Enclosure sum(Rational(0));
  for (long q = 1; q <= N; ++q) {
    sum = sum + scale(pow(Rational(q), beta, bits), coef);
    out.partial.push_back(sum);
  }
  if (coef == 0) {
    out.verdict = SeriesSum::Verdict::convergent;
    out.tail = Enclosure(Rational(0));
  } else if (beta >= -1) {
    out.verdict = SeriesSum::Verdict::divergent;
  } else {
    // int_{N+1}^inf <= tail <= int_N^inf, int_x^inf q^beta dq = x^(beta+1) / (-beta-1)
    const Rational k = coef / (-beta - 1);
    const Enclosure lower = scale(pow(Rational(N + 1), beta + 1, bits), k);
    const Enclosure upper = scale(pow(Rational(N), beta + 1, bits), k);
    out.tail = Enclosure(lower.lo, upper.hi);
    out.verdict = SeriesSum::Verdict::convergent;
  }
  return out;
}

namespace {

struct GaugeShape {
  Rational coef;
  Rational exponent;
  Rational log_exponent;
};

std::optional<GaugeShape> shape(const ApproxFunction& f) {
  if (f.kind() == ApproxFunction::Kind::power) return GaugeShape{f.coef(), f.exponent(), 0};
  if (f.kind() == ApproxFunction::Kind::power_log)
    return GaugeShape{f.coef(), f.exponent(), f.log_exponent()};
  return std::nullopt;
}

// Reduced points of [0,1]^d with denominator exactly q: sum_{e | q} mu(e) (q/e + 1)^d.
Integer reduced_count(long q, unsigned d) {
  std::vector<long> primes;
  long m = q;
  for (long p = 2; p * p <= m; ++p)
    if (m % p == 0) {
      primes.push_back(p);
      while (m % p == 0) m /= p;
    }
  if (m > 1) primes.push_back(m);
  Integer total = 0;
  for (unsigned long mask = 0; mask < (1UL << primes.size()); ++mask) {
    long e = 1;
    int bits = 0;
    for (std::size_t i = 0; i < primes.size(); ++i)
      if ((mask >> i) & 1) {
        e *= primes[i];
        ++bits;
      }
    const Integer term = pow(Integer(q / e + 1), d);
    total += bits % 2 ? Integer(-term) : term;
  }
  return total;
}

constexpr long kDenominatorBudget = 200'000;

}  // namespace

SeriesReport series_diagnostics(const ApproxFunction& phi, const ApproxFunction& rho,
                                const std::optional<ApproxFunction>& psi, const ApproxSystem& sys,
                                const ScaleSequence& seq, const Rational& s,
                                const Rational& delta, long N) {
  if (N < 10) throw DomainError("series diagnostics need N >= 10");
  if (!(s > 0) || !(delta > 0)) throw DomainError("s and delta must be positive");
  SeriesReport rep;

  // sum g(u_n)
  rep.g.name = "g";
  Enclosure sum(Rational(0));
  std::vector<Enclosure> gs;
  for (long n = 1; n <= N; ++n) {
    gs.push_back(g_real(phi, rho, s, delta, seq.at(n))(kBits));
    sum = sum + gs.back();
    rep.g.partial.push_back(sum);
  }
  std::size_t best = static_cast<std::size_t>(N / 2 - 1);
  for (std::size_t i = best; i < gs.size(); ++i)
    if (gs[i].mid() > gs[best].mid()) best = i;
  rep.g_estimate = gs[best];

  const auto sp = shape(phi);
  const auto sr = shape(rho);
  if (sp && sr) {
    const Rational e = sp->exponent * s - sr->exponent * delta;
    const Rational beta = sp->log_exponent * s - sr->log_exponent * delta;
    if (e > 0) {
      rep.regime = GRegime::convergent;
    } else if (e < 0) {
      rep.regime = GRegime::infinite;
    } else if (beta > 0) {
      rep.regime = GRegime::infinite;
    } else if (beta == 0) {
      rep.regime = GRegime::finite_positive;
    } else {
      rep.regime = beta >= -1 ? GRegime::zero_divergent : GRegime::convergent;
    }
    rep.g.verdict = rep.regime == GRegime::convergent ? SeriesSum::Verdict::convergent
                                                      : SeriesSum::Verdict::divergent;
    if (e > 0 && beta == 0) {
      // geometric: g(u_{n+1}) = g(u_n) t^(stride e)
      const Enclosure q = pow(seq.t, Rational(seq.stride) * e, kBits);
      rep.g.tail = gs.back() * q / (Enclosure(Rational(1)) - q);
    }
  }

  // sum over xi of (phi(R) / R)^delta, by layer
  rep.eta_weight.name = "eta-weight";
  Enclosure esum(Rational(0));
  long budget = kDenominatorBudget;
  bool truncated = false;
  for (long n = 1; n <= N && !truncated; ++n) {
    const DenominatorRange range = layer_range(sys, seq, n);
    Enclosure layer(Rational(0));
    for (Integer k = range.lo; k <= range.hi; ++k) {
      if (--budget < 0) {
        truncated = true;
        break;
      }
      Integer count;
      Rational R;
      if (sys.kind == ApproxSystem::Kind::base_power) {
        const Integer bk = pow(sys.base, k.get_ui());
        R = make_rational(Integer(1), bk);
        count = k == 0 ? pow(Integer(2), sys.d)
                       : Integer(pow(Integer(bk + 1), sys.d) - pow(Integer(bk / sys.base + 1), sys.d));
      } else {
        R = make_rational(Integer(1), Integer(k * k));
        count = reduced_count(k.get_si(), sys.d);
      }
      const Enclosure term = pow(scale(phi.eval(R, kBits), 1 / R), delta, kBits);
      layer = layer + scale(term, Rational(count));
    }
    if (truncated) break;
    esum = esum + layer;
    rep.eta_weight.partial.push_back(esum);
  }
  if (sp && sp->log_exponent == 0 && delta.get_den() == 1) {
    if (sys.kind == ApproxSystem::Kind::base_power && sys.d == 1) {
      // (b - 1) b^(k-1) points at weight b^-k: summand ~ b^(k (1 + delta (1 - gamma)))
      const Rational x = 1 + delta * (1 - sp->exponent);
      rep.eta_weight.verdict =
          x < 0 ? SeriesSum::Verdict::convergent : SeriesSum::Verdict::divergent;
    } else if (sys.kind == ApproxSystem::Kind::rationals) {
      // about q^d points at weight q^-2: summand ~ q^(d + 2 delta (1 - gamma))
      const Rational x = Rational(sys.d) + 2 * delta * (1 - sp->exponent);
      rep.eta_weight.verdict =
          x < -1 ? SeriesSum::Verdict::convergent : SeriesSum::Verdict::divergent;
    }
  }

  if (psi) {
    const auto ps = shape(*psi);
    if (ps && ps->log_exponent == 0) {
      const Rational d(sys.d);
      // C^x q^(a + gamma x)
      const Enclosure cs = pow(ps->coef, s, kBits);
      if (cs.exact()) {
        rep.psi_s = power_series("q^d psi^s", cs.lo, d + ps->exponent * s, N);
      } else {
        SeriesSum lo = power_series("q^d psi^s", cs.lo, d + ps->exponent * s, N);
        SeriesSum hi = power_series("q^d psi^s", cs.hi, d + ps->exponent * s, N);
        for (std::size_t i = 0; i < lo.partial.size(); ++i)
          lo.partial[i] = Enclosure(lo.partial[i].lo, hi.partial[i].hi);
        if (lo.tail && hi.tail) lo.tail = Enclosure(lo.tail->lo, hi.tail->hi);
        rep.psi_s = lo;
      }
      const Rational cd = pow(ps->coef, sys.d);
      rep.psi_cube = power_series("q^3d psi^d", cd, 3 * d + ps->exponent * d, N);
      rep.simultaneous_hypothesis = rep.psi_cube->verdict == SeriesSum::Verdict::convergent;
      if (sys.kind == ApproxSystem::Kind::base_power) {
        // b^(2n) C b^(n gamma) = C (b^(2 + gamma))^n
        SeriesSum bs;
        bs.name = "b^2n psi(b^n)";
        const Rational b(sys.base);
        const Enclosure ratio = pow(b, 2 + ps->exponent, kBits);
        Enclosure acc(Rational(0));
        Enclosure term = scale(ratio, ps->coef);
        for (long n = 1; n <= N; ++n) {
          acc = acc + term;
          bs.partial.push_back(acc);
          term = term * ratio;
        }
        if (2 + ps->exponent < 0) {
          bs.verdict = SeriesSum::Verdict::convergent;
          bs.tail = term / (Enclosure(Rational(1)) - ratio);
        } else {
          bs.verdict = SeriesSum::Verdict::divergent;
        }
        rep.base_power_hypothesis = bs.verdict == SeriesSum::Verdict::convergent;
        rep.psi_base = std::move(bs);
      }
    } else {
      // partial sums only
      SeriesSum a;
      a.name = "q^d psi^s";
      SeriesSum c;
      c.name = "q^3d psi^d";
      Enclosure sa(Rational(0)), sc(Rational(0));
      for (long q = 1; q <= N; ++q) {
        const Enclosure v = psi->eval(Rational(q), kBits);
        const Rational qd = pow(Rational(q), sys.d);
        sa = sa + scale(pow(v, s, kBits), qd);
        sc = sc + scale(pow(v, Rational(sys.d), kBits), qd * qd * qd);
        a.partial.push_back(sa);
        c.partial.push_back(sc);
      }
      rep.psi_s = a;
      rep.psi_cube = c;
    }
  }
  return rep;
}

}  // namespace dioph
