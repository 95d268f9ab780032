#include "dioph/contfrac.hpp"

#include <algorithm>
#include <cctype>

namespace dioph {

namespace {

Enclosure abs_enclosure(const Enclosure& e) {
  if (e.lo >= 0) return e;
  if (e.hi <= 0) return Enclosure(Rational(-e.hi), Rational(-e.lo));
  return Enclosure(Rational(0), max(Rational(-e.lo), e.hi));
}

Integer isqrt(const Integer& z) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
  return r;
}

// Certified a < b; nullopt when the enclosures never separate.
std::optional<bool> strictly_less(const Real& a, const Real& b) {
  auto o = try_compare(a, b, 4096);
  if (!o) return std::nullopt;
  return *o == Ordering::less;
}

}  // namespace

Target Target::rational(const Rational& x) {
  Target t;
  t.source = Source::exact_rational;
  t.value = constant(x);
  t.text = dioph::to_string(x);
  return t;
}

Target Target::decimal(std::string_view literal) {
  const auto dot = literal.find('.');
  if (dot == std::string_view::npos) return rational(parse_rational(literal));
  const long digits = static_cast<long>(literal.size() - dot - 1);
  const Rational d = parse_rational(literal);
  const Rational r = pow(Rational(10), -digits);
  Target t;
  t.source = Source::decimal_literal;
  const Enclosure e(Rational(d - r), Rational(d + r));
  t.value = [e](long) { return e; };
  t.text = std::string(literal);
  return t;
}

Target Target::surd(const Integer& a, const Integer& b, const Integer& D, const Integer& c) {
  if (D < 0) throw DomainError("surd radicand must be non-negative");
  if (c == 0) throw DomainError("surd denominator is zero");
  Target t;
  t.source = Source::quadratic_surd;
  t.value = [a, b, D, c](long bits) {
    Integer scaled = D;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(2 * bits));
    const Integer s = isqrt(scaled);
    Integer unit;
    mpz_setbit(unit.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    Enclosure root = s * s == scaled ? Enclosure(make_rational(s, unit))
                                     : Enclosure(make_rational(s, unit), make_rational(s + 1, unit));
    Enclosure num = Enclosure(Rational(a)) + scale(root, Rational(b));
    return scale(num, make_rational(Integer(1), c));
  };
  t.text = "(" + dioph::to_string(a) + "+" + dioph::to_string(b) + "*sqrt(" + dioph::to_string(D) +
           "))/" + dioph::to_string(c);
  return t;
}

Target Target::parse(std::string_view text) {
  if (text.rfind("surd:", 0) == 0) {
    std::vector<Integer> parts;
    std::string_view rest = text.substr(5);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string piece(rest.substr(0, comma));
      Integer z;
      if (piece.empty() || z.set_str(piece, 10) != 0) throw DomainError("bad surd literal");
      parts.push_back(z);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (parts.size() != 4) throw DomainError("surd literal needs a,b,D,c");
    Target t = surd(parts[0], parts[1], parts[2], parts[3]);
    t.text = std::string(text);
    return t;
  }
  if (text.find('.') != std::string_view::npos) return decimal(text);
  return rational(parse_rational(text));
}

std::string ContinuedFraction::to_string() const {
  std::string s = "[" + dioph::to_string(a0);
  for (std::size_t i = 0; i < quotients.size(); ++i)
    s += (i == 0 ? "; " : ", ") + dioph::to_string(quotients[i]);
  return s + "]";
}

ContinuedFraction expand(const Enclosure& x, long depth) {
  if (depth < 1) throw DomainError("depth must be at least 1");
  ContinuedFraction cf;
  Rational lo = x.lo, hi = x.hi;
  Integer a = floor(lo);
  cf.a0 = a;
  if (floor(hi) != a) {
    cf.truncated = true;
    return cf;
  }
  while (true) {
    lo -= a;
    hi -= a;
    if (hi == 0) {
      cf.complete = true;
      break;
    }
    if (lo == 0) {
      cf.truncated = true;
      break;
    }
    if (static_cast<long>(cf.quotients.size()) == depth) break;
    Rational nlo = 1 / hi, nhi = 1 / lo;
    lo = nlo;
    hi = nhi;
    a = floor(lo);
    if (floor(hi) != a) {
      cf.truncated = true;
      break;
    }
    cf.quotients.push_back(a);
  }
  return cf;
}

ContinuedFraction expand(const Rational& x, long depth) { return expand(Enclosure(x), depth); }

ContinuedFraction expand(const Target& x, long depth) {
  ContinuedFraction cf;
  std::optional<Enclosure> previous;
  for (long bits = 64; bits <= 65536; bits *= 2) {
    Enclosure e = x.value(bits);
    cf = expand(e, depth);
    if (cf.complete || static_cast<long>(cf.quotients.size()) == depth) {
      cf.truncated = false;
      return cf;
    }
    if (e.exact() || (previous && previous->lo == e.lo && previous->hi == e.hi)) return cf;
    previous = e;
  }
  return cf;
}

std::vector<Convergent> convergents(const ContinuedFraction& cf) {
  std::vector<Convergent> out;
  Integer p2 = 0, q2 = 1, p1 = 1, q1 = 0;  // p_{n-2}, q_{n-2}, p_{n-1}, q_{n-1}
  auto push = [&](const Integer& a) {
    Integer p = a * p1 + p2, q = a * q1 + q2;
    out.push_back({p, q});
    p2 = p1;
    q2 = q1;
    p1 = p;
    q1 = q;
  };
  push(cf.a0);
  for (const auto& a : cf.quotients) push(a);
  return out;
}

std::vector<Convergent> best_approximations(const ContinuedFraction& cf, const Integer& q_max) {
  std::vector<Convergent> out;
  const auto conv = convergents(cf);
  if (conv.empty()) return out;
  out.push_back(conv[0]);
  Integer p2 = 1, q2 = 0;
  for (std::size_t n = 1; n < conv.size(); ++n) {
    const Integer& p1 = conv[n - 1].p;
    const Integer& q1 = conv[n - 1].q;
    if (n >= 2) {
      p2 = conv[n - 2].p;
      q2 = conv[n - 2].q;
    }
    const Integer& a = cf.quotients[n - 1];
    for (Integer k = 1; k <= a; ++k) {
      Integer q = k * q1 + q2;
      if (q > q_max) return out;
      out.push_back({k * p1 + p2, q});
    }
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::consistent_with_exact:
      return "consistent-with-exact";
    case Verdict::inconsistent:
      return "inconsistent";
    case Verdict::undecided:
      return "undecided";
  }
  return "undecided";
}

MembershipVerdict classify(const Target& x, const ApproxFunction& psi, long q_max,
                           const std::vector<Rational>& epsilons) {
  if (q_max < 1) throw DomainError("q_max must be at least 1");
  if (!psi.non_increasing()) throw DomainError("psi must be non-increasing");
  for (const auto& e : epsilons)
    if (!(0 < e && e < 1)) throw DomainError("epsilon must lie in (0,1)");
  const Enclosure x0 = x.value(256);
  if (x0.hi < 0 || x0.lo > 1) throw DomainError("x must lie in [0,1]");

  MembershipVerdict v;
  v.q_max = q_max;
  v.cutoff = isqrt(Integer(q_max)).get_si();
  for (const auto& e : epsilons) v.epsilon_report.push_back({e});

  for (long qi = 1; qi <= q_max; ++qi) {
    const Integer q(qi);
    const Rational qr(q);
    const Enclosure ps = psi.eval(qr, 128);
    const Integer p_lo = floor(Rational(qr * x0.lo - qr * ps.hi));
    const Integer p_hi = ceil(Rational(qr * x0.hi + qr * ps.hi));
    const Real psi_q = psi.at(qr);
    for (Integer p = p_lo; p <= p_hi; ++p) {
      Integer g;
      mpz_gcd(g.get_mpz_t(), p.get_mpz_t(), q.get_mpz_t());
      if (g != 1) continue;
      const Rational frac = make_rational(p, q);
      Real gap = [&x, frac](long bits) {
        return abs_enclosure(x.value(bits) - Enclosure(frac));
      };
      auto hit = strictly_less(gap, psi_q);
      if (!hit) {
        ++v.undecided;
        continue;
      }
      if (!*hit) continue;
      v.hits.push_back({p, q, gap(256)});
      if (2 * qi > q_max) ++v.top_range_hits;
      for (auto& row : v.epsilon_report) {
        const Rational factor = 1 - row.epsilon;
        Real shrunk = [psi_q, factor](long bits) { return scale(psi_q(bits), factor); };
        auto h = strictly_less(gap, shrunk);
        if (!h) {
          ++row.undecided;
          continue;
        }
        if (*h) {
          ++row.hits;
          if (qi > v.cutoff) ++row.hits_beyond_cutoff;
        }
      }
    }
  }

  v.cf = expand(x, 256);
  v.best = best_approximations(v.cf, Integer(q_max));

  long eps_undecided = 0;
  bool eps_clean = true;
  for (const auto& row : v.epsilon_report) {
    eps_undecided += row.undecided;
    if (row.hits_beyond_cutoff > 0) eps_clean = false;
  }
  if (v.undecided > 0 || eps_undecided > 0)
    v.verdict = Verdict::undecided;
  else if (v.top_range_hits > 0 && eps_clean)
    v.verdict = Verdict::consistent_with_exact;
  else
    v.verdict = Verdict::inconsistent;
  return v;
}

std::vector<MembershipVerdict> classify_batch(const std::vector<Target>& xs,
                                              const ApproxFunction& psi, long q_max,
                                              const std::vector<Rational>& epsilons, Exec exec) {
  std::vector<MembershipVerdict> out(xs.size());
  const long n = static_cast<long>(xs.size());
  if (exec == Exec::serial) {
    for (long i = 0; i < n; ++i) out[i] = classify(xs[i], psi, q_max, epsilons);
    return out;
  }
  std::vector<std::string> errors(xs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = classify(xs[i], psi, q_max, epsilons);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw DomainError(e);
  return out;
}

}  // namespace dioph
