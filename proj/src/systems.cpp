#include "dioph/systems.hpp"

#include <algorithm>
#include <numeric>

namespace dioph {

namespace {

Integer isqrt(const Integer& z) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
  return r;
}

Integer gcd(const Integer& a, const Integer& b) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

// Integers p with |p/q - c| < w + e, clamped to [0, q].
std::pair<Integer, Integer> numerator_range(const Integer& q, const Rational& c,
                                            const Rational& reach) {
  const Rational qr(q);
  Integer lo = floor(Rational(qr * (c - reach))) + 1;
  Integer hi = ceil(Rational(qr * (c + reach))) - 1;
  if (lo < 0) lo = 0;
  if (hi > q) hi = q;
  return {lo, hi};
}

struct Collector {
  LayerEnumeration& out;
  std::size_t cap;
  void add(Point xi, const Rational& R, const Integer& den) {
    if (out.members.size() >= cap)
      throw DomainError("layer enumeration exceeds " + std::to_string(cap) + " points");
    out.members.push_back({std::move(xi), R, den});
  }
};

void enumerate_grid(unsigned d, const Integer& q, const Rational& R,
                    const std::optional<Ball>& window, const Rational& expansion,
                    const std::function<bool(const std::vector<Integer>&)>& keep, Collector& sink) {
  std::vector<std::pair<Integer, Integer>> ranges(d);
  for (unsigned i = 0; i < d; ++i) {
    if (window)
      ranges[i] = numerator_range(q, window->center[i], window->radius + expansion);
    else
      ranges[i] = {Integer(0), q};
    if (ranges[i].first > ranges[i].second) return;
  }
  std::vector<Integer> p(d);
  for (unsigned i = 0; i < d; ++i) p[i] = ranges[i].first;
  while (true) {
    if (keep(p)) {
      Point xi(d);
      for (unsigned i = 0; i < d; ++i) xi[i] = make_rational(p[i], q);
      sink.add(std::move(xi), R, q);
    }
    unsigned i = 0;
    for (; i < d; ++i) {
      if (p[i] < ranges[i].second) {
        ++p[i];
        break;
      }
      p[i] = ranges[i].first;
    }
    if (i == d) return;
  }
}

}  // namespace

ApproxSystem ApproxSystem::rationals(unsigned d, Rational c) {
  if (d < 1) throw DomainError("dimension must be positive");
  if (!(0 < c && c < 1)) throw DomainError("separation constant must lie in (0,1)");
  ApproxSystem s;
  s.kind = Kind::rationals;
  s.d = d;
  s.separation_c = std::move(c);
  return s;
}

ApproxSystem ApproxSystem::base_power(const Integer& b, Rational c) {
  if (b < 2) throw DomainError("base must be at least 2");
  if (!(0 < c && c < 1)) throw DomainError("separation constant must lie in (0,1)");
  ApproxSystem s;
  s.kind = Kind::base_power;
  s.d = 1;
  s.base = b;
  s.separation_c = std::move(c);
  return s;
}

ApproxFunction ApproxSystem::default_rho() const {
  if (kind == Kind::base_power) return ApproxFunction::power(Rational(1), Rational(1));
  return ApproxFunction::power(Rational(1), make_rational(long(1 + d), long(2 * d)));
}

ScaleSequence ApproxSystem::default_scale() const {
  if (kind != Kind::base_power) throw DomainError("rationals-d needs an explicit t");
  return ScaleSequence(make_rational(Integer(1), base));
}

std::string ApproxSystem::describe() const {
  if (kind == Kind::base_power) return "base-power(b=" + to_string(base) + ")";
  return "rationals-" + std::to_string(d);
}

DenominatorRange layer_range(const ApproxSystem& sys, const ScaleSequence& seq, long n) {
  if (n < 1) throw DomainError("layer index must be at least 1");
  const Rational hi_inv = 1 / seq.at(n);       // R >= u_n
  const Rational lo_inv = 1 / seq.at(n - 1);   // R < u_{n-1}
  DenominatorRange r;
  if (sys.kind == ApproxSystem::Kind::rationals) {
    // q^2 <= 1/u_n and q^2 > 1/u_{n-1}
    r.hi = isqrt(floor(hi_inv));
    r.lo = isqrt(floor(lo_inv)) + 1;
    return r;
  }
  // b^k <= 1/u_n and b^k > 1/u_{n-1}
  Integer k = 0;
  Integer bk = 1;
  while (Rational(bk) <= lo_inv) {
    bk *= sys.base;
    ++k;
  }
  r.lo = k;
  Integer kk = k;
  Integer bkk = bk;
  if (Rational(bkk) > hi_inv) {
    r.hi = r.lo - 1;
    return r;
  }
  while (Rational(Integer(bkk * sys.base)) <= hi_inv) {
    bkk *= sys.base;
    ++kk;
  }
  r.hi = kk;
  return r;
}

LayerEnumeration enumerate_layer(const ApproxSystem& sys, const ScaleSequence& seq, long n,
                                 const std::optional<Ball>& window, const Rational& expansion,
                                 std::size_t max_members) {
  if (window && window->dim() != sys.d) throw DomainError("window dimension differs from system");
  if (expansion < 0) throw DomainError("expansion must be non-negative");
  LayerEnumeration out;
  out.n = n;
  out.window = window;
  out.expansion = expansion;
  const DenominatorRange range = layer_range(sys, seq, n);
  Collector sink{out, max_members};
  if (sys.kind == ApproxSystem::Kind::rationals) {
    for (Integer q = range.lo; q <= range.hi; ++q) {
      const Rational R = make_rational(Integer(1), Integer(q * q));
      enumerate_grid(sys.d, q, R, window, expansion,
                     [&q](const std::vector<Integer>& p) {
                       Integer g = q;
                       for (const auto& pi : p) g = gcd(g, pi);
                       return g == 1;
                     },
                     sink);
    }
    return out;
  }
  for (Integer k = range.lo; k <= range.hi; ++k) {
    const Integer q = pow(sys.base, k.get_ui());
    const Rational R = make_rational(Integer(1), q);
    const Integer b = sys.base;
    const bool level0 = k == 0;
    enumerate_grid(1, q, R, window, expansion,
                   [&b, level0](const std::vector<Integer>& p) {
                     if (level0) return true;
                     Integer r;
                     mpz_mod(r.get_mpz_t(), p[0].get_mpz_t(), b.get_mpz_t());
                     return r != 0;
                   },
                   sink);
  }
  return out;
}

Integer count_heavy(const ApproxSystem& sys, const Rational& M) {
  if (M <= 0) throw DomainError("threshold must be positive");
  if (M > 1) return 0;
  Integer total = 0;
  if (sys.kind == ApproxSystem::Kind::base_power) {
    // levels k with b^-k >= M: 2 points at k = 0, b^k - b^(k-1) afterwards
    Integer bk = 1;
    total = 2;
    while (Rational(Integer(bk * sys.base)) <= 1 / M) {
      Integer next = bk * sys.base;
      total += next - bk;
      bk = next;
    }
    return total;
  }
  const Integer q_hi = isqrt(floor(Rational(1 / M)));
  for (Integer q = 1; q <= q_hi; ++q) {
    LayerEnumeration tmp;
    Collector sink{tmp, std::size_t(-1)};
    enumerate_grid(sys.d, q, Rational(1), std::nullopt, Rational(0),
                   [&q](const std::vector<Integer>& p) {
                     Integer g = q;
                     for (const auto& pi : p) g = gcd(g, pi);
                     return g == 1;
                   },
                   sink);
    total += Integer(static_cast<unsigned long>(tmp.members.size()));
  }
  return total;
}

namespace {

struct PairBest {
  std::optional<Rational> ratio;
  std::size_t i = 0, j = 0;

  void offer(const Rational& r, std::size_t a, std::size_t b) {
    if (!ratio || r < *ratio || (r == *ratio && std::pair(a, b) < std::pair(i, j))) {
      ratio = r;
      i = a;
      j = b;
    }
  }
};

}  // namespace

SeparationCertificate verify_separation(const ApproxSystem& sys,
                                        const std::vector<Anchor>& anchors, Exec exec) {
  SeparationCertificate cert;
  cert.c = sys.separation_c;
  cert.points = anchors.size();
  if (anchors.size() < 2) return cert;
  std::vector<std::size_t> order(anchors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return anchors[a].xi[0] < anchors[b].xi[0];
  });
  Rational r_max = anchors[0].R;
  for (const auto& a : anchors) r_max = max(r_max, a.R);
  auto ratio = [&](std::size_t a, std::size_t b) {
    const Anchor& x = anchors[order[a]];
    const Anchor& y = anchors[order[b]];
    return Rational(sup_distance(x.xi, y.xi) / min(x.R, y.R));
  };
  // adjacent pairs bound the minimum from above
  PairBest seed;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) seed.offer(ratio(k, k + 1), k, k + 1);
  const long n = static_cast<long>(order.size());
  // A pair with first-coordinate gap above best * r_max cannot beat best;
  // ties are kept so both paths see every minimiser.
  auto scan_from = [&](long i, PairBest& local) {
    for (long j = i + 1; j < n; ++j) {
      const Rational gap = anchors[order[j]].xi[0] - anchors[order[i]].xi[0];
      if (gap > *local.ratio * r_max) break;
      local.offer(ratio(i, j), i, j);
    }
  };
  PairBest best = seed;
  if (exec == Exec::serial) {
    for (long i = 0; i < n; ++i) scan_from(i, best);
  } else {
#pragma omp parallel
    {
      PairBest local = seed;
#pragma omp for schedule(dynamic, 64) nowait
      for (long i = 0; i < n; ++i) scan_from(i, local);
#pragma omp critical
      best.offer(*local.ratio, local.i, local.j);
    }
  }
  cert.min_ratio = best.ratio;
  cert.witness = std::pair(anchors[order[best.i]], anchors[order[best.j]]);
  cert.pass = *best.ratio >= sys.separation_c;
  return cert;
}

SeparationCertificate verify_separation(const ApproxSystem& sys, const LayerEnumeration& a,
                                        Exec exec) {
  return verify_separation(sys, a.members, exec);
}

SeparationCertificate verify_separation(const ApproxSystem& sys, const LayerEnumeration& a,
                                        const LayerEnumeration& b, Exec exec) {
  std::vector<Anchor> all = a.members;
  all.insert(all.end(), b.members.begin(), b.members.end());
  return verify_separation(sys, all, exec);
}

void write_layer_csv(std::ostream& os, const LayerEnumeration& layer, unsigned d) {
  os << "n";
  for (unsigned i = 1; i <= d; ++i) os << ",xi_" << i;
  os << ",R\n";
  for (const auto& m : layer.members) {
    os << layer.n;
    for (const auto& x : m.xi) os << ',' << to_string(x);
    os << ',' << to_string(m.R) << '\n';
  }
}

}  // namespace dioph
