#include "dioph/ubiquity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

namespace dioph {

namespace {

Integer isqrt(const Integer& z) {
  Integer r;
  mpz_sqrt(r.get_mpz_t(), z.get_mpz_t());
  return r;
}

struct Box {
  std::vector<Rational> lo, hi;
};

Box ball_box(const Ball& b) {
  Box x;
  for (const auto& c : b.center) {
    x.lo.push_back(c - b.radius);
    x.hi.push_back(c + b.radius);
  }
  return x;
}

// Window ∩ [0,1]^d as a box; empty sides collapse to lo == hi.
Box window_box(const Ball& w) {
  Box x = ball_box(w);
  for (std::size_t i = 0; i < x.lo.size(); ++i) {
    x.lo[i] = max(x.lo[i], Rational(0));
    x.hi[i] = min(x.hi[i], Rational(1));
    if (x.hi[i] < x.lo[i]) x.hi[i] = x.lo[i];
  }
  return x;
}

std::optional<Box> clip(const Box& b, const Box& w) {
  Box x;
  for (std::size_t i = 0; i < b.lo.size(); ++i) {
    Rational lo = max(b.lo[i], w.lo[i]), hi = min(b.hi[i], w.hi[i]);
    if (!(lo < hi)) return std::nullopt;
    x.lo.push_back(lo);
    x.hi.push_back(hi);
  }
  return x;
}

Rational volume(const Box& b) {
  Rational v(1);
  for (std::size_t i = 0; i < b.lo.size(); ++i) v *= b.hi[i] - b.lo[i];
  return v;
}

// Covered length over compressed coordinates, with cover counts.
class SegmentTree {
 public:
  explicit SegmentTree(std::vector<Rational> ys)
      : ys_(std::move(ys)), count_(4 * ys_.size() + 4, 0), len_(4 * ys_.size() + 4) {}

  void update(std::size_t l, std::size_t r, int delta) {
    if (ys_.size() >= 2 && l < r) update(1, 0, ys_.size() - 1, l, r, delta);
  }
  const Rational& covered() const { return len_[1]; }

 private:
  void update(std::size_t node, std::size_t a, std::size_t b, std::size_t l, std::size_t r,
              int delta) {
    if (r <= a || b <= l) return;
    if (l <= a && b <= r) {
      count_[node] += delta;
    } else {
      const std::size_t m = (a + b) / 2;
      update(2 * node, a, m, l, r, delta);
      update(2 * node + 1, m, b, l, r, delta);
    }
    if (count_[node] > 0)
      len_[node] = ys_[b] - ys_[a];
    else if (b - a == 1)
      len_[node] = 0;
    else
      len_[node] = len_[2 * node] + len_[2 * node + 1];
  }

  std::vector<Rational> ys_;
  std::vector<int> count_;
  std::vector<Rational> len_;
};

Rational union_area_2d(const std::vector<Box>& boxes) {
  if (boxes.empty()) return 0;
  std::vector<Rational> ys;
  for (const auto& b : boxes) {
    ys.push_back(b.lo[1]);
    ys.push_back(b.hi[1]);
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto index = [&ys](const Rational& y) {
    return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin());
  };
  struct Event {
    Rational x;
    int delta;
    std::size_t l, r;
  };
  std::vector<Event> events;
  for (const auto& b : boxes) {
    events.push_back({b.lo[0], +1, index(b.lo[1]), index(b.hi[1])});
    events.push_back({b.hi[0], -1, index(b.lo[1]), index(b.hi[1])});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  SegmentTree tree(ys);
  Rational area(0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) area += tree.covered() * (events[i].x - events[i - 1].x);
    tree.update(events[i].l, events[i].r, events[i].delta);
  }
  return area;
}

}  // namespace

IntervalUnion IntervalUnion::from(std::vector<std::pair<Rational, Rational>> pieces) {
  IntervalUnion u;
  pieces.erase(std::remove_if(pieces.begin(), pieces.end(),
                              [](const auto& p) { return !(p.first < p.second); }),
               pieces.end());
  std::sort(pieces.begin(), pieces.end());
  for (auto& p : pieces) {
    // open intervals touching at an endpoint stay separate pieces
    if (!u.pieces_.empty() && p.first < u.pieces_.back().second) {
      u.pieces_.back().second = max(u.pieces_.back().second, p.second);
    } else {
      u.pieces_.push_back(std::move(p));
    }
  }
  return u;
}

IntervalUnion IntervalUnion::clip(const Rational& lo, const Rational& hi) const {
  std::vector<std::pair<Rational, Rational>> out;
  for (const auto& [a, b] : pieces_) {
    Rational l = max(a, lo), h = min(b, hi);
    if (l < h) out.emplace_back(l, h);
  }
  IntervalUnion u;
  u.pieces_ = std::move(out);
  return u;
}

Rational IntervalUnion::measure() const {
  Rational m(0);
  for (const auto& [a, b] : pieces_) m += b - a;
  return m;
}

UnionMeasure union_measure_grid(const std::vector<Ball>& balls, const Ball& window, unsigned d,
                                const Rational& tol, std::size_t cell_budget) {
  const Box w = window_box(window);
  const Rational wvol = volume(w);
  // boxes in coordinates normalised to the window, each side mapped to [0,1]
  std::vector<Box> boxes;
  for (const auto& b : balls) {
    if (b.dim() != d) throw DomainError("ball dimension differs from d");
    auto c = clip(ball_box(b), w);
    if (!c) continue;
    for (unsigned i = 0; i < d; ++i) {
      const Rational side = w.hi[i] - w.lo[i];
      c->lo[i] = (c->lo[i] - w.lo[i]) / side;
      c->hi[i] = (c->hi[i] - w.lo[i]) / side;
    }
    boxes.push_back(std::move(*c));
  }
  struct Cell {
    std::vector<long> idx;
    std::vector<std::uint32_t> candidates;
  };
  UnionMeasure result;
  result.exact = false;
  std::vector<Cell> frontier;
  if (wvol > 0 && !boxes.empty()) {
    Cell root{std::vector<long>(d, 0), {}};
    for (std::uint32_t i = 0; i < boxes.size(); ++i) root.candidates.push_back(i);
    frontier.push_back(std::move(root));
  }
  Rational covered(0);
  std::size_t processed = 0;
  for (long level = 0;; ++level) {
    const Rational cell_vol = wvol / pow(Rational(2), long(d) * level);
    result.lo = covered;
    result.hi = covered + cell_vol * Rational(Integer(static_cast<unsigned long>(frontier.size())));
    if (frontier.empty()) {
      result.exact = true;
      break;
    }
    if (result.hi - result.lo <= tol) break;
    if (processed + frontier.size() * (std::size_t(1) << d) > cell_budget || level >= 60) {
      result.within_tolerance = false;
      break;
    }
    // integer index ranges of level+1 cells meeting / inside each box
    const Integer scale = pow(Integer(2), static_cast<unsigned long>(level + 1));
    struct Range {
      long meet_lo, meet_hi, in_lo, in_hi;
    };
    std::vector<Range> ranges(boxes.size() * d);
    for (std::size_t k = 0; k < boxes.size(); ++k)
      for (unsigned i = 0; i < d; ++i) {
        const Rational a = boxes[k].lo[i] * scale, b = boxes[k].hi[i] * scale;
        ranges[k * d + i] = {floor(a).get_si(), ceil(b).get_si() - 1, ceil(a).get_si(),
                             floor(b).get_si() - 1};
      }
    std::vector<Cell> next;
    long full_count = 0;
    for (auto& cell : frontier) {
      ++processed;
      for (unsigned mask = 0; mask < (1u << d); ++mask) {
        Cell child;
        child.idx.resize(d);
        for (unsigned i = 0; i < d; ++i) child.idx[i] = 2 * cell.idx[i] + ((mask >> i) & 1);
        bool full = false;
        for (auto k : cell.candidates) {
          bool meets = true, inside = true;
          for (unsigned i = 0; i < d; ++i) {
            const Range& r = ranges[k * d + i];
            const long x = child.idx[i];
            if (x < r.meet_lo || x > r.meet_hi) meets = false;
            if (x < r.in_lo || x > r.in_hi) inside = false;
          }
          if (inside) {
            full = true;
            break;
          }
          if (meets) child.candidates.push_back(k);
        }
        if (full)
          ++full_count;
        else if (!child.candidates.empty())
          next.push_back(std::move(child));
      }
    }
    covered += wvol / pow(Rational(2), long(d) * (level + 1)) * full_count;
    frontier = std::move(next);
  }
  return result;
}

UnionMeasure union_measure(const std::vector<Ball>& balls, const Ball& window, unsigned d,
                           const Rational& tol, std::size_t cell_budget) {
  if (d < 1 || d > 3) throw DomainError("union_measure supports d in {1,2,3}");
  if (window.dim() != d) throw DomainError("window dimension differs from d");
  for (const auto& b : balls)
    if (b.dim() != d) throw DomainError("ball dimension differs from d");
  if (d == 3) return union_measure_grid(balls, window, d, tol, cell_budget);
  const Box w = window_box(window);
  UnionMeasure m;
  if (d == 1) {
    std::vector<std::pair<Rational, Rational>> pieces;
    for (const auto& b : balls) pieces.emplace_back(b.center[0] - b.radius, b.center[0] + b.radius);
    m.lo = m.hi = IntervalUnion::from(std::move(pieces)).clip(w.lo[0], w.hi[0]).measure();
    return m;
  }
  std::vector<Box> boxes;
  for (const auto& b : balls)
    if (auto c = clip(ball_box(b), w)) boxes.push_back(std::move(*c));
  m.lo = m.hi = union_area_2d(boxes);
  return m;
}

// ---------------------------------------------------------------------------
// Selection rule for t and the Dirichlet bound.

bool selection_rule_holds(unsigned d, const Rational& t, const Rational& r, long n) {
  // first: 2^{3d+1} t^{1/2} < 1/4  <=>  t < 2^{-6d-6}
  if (!(t < pow(Rational(2), -6 * long(d) - 6))) return false;
  // second: 2^{2d+1} 3^d t^{n/2} (n/2)(-log t) < r^d / 4
  const Rational coef = pow(Rational(2), 2 * long(d) + 1) * pow(Rational(3), long(d)) *
                        make_rational(n, 2);
  Real lhs = [coef, t, n](long bits) {
    Enclosure tn = pow(t, make_rational(n, 2), bits);
    Enclosure l = log(Enclosure(Rational(1 / t)), bits);
    return scale(tn * l, coef);
  };
  const Rational rhs = pow(r, long(d)) / 4;
  return compare(lhs, constant(rhs)) == Ordering::less;
}

std::optional<Rational> auto_select_t(unsigned d, const Rational& r, long n_lo, long n_hi,
                                      long k_max) {
  for (long k = 1; k <= k_max; ++k) {
    const Rational t = pow(Rational(2), -k);
    if (!(t < pow(Rational(2), -6 * long(d) - 6))) continue;
    bool ok = true;
    for (long n = n_lo; n <= n_hi && ok; ++n) ok = selection_rule_holds(d, t, r, n);
    if (ok) return t;
  }
  return std::nullopt;
}

std::optional<long> first_valid_layer(unsigned d, const Rational& t, const Rational& r,
                                      long n_max) {
  for (long n = 1; n <= n_max; ++n)
    if (selection_rule_holds(d, t, r, n)) return n;
  return std::nullopt;
}

std::optional<Rational> dirichlet_ratio_bound(const ApproxSystem& sys, const ScaleSequence& seq,
                                              const Ball& B, long n) {
  if (sys.kind != ApproxSystem::Kind::rationals) return std::nullopt;
  if (seq.offset != 0 || seq.stride != 1) return std::nullopt;
  const unsigned d = sys.d;
  const Rational& t = seq.t;
  const DenominatorRange range = layer_range(sys, seq, n);
  if (range.empty()) return std::nullopt;
  const Rational margin = make_rational(Integer(1), range.lo);
  for (const auto& c : B.center)
    if (c - B.radius < margin || c + B.radius > 1 - margin) return std::nullopt;
  const Rational r = B.radius;
  // Q = floor(t^{-(n-1)/2})
  const Integer Q = isqrt(floor(Rational(1 / pow(t, n - 1))));
  // upper bounds for H^{(k)}_Q = sum_{q<=Q} q^{-k}
  std::vector<Rational> H(d + 1);
  H[0] = Rational(Q);
  const bool small = Q <= 4000;
  for (unsigned k = 1; k <= d; ++k) {
    if (small) {
      Rational s(0);
      for (long q = 1; q <= Q.get_si(); ++q) s += pow(make_rational(1, q), long(k));
      H[k] = s;
    } else if (k == 1) {
      H[k] = 1 + log(Enclosure(Rational(Q)), 128).hi;
    } else {
      H[k] = make_rational(long(k), long(k - 1));
    }
  }
  Rational sum(0);
  Integer binom = 1;
  for (unsigned k = 0; k <= d; ++k) {
    sum += Rational(binom) * pow(Rational(2 * r), long(d - k)) * pow(Rational(3), long(k)) * H[k];
    binom = binom * (d - k) / (k + 1);
  }
  const Rational tn_hi = pow(t, make_rational(n, 2), 256).hi;
  const Rational bad = sum * pow(Rational(2), long(d)) * tn_hi;
  const Rational ratio = 1 - bad / cube_measure(B);
  return ratio > 0 ? ratio : Rational(0);
}

// ---------------------------------------------------------------------------
// Exact d = 1 ratio for rationals-1 by walking the Farey sequence.

namespace {

using i128 = __int128;

bool fits62(const Integer& z) { return mpz_sizeinbase(z.get_mpz_t(), 2) <= 62; }

// Uncovered measure of (wl, wh) by balls of radius rho centred at reduced
// p/q with q_lo <= q <= N.
std::optional<Rational> farey_uncovered(long N, long q_lo, const Rational& rho,
                                        const Rational& wl, const Rational& wh) {
  if (!fits62(rho.get_num()) || !fits62(rho.get_den()) || N > (1L << 22)) return std::nullopt;
  const i128 P = rho.get_num().get_si(), D = rho.get_den().get_si();
  Rational uncovered(0);
  auto add_gap = [&](const Rational& lo, const Rational& hi) {
    Rational l = max(lo, wl), h = min(hi, wh);
    if (l < h) uncovered += h - l;
  };
  const Rational stop = wh + rho;
  if (!fits62(stop.get_num()) || !fits62(stop.get_den())) return std::nullopt;
  const i128 SN = stop.get_num().get_si(), SD = stop.get_den().get_si();
  long a = 0, b = 1, c = 1, e = N;  // consecutive terms a/b < c/e
  bool have_prev = false;
  long pa = 0, pb = 1;
  auto visit = [&](long num, long den) {
    if (den < q_lo) return;
    if (!have_prev) {
      add_gap(wl, make_rational(num, den) - rho);
    } else if ((i128(num) * pb - i128(pa) * den) * D > 2 * P * i128(pb) * den) {
      add_gap(make_rational(pa, pb) + rho, make_rational(num, den) - rho);
    }
    have_prev = true;
    pa = num;
    pb = den;
  };
  visit(a, b);
  while (c <= e) {  // c/e <= 1
    visit(c, e);
    if (i128(c) * SD >= SN * e) break;  // c/e - rho >= wh
    if (c == e) break;
    const long k = (N + b) / e;
    const long nc = k * c - a, ne = k * e - b;
    a = c;
    b = e;
    c = nc;
    e = ne;
  }
  if (!have_prev)
    add_gap(wl, wh);
  else
    add_gap(make_rational(pa, pb) + rho, wh);
  return uncovered;
}

}  // namespace

UbiquityReport verify_local_ubiquity(const ApproxSystem& sys, const ApproxFunction& rho,
                                     const ScaleSequence& seq, const Ball& B, long n_lo,
                                     long n_hi, const Rational& kappa,
                                     const UbiquityOptions& opt) {
  if (B.dim() != sys.d) throw DomainError("window dimension differs from system");
  if (n_lo < 1 || n_hi < n_lo) throw DomainError("bad n range");
  UbiquityReport rep;
  rep.window = B;
  rep.kappa = kappa;
  const Rational muB = cube_measure(B);
  if (muB == 0) throw DomainError("window has zero measure");
  const unsigned d = sys.d;
  const long count = n_hi - n_lo + 1;
  rep.rows.resize(count);
  std::vector<std::string> errors(count);

  auto compute_row = [&](long idx) {
    const long n = n_lo + idx;
    UbiquityRow row;
    row.n = n;
    const Enclosure radius_enc = rho.eval(seq.at(n - 1), 256);
    const Rational radius = radius_enc.lo;
    const bool radius_exact = radius_enc.exact();
    const DenominatorRange range = layer_range(sys, seq, n);
    if (range.empty()) {
      row.ratio = 0;
      row.method = "empty";
      rep.rows[idx] = row;
      return;
    }
    // size estimate of the layer restricted to the expanded window
    Rational reach = 2 * (B.radius + radius);
    if (reach > 1) reach = 1;
    Rational estimate;
    if (sys.kind == ApproxSystem::Kind::rationals) {
      estimate = pow(Rational(range.hi), long(d + 1)) * pow(reach, long(d));
    } else {
      estimate = Rational(pow(sys.base, range.hi.get_ui())) * reach;
    }
    const bool over_budget = estimate > Rational(Integer(static_cast<unsigned long>(opt.exact_budget)));
    const Box w = window_box(B);
    const Rational walk = Rational(range.hi * range.hi) * (w.hi[0] + radius);
    if (sys.kind == ApproxSystem::Kind::rationals && d == 1 && radius_exact &&
        walk <= Rational(Integer(static_cast<unsigned long>(opt.exact_budget)) * 4) &&
        range.hi.fits_slong_p()) {
      auto unc = farey_uncovered(range.hi.get_si(), range.lo.get_si(), radius, w.lo[0], w.hi[0]);
      if (unc) {
        row.ratio = (muB - *unc) / muB;
        row.method = "exact";
        row.layer_size = 0;
        row.pass = row.ratio >= kappa;
        rep.rows[idx] = row;
        return;
      }
    }
    if (!over_budget) {
      auto layer = enumerate_layer(sys, seq, n, B, radius, opt.exact_budget);
      row.layer_size = layer.members.size();
      std::vector<Ball> balls;
      balls.reserve(layer.members.size());
      for (const auto& m : layer.members) balls.emplace_back(m.xi, radius);
      UnionMeasure um = union_measure(balls, B, d, opt.grid_tol * muB);
      row.ratio = um.lo / muB;
      row.method = (um.exact && radius_exact) ? "exact" : (um.exact ? "certified-lower" : "grid-bound");
      row.pass = row.ratio >= kappa;
      rep.rows[idx] = row;
      return;
    }
    if (opt.allow_dirichlet) {
      if (auto lb = dirichlet_ratio_bound(sys, seq, B, n)) {
        row.ratio = *lb;
        row.method = "dirichlet-bound";
        row.pass = row.ratio >= kappa;
        rep.rows[idx] = row;
        return;
      }
    }
    throw DomainError("layer " + std::to_string(n) + " exceeds the exact budget and no bound applies");
  };

  if (opt.exec == Exec::serial) {
    for (long i = 0; i < count; ++i) compute_row(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
      try {
        compute_row(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw DomainError(e);
  }

  for (long i = count - 1; i >= 0; --i) {
    if (!rep.rows[i].pass) break;
    rep.n_B_estimate = rep.rows[i].n;
  }
  rep.pass = rep.n_B_estimate.has_value();
  for (const auto& row : rep.rows)
    if (row.method == "dirichlet-bound") {
      rep.notes.push_back("rows marked dirichlet-bound are certified lower bounds from Dirichlet's theorem");
      break;
    }
  if (sys.kind == ApproxSystem::Kind::rationals)
    rep.notes.push_back("layers use positive q with numerators in [0,q]");
  return rep;
}

MinkowskiCount minkowski_count_bound(long q, const Ball& window, unsigned d,
                                     std::optional<Rational> radius) {
  if (q < 1) throw DomainError("q must be at least 1");
  if (window.dim() != d) throw DomainError("window dimension differs from d");
  const Rational eps = radius ? *radius : make_rational(1, q);
  MinkowskiCount out;
  out.count = 1;
  const Rational qr(q);
  for (unsigned i = 0; i < d; ++i) {
    const Rational reach = window.radius + eps;
    Integer lo = floor(Rational(qr * (window.center[i] - reach))) + 1;
    Integer hi = ceil(Rational(qr * (window.center[i] + reach))) - 1;
    if (lo < -q) lo = -q;
    if (hi > q) hi = q;
    out.count *= hi >= lo ? Integer(hi - lo + 1) : Integer(0);
  }
  out.bound = pow(Rational(2 * window.radius * q + 3), long(d));
  out.ok = Rational(out.count) <= out.bound;
  return out;
}

}  // namespace dioph
