#include "dioph/geometry.hpp"

namespace dioph {

Ball::Ball(Point c, Rational r) : center(std::move(c)), radius(std::move(r)) {
  if (radius <= 0) throw DomainError("ball radius must be positive");
  if (center.empty()) throw DomainError("ball center has no coordinates");
}

Annulus::Annulus(Point c, Rational r, Rational R)
    : center(std::move(c)), inner(std::move(r)), outer(std::move(R)) {
  if (!(0 < inner && inner < outer)) throw DomainError("annulus needs 0 < inner < outer");
}

Rational sup_distance(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw DomainError("dimension mismatch");
  Rational best(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    Rational d = abs(Rational(a[i] - b[i]));
    if (d > best) best = d;
  }
  return best;
}

namespace {

Rational clipped_side(const Rational& x, const Rational& r) {
  Rational lo = max(Rational(x - r), Rational(0));
  Rational hi = min(Rational(x + r), Rational(1));
  return hi > lo ? Rational(hi - lo) : Rational(0);
}

}  // namespace

Rational cube_measure(const Ball& b) {
  Rational m(1);
  for (const auto& x : b.center) m *= clipped_side(x, b.radius);
  return m;
}

bool contains(const Ball& outer, const Ball& inner) {
  return sup_distance(outer.center, inner.center) + inner.radius <= outer.radius;
}

bool contains(const Annulus& outer, const Ball& inner) {
  Rational d = sup_distance(outer.center, inner.center);
  return d + inner.radius <= outer.outer && d >= inner.radius + outer.inner;
}

bool intersects(const Ball& a, const Ball& b) {
  return sup_distance(a.center, b.center) < a.radius + b.radius;
}

Rational gap(const Ball& a, const Ball& b) {
  Rational g = sup_distance(a.center, b.center) - a.radius - b.radius;
  return g > 0 ? g : Rational(0);
}

RegularSpaceParams RegularSpaceParams::lebesgue(unsigned d, Rational r0) {
  RegularSpaceParams p;
  p.delta = Rational(d);
  p.a_lower = Rational(1);
  p.b_upper = Rational(1u << d);
  p.r0 = std::move(r0);
  return p;
}

void RegularSpaceParams::validate() const {
  if (delta <= 0) throw DomainError("delta must be positive");
  if (!(0 < a_lower && a_lower <= b_upper)) throw DomainError("need 0 < a <= b");
  if (r0 <= 0) throw DomainError("r0 must be positive");
}

AhlforsReport check_ahlfors(const RegularSpaceParams& params, const std::vector<Ball>& balls,
                            unsigned d) {
  params.validate();
  AhlforsReport report;
  for (const auto& ball : balls) {
    if (ball.dim() != d) throw DomainError("ball dimension differs from d");
    if (ball.radius > params.r0) throw DomainError("ball radius exceeds r0");
    AhlforsEntry e;
    e.ball = ball;
    e.measure = cube_measure(ball);
    const Rational r = ball.radius;
    const Rational delta = params.delta;
    Real rd = [r, delta](long bits) { return pow(r, delta, bits); };
    Real lower = [rd, a = params.a_lower](long bits) { return scale(rd(bits), a); };
    Real upper = [rd, b = params.b_upper](long bits) { return scale(rd(bits), b); };
    e.lower = lower(256);
    e.upper = upper(256);
    Real mu = constant(e.measure);
    e.lower_ok = compare(lower, mu) != Ordering::greater;
    e.upper_ok = compare(mu, upper) != Ordering::greater;
    if (!e.lower_ok || !e.upper_ok) report.violations.push_back(report.entries.size());
    report.entries.push_back(std::move(e));
  }
  return report;
}

Rational annulus_measure(const Annulus& a) {
  return cube_measure(Ball(a.center, a.outer)) - cube_measure(Ball(a.center, a.inner));
}

}  // namespace dioph
