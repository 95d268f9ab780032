#include "doctest.h"

#include <random>
#include <sstream>

#include "dioph/audit.hpp"
#include "dioph/functions.hpp"
#include "dioph/geometry.hpp"

using namespace dioph;

namespace {
Rational q(long p, long d = 1) { return make_rational(p, d); }
}  // namespace

TEST_CASE("rational parsing is exact and canonical") {
  CHECK(parse_rational("6/4") == q(3, 2));
  CHECK(parse_rational("-0.125") == q(-1, 8));
  CHECK(parse_rational("7") == q(7));
  CHECK(to_string(parse_rational("10/4")) == "5/2");
  CHECK_THROWS_AS(parse_rational("1/0"), DomainError);
  CHECK_THROWS_AS(parse_rational("abc"), DomainError);
}

TEST_CASE("floor, ceil and exact roots") {
  CHECK(floor(q(-7, 2)) == -4);
  CHECK(ceil(q(-7, 2)) == -3);
  CHECK(floor(q(4)) == 4);
  Rational r;
  CHECK(exact_root(q(9, 16), 2, r));
  CHECK(r == q(3, 4));
  CHECK_FALSE(exact_root(q(2), 2, r));
  CHECK(valuation(Integer(48), Integer(2)) == 4);
}

TEST_CASE("eval_scale") {
  CHECK(eval_scale(ScaleSequence(q(1, 2)), 3) == q(1, 8));
  CHECK(eval_scale(ScaleSequence(q(1, 4)), 0) == 1);
  CHECK(eval_scale(ScaleSequence(q(2, 3)), 2) == q(4, 9));
  CHECK_THROWS_WITH_AS(eval_scale(ScaleSequence(q(1, 2)), -1), "index before sequence start",
                       DomainError);
  ScaleSequence s(q(1, 3), 2);
  for (long n = 0; n < 8; ++n) CHECK(s.at(n) / s.at(n + 1) == 3);
  CHECK(s.subsequence(3, 1).at(2) == pow(q(1, 3), 9));
}

TEST_CASE("g_value enclosures") {
  const Rational tol = q(1, 1000000);
  auto sq = ApproxFunction::power(q(1), q(2));
  auto cube = ApproxFunction::power(q(1), q(3));
  auto id = ApproxFunction::power(q(1), q(1));
  Enclosure a = g_value(sq, id, q(1), q(1), q(1, 8), tol);
  CHECK(a.exact());
  CHECK(a.lo == q(1, 8));
  Enclosure b = g_value(cube, id, q(1, 2), q(1), q(1, 4), tol);
  CHECK(b.exact());
  CHECK(b.lo == q(1, 2));
  Enclosure c = g_value(cube, cube, q(1, 3), q(1, 3), q(1, 7), tol);
  CHECK(c.contains(q(1)));
  // irrational value: (1/2)^(1/2)
  Enclosure d = g_value(id, id, q(3, 2), q(1), q(1, 2), tol);
  CHECK(d.width() <= tol);
  CHECK(d.lo * d.lo < q(1, 2));
  CHECK(d.hi * d.hi > q(1, 2));
}

TEST_CASE("power functions are monotone on samples") {
  auto f = ApproxFunction::power(q(3, 2), q(5, 3));
  CHECK(f.non_decreasing());
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    Rational x = q(1 + long(rng() % 1000), 1000), y = q(1 + long(rng() % 1000), 1000);
    if (y < x) std::swap(x, y);
    CHECK(compare(f.at(x), f.at(y)) != Ordering::greater);
  }
  auto t = ApproxFunction::table({{q(1, 4), q(1, 16)}, {q(1, 2), q(1, 8)}});
  CHECK(*t.exact(q(1, 4)) == q(1, 16));
  CHECK(*t.exact(q(1, 3)) == q(1, 8));
  CHECK(t.non_decreasing());
}

TEST_CASE("regularity witness check") {
  ScaleSequence u(q(1, 2));
  auto h = ApproxFunction::power(q(1), q(2));
  CHECK(check_regularity(h, u, {q(1, 8), q(1, 2), 1}, 20).ok);
  auto bad = check_regularity(h, u, {q(1, 2), q(3, 4), 1}, 20);
  CHECK_FALSE(bad.ok);
  CHECK(bad.first_failure == 1);
}

TEST_CASE("Ahlfors checks on Lebesgue measure") {
  auto p1 = RegularSpaceParams::lebesgue(1);
  auto r = check_ahlfors(p1, {Ball(q(1, 2), q(1, 8)), Ball(q(0), q(1, 8))}, 1);
  CHECK(r.ok());
  CHECK(r.entries[0].measure == q(1, 4));
  CHECK(r.entries[1].measure == q(1, 8));
  CHECK(r.entries[1].measure == r.entries[1].lower.lo);
  auto p2 = RegularSpaceParams::lebesgue(2);
  auto r2 = check_ahlfors(p2, {Ball(Point{q(1, 2), q(1, 2)}, q(1, 4))}, 2);
  CHECK(r2.ok());
  CHECK(r2.entries[0].measure == q(1, 4));
  CHECK(r2.entries[0].upper.hi == q(1, 4));
  // a corner ball in d=2 falls below a r^2 when a = 1
  auto r3 = check_ahlfors(p2, {Ball(Point{q(0), q(0)}, q(1, 8))}, 2);
  CHECK(r3.entries[0].measure == q(1, 64));
  CHECK(r3.ok());
}

TEST_CASE("cube measure against Monte Carlo") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Point c{q(long(rng() % 64), 64), q(long(rng() % 64), 64)};
    Rational rad = q(1 + long(rng() % 16), 64);
    Ball b(c, rad);
    const double exact = to_double(cube_measure(b));
    const int n = 20000;
    int hit = 0;
    for (int i = 0; i < n; ++i) {
      double x = U(rng), y = U(rng);
      if (std::abs(x - to_double(c[0])) < to_double(rad) && std::abs(y - to_double(c[1])) < to_double(rad))
        ++hit;
    }
    const double est = double(hit) / n;
    const double sigma = std::sqrt(exact * (1 - exact) / n) + 1e-9;
    CHECK(std::abs(est - exact) <= 3 * sigma + 1e-4);
  }
}

TEST_CASE("annular regularity in d=1") {
  for (long i = 1; i < 8; ++i) {
    Rational x = q(i, 8);
    for (long k = 2; k <= 8; ++k) {
      Rational R = q(1, 4 * k), r = R / 2;
      if (x - R < 0 || x + R > 1) continue;
      CHECK(annulus_measure(Annulus({x}, r, R)) >= R - r);
    }
  }
}

TEST_CASE("ball containment and gaps") {
  Ball big(q(1, 2), q(1, 4)), small(q(5, 8), q(1, 8));
  CHECK(contains(big, small));
  CHECK_FALSE(contains(small, big));
  CHECK(gap(Ball(q(0), q(1, 8)), Ball(q(1, 2), q(1, 8))) == q(1, 4));
  CHECK_FALSE(intersects(Ball(q(0), q(1, 4)), Ball(q(1, 2), q(1, 4))));
  CHECK(contains(Annulus({q(1, 2)}, q(1, 128), q(1, 32)), Ball(q(1, 2) + q(5, 256), q(1, 256))));
  CHECK_THROWS_AS(Ball(q(0), q(0)), DomainError);
}

TEST_CASE("audit rows") {
  CHECK(format_value(make_rational(3, 7)) == "3/7");
  Rational big = pow(make_rational(1, 3), 100);
  CHECK(format_value(big).rfind("~1.940", 0) == 0);
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"x\"") == "\"say \"\"x\"\"\"");
  CHECK(csv_field("plain") == "plain");
  std::ostringstream os;
  write_audit_csv(os, {make_row("num1", 1, 2, "3", "4", "in [rhs/2, rhs]", true),
                       make_row("k", 1, 0, "0", "1", ">=", false, true)});
  CHECK(os.str() ==
        "equation_tag,level,sublevel,lhs,rhs,relation,pass\n"
        "num1,1,2,3,4,\"in [rhs/2, rhs]\",pass\n"
        "k/sampled,1,0,0,1,>=,fail\n");
}
