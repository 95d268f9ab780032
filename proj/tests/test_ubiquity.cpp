#include "doctest.h"

#include <random>

#include "dioph/ubiquity.hpp"

using namespace dioph;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

// Inclusion-exclusion over boxes clipped to [lo, hi]^d.
Rational inclusion_exclusion(const std::vector<Ball>& balls, unsigned d) {
  const std::size_t n = balls.size();
  Rational total(0);
  for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
    Rational vol(1);
    int bits = 0;
    for (unsigned i = 0; i < d; ++i) {
      Rational lo(0), hi(1);
      for (std::size_t k = 0; k < n; ++k) {
        if (!((mask >> k) & 1)) continue;
        lo = max(lo, Rational(balls[k].center[i] - balls[k].radius));
        hi = min(hi, Rational(balls[k].center[i] + balls[k].radius));
      }
      vol *= hi > lo ? Rational(hi - lo) : Rational(0);
    }
    for (std::size_t k = 0; k < n; ++k) bits += (mask >> k) & 1;
    total += bits % 2 ? vol : Rational(-vol);
  }
  return total;
}

}  // namespace

TEST_CASE("union measure examples") {
  Ball cube1(q(1, 2), q(1, 2));
  CHECK(union_measure({Ball(q(1, 4), q(1, 4)), Ball(q(1, 2), q(1, 4))}, cube1, 1).lo == q(3, 4));
  CHECK(union_measure({Ball(q(1, 8), q(1, 16)), Ball(q(7, 8), q(1, 16))}, cube1, 1).lo == q(1, 4));
  Ball cube2(Point{q(1, 2), q(1, 2)}, q(1, 2));
  std::vector<Ball> two{Ball(Point{q(1, 4), q(1, 4)}, q(1, 4)), Ball(Point{q(1, 2), q(1, 4)}, q(1, 4))};
  auto m = union_measure(two, cube2, 2);
  CHECK(m.exact);
  CHECK(m.lo == q(3, 8));
  CHECK(m.lo == inclusion_exclusion(two, 2));
}

TEST_CASE("interval union agrees with inclusion-exclusion") {
  std::mt19937_64 rng(31);
  Ball cube1(q(1, 2), q(1, 2));
  for (int t = 0; t < 300; ++t) {
    std::vector<Ball> balls;
    const int n = 1 + int(rng() % 4);
    for (int k = 0; k < n; ++k) balls.emplace_back(q(long(rng() % 17), 16), q(1 + long(rng() % 6), 16));
    CHECK(union_measure(balls, cube1, 1).lo == inclusion_exclusion(balls, 1));
  }
}

TEST_CASE("sweepline agrees with inclusion-exclusion and the grid engine") {
  std::mt19937_64 rng(37);
  Ball cube2(Point{q(1, 2), q(1, 2)}, q(1, 2));
  for (int t = 0; t < 60; ++t) {
    std::vector<Ball> balls;
    const int n = 1 + int(rng() % 5);
    for (int k = 0; k < n; ++k)
      balls.emplace_back(Point{q(long(rng() % 9), 8), q(long(rng() % 9), 8)}, q(1 + long(rng() % 3), 8));
    const Rational ie = inclusion_exclusion(balls, 2);
    CHECK(union_measure(balls, cube2, 2).lo == ie);
    auto g = union_measure_grid(balls, cube2, 2, q(0), 1'000'000);
    CHECK(g.exact);  // dyadic inputs resolve exactly
    CHECK(g.lo == ie);
  }
}

TEST_CASE("d=3 grid brackets the exact value") {
  std::mt19937_64 rng(41);
  Ball cube3(Point{q(1, 2), q(1, 2), q(1, 2)}, q(1, 2));
  for (int t = 0; t < 20; ++t) {
    std::vector<Ball> balls;
    for (int k = 0; k < 3; ++k)
      balls.emplace_back(Point{q(long(rng() % 7), 7), q(long(rng() % 7), 7), q(long(rng() % 7), 7)},
                         q(1 + long(rng() % 3), 9));
    const Rational ie = inclusion_exclusion(balls, 3);
    auto m = union_measure(balls, cube3, 3, q(1, 100));
    CHECK(m.lo <= ie);
    CHECK(ie <= m.hi);
    CHECK(m.hi - m.lo <= q(1, 100));
  }
  // a starved budget is flagged
  std::vector<Ball> one{Ball(Point{q(1, 3), q(1, 3), q(1, 3)}, q(1, 7))};
  auto starved = union_measure(one, cube3, 3, q(0), 100);
  CHECK_FALSE(starved.within_tolerance);
  CHECK(starved.lo <= inclusion_exclusion(one, 3));
}

TEST_CASE("union measure is monotone") {
  std::mt19937_64 rng(43);
  Ball w(q(1, 2), q(1, 4));
  std::vector<Ball> balls;
  Rational last(0);
  for (int k = 0; k < 40; ++k) {
    balls.emplace_back(q(long(rng() % 101), 100), q(1 + long(rng() % 5), 200));
    Rational m = union_measure(balls, w, 1).lo;
    CHECK(m >= last);
    last = m;
  }
}

TEST_CASE("base-power ubiquity ratio is exactly one") {
  auto sys = ApproxSystem::base_power(2);
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), sys.default_scale(), Ball(q(1, 2), q(1, 4)),
                                   2, 12, q(1));
  for (const auto& row : rep.rows) {
    CHECK(row.ratio == 1);
    CHECK(row.method == "exact");
  }
  CHECK(rep.n_B_estimate == 2);
  std::mt19937_64 rng(47);
  for (int t = 0; t < 10; ++t) {
    Rational r = q(1, 1L << (2 + rng() % 4));
    Rational c = q(long(rng() % 64), 64);
    if (c - r < 0 || c + r > 1) continue;
    auto rr = verify_local_ubiquity(sys, sys.default_rho(), sys.default_scale(), Ball(c, r), 2, 10, q(1));
    for (const auto& row : rr.rows) CHECK(row.ratio == 1);
  }
}

TEST_CASE("t selection rule") {
  auto t = auto_select_t(1, q(1, 8), 1, 0);
  REQUIRE(t);
  CHECK(*t == pow(q(2), -13));
  CHECK(first_valid_layer(1, *t, q(1, 8)) == 2);
  CHECK_FALSE(selection_rule_holds(1, pow(q(2), -12), q(1, 8), 10));
  auto t2 = auto_select_t(2, q(1, 8), 1, 0);
  CHECK(*t2 == pow(q(2), -19));
}

TEST_CASE("rationals-1 ratio: Farey walk, enumeration and Dirichlet bound agree") {
  const Rational t = q(1, 16);
  auto sys = ApproxSystem::rationals(1, t);
  ScaleSequence u(t);
  Ball B(q(1, 2), q(1, 8));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), u, B, 1, 5, q(1, 2));
  for (const auto& row : rep.rows) {
    CHECK(row.method == "exact");
    auto layer = enumerate_layer(sys, u, row.n, B, u.at(row.n - 1));
    std::vector<Ball> balls;
    for (const auto& m : layer.members) balls.emplace_back(m.xi, u.at(row.n - 1));
    CHECK(row.ratio == union_measure(balls, B, 1).lo / cube_measure(B));
    if (auto lb = dirichlet_ratio_bound(sys, u, B, row.n)) CHECK(*lb <= row.ratio);
  }
}

TEST_CASE("rationals-1 at the selected t") {
  const Rational t = pow(q(2), -13);
  auto sys = ApproxSystem::rationals(1, t);
  ScaleSequence u(t);
  Ball B(q(1, 2), q(1, 8));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), u, B, 2, 3, q(1, 2));
  CHECK(rep.rows[0].method == "exact");
  CHECK(rep.rows[1].method == "dirichlet-bound");
  CHECK(rep.pass);
  auto lb = dirichlet_ratio_bound(sys, u, B, 2);
  REQUIRE(lb);
  CHECK(*lb <= rep.rows[0].ratio);
  CHECK(*lb >= q(1, 2));
}

TEST_CASE("empty layers give ratio zero") {
  auto sys = ApproxSystem::rationals(1, q(1, 2));
  ScaleSequence u(q(1, 2));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), u, Ball(q(1, 2), q(1, 8)), 1, 1, q(1, 2));
  CHECK(rep.rows[0].method == "empty");
  CHECK(rep.rows[0].ratio == 0);
  CHECK_FALSE(rep.rows[0].pass);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("d=2 ubiquity uses a certified radius") {
  auto sys = ApproxSystem::rationals(2, q(1, 16));
  ScaleSequence u(q(1, 16));
  Ball B(Point{q(1, 2), q(1, 2)}, q(1, 8));
  auto rep = verify_local_ubiquity(sys, sys.default_rho(), u, B, 1, 3, q(1, 4));
  for (const auto& row : rep.rows) {
    CHECK(row.ratio >= 0);
    CHECK(row.ratio <= 1);
  }
}

TEST_CASE("parallel ubiquity rows match serial") {
  auto sys = ApproxSystem::rationals(1, q(1, 9));
  ScaleSequence u(q(1, 9));
  Ball B(q(2, 5), q(1, 10));
  UbiquityOptions s, p;
  s.exec = Exec::serial;
  auto a = verify_local_ubiquity(sys, sys.default_rho(), u, B, 1, 4, q(1, 2), s);
  auto b = verify_local_ubiquity(sys, sys.default_rho(), u, B, 1, 4, q(1, 2), p);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].ratio == b.rows[i].ratio);
}

TEST_CASE("Minkowski count bound") {
  auto a = minkowski_count_bound(3, Ball(q(1, 2), q(1, 4)), 1);
  CHECK(a.ok);
  CHECK(a.bound == q(9, 2));
  auto b = minkowski_count_bound(1, Ball(q(1, 2), q(1, 2)), 1);
  CHECK(b.count == 2);
  CHECK(b.bound == 4);
  auto c = minkowski_count_bound(2, Ball(Point{q(1, 2), q(1, 2)}, q(1, 4)), 2);
  CHECK(c.bound == 16);
  // grid scan
  long scan = 0;
  for (long p1 = -2; p1 <= 2; ++p1)
    for (long p2 = -2; p2 <= 2; ++p2)
      if (abs(Rational(q(p1, 2) - q(1, 2))) < q(3, 4) && abs(Rational(q(p2, 2) - q(1, 2))) < q(3, 4)) ++scan;
  CHECK(c.count == scan);
  std::mt19937_64 rng(53);
  for (int t = 0; t < 200; ++t) {
    const unsigned d = 1 + unsigned(rng() % 2);
    const long qq = 1 + long(rng() % 50);
    Point center;
    for (unsigned i = 0; i < d; ++i) center.push_back(q(long(rng() % 101), 100));
    auto m = minkowski_count_bound(qq, Ball(center, q(1 + long(rng() % 50), 100)), d);
    CHECK(m.ok);
  }
}
