#include "dioph/rational.hpp"

#include <cmath>

namespace dioph {

Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw DomainError("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

namespace {

Integer parse_integer(std::string_view s) {
  if (s.empty()) throw DomainError("empty integer literal");
  std::size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (start == s.size()) throw DomainError("bad integer literal");
  for (std::size_t i = start; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9') throw DomainError("bad integer literal: " + std::string(s));
  std::string body(s[0] == '+' ? s.substr(1) : s);
  return Integer(body, 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos)
    return make_rational(parse_integer(text.substr(0, slash)), parse_integer(text.substr(slash + 1)));
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    std::string digits(neg ? whole.substr(1) : whole);
    if (digits.empty() || digits == "+") digits = "0";
    digits += std::string(frac);
    Integer num = parse_integer(digits);
    if (neg) num = -num;
    return make_rational(num, pow(Integer(10), frac.size()));
  }
  return make_rational(parse_integer(text), Integer(1));
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_string(const Integer& z) { return z.get_str(); }

Integer floor(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

Integer pow(const Integer& z, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), z.get_mpz_t(), e);
  return r;
}

Rational pow(const Rational& q, long e) {
  if (e == 0) return Rational(1);
  if (e < 0) {
    if (q == 0) throw DomainError("zero to a negative power");
    return make_rational(pow(q.get_den(), static_cast<unsigned long>(-e)),
                         pow(q.get_num(), static_cast<unsigned long>(-e)));
  }
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<unsigned long>(e));
  mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<unsigned long>(e));
  return r;  // already canonical: powers of coprime integers stay coprime
}

bool exact_root(const Rational& q, unsigned long k, Rational& out) {
  if (q < 0 || k == 0) return false;
  Integer n, d;
  if (mpz_root(n.get_mpz_t(), q.get_num_mpz_t(), k) == 0) return false;
  if (mpz_root(d.get_mpz_t(), q.get_den_mpz_t(), k) == 0) return false;
  out = make_rational(n, d);
  return true;
}

unsigned long valuation(const Integer& z, const Integer& base) {
  if (z == 0) throw DomainError("valuation of zero");
  unsigned long v = 0;
  Integer r = z;
  while (mpz_divisible_p(r.get_mpz_t(), base.get_mpz_t())) {
    r /= base;
    ++v;
  }
  return v;
}

double approx_log2(const Rational& q) {
  long en = 0, ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log2(std::fabs(mn)) - std::log2(md) + static_cast<double>(en - ed);
}

double to_double(const Rational& q) { return q.get_d(); }

}  // namespace dioph
