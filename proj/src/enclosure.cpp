#include "dioph/enclosure.hpp"

#include <mpfr.h>

#include <algorithm>
#include <array>

namespace dioph {

namespace {

// RAII holder for an mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(long bits) { mpfr_init2(v_, static_cast<mpfr_prec_t>(bits)); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

Rational from_mpfr(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return Rational(0);
  Integer m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
  if (e >= 0) {
    Integer shifted;
    mpz_mul_2exp(shifted.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    return Rational(shifted);
  }
  Integer den;
  mpz_setbit(den.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  return make_rational(m, den);
}

// One-sided rounding of a monotone map applied to a positive rational.
// `up` selects the rounding direction for the whole chain.
Rational pow_bound(const Rational& x, const Rational& e, long bits, bool up) {
  const mpfr_rnd_t rnd = up ? MPFR_RNDU : MPFR_RNDD;
  const mpfr_rnd_t anti = up ? MPFR_RNDD : MPFR_RNDU;
  const bool negative = e < 0;
  Integer p = negative ? Integer(-e.get_num()) : Integer(e.get_num());
  const unsigned long k = e.get_den().get_ui();
  Mpfr t(bits);
  // For negative exponents x^e = 1 / x^|e|: bound the denominator the
  // opposite way, then divide rounding in the requested direction.
  const mpfr_rnd_t inner = negative ? anti : rnd;
  mpfr_set_q(t.get(), x.get_mpq_t(), inner);
  if (!p.fits_ulong_p()) throw DomainError("exponent numerator too large");
  mpfr_pow_ui(t.get(), t.get(), p.get_ui(), inner);
  if (k != 1) mpfr_rootn_ui(t.get(), t.get(), k, inner);
  if (negative) mpfr_ui_div(t.get(), 1, t.get(), rnd);
  return from_mpfr(t.get());
}

bool exact_pow(const Rational& x, const Rational& e, Rational& out) {
  if (!e.get_num().fits_slong_p() || !e.get_den().fits_ulong_p()) return false;
  const long p = e.get_num().get_si();
  const unsigned long k = e.get_den().get_ui();
  // Powering first can blow up; only try the exact route for moderate sizes.
  if (k == 1) {
    out = pow(x, p);
    return true;
  }
  Rational root;
  if (!exact_root(x, k, root)) return false;
  out = pow(root, p);
  return true;
}

}  // namespace

Enclosure::Enclosure(const Rational& l, const Rational& h) : lo(l), hi(h) {
  if (hi < lo) throw DomainError("enclosure with lo > hi");
}

Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return Enclosure(Rational(a.lo + b.lo), Rational(a.hi + b.hi));
}

Enclosure operator-(const Enclosure& a, const Enclosure& b) {
  return Enclosure(Rational(a.lo - b.hi), Rational(a.hi - b.lo));
}

Enclosure operator*(const Enclosure& a, const Enclosure& b) {
  std::array<Rational, 4> p{Rational(a.lo * b.lo), Rational(a.lo * b.hi), Rational(a.hi * b.lo),
                            Rational(a.hi * b.hi)};
  auto [mn, mx] = std::minmax_element(p.begin(), p.end());
  return Enclosure(*mn, *mx);
}

Enclosure operator/(const Enclosure& a, const Enclosure& b) {
  if (b.lo <= 0 && b.hi >= 0) throw DomainError("division by an enclosure containing zero");
  return a * Enclosure(Rational(1 / b.hi), Rational(1 / b.lo));
}

Enclosure scale(const Enclosure& a, const Rational& c) {
  return c >= 0 ? Enclosure(Rational(a.lo * c), Rational(a.hi * c))
                : Enclosure(Rational(a.hi * c), Rational(a.lo * c));
}

Enclosure pow(const Rational& x, const Rational& e, long bits) {
  if (x <= 0) throw DomainError("pow requires a positive base");
  Rational exact;
  if (exact_pow(x, e, exact)) return Enclosure(exact);
  return Enclosure(pow_bound(x, e, bits, false), pow_bound(x, e, bits, true));
}

Enclosure pow(const Enclosure& x, const Rational& e, long bits) {
  if (x.exact()) return pow(x.lo, e, bits);
  if (x.lo <= 0) throw DomainError("pow requires a positive base");
  if (e == 0) return Enclosure(Rational(1));
  Enclosure a = pow(x.lo, e, bits);
  Enclosure b = pow(x.hi, e, bits);
  return e > 0 ? Enclosure(a.lo, b.hi) : Enclosure(b.lo, a.hi);
}

Enclosure log(const Enclosure& x, long bits) {
  if (x.lo <= 0) throw DomainError("log requires a positive argument");
  if (x.exact() && x.lo == 1) return Enclosure(Rational(0));
  Mpfr lo(bits), hi(bits);
  mpfr_set_q(lo.get(), x.lo.get_mpq_t(), MPFR_RNDD);
  mpfr_log(lo.get(), lo.get(), MPFR_RNDD);
  mpfr_set_q(hi.get(), x.hi.get_mpq_t(), MPFR_RNDU);
  mpfr_log(hi.get(), hi.get(), MPFR_RNDU);
  return Enclosure(from_mpfr(lo.get()), from_mpfr(hi.get()));
}

std::optional<Ordering> try_compare(const Real& a, const Real& b, long max_bits) {
  for (long bits = 64; bits <= max_bits; bits *= 2) {
    Enclosure x = a(bits);
    Enclosure y = b(bits);
    if (x.hi < y.lo) return Ordering::less;
    if (x.lo > y.hi) return Ordering::greater;
    if (x.exact() && y.exact()) return Ordering::equal;
  }
  return std::nullopt;
}

Ordering compare(const Real& a, const Real& b, long max_bits) {
  if (auto o = try_compare(a, b, max_bits)) return *o;
  throw UndecidedComparison("comparison undecided at " + std::to_string(max_bits) + " bits");
}

Enclosure refine(const Real& x, const Rational& tol, long max_bits) {
  Enclosure e = x(64);
  for (long bits = 128; e.width() > tol && bits <= max_bits; bits *= 2) e = x(bits);
  return e;
}

std::string to_string(const Enclosure& e) {
  if (e.exact()) return to_string(e.lo);
  return "[" + to_string(e.lo) + ", " + to_string(e.hi) + "]";
}

}  // namespace dioph
