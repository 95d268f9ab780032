#include "dioph/functions.hpp"

#include <algorithm>

namespace dioph {

ScaleSequence::ScaleSequence(Rational t_, long offset_, long stride_)
    : t(std::move(t_)), offset(offset_), stride(stride_) {
  if (!(0 < t && t < 1)) throw DomainError("scale ratio t must lie in (0,1)");
  if (offset < 0) throw DomainError("scale offset must be non-negative");
  if (stride < 1) throw DomainError("scale stride must be positive");
}

Rational ScaleSequence::at(long n) const {
  const long e = stride * n + offset;
  if (e < 0) throw DomainError("index before sequence start");
  return pow(t, e);
}

ScaleSequence ScaleSequence::subsequence(long step, long phase) const {
  if (step < 1 || phase < 0) throw DomainError("bad subsequence");
  return ScaleSequence(t, offset + stride * phase, stride * step);
}

Rational eval_scale(const ScaleSequence& seq, long n) { return seq.at(n); }

ApproxFunction ApproxFunction::power(Rational coef, Rational exponent) {
  if (coef <= 0) throw DomainError("power coefficient must be positive");
  ApproxFunction f;
  f.kind_ = Kind::power;
  f.coef_ = std::move(coef);
  f.exponent_ = std::move(exponent);
  return f;
}

ApproxFunction ApproxFunction::power_log(Rational coef, Rational exponent, Rational log_exponent) {
  ApproxFunction f = power(std::move(coef), std::move(exponent));
  f.kind_ = Kind::power_log;
  f.log_exponent_ = std::move(log_exponent);
  return f;
}

ApproxFunction ApproxFunction::table(std::vector<std::pair<Rational, Rational>> breakpoints) {
  if (breakpoints.empty()) throw DomainError("table needs at least one breakpoint");
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    if (breakpoints[i].second <= 0) throw DomainError("table values must be positive");
    if (i > 0 && !(breakpoints[i - 1].first < breakpoints[i].first))
      throw DomainError("table breakpoints must be strictly increasing");
  }
  ApproxFunction f;
  f.kind_ = Kind::table;
  f.table_ = std::move(breakpoints);
  return f;
}

std::optional<Rational> ApproxFunction::exact(const Rational& x) const {
  if (x <= 0) throw DomainError("gauge functions are evaluated at x > 0");
  switch (kind_) {
    case Kind::table: {
      for (const auto& [bx, by] : table_)
        if (x <= bx) return by;
      return table_.back().second;
    }
    case Kind::power: {
      if (exponent_.get_den() == 1 && exponent_.get_num().fits_slong_p())
        return Rational(coef_ * pow(x, exponent_.get_num().get_si()));
      Enclosure e = pow(x, exponent_, 64);
      if (e.exact()) return Rational(coef_ * e.lo);
      return std::nullopt;
    }
    case Kind::power_log:
      if (log_exponent_ == 0) {
        Enclosure e = pow(x, exponent_, 64);
        if (e.exact()) return Rational(coef_ * e.lo);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

Enclosure ApproxFunction::eval(const Rational& x, long bits) const {
  if (x <= 0) throw DomainError("gauge functions are evaluated at x > 0");
  switch (kind_) {
    case Kind::table:
      return Enclosure(*exact(x));
    case Kind::power:
      return scale(pow(x, exponent_, bits), coef_);
    case Kind::power_log: {
      if (x >= 1) throw DomainError("power-log gauge requires 0 < x < 1");
      Enclosure base = scale(pow(x, exponent_, bits), coef_);
      if (log_exponent_ == 0) return base;
      Enclosure l = log(Enclosure(Rational(1 / x)), bits);
      return base * pow(l, log_exponent_, bits);
    }
  }
  throw DomainError("unknown gauge kind");
}

Real ApproxFunction::at(const Rational& x) const {
  return [f = *this, x](long bits) { return f.eval(x, bits); };
}

bool ApproxFunction::non_decreasing() const {
  switch (kind_) {
    case Kind::table:
      return std::is_sorted(table_.begin(), table_.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; });
    case Kind::power:
      return exponent_ >= 0;
    case Kind::power_log:
      // increasing on (0, exp(-beta/gamma)) when gamma > 0 and beta >= 0
      return exponent_ > 0 && log_exponent_ >= 0;
  }
  return false;
}

bool ApproxFunction::non_increasing() const {
  switch (kind_) {
    case Kind::table:
      return std::is_sorted(table_.begin(), table_.end(),
                            [](const auto& a, const auto& b) { return a.second > b.second; });
    case Kind::power:
      return exponent_ <= 0;
    case Kind::power_log:
      return false;
  }
  return false;
}

std::string ApproxFunction::describe() const {
  switch (kind_) {
    case Kind::power:
      return to_string(coef_) + "*x^(" + to_string(exponent_) + ")";
    case Kind::power_log:
      return to_string(coef_) + "*x^(" + to_string(exponent_) + ")*log(1/x)^(" +
             to_string(log_exponent_) + ")";
    case Kind::table:
      return "table[" + std::to_string(table_.size()) + "]";
  }
  return "?";
}

Real g_real(const ApproxFunction& phi, const ApproxFunction& rho, const Rational& s,
            const Rational& delta, const Rational& x) {
  if (x <= 0 || s <= 0 || delta <= 0) throw DomainError("g needs x, s, delta > 0");
  return [phi, rho, s, delta, x](long bits) {
    Enclosure r = rho.eval(x, bits);
    if (r.hi <= 0) throw DomainError("rho vanishes");
    Enclosure num = pow(phi.eval(x, bits), s, bits);
    Enclosure den = pow(r, delta, bits);
    return num / den;
  };
}

Enclosure g_value(const ApproxFunction& phi, const ApproxFunction& rho, const Rational& s,
                  const Rational& delta, const Rational& x, const Rational& tol) {
  if (auto r = rho.exact(x); r && *r == 0) throw DomainError("rho vanishes");
  return refine(g_real(phi, rho, s, delta, x), tol);
}

RegularityCheck check_regularity(const ApproxFunction& h, const ScaleSequence& seq,
                                 const RegularityWitness& w, long n_hi) {
  if (!(0 < w.lambda1 && w.lambda1 < w.lambda2 && w.lambda2 < 1))
    return {false, w.n0, "need 0 < lambda1 < lambda2 < 1"};
  for (long n = w.n0; n <= n_hi; ++n) {
    const Rational un = seq.at(n);
    const Rational un1 = seq.at(n + 1);
    Real hn = h.at(un);
    Real hn1 = h.at(un1);
    Real lo = [hn, l = w.lambda1](long bits) { return scale(hn(bits), l); };
    Real hi = [hn, l = w.lambda2](long bits) { return scale(hn(bits), l); };
    if (compare(lo, hn1) == Ordering::greater) return {false, n, "lambda1 h(u_n) > h(u_{n+1})"};
    if (compare(hn1, hi) == Ordering::greater) return {false, n, "h(u_{n+1}) > lambda2 h(u_n)"};
    if (compare(hn, constant(un)) == Ordering::greater) return {false, n, "h(u_n) > u_n"};
  }
  return {};
}

}  // namespace dioph
