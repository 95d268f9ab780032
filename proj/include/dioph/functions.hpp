#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dioph/enclosure.hpp"
#include "dioph/rational.hpp"

namespace dioph {

/// u_n = t^(stride * n + offset). With stride 1 this is the plain {t^n}
/// sequence; larger strides arise from subsequence thinning.
struct ScaleSequence {
  Rational t;
  long offset = 0;
  long stride = 1;

  ScaleSequence() = default;
  ScaleSequence(Rational t_, long offset_ = 0, long stride_ = 1);

  /// Exact u_n. Throws DomainError("index before sequence start") when the
  /// effective exponent is negative.
  Rational at(long n) const;
  /// u_n / u_{n+1}, constant for a geometric sequence.
  Rational ratio() const { return pow(t, -stride); }
  /// The subsequence n -> u_{step * n + phase}.
  ScaleSequence subsequence(long step, long phase = 0) const;
};

Rational eval_scale(const ScaleSequence& seq, long n);

/// Non-negative monotone gauge functions: phi, rho, psi.
class ApproxFunction {
 public:
  enum class Kind { power, power_log, table };

  /// C * x^gamma (gamma may be negative, e.g. psi(q) = q^-tau).
  static ApproxFunction power(Rational coef, Rational exponent);
  /// C * x^gamma * log(1/x)^beta, defined for 0 < x < 1.
  static ApproxFunction power_log(Rational coef, Rational exponent, Rational log_exponent);
  /// Left-continuous step function: f(x) = y_i for the first breakpoint x_i >= x,
  /// and the last value beyond the final breakpoint.
  static ApproxFunction table(std::vector<std::pair<Rational, Rational>> breakpoints);

  Kind kind() const { return kind_; }
  const Rational& coef() const { return coef_; }
  const Rational& exponent() const { return exponent_; }
  const Rational& log_exponent() const { return log_exponent_; }
  const std::vector<std::pair<Rational, Rational>>& breakpoints() const { return table_; }

  Enclosure eval(const Rational& x, long bits = 256) const;
  Real at(const Rational& x) const;
  /// Rational value when one exists and is cheap to find.
  std::optional<Rational> exact(const Rational& x) const;

  bool non_decreasing() const;
  bool non_increasing() const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::power;
  Rational coef_{1};
  Rational exponent_{1};
  Rational log_exponent_{0};
  std::vector<std::pair<Rational, Rational>> table_;
};

/// g(x) = phi(x)^s / rho(x)^delta as a refinable real.
Real g_real(const ApproxFunction& phi, const ApproxFunction& rho, const Rational& s,
            const Rational& delta, const Rational& x);

/// Enclosure of g(x) of width at most `tol` (exact when rational).
/// Throws DomainError("rho vanishes") when rho(x) = 0.
Enclosure g_value(const ApproxFunction& phi, const ApproxFunction& rho, const Rational& s,
                  const Rational& delta, const Rational& x, const Rational& tol);

/// u-regularity constants: lambda1 h(u_n) <= h(u_{n+1}) <= lambda2 h(u_n) and
/// h(u_n) <= u_n for n >= n0.
struct RegularityWitness {
  Rational lambda1;
  Rational lambda2;
  long n0 = 1;
};

struct RegularityCheck {
  bool ok = true;
  long first_failure = -1;
  std::string reason;
};

/// Verifies the witness on n in [n0, n_hi].
RegularityCheck check_regularity(const ApproxFunction& h, const ScaleSequence& seq,
                                 const RegularityWitness& w, long n_hi);

}  // namespace dioph
