#pragma once

#include <string>

#include "qdl/mpreal.hpp"
#include "qdl/rational.hpp"

namespace qdl {

/// Probability mass that stays an exact rational for as long as the
/// computation permits. Mixing in an irrational factor (a rotation
/// measurement) demotes the value to a high-precision float; exact values
/// never pick up rounding. Either representation supports field arithmetic,
/// which is all the round solver needs.
class Prob {
 public:
  Prob() : exact_(true), rat_(0) {}
  Prob(const Rational& r) : exact_(true), rat_(r) {}  // NOLINT
  Prob(long n) : exact_(true), rat_(n) {}             // NOLINT
  explicit Prob(const MpReal& a) : exact_(false), approx_(a) {}

  static Prob zero() { return Prob(); }
  static Prob one() { return Prob(Rational(1)); }

  bool exact() const { return exact_; }
  const Rational& rational() const;
  MpReal to_mpreal() const { return exact_ ? MpReal(rat_) : approx_; }
  double to_double() const { return exact_ ? rat_.to_double() : approx_.to_double(); }
  bool is_zero() const { return exact_ ? rat_.is_zero() : approx_.is_zero(); }

  Prob& operator+=(const Prob& o);
  Prob& operator-=(const Prob& o);
  Prob& operator*=(const Prob& o);
  Prob& operator/=(const Prob& o);

  friend Prob operator+(Prob a, const Prob& b) { return a += b; }
  friend Prob operator-(Prob a, const Prob& b) { return a -= b; }
  friend Prob operator*(Prob a, const Prob& b) { return a *= b; }
  friend Prob operator/(Prob a, const Prob& b) { return a /= b; }

  friend bool operator==(const Prob& a, const Prob& b);
  friend bool operator<(const Prob& a, const Prob& b);
  friend bool operator<=(const Prob& a, const Prob& b) { return a < b || a == b; }
  friend bool operator>(const Prob& a, const Prob& b) { return b < a; }
  friend bool operator>=(const Prob& a, const Prob& b) { return b <= a; }

  /// "num/den" for exact values, scientific decimal otherwise.
  std::string str() const;

 private:
  bool exact_;
  Rational rat_;
  MpReal approx_;
};

}  // namespace qdl
