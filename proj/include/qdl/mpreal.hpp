#pragma once

#include <mpfr.h>

#include <string>

#include "qdl/rational.hpp"

namespace qdl {

/// Working precision in bits for irrational quantities (sin² of rotation
/// angles). Defaults to 128; the QDL_PRECISION_BITS environment variable
/// overrides it (clamped to at least 64). Set once at startup.
int precision_bits();
void set_precision_bits(int bits);

/// Thin RAII wrapper over an mpfr_t at the configured global precision.
class MpReal {
 public:
  MpReal();
  MpReal(const MpReal& o);
  MpReal(MpReal&& o) noexcept;
  MpReal& operator=(const MpReal& o);
  MpReal& operator=(MpReal&& o) noexcept;
  ~MpReal();

  explicit MpReal(double d);
  explicit MpReal(long n);
  explicit MpReal(const Rational& q);

  static MpReal pi();
  static MpReal sqrt2();

  MpReal operator-() const;
  friend MpReal operator+(const MpReal& a, const MpReal& b);
  friend MpReal operator-(const MpReal& a, const MpReal& b);
  friend MpReal operator*(const MpReal& a, const MpReal& b);
  friend MpReal operator/(const MpReal& a, const MpReal& b);

  friend bool operator==(const MpReal& a, const MpReal& b) { return mpfr_cmp(a.v_, b.v_) == 0; }
  friend bool operator<(const MpReal& a, const MpReal& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
  friend bool operator<=(const MpReal& a, const MpReal& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
  friend bool operator>(const MpReal& a, const MpReal& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
  friend bool operator>=(const MpReal& a, const MpReal& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }

  MpReal sin() const;
  MpReal sqr() const;
  MpReal abs() const;

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Deterministic decimal rendering ("%.<digits>Re").
  std::string str(int digits = 24) const;

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

/// sin²(steps · unit · √2 · π) at the working precision, computed at a given
/// precision override (0 = global). Returns exactly 0 for steps = 0 without
/// touching floating point.
MpReal sinsq_rotation(long steps, const Rational& unit, int precision_override = 0);

}  // namespace qdl
