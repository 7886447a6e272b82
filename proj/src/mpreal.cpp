#include "qdl/mpreal.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

namespace qdl {

namespace {
int g_precision_bits = [] {
  if (const char* env = std::getenv("QDL_PRECISION_BITS")) {
    int v = std::atoi(env);
    if (v > 0) return std::max(v, 64);
  }
  return 128;
}();
}  // namespace

int precision_bits() { return g_precision_bits; }
void set_precision_bits(int bits) { g_precision_bits = std::max(bits, 64); }

MpReal::MpReal() { mpfr_init2(v_, g_precision_bits); mpfr_set_zero(v_, 1); }
MpReal::MpReal(const MpReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
MpReal::MpReal(MpReal&& o) noexcept { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_swap(v_, o.v_); }
MpReal& MpReal::operator=(const MpReal& o) {
  if (this != &o) { mpfr_set_prec(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  return *this;
}
MpReal& MpReal::operator=(MpReal&& o) noexcept {
  if (this != &o) mpfr_swap(v_, o.v_);
  return *this;
}
MpReal::~MpReal() { mpfr_clear(v_); }

MpReal::MpReal(double d) { mpfr_init2(v_, g_precision_bits); mpfr_set_d(v_, d, MPFR_RNDN); }
MpReal::MpReal(long n) { mpfr_init2(v_, g_precision_bits); mpfr_set_si(v_, n, MPFR_RNDN); }
MpReal::MpReal(const Rational& q) {
  mpfr_init2(v_, g_precision_bits);
  mpfr_set_q(v_, q.raw().get_mpq_t(), MPFR_RNDN);
}

MpReal MpReal::pi() { MpReal r; mpfr_const_pi(r.v_, MPFR_RNDN); return r; }
MpReal MpReal::sqrt2() { MpReal r; mpfr_sqrt_ui(r.v_, 2, MPFR_RNDN); return r; }

MpReal MpReal::operator-() const { MpReal r(*this); mpfr_neg(r.v_, r.v_, MPFR_RNDN); return r; }

MpReal operator+(const MpReal& a, const MpReal& b) { MpReal r; mpfr_add(r.get(), a.v_, b.v_, MPFR_RNDN); return r; }
MpReal operator-(const MpReal& a, const MpReal& b) { MpReal r; mpfr_sub(r.get(), a.v_, b.v_, MPFR_RNDN); return r; }
MpReal operator*(const MpReal& a, const MpReal& b) { MpReal r; mpfr_mul(r.get(), a.v_, b.v_, MPFR_RNDN); return r; }
MpReal operator/(const MpReal& a, const MpReal& b) { MpReal r; mpfr_div(r.get(), a.v_, b.v_, MPFR_RNDN); return r; }

MpReal MpReal::sin() const { MpReal r; mpfr_sin(r.v_, v_, MPFR_RNDN); return r; }
MpReal MpReal::sqr() const { MpReal r; mpfr_sqr(r.v_, v_, MPFR_RNDN); return r; }
MpReal MpReal::abs() const { MpReal r; mpfr_abs(r.v_, v_, MPFR_RNDN); return r; }

std::string MpReal::str(int digits) const {
  std::vector<char> buf(64 + digits);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Re", digits, v_);
  return std::string(buf.data());
}

MpReal sinsq_rotation(long steps, const Rational& unit, int precision_override) {
  if (steps == 0) return MpReal();
  int prec = precision_override > 0 ? precision_override : g_precision_bits;
  MpReal r;
  mpfr_t pi, s2, arg;
  mpfr_inits2(prec, pi, s2, arg, (mpfr_ptr)0);
  mpfr_set_prec(r.get(), prec);
  mpfr_const_pi(pi, MPFR_RNDN);
  mpfr_sqrt_ui(s2, 2, MPFR_RNDN);
  mpfr_mul(arg, pi, s2, MPFR_RNDN);
  mpfr_mul_si(arg, arg, steps, MPFR_RNDN);
  mpfr_mul_q(arg, arg, unit.raw().get_mpq_t(), MPFR_RNDN);
  mpfr_sin(arg, arg, MPFR_RNDN);
  mpfr_sqr(r.get(), arg, MPFR_RNDN);
  mpfr_clears(pi, s2, arg, (mpfr_ptr)0);
  return r;
}

}  // namespace qdl
