#include "qdl/rational.hpp"

#include <stdexcept>

namespace qdl {

Rational::Rational(long num, long den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  v_ = mpq_class(num, den);
  v_.canonicalize();
}

Rational::Rational(const mpz_class& num, const mpz_class& den) {
  if (sgn(den) == 0) throw std::invalid_argument("Rational: zero denominator");
  v_ = mpq_class(num) / mpq_class(den);
  v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("Rational: division by zero");
  v_ /= o.v_;
  return *this;
}

std::optional<Rational> Rational::parse(std::string_view text) {
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? "1" : text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) return std::nullopt;
  mpz_class n{std::string(num)}, d{std::string(den)};
  if (sgn(d) == 0) return std::nullopt;
  return Rational(n, d);
}

std::string Rational::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

bool Rational::exact_sqrt(const Rational& x, Rational& out) {
  if (x.sign() < 0) return false;
  mpz_class num = x.numerator(), den = x.denominator();
  if (mpz_perfect_square_p(num.get_mpz_t()) == 0) return false;
  if (mpz_perfect_square_p(den.get_mpz_t()) == 0) return false;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  out = Rational(rn, rd);
  return true;
}

std::size_t Rational::hash() const {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](const mpz_class& z) {
    // FNV over the limb data plus sign.
    h ^= static_cast<std::size_t>(sgn(z)) + 0x9e3779b97f4a7c15ull;
    h *= 1099511628211ull;
    for (size_t i = 0; i < mpz_size(z.get_mpz_t()); ++i) {
      h ^= static_cast<std::size_t>(mpz_getlimbn(z.get_mpz_t(), i));
      h *= 1099511628211ull;
    }
  };
  mix(v_.get_num());
  mix(v_.get_den());
  return h;
}

}  // namespace qdl
