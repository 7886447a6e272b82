#include "qdl/prob.hpp"

#include <stdexcept>

namespace qdl {

const Rational& Prob::rational() const {
  if (!exact_) throw std::logic_error("Prob: rational() on inexact value");
  return rat_;
}

Prob& Prob::operator+=(const Prob& o) {
  if (exact_ && o.exact_) { rat_ += o.rat_; return *this; }
  approx_ = to_mpreal() + o.to_mpreal();
  exact_ = false;
  return *this;
}

Prob& Prob::operator-=(const Prob& o) {
  if (exact_ && o.exact_) { rat_ -= o.rat_; return *this; }
  approx_ = to_mpreal() - o.to_mpreal();
  exact_ = false;
  return *this;
}

Prob& Prob::operator*=(const Prob& o) {
  // 0 stays exact regardless of the other operand.
  if (exact_ && rat_.is_zero()) return *this;
  if (o.exact_ && o.rat_.is_zero()) { *this = Prob(); return *this; }
  if (exact_ && o.exact_) { rat_ *= o.rat_; return *this; }
  approx_ = to_mpreal() * o.to_mpreal();
  exact_ = false;
  return *this;
}

Prob& Prob::operator/=(const Prob& o) {
  if (o.is_zero()) throw std::domain_error("Prob: division by zero");
  if (exact_ && rat_.is_zero()) return *this;
  if (exact_ && o.exact_) { rat_ /= o.rat_; return *this; }
  approx_ = to_mpreal() / o.to_mpreal();
  exact_ = false;
  return *this;
}

bool operator==(const Prob& a, const Prob& b) {
  if (a.exact_ && b.exact_) return a.rat_ == b.rat_;
  return a.to_mpreal() == b.to_mpreal();
}

bool operator<(const Prob& a, const Prob& b) {
  if (a.exact_ && b.exact_) return a.rat_ < b.rat_;
  return a.to_mpreal() < b.to_mpreal();
}

std::string Prob::str() const { return exact_ ? rat_.str() : approx_.str(); }

}  // namespace qdl
