#include "qdl/quantum.hpp"

#include <random>
#include <stdexcept>

namespace qdl {

namespace {
std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
  // xoshiro256**
  auto rotl = [](std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
  std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Rng Rng::split(std::uint64_t index) const {
  std::uint64_t x = s_[0] ^ (0xa0761d6478bd642full + index * 0xe7037ed1a0b428dbull);
  return Rng(splitmix64(x));
}

Rational StateVector::squared_norm() const {
  Rational sum(0);
  for (const auto& a : amps) sum += a * a;
  return sum;
}

StateVector StateVector::basis(int dim, int index) {
  StateVector v = zero(dim);
  v.amps[static_cast<size_t>(index)] = Rational(1);
  return v;
}

StateVector StateVector::zero(int dim) {
  StateVector v;
  v.amps.assign(static_cast<size_t>(dim), Rational(0));
  return v;
}

RationalMatrix RationalMatrix::zero(int dim) {
  RationalMatrix m;
  m.dim = dim;
  m.cells.assign(static_cast<size_t>(dim) * dim, Rational(0));
  return m;
}

RationalMatrix RationalMatrix::identity(int dim) {
  RationalMatrix m = zero(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = Rational(1);
  return m;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix m = zero(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m.at(c, r) = at(r, c);
  return m;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& o) const {
  if (dim != o.dim) throw std::invalid_argument("RationalMatrix: dimension mismatch");
  RationalMatrix m = zero(dim);
  for (int r = 0; r < dim; ++r)
    for (int k = 0; k < dim; ++k) {
      if (at(r, k).is_zero()) continue;
      for (int c = 0; c < dim; ++c) {
        if (o.at(k, c).is_zero()) continue;
        m.at(r, c) += at(r, k) * o.at(k, c);
      }
    }
  return m;
}

StateVector RationalMatrix::apply(const StateVector& v) const {
  if (v.dim() != dim) throw std::invalid_argument("RationalMatrix: vector dimension mismatch");
  StateVector out = StateVector::zero(dim);
  for (int r = 0; r < dim; ++r) {
    Rational acc(0);
    for (int c = 0; c < dim; ++c) {
      if (!at(r, c).is_zero() && !v.amps[c].is_zero()) acc += at(r, c) * v.amps[c];
    }
    out.amps[r] = acc;
  }
  return out;
}

std::string to_string(OutcomeAction a) {
  switch (a) {
    case OutcomeAction::kContinue: return "continue";
    case OutcomeAction::kRestart: return "restart";
    case OutcomeAction::kAccept: return "accept";
    case OutcomeAction::kReject: return "reject";
  }
  return "?";
}

bool check_completeness(const Superoperator& s) {
  if (s.elements.empty()) throw std::invalid_argument("Superoperator: no elements");
  int d = s.elements.front().matrix.dim;
  for (const auto& e : s.elements)
    if (e.matrix.dim != d)
      throw std::invalid_argument("Superoperator '" + s.label + "': element dimension mismatch");
  RationalMatrix sum = RationalMatrix::zero(d);
  for (const auto& e : s.elements) {
    RationalMatrix t = e.matrix.transpose() * e.matrix;
    for (size_t i = 0; i < sum.cells.size(); ++i) sum.cells[i] += t.cells[i];
  }
  return sum == RationalMatrix::identity(d);
}

std::vector<ExactBranch> apply_exact(const StateVector& v, const Superoperator& s) {
  if (v.dim() != s.dim()) throw std::invalid_argument("apply_exact: dimension mismatch");
  std::vector<ExactBranch> out;
  out.reserve(s.elements.size());
  for (size_t i = 0; i < s.elements.size(); ++i) {
    ExactBranch b;
    b.outcome = static_cast<int>(i);
    b.vec = s.elements[i].matrix.apply(v);
    b.weight = b.vec.squared_norm();
    out.push_back(std::move(b));
  }
  return out;
}

SampledOutcome apply_sampled(const StateVector& v, const Superoperator& s, Rng& rng) {
  Rational norm = v.squared_norm();
  if (norm.is_zero()) throw std::domain_error("apply_sampled: zero-norm input");
  auto branches = apply_exact(v, s);
  double u = rng.uniform() * norm.to_double();
  double acc = 0.0;
  size_t pick = branches.size() - 1;
  for (size_t i = 0; i < branches.size(); ++i) {
    acc += branches[i].weight.to_double();
    if (u < acc) { pick = i; break; }
  }
  // Never land on a zero-weight branch off the end of the accumulation.
  while (branches[pick].weight.is_zero() && pick > 0) --pick;

  SampledOutcome res;
  res.outcome = branches[pick].outcome;
  res.vec = std::move(branches[pick].vec);
  Rational root;
  if (Rational::exact_sqrt(branches[pick].weight, root) && !root.is_zero()) {
    for (auto& a : res.vec.amps) a /= root;
    res.normalized = true;
  }
  return res;
}

RotationTracker rotate(RotationTracker t, int direction, long units) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("rotate: direction must be ±1");
  if (units < 0) throw std::invalid_argument("rotate: units must be nonnegative");
  t.steps += direction * units;
  return t;
}

MpReal q1_probability(const RotationTracker& t) { return sinsq_rotation(t.steps, t.unit); }

}  // namespace qdl
