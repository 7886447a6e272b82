#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "qdl/quantum.hpp"

using namespace qdl;

namespace {

Superoperator fair_coin(int dim) {
  Superoperator s;
  s.label = "fair-coin";
  for (int i = 0; i < 4; ++i) {
    OperationElement e;
    e.matrix = RationalMatrix::zero(dim);
    for (int k = 0; k < dim; ++k) e.matrix.at(k, k) = Rational(1, 2);
    e.action = OutcomeAction::kContinue;
    e.label = i < 2 ? "heads" : "tails";
    s.elements.push_back(std::move(e));
  }
  return s;
}

Superoperator identity_only(int dim) {
  Superoperator s;
  s.label = "identity";
  s.elements.push_back({RationalMatrix::identity(dim), OutcomeAction::kContinue, "id"});
  return s;
}

}  // namespace

TEST_CASE("rational canonical form and parsing") {
  CHECK(Rational(2, 4).str() == "1/2");
  CHECK(Rational(-2, -4).str() == "1/2");
  CHECK(Rational(3, -10).str() == "-3/10");
  CHECK(Rational(0, 7).str() == "0");
  CHECK(Rational::parse("-3/10")->str() == "-3/10");
  CHECK(Rational::parse("12")->str() == "12");
  CHECK(!Rational::parse("1/0").has_value());
  CHECK(!Rational::parse("a/2").has_value());
  CHECK(!Rational::parse("1/ 2").has_value());
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) * Rational(3, 5) == Rational(1, 5));

  Rational root;
  CHECK(Rational::exact_sqrt(Rational(9, 16), root));
  CHECK(root == Rational(3, 4));
  CHECK(!Rational::exact_sqrt(Rational(1, 2), root));
  CHECK(!Rational::exact_sqrt(Rational(-4), root));
}

TEST_CASE("completeness: fair coin, identity, and a bad pair") {
  CHECK(check_completeness(fair_coin(4)));
  CHECK(check_completeness(identity_only(3)));

  // {1/2 I, 1/2 I} sums to I/2, not I.
  Superoperator bad;
  bad.label = "half";
  for (int i = 0; i < 2; ++i) {
    OperationElement e;
    e.matrix = RationalMatrix::zero(4);
    for (int k = 0; k < 4; ++k) e.matrix.at(k, k) = Rational(1, 2);
    bad.elements.push_back(std::move(e));
  }
  CHECK(!check_completeness(bad));

  Superoperator mismatched = identity_only(2);
  mismatched.elements.push_back({RationalMatrix::zero(3), OutcomeAction::kContinue, ""});
  CHECK_THROWS(check_completeness(mismatched));
}

TEST_CASE("apply_exact on the fair coin gives four branches of weight 1/4") {
  auto v = StateVector::basis(4, 0);
  auto branches = apply_exact(v, fair_coin(4));
  REQUIRE(branches.size() == 4);
  Rational total(0);
  for (const auto& b : branches) {
    CHECK(b.weight == Rational(1, 4));
    total += b.weight;
  }
  CHECK(total == v.squared_norm());
}

TEST_CASE("apply_exact on the zero vector yields all-zero weights") {
  auto v = StateVector::zero(4);
  for (const auto& b : apply_exact(v, fair_coin(4))) CHECK(b.weight.is_zero());
}

TEST_CASE("apply_exact main-branch weight matches the scalar oracle") {
  // Encoding-style element: first column (1/d, e/d, 0, 0)^T. From basis
  // vector e_0 the branch weight must be (1 + e^2)/d^2.
  const long d = 8, e = 5;
  Superoperator s;
  OperationElement main;
  main.matrix = RationalMatrix::zero(4);
  main.matrix.at(0, 0) = Rational(1, d);
  main.matrix.at(1, 0) = Rational(e, d);
  s.elements.push_back(main);
  auto branches = apply_exact(StateVector::basis(4, 0), s);
  // Scalar oracle: (1/d)^2 + (e/d)^2 computed digit by digit.
  Rational expect = Rational(1, d) * Rational(1, d) + Rational(e, d) * Rational(e, d);
  CHECK(branches[0].weight == expect);
  CHECK(branches[0].weight == Rational(1 + e * e, d * d));
}

TEST_CASE("exact branch weights always sum to the input squared norm") {
  // Property over a small family of vectors and the coin/identity ops.
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    StateVector v = StateVector::zero(4);
    for (auto& a : v.amps)
      a = Rational(static_cast<long>(rng.next_u64() % 19) - 9, 1 + static_cast<long>(rng.next_u64() % 7));
    for (const auto& s : {fair_coin(4), identity_only(4)}) {
      Rational total(0);
      for (const auto& b : apply_exact(v, s)) total += b.weight;
      CHECK(total == v.squared_norm());
    }
  }
}

TEST_CASE("apply_sampled is deterministic under the same seed") {
  auto v = StateVector::basis(4, 0);
  auto coin = fair_coin(4);
  std::vector<int> first, second;
  for (int round = 0; round < 2; ++round) {
    Rng rng(424242);
    auto& out = round == 0 ? first : second;
    for (int i = 0; i < 200; ++i) out.push_back(apply_sampled(v, coin, rng).outcome);
  }
  CHECK(first == second);
}

TEST_CASE("apply_sampled frequencies: heads is 0.5 +- 0.002 at 1e6 draws") {
  auto v = StateVector::basis(4, 0);
  auto coin = fair_coin(4);
  Rng rng(99);
  long heads = 0;
  const long trials = 1'000'000;
  for (long i = 0; i < trials; ++i)
    if (apply_sampled(v, coin, rng).outcome < 2) ++heads;
  double freq = static_cast<double>(heads) / trials;
  CHECK(freq == doctest::Approx(0.5).epsilon(0.004));  // 0.5 +- 0.002 absolute
  CHECK(std::abs(freq - 0.5) < 0.002);
}

TEST_CASE("apply_sampled chi-square against exact weights at 1e5 samples") {
  auto v = StateVector::basis(4, 0);
  auto coin = fair_coin(4);
  Rng rng(2024);
  const long n = 100'000;
  std::map<int, long> counts;
  for (long i = 0; i < n; ++i) ++counts[apply_sampled(v, coin, rng).outcome];
  double chi2 = 0;
  for (int o = 0; o < 4; ++o) {
    double expected = n / 4.0;
    double diff = counts[o] - expected;
    chi2 += diff * diff / expected;
  }
  // df = 3, p > 0.001 threshold.
  CHECK(chi2 < 16.266);
}

TEST_CASE("apply_sampled rejects a zero-norm input") {
  CHECK_THROWS(apply_sampled(StateVector::zero(4), fair_coin(4), *new Rng(1)));
}

TEST_CASE("apply_sampled normalizes exactly when the weight is a rational square") {
  // 1/2 I on a basis vector gives weight 1/4: rescaling by 1/2 is exact.
  Superoperator s;
  OperationElement e;
  e.matrix = RationalMatrix::zero(2);
  e.matrix.at(0, 0) = Rational(1, 2);
  e.matrix.at(1, 1) = Rational(1, 2);
  s.elements.push_back(e);
  OperationElement f = e;
  s.elements.push_back(f);  // completeness not needed for the mechanics here
  Rng rng(5);
  auto out = apply_sampled(StateVector::basis(2, 0), s, rng);
  CHECK(out.normalized);
  CHECK(out.vec.squared_norm() == Rational(1));
}

TEST_CASE("rotation tracker composition is exact integer bookkeeping") {
  RotationTracker t;
  t = rotate(t, 1, 3);
  t = rotate(t, -1, 3);
  CHECK(t.steps == 0);
  CHECK(q1_probability(t).is_zero());

  // a^3 then b^5 at one unit each: net -2.
  RotationTracker u;
  for (int i = 0; i < 3; ++i) u = rotate(u, 1, 1);
  for (int i = 0; i < 5; ++i) u = rotate(u, -1, 1);
  CHECK(u.steps == -2);

  // UPOWER doubling: +2 per symbol of a block of 4, -1 per symbol of a block of 8.
  RotationTracker w;
  for (int i = 0; i < 4; ++i) w = rotate(w, 1, 2);
  for (int i = 0; i < 8; ++i) w = rotate(w, -1, 1);
  CHECK(w.steps == 0);

  // Commutative and invertible in steps.
  RotationTracker a = rotate(rotate(RotationTracker{}, 1, 7), -1, 2);
  RotationTracker b = rotate(rotate(RotationTracker{}, -1, 2), 1, 7);
  CHECK(a.steps == b.steps);
}

TEST_CASE("q1 probability of one unit, cross-checked at two precisions") {
  // Frozen from the high-precision oracle: sin^2(sqrt(2) pi) = 0.9291080928...
  MpReal p128 = sinsq_rotation(1, Rational(1), 128);
  MpReal p256 = sinsq_rotation(1, Rational(1), 256);
  CHECK(p128.to_double() == doctest::Approx(0.929108092834).epsilon(1e-10));
  CHECK((p128 - p256).abs().to_double() < 1e-30);
}

TEST_CASE("AW lower bound: sin^2(k sqrt2 pi) >= 1/(2 n^2) for 1 <= |k| <= n <= 64") {
  for (long n = 1; n <= 64; ++n) {
    double bound = 1.0 / (2.0 * n * n);
    for (long k = -n; k <= n; ++k) {
      if (k == 0) continue;
      RotationTracker t{k, Rational(1)};
      CHECK(q1_probability(t).to_double() >= bound);
    }
  }
}

TEST_CASE("irrationality guard: q1 probability stays above 1e-30 for |steps| <= 1e4") {
  MpReal floor130(1e-30);
  for (long k = 1; k <= 10'000; ++k) {
    RotationTracker t{k, Rational(1)};
    MpReal p = q1_probability(t);
    CHECK(p > floor130);
  }
}
