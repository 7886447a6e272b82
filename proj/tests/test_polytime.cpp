#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qdl/polytime.hpp"
#include "qdl/strategy.hpp"

using namespace qdl;

namespace {

std::string unary(long n) { return std::string(static_cast<size_t>(n), '1'); }

RoundDistribution run_poly(const PolyVerifier& spec, const std::string& w,
                           DebaterStrategy& talker, EngineCaps caps = {}) {
  FillerStrategy silent;
  DebaterStrategy& p1 = spec.talker_is_p1() ? talker : static_cast<DebaterStrategy&>(silent);
  DebaterStrategy& p0 = spec.talker_is_p1() ? static_cast<DebaterStrategy&>(silent) : talker;
  return run_round_exact(spec, w, p1, p0, caps);
}

Prob wrong_side_overall(const PolyVerifier& spec, long n, const RoundDistribution& dist,
                        bool member) {
  Prob overall = overall_acceptance(dist.accept, dist.reject);
  (void)spec;
  (void)n;
  return member ? Prob::one() - overall : overall;
}

}  // namespace

TEST_CASE("walk probability: closed form and symbolic bound") {
  CHECK(walk_probability(1, 2) == Rational(1, 16));
  CHECK(walk_probability(3, 2) == Rational(1, 64));
  // p_walk(n) <= 1/(4 n^2) for n up to 10^4, checked in exact rationals.
  for (long n = 1; n <= 10'000; ++n)
    CHECK(walk_probability(n, 2) <= Rational(1, 4 * n * n));
}

TEST_CASE("walk probe: exact round distribution equals the analytic probability") {
  for (long n : {0L, 1L, 2L, 5L}) {
    auto probe = build_walk_probe(2);
    FillerStrategy p1, p0;
    auto dist = run_round_exact(*probe, unary(n), p1, p0);
    CHECK(dist.converged);
    CHECK(dist.accept == Prob(walk_probability(n, 2)));
    CHECK(dist.reject.is_zero());
    CHECK(dist.restart == Prob::one() - dist.accept);
  }
}

TEST_CASE("walk probe: Monte Carlo frequency within 3 sigma of the analytic value") {
  const long trials = 100'000;
  for (long n : {2L, 4L, 8L}) {
    auto probe = build_walk_probe(2);
    Rng rng(1000 + static_cast<uint64_t>(n));
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
      FillerStrategy p1, p0;
      auto rr = run_round_sampled(*probe, unary(n), p1, p0, rng);
      if (rr.kind == TerminalKind::kAccept) ++hits;
    }
    double p = walk_probability(n, 2).to_double();
    double sigma = std::sqrt(p * (1 - p) * trials);
    CHECK(std::abs(hits - p * trials) <= 3 * sigma);
  }
}

TEST_CASE("walk calibration: gadget rate stays below half the minimum q1 probability") {
  for (auto spec : {build_uprime_verifier(), build_usquare_verifier(), build_upower_verifier(),
                    build_ufib_verifier(), build_pal_verifier()}) {
    for (long n : {2L, 5L, 16L, 64L}) {
      MpReal floor_q1 = min_q1_probability(spec->max_comparison_steps(n));
      double pw = walk_probability(n, spec->attenuation()).to_double();
      CHECK(2 * pw <= floor_q1.to_double());
    }
  }
}

TEST_CASE("uprime: honest certificates force rejection with overall probability 1") {
  auto spec = build_uprime_verifier();
  struct Case { long n, i, j; };
  for (Case c : {Case{4, 2, 2}, Case{6, 2, 3}, Case{9, 3, 3}, Case{15, 3, 5}}) {
    auto cert = certificate_strategy("honest", uprime_certificate(c.i, c.j));
    auto dist = run_poly(*spec, unary(c.n), *cert);
    CHECK(dist.converged);
    CHECK(dist.accept.is_zero());
    CHECK(dist.reject > Prob::zero());
    CHECK(overall_acceptance(dist.accept, dist.reject).is_zero());
  }
}

TEST_CASE("uprime: primes resist the whole adversarial family (error <= 1/3)") {
  auto spec = build_uprime_verifier();
  Prob third(Rational(1, 3));
  for (long n : {5L, 7L, 11L, 13L}) {
    REQUIRE(is_prime(n));
    for (const auto& [label, factory] : unary_adversary_family("uprime", n)) {
      auto adv = factory();
      auto dist = run_poly(*spec, unary(n), *adv);
      CHECK(dist.converged);
      // wrong side for a member of UPRIME is rejection
      Prob halting = dist.accept + dist.reject;
      REQUIRE(halting > Prob::zero());
      Prob wrong = dist.reject / halting;
      CHECK(wrong <= third);
    }
  }
}

TEST_CASE("uprime: composite certificate with equal blocks but wrong total still rejects") {
  auto spec = build_uprime_verifier();
  // n = 4 with certificate aabb: equal blocks tile the input, composite -> reject.
  auto cert = certificate_strategy("aabb", "aabb");
  auto dist = run_poly(*spec, unary(4), *cert);
  CHECK(dist.accept.is_zero());
  CHECK(overall_acceptance(dist.accept, dist.reject).is_zero());
}

TEST_CASE("uprime small inputs settle classically") {
  auto spec = build_uprime_verifier();
  for (long n : {0L, 1L, 2L, 3L}) {
    auto cert = certificate_strategy("any", "ab");
    auto dist = run_poly(*spec, unary(n), *cert);
    CHECK(dist.converged);
    if (is_prime(n)) {
      CHECK(dist.accept == Prob::one());
    } else {
      CHECK(dist.reject == Prob::one());
    }
  }
}

TEST_CASE("usquare: honest certificates accepted with overall probability 1") {
  auto spec = build_usquare_verifier();
  for (long m : {1L, 2L, 3L, 4L}) {
    long n = m * m;
    auto cert = certificate_strategy("honest", usquare_certificate(m));
    auto dist = run_poly(*spec, unary(n), *cert);
    CHECK(dist.converged);
    CHECK(dist.reject.is_zero());
    CHECK(dist.accept > Prob::zero());
    CHECK(overall_acceptance(dist.accept, dist.reject) == Prob::one());
  }
}

TEST_CASE("usquare: non-squares resist the family (wrong acceptance <= 1/3)") {
  auto spec = build_usquare_verifier();
  Prob third(Rational(1, 3));
  for (long n : {5L, 8L}) {
    for (const auto& [label, factory] : unary_adversary_family("usquare", n)) {
      auto adv = factory();
      auto dist = run_poly(*spec, unary(n), *adv);
      CHECK(dist.converged);
      Prob halting = dist.accept + dist.reject;
      REQUIRE(halting > Prob::zero());
      CHECK(dist.accept / halting <= third);
    }
  }
}

TEST_CASE("upower: honest doubling certificates accepted exactly") {
  auto spec = build_upower_verifier();
  for (long m : {1L, 2L, 3L, 4L}) {
    long n = 1L << m;
    auto cert = certificate_strategy("honest", upower_certificate(m));
    auto dist = run_poly(*spec, unary(n), *cert);
    CHECK(dist.converged);
    CHECK(dist.reject.is_zero());
    CHECK(overall_acceptance(dist.accept, dist.reject) == Prob::one());
  }
}

TEST_CASE("upower: non-powers resist the family") {
  auto spec = build_upower_verifier();
  Prob third(Rational(1, 3));
  for (long n : {6L, 12L}) {
    for (const auto& [label, factory] : unary_adversary_family("upower", n)) {
      auto adv = factory();
      auto dist = run_poly(*spec, unary(n), *adv);
      CHECK(dist.converged);
      Prob halting = dist.accept + dist.reject;
      REQUIRE(halting > Prob::zero());
      CHECK(dist.accept / halting <= third);
    }
  }
}

TEST_CASE("ufib: honest Fibonacci certificates accepted exactly") {
  auto spec = build_ufib_verifier();
  for (long n : {5L, 8L, 13L}) {
    REQUIRE(is_fibonacci(n));
    auto cert = certificate_strategy("honest", ufib_certificate(n));
    auto dist = run_poly(*spec, unary(n), *cert);
    CHECK(dist.converged);
    CHECK(dist.reject.is_zero());
    CHECK(dist.accept > Prob::zero());
    CHECK(overall_acceptance(dist.accept, dist.reject) == Prob::one());
  }
}

TEST_CASE("ufib: non-Fibonacci lengths resist the family") {
  auto spec = build_ufib_verifier();
  Prob third(Rational(1, 3));
  for (long n : {6L, 9L}) {
    for (const auto& [label, factory] : unary_adversary_family("ufib", n)) {
      auto adv = factory();
      auto dist = run_poly(*spec, unary(n), *adv);
      CHECK(dist.converged);
      Prob halting = dist.accept + dist.reject;
      if (halting.is_zero()) continue;  // a stalling cheat never halts: no error either
      CHECK(dist.accept / halting <= third);
    }
  }
}

TEST_CASE("ufib small inputs settle classically") {
  auto spec = build_ufib_verifier();
  for (long n : {0L, 1L, 2L, 3L}) {
    auto cert = certificate_strategy("any", "a#a");
    auto dist = run_poly(*spec, unary(n), *cert);
    if (is_fibonacci(n)) CHECK(dist.accept == Prob::one());
    else CHECK(dist.reject == Prob::one());
  }
}

TEST_CASE("pal: honest refuter rejects a non-palindrome with certainty") {
  auto spec = build_pal_verifier();
  // w = "01": mismatch at position 1.
  auto cert = certificate_strategy("honest", pal_certificate(1));
  FillerStrategy p1;
  auto dist = run_round_exact(*spec, "01", p1, *cert);
  CHECK(dist.converged);
  CHECK(dist.accept.is_zero());
  CHECK(dist.reject > Prob::zero());
  CHECK(overall_acceptance(dist.accept, dist.reject).is_zero());
}

TEST_CASE("pal: palindromes resist every family refuter (wrong rejection <= 1/3)") {
  auto spec = build_pal_verifier();
  Prob third(Rational(1, 3));
  for (const std::string& w : {std::string("0110"), std::string("010"), std::string("abccba"),
                               std::string("01011010")}) {
    REQUIRE(is_palindrome(w));
    for (const auto& [label, factory] : unary_adversary_family("pal", static_cast<long>(w.size()))) {
      auto adv = factory();
      FillerStrategy p1;
      auto dist = run_round_exact(*spec, w, p1, *adv);
      CHECK(dist.converged);
      Prob halting = dist.accept + dist.reject;
      REQUIRE(halting > Prob::zero());
      CHECK(dist.reject / halting <= third);
    }
  }
}

TEST_CASE("pal: short inputs accepted deterministically") {
  auto spec = build_pal_verifier();
  for (const std::string& w : {std::string(""), std::string("0"), std::string("1")}) {
    auto cert = certificate_strategy("any", pal_certificate(1));
    FillerStrategy p1;
    auto dist = run_round_exact(*spec, w, p1, *cert);
    CHECK(dist.accept == Prob::one());
  }
}

TEST_CASE("sampled and exact engines agree on uprime within 3 sigma") {
  auto spec = build_uprime_verifier();
  const std::string w = unary(4);
  auto exact_cert = certificate_strategy("honest", uprime_certificate(2, 2));
  auto dist = run_poly(*spec, w, *exact_cert);
  double p_reject = dist.reject.to_double();

  const long trials = 100'000;
  Rng rng(77);
  long rejects = 0, others = 0;
  for (long t = 0; t < trials; ++t) {
    auto cert = certificate_strategy("honest", uprime_certificate(2, 2));
    FillerStrategy p1;
    auto rr = run_round_sampled(*spec, w, p1, *cert, rng);
    if (rr.kind == TerminalKind::kReject) ++rejects;
    if (rr.kind == TerminalKind::kAccept) ++others;
  }
  CHECK(others == 0);
  double sigma = std::sqrt(p_reject * (1 - p_reject) * trials);
  CHECK(std::abs(rejects - p_reject * trials) <= 3 * sigma);
}

TEST_CASE("expected rounds follow 1/p_halt for honest runs") {
  auto spec = build_upower_verifier();
  const std::string w = unary(8);
  auto cert = certificate_strategy("honest", upower_certificate(3));
  auto dist = run_poly(*spec, w, *cert);
  Prob p_halt = dist.accept + dist.reject;
  // Exact p_halt is the attenuated double-ruin rate.
  CHECK(p_halt == Prob(walk_probability(8, 4)));

  // Monte Carlo mean rounds within 3 sigma of 1/p_halt (geometric law).
  const long trials = 500;
  Rng rng(5);
  double total_rounds = 0;
  for (long t = 0; t < trials; ++t) {
    auto c = certificate_strategy("honest", upower_certificate(3));
    FillerStrategy p1;
    Rng sub = rng.split(static_cast<uint64_t>(t));
    EngineCaps caps;
    caps.max_restarts = 2'000'000;
    auto d = run_debate(*spec, w, *c, p1, sub, caps);
    REQUIRE(d.kind == Decision::Kind::kAccept);
    total_rounds += static_cast<double>(d.rounds);
  }
  double p = p_halt.to_double();
  double mean = total_rounds / trials;
  double sigma = std::sqrt((1 - p) / (p * p) / trials);
  CHECK(std::abs(mean - 1.0 / p) <= 3 * sigma);
}
