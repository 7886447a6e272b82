#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "qdl/machine.hpp"

using namespace qdl;

namespace {

/// Fixed-symbol debater for table-machine tests.
class ConstantStrategy : public DebaterStrategy {
 public:
  explicit ConstantStrategy(std::string sym) : sym_(std::move(sym)) {}
  std::string name() const override { return "constant:" + sym_; }
  void reset() override {}
  std::string emit() override { return sym_; }
  std::unique_ptr<DebaterStrategy> clone() const override {
    return std::make_unique<ConstantStrategy>(sym_);
  }
  std::string state_key() const override { return "c"; }

 private:
  std::string sym_;
};

Superoperator scalar_coin(int dim, int outcomes, std::vector<OutcomeAction> actions) {
  Superoperator s;
  s.label = "coin" + std::to_string(outcomes);
  Rational root;
  // outcomes scalar elements c*I with outcomes * c^2 = 1; only available for
  // squares, so tests use 4-outcome coins (c = 1/2).
  REQUIRE(Rational::exact_sqrt(Rational(1, outcomes), root));
  for (int i = 0; i < outcomes; ++i) {
    OperationElement e;
    e.matrix = RationalMatrix::zero(dim);
    for (int k = 0; k < dim; ++k) e.matrix.at(k, k) = root;
    e.action = actions.at(static_cast<size_t>(i));
    e.label = "o" + std::to_string(i);
    s.elements.push_back(std::move(e));
  }
  return s;
}

/// Minimal verifier: one comm state, one read state; the read state applies
/// a 4-outcome fair coin whose outcomes map to the given actions.
std::shared_ptr<TableVerifierSpec> coin_machine(std::vector<OutcomeAction> actions) {
  auto spec = std::make_shared<TableVerifierSpec>();
  spec->spec_name = "coin_demo";
  spec->dim = 4;
  spec->input_alphabet = "a";
  spec->alphabet = {".", "x"};
  spec->states = {{"c0", StateKind::kComm},
                  {"r0", StateKind::kRead},
                  {"acc", StateKind::kAccept},
                  {"rej", StateKind::kReject}};
  spec->initial = 0;
  spec->superops.push_back(scalar_coin(4, 4, std::move(actions)));
  spec->c_rows.push_back({0, 0, true, {0, 1}});
  QuantumAction qa;
  qa.superop = 0;
  spec->q_rows.push_back({1, 0, true, 0, 0, true, qa});
  for (int i = 0; i < 4; ++i)
    spec->s_rows.push_back({1, 0, true, 0, 0, true, i, {0, HeadMove::kStay}});
  return spec;
}

std::shared_ptr<TableVerifierSpec> always_accept_machine() {
  return coin_machine({OutcomeAction::kAccept, OutcomeAction::kAccept, OutcomeAction::kAccept,
                       OutcomeAction::kAccept});
}

std::shared_ptr<TableVerifierSpec> always_restart_machine() {
  return coin_machine({OutcomeAction::kRestart, OutcomeAction::kRestart, OutcomeAction::kRestart,
                       OutcomeAction::kRestart});
}

}  // namespace

TEST_CASE("validate accepts a well-formed table machine and spots broken ones") {
  auto ok = always_accept_machine();
  CHECK(validate(*ok).empty());

  // Superoperator failing completeness.
  auto bad = always_accept_machine();
  bad->superops[0].elements.pop_back();
  auto defects = validate(*bad);
  REQUIRE(!defects.empty());
  CHECK(defects[0].find("completeness") != std::string::npos);

  // Two accept states: the halting-state structure is broken.
  auto twin = always_accept_machine();
  twin->states.push_back({"acc2", StateKind::kAccept});
  CHECK(!validate(*twin).empty());

  // Missing delta_s row for a continue outcome.
  auto gap = coin_machine({OutcomeAction::kContinue, OutcomeAction::kRestart,
                           OutcomeAction::kRestart, OutcomeAction::kRestart});
  gap->s_rows.clear();
  bool found = false;
  for (const auto& d : validate(*gap))
    if (d.find("delta_s missing") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("step in a communication state writes, collects, and moves on") {
  auto spec = always_accept_machine();
  ConstantStrategy p1("x"), p0(".");
  MachineConfig cfg = initial_config(*spec);
  auto succ = step_exact(*spec, "a", cfg, p1, p0);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0].terminal == TerminalKind::kNone);
  CHECK(spec->state_name(succ[0].cfg.state) == "r0");
  CHECK(succ[0].cfg.cell_p1 == spec->comm_symbol("x"));
  CHECK(succ[0].cfg.cell_p0 == spec->comm_symbol("."));
  REQUIRE(succ[0].events.size() == 2);
  CHECK(succ[0].events[0].kind == PublicEvent::Kind::kVerifierWrote);
  CHECK(succ[0].events[1].kind == PublicEvent::Kind::kDebatersWrote);
}

TEST_CASE("fair-coin outcomes collapse into classical successors of weight 1/2 each") {
  // Outcomes 0,1 -> continue to c0; outcomes 2,3 -> continue to a second comm
  // state; grouping by delta_s target yields two successors of mass 1/2.
  auto spec = coin_machine({OutcomeAction::kContinue, OutcomeAction::kContinue,
                            OutcomeAction::kContinue, OutcomeAction::kContinue});
  spec->states.push_back({"c1", StateKind::kComm});
  spec->c_rows.push_back({4, 0, true, {0, 1}});
  spec->s_rows.clear();
  for (int i = 0; i < 4; ++i)
    spec->s_rows.push_back({1, 0, true, 0, 0, true, i, {i < 2 ? 0 : 4, HeadMove::kStay}});
  REQUIRE(validate(*spec).empty());

  ConstantStrategy p1("x"), p0(".");
  MachineConfig cfg = initial_config(*spec);
  auto comm = step_exact(*spec, "a", cfg, p1, p0);
  auto branches = step_exact(*spec, "a", comm[0].cfg, *comm[0].p1, *comm[0].p0);
  REQUIRE(branches.size() == 4);
  Prob to_c0 = Prob::zero(), to_c1 = Prob::zero();
  for (const auto& b : branches) {
    REQUIRE(b.terminal == TerminalKind::kNone);
    if (spec->state_name(b.cfg.state) == "c0") to_c0 += b.weight;
    else if (spec->state_name(b.cfg.state) == "c1") to_c1 += b.weight;
  }
  CHECK(to_c0 == Prob(Rational(1, 2)));
  CHECK(to_c1 == Prob(Rational(1, 2)));
}

TEST_CASE("trivial always-accept machine accepts with probability 1 after one quantum step") {
  auto spec = always_accept_machine();
  ConstantStrategy p1("x"), p0(".");
  auto dist = run_round_exact(*spec, "a", p1, p0);
  CHECK(dist.accept == Prob::one());
  CHECK(dist.reject.is_zero());
  CHECK(dist.restart.is_zero());
  CHECK(dist.residual.is_zero());
  CHECK(dist.converged);
}

TEST_CASE("always-restart machine: restart mass 1, no decision at any cap") {
  auto spec = always_restart_machine();
  ConstantStrategy p1("x"), p0(".");
  auto dist = run_round_exact(*spec, "a", p1, p0);
  CHECK(dist.accept.is_zero());
  CHECK(dist.reject.is_zero());
  CHECK(dist.restart == Prob::one());

  Rng rng(3);
  ConstantStrategy q1("x"), q0(".");
  auto d = run_debate(*spec, "a", q1, q0, rng, EngineCaps{.max_restarts = 50});
  CHECK(d.kind == Decision::Kind::kNoDecision);
  CHECK(d.rounds == 50);
}

TEST_CASE("exact distribution sums to one and matches a mixed machine's structure") {
  auto spec = coin_machine({OutcomeAction::kAccept, OutcomeAction::kReject,
                            OutcomeAction::kRestart, OutcomeAction::kRestart});
  ConstantStrategy p1("x"), p0(".");
  auto dist = run_round_exact(*spec, "a", p1, p0);
  CHECK(dist.accept == Prob(Rational(1, 4)));
  CHECK(dist.reject == Prob(Rational(1, 4)));
  CHECK(dist.restart == Prob(Rational(1, 2)));
  CHECK(dist.accept + dist.reject + dist.restart + dist.residual == Prob::one());
  // Two steps per round: one comm, one read.
  CHECK(dist.expected_steps == Prob(Rational(2)));
}

TEST_CASE("sampled engine agrees with the exact distribution within 3 sigma") {
  auto spec = coin_machine({OutcomeAction::kAccept, OutcomeAction::kReject,
                            OutcomeAction::kRestart, OutcomeAction::kRestart});
  Rng rng(1234);
  const int trials = 100'000;
  int acc = 0, rej = 0, res = 0;
  for (int i = 0; i < trials; ++i) {
    ConstantStrategy p1("x"), p0(".");
    auto rr = run_round_sampled(*spec, "a", p1, p0, rng);
    if (rr.kind == TerminalKind::kAccept) ++acc;
    if (rr.kind == TerminalKind::kReject) ++rej;
    if (rr.kind == TerminalKind::kRestart) ++res;
  }
  auto within3 = [&](int count, double p) {
    double sigma = std::sqrt(p * (1 - p) * trials);
    return std::abs(count - p * trials) <= 3 * sigma;
  };
  CHECK(within3(acc, 0.25));
  CHECK(within3(rej, 0.25));
  CHECK(within3(res, 0.5));
}

TEST_CASE("identical event logs reach both debaters and replay deterministically") {
  auto spec = coin_machine({OutcomeAction::kContinue, OutcomeAction::kRestart,
                            OutcomeAction::kAccept, OutcomeAction::kReject});
  spec->s_rows.clear();
  spec->s_rows.push_back({1, 0, true, 0, 0, true, 0, {0, HeadMove::kRight}});
  REQUIRE(validate(*spec).empty());

  /// Records everything it observes.
  class Recorder : public ConstantStrategy {
   public:
    explicit Recorder(std::string sym) : ConstantStrategy(std::move(sym)) {}
    void observe(const PublicEvent& e) override { log += e.to_line() + "\n"; }
    std::unique_ptr<DebaterStrategy> clone() const override {
      auto c = std::make_unique<Recorder>(*this);
      return c;
    }
    std::string log;
  };

  Recorder p1("x"), p0(".");
  Rng rng(77);
  std::vector<PublicEvent> log;
  auto d1 = run_debate(*spec, "aaa", p1, p0, rng, {}, &log);
  CHECK(p1.log == p0.log);  // full-information contract

  Recorder q1("x"), q0(".");
  Rng rng2(77);
  std::vector<PublicEvent> log2;
  auto d2 = run_debate(*spec, "aaa", q1, q0, rng2, {}, &log2);
  CHECK(d1.kind == d2.kind);
  CHECK(d1.rounds == d2.rounds);
  REQUIRE(log.size() == log2.size());
  for (size_t i = 0; i < log.size(); ++i) CHECK(log[i] == log2[i]);
}

TEST_CASE("head moves off the tape raise a named defect error") {
  auto spec = coin_machine({OutcomeAction::kContinue, OutcomeAction::kRestart,
                            OutcomeAction::kRestart, OutcomeAction::kRestart});
  spec->s_rows.clear();
  spec->s_rows.push_back({1, 0, true, 0, 0, true, 0, {0, HeadMove::kLeft}});
  ConstantStrategy p1("x"), p0(".");
  MachineConfig cfg = initial_config(*spec);
  auto comm = step_exact(*spec, "a", cfg, p1, p0);
  CHECK_THROWS_AS(step_exact(*spec, "a", comm[0].cfg, *comm[0].p1, *comm[0].p0),
                  SpecIncompleteError);
}

TEST_CASE("missing transition entries name the offending key") {
  auto spec = always_accept_machine();
  spec->c_rows.clear();
  ConstantStrategy p1("x"), p0(".");
  MachineConfig cfg = initial_config(*spec);
  try {
    step_exact(*spec, "a", cfg, p1, p0);
    FAIL("expected SpecIncompleteError");
  } catch (const SpecIncompleteError& e) {
    CHECK(std::string(e.what()).find("delta_c") != std::string::npos);
    CHECK(std::string(e.what()).find("c0") != std::string::npos);
  }
}

TEST_CASE("overall acceptance ratio") {
  // p2 = m^2 p1 gives 1/(m^2+1).
  Rational p1(1, 1024), m2(100);
  CHECK(overall_acceptance(p1, m2 * p1) == Rational(1, 101));
  CHECK(overall_acceptance(Rational(3, 7), Rational(0)) == Rational(1));
  // (1/d)^(2l) scale invariance: d=10, l=3, m=10.
  Rational base = pow_int(Rational(1, 10), 6);
  CHECK(overall_acceptance(base, base * Rational(100)) == Rational(1, 101));
  CHECK_THROWS_AS(overall_acceptance(Rational(0), Rational(0)), std::domain_error);
}

TEST_CASE("derandomize: zero-error coin machine decides identically under any sequence") {
  // Coin outcomes all lead to accept via different intermediate states:
  // decision independent of the coin, i.e. a zero-error machine.
  auto spec = coin_machine({OutcomeAction::kContinue, OutcomeAction::kContinue,
                            OutcomeAction::kContinue, OutcomeAction::kContinue});
  spec->states.push_back({"r1", StateKind::kRead});
  QuantumAction id_action;
  id_action.rotation = RotationAction{};  // noop
  // After the coin, all outcomes funnel to r1, which accepts deterministically.
  spec->s_rows.clear();
  for (int i = 0; i < 4; ++i)
    spec->s_rows.push_back({1, 0, true, 0, 0, true, i, {4, HeadMove::kStay}});
  spec->q_rows.push_back({4, 0, true, 0, 0, true, id_action});
  spec->s_rows.push_back({4, 0, true, 0, 0, true, 0, {2, HeadMove::kStay}});
  // A rotation noop on a vector machine is rejected by self_check; flip the
  // register to trackers for this fixture.
  spec->vector_register = false;
  spec->dim = 0;
  spec->trackers = 1;
  // The coin superoperator still drives branching; keep it classical:
  // scalar elements act fine on any register via the derandomized path, but
  // the base machine needs a vector register for superoperators. Use the
  // rotation coin instead.
  spec->q_rows[0].out = QuantumAction{};
  spec->q_rows[0].out.rotation = RotationAction{RotationAction::Kind::kCoin, {}, 0, 4, 0};
  spec->superops.clear();

  REQUIRE(validate(*spec).empty());

  ConstantStrategy p1("x"), p0(".");
  auto base_dist = run_round_exact(*spec, "a", p1, p0);
  CHECK(base_dist.accept == Prob::one());

  for (auto seq : {std::vector<int>{0, 0, 0, 0}, std::vector<int>{3, 1, 2, 0}}) {
    auto det = derandomize(spec, seq);
    CHECK(validate(*det).empty());
    auto dist = run_round_exact(*det, "a", p1, p0);
    CHECK(dist.accept == Prob::one());
    CHECK(dist.converged);
  }

  // Exhaustion: a sequence shorter than the coin uses in a round.
  auto det = derandomize(spec, std::vector<int>{});
  CHECK_THROWS_AS(run_round_exact(*det, "a", p1, p0), SpecIncompleteError);
}

TEST_CASE("derandomize refuses amplitude-encoding machines") {
  auto spec = std::make_shared<TableVerifierSpec>();
  spec->spec_name = "enc";
  spec->dim = 2;
  spec->input_alphabet = "a";
  spec->alphabet = {"."};
  spec->states = {{"c0", StateKind::kComm}, {"r0", StateKind::kRead},
                  {"acc", StateKind::kAccept}, {"rej", StateKind::kReject}};
  Superoperator s;
  s.label = "enc";
  OperationElement e1;
  e1.matrix = RationalMatrix::zero(2);
  e1.matrix.at(0, 0) = Rational(3, 5);
  e1.matrix.at(1, 0) = Rational(4, 5);
  e1.matrix.at(1, 1) = Rational(1);
  s.elements.push_back(e1);
  spec->superops.push_back(s);
  CHECK_THROWS_AS(derandomize(spec, {0, 1}), std::invalid_argument);
}
