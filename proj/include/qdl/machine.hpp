#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qdl/prob.hpp"
#include "qdl/quantum.hpp"

namespace qdl {

using StateId = int;
using Symbol = int;  // index into a spec's communication alphabet

inline constexpr StateId kRestartTarget = -2;  // delta_s pseudo-target: restart the round
inline constexpr char kLeftEndmarker = '^';
inline constexpr char kRightEndmarker = '$';

enum class StateKind : std::uint8_t { kComm, kRead, kAccept, kReject };
enum class HeadMove : std::uint8_t { kLeft, kStay, kRight };

/// Local update on a register made of rotation trackers, or a classical
/// branch that leaves any register untouched.
struct RotationAction {
  enum class Kind : std::uint8_t { kNoop, kRotate, kMeasure, kReset, kCoin, kFixed };
  Kind kind = Kind::kNoop;
  std::vector<long> deltas;  // kRotate: per-tracker signed unit counts
  int tracker = 0;           // kMeasure / kReset
  int outcomes = 2;          // kCoin: equiprobable outcomes
  int fixed_outcome = 0;     // kFixed: hard-wired coin result
};

struct QuantumAction {
  int superop = -1;  // index into the spec's superoperator library, or -1
  std::optional<RotationAction> rotation;
};

struct CommWrite {
  Symbol write = 0;
  StateId next = 0;
};

struct ClassicalUpdate {
  StateId next = 0;
  HeadMove move = HeadMove::kStay;
};

struct PublicEvent {
  enum class Kind : std::uint8_t { kVerifierWrote, kDebatersWrote, kOutcome, kRestart, kHalt };
  Kind kind;
  Symbol verifier_symbol = -1;
  Symbol p1_symbol = -1;
  Symbol p0_symbol = -1;
  int outcome = -1;  // kOutcome; for kHalt: 1 accept, 0 reject

  std::string to_line() const;
  bool operator==(const PublicEvent&) const = default;
};

class SpecIncompleteError : public std::runtime_error {
 public:
  explicit SpecIncompleteError(const std::string& what) : std::runtime_error(what) {}
};

class StrategyContractError : public std::runtime_error {
 public:
  explicit StrategyContractError(const std::string& what) : std::runtime_error(what) {}
};

/// The 8-tuple verifier program. Classical states are opaque ids; compiled
/// verifiers intern structured states lazily, table-backed ones list them.
class VerifierSpec {
 public:
  virtual ~VerifierSpec() = default;

  virtual std::string name() const = 0;
  virtual bool uses_vector_register() const = 0;
  virtual int vector_dim() const { return 0; }
  virtual int tracker_count() const { return 0; }
  virtual Rational rotation_unit() const { return Rational(1); }

  virtual StateId initial_state() const = 0;
  virtual StateKind state_kind(StateId s) const = 0;
  virtual std::string state_name(StateId s) const = 0;

  virtual const std::vector<std::string>& comm_alphabet() const = 0;
  Symbol comm_symbol(const std::string& text) const;

  virtual CommWrite delta_c(StateId s, char input_sym) const = 0;
  virtual QuantumAction delta_q(StateId s, char input_sym, Symbol gp, Symbol gr) const = 0;
  virtual ClassicalUpdate delta_s(StateId s, char input_sym, Symbol gp, Symbol gr,
                                  int outcome) const = 0;

  virtual int superop_count() const = 0;
  virtual const Superoperator& superop(int index) const = 0;

  /// Structural defects beyond the generic ones (empty when none).
  virtual std::vector<std::string> self_check() const { return {}; }
};

/// Reactive deterministic debater. All randomness lives in the verifier;
/// the emitted stream is a function of the observed public events.
class DebaterStrategy {
 public:
  virtual ~DebaterStrategy() = default;
  virtual std::string name() const = 0;
  /// Called once before a run so the strategy can intern the spec's
  /// communication symbols it needs to recognize in events.
  virtual void bind(const VerifierSpec& spec) { (void)spec; }
  /// Return to the initial state (restart event).
  virtual void reset() = 0;
  virtual void observe(const PublicEvent& event) { (void)event; }
  /// Next communication symbol, spelled in the spec's alphabet.
  virtual std::string emit() = 0;
  virtual std::unique_ptr<DebaterStrategy> clone() const = 0;
  /// Key identifying the strategy state (used to merge branches).
  virtual std::string state_key() const = 0;
};

using Register = std::variant<StateVector, std::vector<RotationTracker>>;

struct MachineConfig {
  StateId state = 0;
  int head = 0;  // 0 = left endmarker, |w|+1 = right endmarker
  Register reg;
  Symbol cell_v = 0, cell_p1 = 0, cell_p0 = 0;
};

Register initial_register(const VerifierSpec& spec);
MachineConfig initial_config(const VerifierSpec& spec);
char input_symbol_at(const std::string& w, int head);

class EngineObserver {
 public:
  virtual ~EngineObserver() = default;
  virtual void on_superop(const VerifierSpec& spec, const MachineConfig& cfg,
                          const Superoperator& op) {
    (void)spec; (void)cfg; (void)op;
  }
};

struct EngineCaps {
  long max_steps_per_round = 1'000'000;  // sampled mode
  long max_nodes = 200'000;              // exact mode: configuration graph size
  long max_depth = 1'000'000;            // exact mode: expansion depth
  long max_restarts = 100'000;           // debate loop
};

enum class TerminalKind : std::uint8_t { kNone, kAccept, kReject, kRestart };

/// One successor branch of a single machine step, exact semantics.
struct ExactSuccessor {
  Prob weight = Prob::one();
  TerminalKind terminal = TerminalKind::kNone;
  std::string label;  // halt cause (element label or classical rule)
  MachineConfig cfg;
  std::unique_ptr<DebaterStrategy> p1, p0;
  std::vector<PublicEvent> events;
};

std::vector<ExactSuccessor> step_exact(const VerifierSpec& spec, const std::string& w,
                                       const MachineConfig& cfg, const DebaterStrategy& p1,
                                       const DebaterStrategy& p0,
                                       EngineObserver* observer = nullptr);

/// Exact per-round distribution. Every round satisfies
/// accept + reject + restart + residual = 1 exactly.
struct RoundDistribution {
  Prob accept, reject, restart, residual;
  std::map<std::string, Prob> accept_by_label, reject_by_label;
  Prob steps_accept, steps_reject, steps_restart;  // E[steps · 1_class]
  Prob expected_steps;                             // E[steps of the round]
  bool converged = false;                          // no mass left unexplored
  long nodes = 0;
};

RoundDistribution run_round_exact(const VerifierSpec& spec, const std::string& w,
                                  const DebaterStrategy& p1, const DebaterStrategy& p0,
                                  const EngineCaps& caps = {},
                                  EngineObserver* observer = nullptr);

struct RoundResult {
  TerminalKind kind = TerminalKind::kNone;  // kNone = step budget exhausted
  long steps_used = 0;
  std::string label;
};

RoundResult run_round_sampled(const VerifierSpec& spec, const std::string& w,
                              DebaterStrategy& p1, DebaterStrategy& p0, Rng& rng,
                              const EngineCaps& caps = {},
                              std::vector<PublicEvent>* event_log = nullptr,
                              EngineObserver* observer = nullptr);

struct Decision {
  enum class Kind : std::uint8_t { kAccept, kReject, kNoDecision };
  Kind kind = Kind::kNoDecision;
  long rounds = 0;
  long total_steps = 0;
};

Decision run_debate(const VerifierSpec& spec, const std::string& w, DebaterStrategy& p1,
                    DebaterStrategy& p0, Rng& rng, const EngineCaps& caps = {},
                    std::vector<PublicEvent>* event_log = nullptr);

/// p_accept / (p_accept + p_reject). Throws std::domain_error when both are
/// zero (nonhalting debate).
Rational overall_acceptance(const Rational& p_accept, const Rational& p_reject);
Prob overall_acceptance(const Prob& p_accept, const Prob& p_reject);

std::vector<std::string> validate(const VerifierSpec& spec);

/// Explicit-table verifier, loadable from machine-spec documents.
class TableVerifierSpec : public VerifierSpec {
 public:
  std::string spec_name = "table";
  bool vector_register = true;
  int dim = 4;
  int trackers = 0;
  Rational unit = Rational(1);

  struct StateInfo {
    std::string name;
    StateKind kind;
  };
  std::vector<StateInfo> states;
  StateId initial = 0;
  std::string input_alphabet;         // tape symbols, endmarkers implicit
  std::vector<std::string> alphabet;  // communication alphabet
  std::vector<Superoperator> superops;

  // Table rows in declaration order; '*' wildcards allowed for the input
  // symbol and the debater pair (both at once).
  struct CRow { StateId s; char sym; bool any_sym; CommWrite out; };
  struct QRow { StateId s; char sym; bool any_sym; Symbol gp, gr; bool any_pair; QuantumAction out; };
  struct SRow { StateId s; char sym; bool any_sym; Symbol gp, gr; bool any_pair; int outcome; ClassicalUpdate out; };
  std::vector<CRow> c_rows;
  std::vector<QRow> q_rows;
  std::vector<SRow> s_rows;

  std::string name() const override { return spec_name; }
  bool uses_vector_register() const override { return vector_register; }
  int vector_dim() const override { return dim; }
  int tracker_count() const override { return trackers; }
  Rational rotation_unit() const override { return unit; }
  StateId initial_state() const override { return initial; }
  StateKind state_kind(StateId s) const override;
  std::string state_name(StateId s) const override;
  const std::vector<std::string>& comm_alphabet() const override { return alphabet; }
  CommWrite delta_c(StateId s, char input_sym) const override;
  QuantumAction delta_q(StateId s, char input_sym, Symbol gp, Symbol gr) const override;
  ClassicalUpdate delta_s(StateId s, char input_sym, Symbol gp, Symbol gr, int outcome) const override;
  int superop_count() const override { return static_cast<int>(superops.size()); }
  const Superoperator& superop(int index) const override { return superops.at(static_cast<size_t>(index)); }
  std::vector<std::string> self_check() const override;

  StateId state_id(const std::string& state_name) const;
  bool structurally_equal(const TableVerifierSpec& o) const;
};

/// Replaces every probabilistic branch point of a classical-coin verifier
/// with the next element of a hard-wired outcome sequence.
std::unique_ptr<VerifierSpec> derandomize(std::shared_ptr<const VerifierSpec> base,
                                          std::vector<int> fixed_outcomes);

}  // namespace qdl
