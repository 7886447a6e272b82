#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qdl/machine.hpp"
#include "qdl/quantum.hpp"
#include "qdl/tm.hpp"

namespace qdl {

/// Common denominator for the main operation elements: the smallest power of
/// two strictly above max(2m, 2·e_max + 2), which keeps every completion
/// residual positive semidefinite.
long choose_d(long m, int alphabet_size);
long choose_d(const SingleTapeTM& tm, long m);

enum class ElementKind : std::uint8_t {
  kFirstBlockDigit,  // append a successor digit into amplitude 2 (first block)
  kDigitPair,        // append stream digit to amplitude 3 and successor digit to 4
  kConfigDigit,      // append stream digit to amplitude 3 only
  kNextDigit,        // append successor digit to amplitude 4 only
  kPad,              // multiply by 1/d, amplitudes ride along
  kTransitionCheck,  // weight proportional to (e(next(c_{i-1})) - e(c_i))^2
  kHaltDecide,       // project onto the auxiliary amplitude and decide
  kAdvance,          // move e(next(c_i)) into amplitude 2 for the next block
};

struct ElementParams {
  long m = 0;
  long d = 0;
  int sigma = 0;        // stream digit code (kDigitPair/kConfigDigit)
  int gamma = 0;        // successor digit code
  bool block1 = false;  // first-block shape (amplitudes 3,4 pinned to zero)
  OutcomeAction decide = OutcomeAction::kContinue;  // check/halt actions
  int fold_gamma = 0;   // kAdvance: also append this successor digit (growth)
};

OperationElement build_main_element(ElementKind kind, const ElementParams& p);

/// Appends restart-tagged auxiliary elements so that the completeness
/// equation holds exactly. The residual I - sum E^T E is factored over the
/// rationals (LDL^T with each pivot split into a sum of rational squares),
/// so the construction is deterministic and exact. Throws when the residual
/// is not positive semidefinite (d too small).
Superoperator complete_superoperator(std::vector<OperationElement> mains, long d,
                                     const std::string& label);

/// Greedy decomposition of a nonnegative integer into squares (Lagrange
/// guarantees four suffice; the greedy split may use a few more, which the
/// completion does not mind).
std::vector<mpz_class> greedy_squares(mpz_class n);

/// Finite transducer producing the digits of next(c) while c streams by,
/// one digit at most per symbol, finishing no later than the first block
/// separator. Two variants: machines without left moves emit in place;
/// left-moving machines run one symbol behind and may leave the final
/// blank of a grown successor to be folded into the block-final element.
class SuccessorEmitter {
 public:
  struct Move {
    bool ok = false;        // false: the streamed symbol breaks the protocol
    int write_code = 0;     // plain code of the written symbol
    TapeMove dir = TapeMove::kStay;
    int next_state = 0;
    int halt = 0;           // 0 none, 1 accept, 2 reject
  };
  /// Resolves the machine transition for a composite code; `choice` applies
  /// to alternating machines, `at_left_edge` clamps left moves.
  using MoveOracle = Move (*)(const void* machine, const ConfigAlphabet& alpha, int code,
                              int choice, bool at_left_edge);

  SuccessorEmitter() = default;
  SuccessorEmitter(bool lag1) : lag1_(lag1) {}

  /// Feed one streamed symbol (config code, or 0 for the first separator).
  /// Returns the emitted successor digit code, 0 when none.
  int feed(int code, int choice, const void* machine, const ConfigAlphabet& alpha,
           MoveOracle oracle);

  bool violation() const { return mode_ == M::kViolation; }
  int halt() const { return halt_; }          // halting kind of the successor
  bool growth_pending() const { return growth_; }  // trailing blank still owed
  bool flushed() const { return mode_ == M::kFlushed; }
  bool fresh() const;

  std::string key() const;  // stable serialization for state interning
  bool operator==(const SuccessorEmitter&) const = default;

 private:
  enum class M : std::uint8_t {
    kScan0, kRNext, kPostR, kPost0,          // in-place variant
    kPre, kMarkL, kMarkS, kMarkR, kMarkR2, kPost1,  // delayed variant
    kFlushed, kViolation
  };
  bool lag1_ = false;
  M mode_ = M::kScan0;
  int a_ = 0, b_ = 0;
  int halt_ = 0;
  bool growth_ = false;
  bool started_ = false;
};

/// Verifier compiled from a Turing machine (single-prover and two-debater
/// variants) or from a linear-space alternating machine (zero-error
/// variant). Classical states are structured values interned on demand;
/// the operation-element library is fixed at construction.
class HistoryDebateVerifier : public VerifierSpec {
 public:
  enum class Mode : std::uint8_t { kFact1, kTheoremOne, kTheoremThree };

  HistoryDebateVerifier(Mode mode, SingleTapeTM tm, long m);
  HistoryDebateVerifier(LinearSpaceATM atm, long m);

  std::string name() const override;
  bool uses_vector_register() const override { return true; }
  int vector_dim() const override { return 4; }
  StateId initial_state() const override { return 0; }
  StateKind state_kind(StateId s) const override;
  std::string state_name(StateId s) const override;
  const std::vector<std::string>& comm_alphabet() const override { return alphabet_; }
  CommWrite delta_c(StateId s, char input_sym) const override;
  QuantumAction delta_q(StateId s, char input_sym, Symbol gp, Symbol gr) const override;
  ClassicalUpdate delta_s(StateId s, char input_sym, Symbol gp, Symbol gr,
                          int outcome) const override;
  int superop_count() const override { return static_cast<int>(library_.size()); }
  const Superoperator& superop(int index) const override {
    return library_[static_cast<size_t>(index)];
  }
  std::vector<std::string> self_check() const override;

  Mode mode() const { return mode_; }
  long m() const { return m_; }
  long d() const { return d_; }
  const ConfigAlphabet& config_alphabet() const { return alpha_; }
  const SingleTapeTM& tm() const { return tm_; }
  const LinearSpaceATM& atm() const { return atm_; }
  Symbol config_symbol(int code) const { return static_cast<Symbol>(code) + 1; }

  static constexpr const char* kCheckLabel = "transition-check";
  static constexpr const char* kHaltLabel = "halt-decide";

 private:
  struct HState {
    enum class Phase : std::uint8_t {
      kInit, kAnnounceComm, kAnnounceRead, kStreamComm, kStreamRead, kAccept, kReject
    };
    Phase phase = Phase::kInit;
    bool first_block = true;
    bool b1_trailing_done = false;
    bool final_dollar = false;
    SuccessorEmitter em;
    int8_t traced = -1;          // -1 common stream, 1 = P1, 0 = P0
    int8_t pending_choice = -1;  // alternation game: announced choice for this block
    bool p1_announces = true;
    int8_t pace_dir = -1;
    std::uint8_t bounce = 0;

    std::string key() const;
  };

  struct Dispatched {
    int op = -1;
    bool coin = false;
    TerminalKind classical = TerminalKind::kNone;
    HState next;
    HeadMove move = HeadMove::kStay;
  };

  Dispatched dispatch(const HState& s, char input_sym, Symbol gp, Symbol gr) const;
  Dispatched dispatch_block1(HState s, char input_sym, Symbol gp, Symbol gr) const;
  Dispatched dispatch_symbol(HState s, Symbol effective, char input_sym) const;
  Dispatched decide_against(const HState& s, int8_t debater) const;
  HeadMove pace_move(HState& s, char input_sym) const;

  const void* machine_ptr() const;
  SuccessorEmitter::MoveOracle oracle() const;
  static SuccessorEmitter::Move tm_oracle(const void* machine, const ConfigAlphabet& alpha,
                                          int code, int choice, bool at_edge);
  static SuccessorEmitter::Move atm_oracle(const void* machine, const ConfigAlphabet& alpha,
                                           int code, int choice, bool at_edge);

  void build_library();
  int op_index(const std::string& descriptor) const;
  StateId intern(const HState& s) const;

  Mode mode_;
  SingleTapeTM tm_;
  LinearSpaceATM atm_;
  long m_ = 0;
  long d_ = 0;
  bool lag1_ = false;
  ConfigAlphabet alpha_;
  std::vector<std::string> alphabet_;
  Symbol dollar_sym_ = 1, filler_sym_ = 0, choice0_sym_ = -1, choice1_sym_ = -1;
  std::vector<Superoperator> library_;
  std::map<std::string, int> op_index_;
  mutable std::vector<HState> states_;
  mutable std::map<std::string, StateId> state_ids_;
};

std::shared_ptr<HistoryDebateVerifier> build_fact1_verifier(const SingleTapeTM& tm, long m);
std::shared_ptr<HistoryDebateVerifier> build_theorem1_verifier(const SingleTapeTM& tm, long m);
/// m = 0 picks the smallest base exceeding the configuration alphabet.
std::shared_ptr<HistoryDebateVerifier> build_theorem3_verifier(const LinearSpaceATM& atm,
                                                               long m = 0);

}  // namespace qdl
