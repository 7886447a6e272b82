#pragma once

#include <memory>
#include <string>
#include <unordered_map>

#include "qdl/machine.hpp"

namespace qdl {

/// Random-walk halting gadget: two endpoint-to-endpoint ruin walks plus
/// `attenuation` fair coin flips. Exact per-call halting probability
/// (1/2)^attenuation * (1/(n+1))^2.
struct WalkParams {
  int attenuation = 2;
};

Rational walk_probability(long n, int attenuation = 2);

/// Standalone machine wrapping just the walk: accepts when the gadget
/// fires, restarts otherwise (for calibration experiments).
std::shared_ptr<VerifierSpec> build_walk_probe(int attenuation = 2);

enum class UnaryLanguage : std::uint8_t { kPal, kUprime, kUsquare, kUpower, kUfib };

/// Rotation-register debate verifiers for the tally languages and binary
/// palindromes. One debater talks; comparisons ride on the AW rotation trick
/// with integer step bookkeeping.
class PolyVerifier : public VerifierSpec {
 public:
  explicit PolyVerifier(UnaryLanguage lang);

  std::string name() const override;
  bool uses_vector_register() const override { return false; }
  int tracker_count() const override { return trackers_; }
  StateId initial_state() const override { return 0; }
  StateKind state_kind(StateId s) const override;
  std::string state_name(StateId s) const override;
  const std::vector<std::string>& comm_alphabet() const override { return alphabet_; }
  CommWrite delta_c(StateId s, char input_sym) const override;
  QuantumAction delta_q(StateId s, char input_sym, Symbol gp, Symbol gr) const override;
  ClassicalUpdate delta_s(StateId s, char input_sym, Symbol gp, Symbol gr,
                          int outcome) const override;
  int superop_count() const override { return 0; }
  const Superoperator& superop(int index) const override;

  UnaryLanguage language() const { return lang_; }
  bool talker_is_p1() const { return talker_p1_; }
  int attenuation() const { return attenuation_; }
  /// Largest net rotation any comparison can accumulate on inputs of
  /// length n (the calibration range for the walk bound).
  long max_comparison_steps(long n) const;

 private:
  struct PState {
    enum class Phase : std::uint8_t {
      kInit, kCount, kRewind,
      kScanComm, kScanMove, kScanProcess, kScanProcess2,
      kFlush, kCmp,
      kP2Seek,
      kWalkSeek, kWalkDrop, kWalk1, kWalk2, kAtten,
      kAccept, kReject
    };
    Phase phase = Phase::kInit;
    std::uint8_t count = 0;      // count position / flush step / attenuation count
    std::uint8_t blk_type = 0;   // 0 none, 1 'a', 2 'b'
    bool blk_len1 = true;
    bool first_block = true;
    bool seen_b = false;
    std::uint8_t buf = 0;        // lag buffer (upower) / first compared input (pal)
    std::uint8_t buf2 = 0;       // second compared input (pal)
    std::uint8_t parity = 0;     // upower block parity / ufib member counter mod 3
    std::uint8_t ksmall = 1;     // ufib member index while <= 2 (0 = large)
    bool post = false;           // ufib: after the '!' separator
    std::uint8_t posthash = 0;
    std::uint8_t pal_phase = 1;
    std::uint8_t pending = 0;    // measurement pending before this symbol's rotation
    std::uint8_t walk_kind = 0;  // 0 = language default, 1 = reduced-rate reject walk

    std::uint64_t key() const;
  };

  struct Arm {
    TerminalKind terminal = TerminalKind::kNone;
    PState next;
    HeadMove move = HeadMove::kStay;
  };
  struct Dispatched {
    RotationAction action;
    Arm arm0, arm1;        // coin outcomes; arm0 doubles as the single successor
    bool has_arm1 = false;
    TerminalKind q1 = TerminalKind::kNone;  // measurement outcome-1 decision
  };

  Dispatched dispatch(const PState& s, char input_sym, Symbol gp, Symbol gr) const;
  Dispatched scan_process(PState s, Symbol talker, char input_sym) const;
  Dispatched flush_step(PState s, char input_sym) const;
  TerminalKind catch_talker() const;  // decision when the talker is caught classically
  PState enter_walk(const PState& s, std::uint8_t kind) const;
  int small_threshold() const;
  TerminalKind small_decision(long n) const;

  StateId intern(const PState& s) const;

  UnaryLanguage lang_;
  bool talker_p1_ = true;
  int trackers_ = 2;
  int attenuation_ = 2;
  std::vector<std::string> alphabet_;
  Symbol sym_a_, sym_b_, sym_hash_, sym_bang_;
  mutable std::vector<PState> states_;
  mutable std::unordered_map<std::uint64_t, StateId> state_ids_;
};

std::shared_ptr<PolyVerifier> build_pal_verifier();
std::shared_ptr<PolyVerifier> build_uprime_verifier();
std::shared_ptr<PolyVerifier> build_usquare_verifier();
std::shared_ptr<PolyVerifier> build_upower_verifier();
std::shared_ptr<PolyVerifier> build_ufib_verifier();

bool is_prime(long n);
bool is_square(long n);
bool is_power_of_two(long n);
bool is_fibonacci(long n);
bool is_palindrome(const std::string& w);

/// min over 1 <= |k| <= max_steps of sin^2(k sqrt(2) pi).
MpReal min_q1_probability(long max_steps);

}  // namespace qdl
