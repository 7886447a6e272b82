#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdl/rational.hpp"

namespace qdl {

inline constexpr char kBlank = '#';

enum class TapeMove : std::uint8_t { kLeft, kRight, kStay };

/// Deterministic single-tape Turing machine. Accept/reject states are sinks.
struct SingleTapeTM {
  std::string name;
  std::vector<std::string> states;
  std::string input_alphabet;   // chars
  std::string tape_alphabet;    // chars, must contain kBlank
  int start_state = 0;
  int accept_state = 0;
  int reject_state = 0;

  struct Rule {
    char write = kBlank;
    TapeMove move = TapeMove::kStay;
    int next = 0;
  };
  // keyed by (state, tape symbol)
  std::map<std::pair<int, char>, Rule> rules;

  int state_id(const std::string& n) const;
  bool is_halting(int state) const { return state == accept_state || state == reject_state; }
  std::vector<std::string> validate() const;
  bool has_left_moves() const;
};

/// Configuration description: the used tape prefix with the control state
/// folded into the head cell as a composite symbol. The description always
/// ends with a blank and the head is never on the final cell, so successor
/// descriptions never shrink and grow by at most one.
struct Configuration {
  std::string tape;  // plain tape symbols; composite is implied via head/state
  int head = 0;      // 0-based cell index, head < |tape| - 1 enforced
  int state = 0;

  bool operator==(const Configuration&) const = default;
};

/// Symbols a configuration description is written in: plain tape symbols
/// plus one composite symbol per (state, tape symbol) pair.
class ConfigAlphabet {
 public:
  ConfigAlphabet() = default;
  ConfigAlphabet(const std::string& tape_alphabet, int num_states);

  int size() const { return static_cast<int>(names_.size()); }
  /// 1-based code of a plain tape symbol.
  int plain_code(char c) const;
  /// 1-based code of a composite [state, symbol].
  int composite_code(int state, char c) const;
  const std::string& symbol_name(int code) const { return names_[static_cast<size_t>(code) - 1]; }
  bool is_composite(int code) const;
  std::pair<int, char> composite_parts(int code) const;
  char plain_char(int code) const;
  /// Code for a rendered name, or 0 when unknown.
  int code_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;        // index = code-1
  std::map<char, int> plain_;
  std::map<std::pair<int, char>, int> composite_;
};

/// Description of a configuration as 1-based symbol codes.
std::vector<int> describe(const Configuration& c, const ConfigAlphabet& alpha);

Configuration start_configuration(const SingleTapeTM& tm, const std::string& w);

/// The unique legal successor. Throws on halting input configurations.
Configuration next_configuration(const SingleTapeTM& tm, const Configuration& c);

bool is_halting(const SingleTapeTM& tm, const Configuration& c);

struct EncodingParams {
  long m = 0;                 // base, fixed per verifier
  const ConfigAlphabet* alphabet = nullptr;
  long d = 0;                 // common denominator of the main operation elements
};

/// Base-m value of a description, most significant digit first
/// (new = old * m + code).
mpz_class encode_codes(const std::vector<int>& codes, long m);
mpz_class encode_string(const std::string& x, const EncodingParams& p);

/// Lazy producer of the history stream c1 $$ c2 $$ ... $$ c_{h-1} $$ as
/// rendered symbol names ("$" for the separator).
class HistoryStream {
 public:
  HistoryStream(const SingleTapeTM& tm, const ConfigAlphabet& alpha, std::string w);
  /// Next symbol name; never exhausts for nonterminating machines, so
  /// consumers must apply their own caps.
  std::string next();
  void reset();

 private:
  void load_block();
  const SingleTapeTM* tm_;
  const ConfigAlphabet* alpha_;
  std::string w_;
  Configuration cur_;
  std::vector<int> block_;
  size_t pos_ = 0;
  int dollars_ = 0;
  bool done_ = false;
};

/// Runs the TM to halting (bounded by max_steps) and reports acceptance.
std::optional<bool> run_tm(const SingleTapeTM& tm, const std::string& w, long max_steps = 100'000);

/// Inverse of describe: rebuilds the configuration from description codes.
/// Empty when the codes are not a well-formed description (no or multiple
/// composites, missing trailing blank, head on the final cell).
std::optional<Configuration> configuration_from_codes(const std::vector<int>& codes,
                                                      const ConfigAlphabet& alpha);

// ---------------------------------------------------------------------------
// Linear-space alternating TMs with strict alternation and binary branching.
// ---------------------------------------------------------------------------

enum class AtmKind : std::uint8_t { kExistential, kUniversal, kAccept, kReject };

struct LinearSpaceATM {
  std::string name;
  std::vector<std::string> states;
  std::vector<AtmKind> kinds;
  std::string input_alphabet;
  std::string tape_alphabet;
  int start_state = 0;
  int space_coefficient = 1;  // k: at most k*n cells on inputs of length n

  struct Rule {
    char write = kBlank;
    TapeMove move = TapeMove::kStay;
    int next = 0;
  };
  // Two options per (state, symbol): the announced choice picks one.
  std::map<std::pair<int, char>, std::array<Rule, 2>> rules;

  int state_id(const std::string& n) const;
  bool is_halting(int state) const {
    return kinds[static_cast<size_t>(state)] == AtmKind::kAccept ||
           kinds[static_cast<size_t>(state)] == AtmKind::kReject;
  }
  std::vector<std::string> validate() const;
};

struct AtmConfiguration {
  std::string tape;
  int head = 0;
  int state = 0;
  bool operator==(const AtmConfiguration&) const = default;
  bool operator<(const AtmConfiguration& o) const {
    return std::tie(tape, head, state) < std::tie(o.tape, o.head, o.state);
  }
};

AtmConfiguration atm_start_configuration(const LinearSpaceATM& atm, const std::string& w);
AtmConfiguration atm_next(const LinearSpaceATM& atm, const AtmConfiguration& c, int choice);
std::vector<int> atm_describe(const AtmConfiguration& c, const ConfigAlphabet& alpha);

/// Exhaustive game solve: does the existential player win from c?
/// Repeated configurations along a path count against the mover
/// (desk-scale guard; the bundled games are acyclic).
bool atm_existential_wins(const LinearSpaceATM& atm, const AtmConfiguration& c,
                          long max_depth = 10'000);

/// Optimal choice for the mover at c (existential maximizes acceptance,
/// universal minimizes it).
int atm_optimal_choice(const LinearSpaceATM& atm, const AtmConfiguration& c);

// ---------------------------------------------------------------------------
// Bundled machines.
// ---------------------------------------------------------------------------

/// Unary parity decider: accepts strings of even length over {1}.
SingleTapeTM parity_tm();
/// Accepts immediately, one move, on any input over {1}.
SingleTapeTM one_move_tm();
/// Bit-picking parity game over {0,1}: players alternately commit bits
/// b_i (P1 on odd steps); accept iff XOR of b_i AND w_i is 1. The
/// existential player wins exactly when the last 1 in w sits at an odd
/// index.
LinearSpaceATM bitgame_atm();
/// Reference predicate for bitgame_atm.
bool bitgame_member(const std::string& w);

}  // namespace qdl
