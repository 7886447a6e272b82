#include "qdl/tm.hpp"

#include <array>
#include <set>
#include <stdexcept>

namespace qdl {

int SingleTapeTM::state_id(const std::string& n) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == n) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> SingleTapeTM::validate() const {
  std::vector<std::string> defects;
  if (states.empty()) defects.push_back("no states");
  if (tape_alphabet.find(kBlank) == std::string::npos)
    defects.push_back("tape alphabet must contain the blank '#'");
  for (char c : input_alphabet)
    if (tape_alphabet.find(c) == std::string::npos)
      defects.push_back(std::string("input symbol '") + c + "' missing from the tape alphabet");
  if (accept_state == reject_state) defects.push_back("accept and reject states must differ");
  auto in_range = [&](int s) { return s >= 0 && s < static_cast<int>(states.size()); };
  if (!in_range(start_state) || !in_range(accept_state) || !in_range(reject_state))
    defects.push_back("state index out of range");
  for (const auto& [key, rule] : rules) {
    if (!in_range(key.first) || !in_range(rule.next)) defects.push_back("rule state out of range");
    if (key.first == accept_state || key.first == reject_state)
      defects.push_back("halting states must be sinks");
    if (tape_alphabet.find(key.second) == std::string::npos ||
        tape_alphabet.find(rule.write) == std::string::npos)
      defects.push_back("rule symbol outside the tape alphabet");
  }
  // Totality on non-halting states.
  for (int s = 0; s < static_cast<int>(states.size()); ++s) {
    if (is_halting(s)) continue;
    for (char c : tape_alphabet)
      if (!rules.count({s, c}))
        defects.push_back("missing rule for (" + states[static_cast<size_t>(s)] + ", " + c + ")");
  }
  return defects;
}

bool SingleTapeTM::has_left_moves() const {
  for (const auto& [key, rule] : rules)
    if (rule.move == TapeMove::kLeft) return true;
  return false;
}

ConfigAlphabet::ConfigAlphabet(const std::string& tape_alphabet, int num_states) {
  for (char c : tape_alphabet) {
    plain_[c] = static_cast<int>(names_.size()) + 1;
    names_.push_back(std::string(1, c));
  }
  for (int s = 0; s < num_states; ++s)
    for (char c : tape_alphabet) {
      composite_[{s, c}] = static_cast<int>(names_.size()) + 1;
      names_.push_back("[" + std::to_string(s) + "," + std::string(1, c) + "]");
    }
}

int ConfigAlphabet::plain_code(char c) const {
  auto it = plain_.find(c);
  if (it == plain_.end()) throw std::invalid_argument(std::string("unknown tape symbol ") + c);
  return it->second;
}

int ConfigAlphabet::composite_code(int state, char c) const {
  auto it = composite_.find({state, c});
  if (it == composite_.end()) throw std::invalid_argument("unknown composite symbol");
  return it->second;
}

bool ConfigAlphabet::is_composite(int code) const {
  return names_[static_cast<size_t>(code) - 1].front() == '[';
}

std::pair<int, char> ConfigAlphabet::composite_parts(int code) const {
  const std::string& n = names_[static_cast<size_t>(code) - 1];
  auto comma = n.find(',');
  return {std::stoi(n.substr(1, comma - 1)), n[comma + 1]};
}

char ConfigAlphabet::plain_char(int code) const {
  const std::string& n = names_[static_cast<size_t>(code) - 1];
  if (n.size() != 1) throw std::logic_error("plain_char on a composite code");
  return n[0];
}

int ConfigAlphabet::code_of(const std::string& name) const {
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<int>(i) + 1;
  return 0;
}

std::vector<int> describe(const Configuration& c, const ConfigAlphabet& alpha) {
  std::vector<int> out;
  out.reserve(c.tape.size());
  for (size_t i = 0; i < c.tape.size(); ++i) {
    if (static_cast<int>(i) == c.head)
      out.push_back(alpha.composite_code(c.state, c.tape[i]));
    else
      out.push_back(alpha.plain_code(c.tape[i]));
  }
  return out;
}

Configuration start_configuration(const SingleTapeTM& tm, const std::string& w) {
  Configuration c;
  c.tape = w + std::string(1, kBlank);
  if (w.empty()) c.tape += kBlank;  // keep the head off the final blank
  c.head = 0;
  c.state = tm.start_state;
  return c;
}

bool is_halting(const SingleTapeTM& tm, const Configuration& c) { return tm.is_halting(c.state); }

Configuration next_configuration(const SingleTapeTM& tm, const Configuration& c) {
  if (is_halting(tm, c)) throw std::logic_error("next_configuration: configuration is halting");
  auto it = tm.rules.find({c.state, c.tape[static_cast<size_t>(c.head)]});
  if (it == tm.rules.end())
    throw std::logic_error("next_configuration: missing rule for state " +
                           tm.states[static_cast<size_t>(c.state)]);
  const auto& rule = it->second;
  Configuration n = c;
  n.tape[static_cast<size_t>(n.head)] = rule.write;
  n.state = rule.next;
  switch (rule.move) {
    case TapeMove::kLeft:
      if (n.head > 0) --n.head;  // left moves at the edge stay put
      break;
    case TapeMove::kRight:
      ++n.head;
      if (n.head == static_cast<int>(n.tape.size()) - 1) n.tape += kBlank;
      break;
    case TapeMove::kStay: break;
  }
  return n;
}

mpz_class encode_codes(const std::vector<int>& codes, long m) {
  mpz_class v(0);
  for (int code : codes) v = v * m + code;
  return v;
}

mpz_class encode_string(const std::string& x, const EncodingParams& p) {
  if (!p.alphabet) throw std::invalid_argument("encode_string: no alphabet");
  std::vector<int> codes;
  codes.reserve(x.size());
  for (char c : x) codes.push_back(p.alphabet->plain_code(c));
  return encode_codes(codes, p.m);
}

HistoryStream::HistoryStream(const SingleTapeTM& tm, const ConfigAlphabet& alpha, std::string w)
    : tm_(&tm), alpha_(&alpha), w_(std::move(w)) {
  reset();
}

void HistoryStream::reset() {
  cur_ = start_configuration(*tm_, w_);
  done_ = false;
  load_block();
}

void HistoryStream::load_block() {
  block_ = describe(cur_, *alpha_);
  pos_ = 0;
  dollars_ = 0;
}

std::string HistoryStream::next() {
  if (done_) return "$";  // past the end: a well-behaved caller already halted
  if (pos_ < block_.size()) return alpha_->symbol_name(block_[pos_++]);
  if (dollars_ < 2) {
    ++dollars_;
    if (dollars_ == 2) {
      Configuration n = next_configuration(*tm_, cur_);
      if (is_halting(*tm_, n)) {
        done_ = true;  // c_{h-1} was just finished
      } else {
        cur_ = n;
        // Defer loading until the next call so the two separators flush first.
      }
    }
    return "$";
  }
  load_block();
  return next();
}

std::optional<bool> run_tm(const SingleTapeTM& tm, const std::string& w, long max_steps) {
  Configuration c = start_configuration(tm, w);
  for (long i = 0; i < max_steps; ++i) {
    if (is_halting(tm, c)) return c.state == tm.accept_state;
    c = next_configuration(tm, c);
  }
  if (is_halting(tm, c)) return c.state == tm.accept_state;
  return std::nullopt;
}

std::optional<Configuration> configuration_from_codes(const std::vector<int>& codes,
                                                      const ConfigAlphabet& alpha) {
  Configuration c;
  int composites = 0;
  for (size_t i = 0; i < codes.size(); ++i) {
    if (alpha.is_composite(codes[i])) {
      ++composites;
      auto [state, sym] = alpha.composite_parts(codes[i]);
      c.state = state;
      c.head = static_cast<int>(i);
      c.tape += sym;
    } else {
      c.tape += alpha.plain_char(codes[i]);
    }
  }
  if (composites != 1) return std::nullopt;
  if (c.tape.empty() || c.tape.back() != kBlank) return std::nullopt;
  if (c.head >= static_cast<int>(c.tape.size()) - 1) return std::nullopt;
  return c;
}

// ---------------------------------------------------------------------------
// ATMs.
// ---------------------------------------------------------------------------

int LinearSpaceATM::state_id(const std::string& n) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i] == n) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> LinearSpaceATM::validate() const {
  std::vector<std::string> defects;
  if (states.size() != kinds.size()) defects.push_back("state/kind arity mismatch");
  if (tape_alphabet.find(kBlank) == std::string::npos)
    defects.push_back("tape alphabet must contain the blank '#'");
  if (start_state < 0 || start_state >= static_cast<int>(states.size()))
    defects.push_back("start state out of range");
  else if (kinds[static_cast<size_t>(start_state)] != AtmKind::kExistential)
    defects.push_back("start state must be existential");
  if (space_coefficient < 1 || space_coefficient > 8)
    defects.push_back("space coefficient must be in 1..8");
  for (const auto& [key, options] : rules) {
    AtmKind from = kinds[static_cast<size_t>(key.first)];
    if (from == AtmKind::kAccept || from == AtmKind::kReject)
      defects.push_back("halting states must be sinks");
    for (const auto& rule : options) {
      AtmKind to = kinds[static_cast<size_t>(rule.next)];
      if (to == AtmKind::kAccept || to == AtmKind::kReject) continue;
      // Strict alternation between existential and universal states.
      if (from == AtmKind::kExistential && to != AtmKind::kUniversal)
        defects.push_back("existential state must step to a universal or halting state");
      if (from == AtmKind::kUniversal && to != AtmKind::kExistential)
        defects.push_back("universal state must step to an existential or halting state");
    }
  }
  for (int s = 0; s < static_cast<int>(states.size()); ++s) {
    if (is_halting(s)) continue;
    for (char c : tape_alphabet)
      if (!rules.count({s, c}))
        defects.push_back("missing rule for (" + states[static_cast<size_t>(s)] + ", " + c + ")");
  }
  return defects;
}

AtmConfiguration atm_start_configuration(const LinearSpaceATM& atm, const std::string& w) {
  AtmConfiguration c;
  c.tape = w + std::string(1, kBlank);
  if (w.empty()) c.tape += kBlank;
  c.head = 0;
  c.state = atm.start_state;
  return c;
}

AtmConfiguration atm_next(const LinearSpaceATM& atm, const AtmConfiguration& c, int choice) {
  if (atm.is_halting(c.state)) throw std::logic_error("atm_next: configuration is halting");
  if (choice != 0 && choice != 1) throw std::invalid_argument("atm_next: binary choices only");
  auto it = atm.rules.find({c.state, c.tape[static_cast<size_t>(c.head)]});
  if (it == atm.rules.end()) throw std::logic_error("atm_next: missing rule");
  const auto& rule = it->second[static_cast<size_t>(choice)];
  AtmConfiguration n = c;
  n.tape[static_cast<size_t>(n.head)] = rule.write;
  n.state = rule.next;
  switch (rule.move) {
    case TapeMove::kLeft:
      if (n.head > 0) --n.head;
      break;
    case TapeMove::kRight:
      ++n.head;
      if (n.head == static_cast<int>(n.tape.size()) - 1) n.tape += kBlank;
      break;
    case TapeMove::kStay: break;
  }
  return n;
}

std::vector<int> atm_describe(const AtmConfiguration& c, const ConfigAlphabet& alpha) {
  std::vector<int> out;
  out.reserve(c.tape.size());
  for (size_t i = 0; i < c.tape.size(); ++i) {
    if (static_cast<int>(i) == c.head)
      out.push_back(alpha.composite_code(c.state, c.tape[i]));
    else
      out.push_back(alpha.plain_code(c.tape[i]));
  }
  return out;
}

namespace {

bool atm_wins_rec(const LinearSpaceATM& atm, const AtmConfiguration& c, long depth,
                  std::map<AtmConfiguration, int>& memo) {
  if (atm.is_halting(c.state))
    return atm.kinds[static_cast<size_t>(c.state)] == AtmKind::kAccept;
  if (depth <= 0) throw std::runtime_error("atm game solve: depth budget exhausted");
  auto it = memo.find(c);
  if (it != memo.end()) return it->second != 0;
  bool existential = atm.kinds[static_cast<size_t>(c.state)] == AtmKind::kExistential;
  bool win = !existential;
  for (int choice = 0; choice < 2; ++choice) {
    bool sub = atm_wins_rec(atm, atm_next(atm, c, choice), depth - 1, memo);
    if (existential) win = win || sub;
    else win = win && sub;
  }
  memo.emplace(c, win ? 1 : 0);
  return win;
}

}  // namespace

bool atm_existential_wins(const LinearSpaceATM& atm, const AtmConfiguration& c, long max_depth) {
  std::map<AtmConfiguration, int> memo;
  return atm_wins_rec(atm, c, max_depth, memo);
}

int atm_optimal_choice(const LinearSpaceATM& atm, const AtmConfiguration& c) {
  bool existential = atm.kinds[static_cast<size_t>(c.state)] == AtmKind::kExistential;
  bool zero_wins = atm_existential_wins(atm, atm_next(atm, c, 0));
  if (existential) return zero_wins ? 0 : (atm_existential_wins(atm, atm_next(atm, c, 1)) ? 1 : 0);
  return zero_wins ? (atm_existential_wins(atm, atm_next(atm, c, 1)) ? 0 : 1) : 0;
}

// ---------------------------------------------------------------------------
// Bundled machines.
// ---------------------------------------------------------------------------

SingleTapeTM parity_tm() {
  SingleTapeTM tm;
  tm.name = "parity";
  tm.states = {"even", "odd", "acc", "rej"};
  tm.input_alphabet = "1";
  tm.tape_alphabet = "1#";
  tm.start_state = 0;
  tm.accept_state = 2;
  tm.reject_state = 3;
  tm.rules[{0, '1'}] = {'1', TapeMove::kRight, 1};
  tm.rules[{1, '1'}] = {'1', TapeMove::kRight, 0};
  tm.rules[{0, kBlank}] = {kBlank, TapeMove::kStay, 2};
  tm.rules[{1, kBlank}] = {kBlank, TapeMove::kStay, 3};
  return tm;
}

SingleTapeTM one_move_tm() {
  SingleTapeTM tm;
  tm.name = "one_move";
  tm.states = {"go", "acc", "rej"};
  tm.input_alphabet = "1";
  tm.tape_alphabet = "1#";
  tm.start_state = 0;
  tm.accept_state = 1;
  tm.reject_state = 2;
  tm.rules[{0, '1'}] = {'1', TapeMove::kStay, 1};
  tm.rules[{0, kBlank}] = {kBlank, TapeMove::kStay, 1};
  return tm;
}

LinearSpaceATM bitgame_atm() {
  LinearSpaceATM atm;
  atm.name = "bitgame";
  // States: E0/E1 existential mover with parity, U0/U1 universal mover.
  atm.states = {"E0", "E1", "U0", "U1", "acc", "rej"};
  atm.kinds = {AtmKind::kExistential, AtmKind::kExistential, AtmKind::kUniversal,
               AtmKind::kUniversal, AtmKind::kAccept, AtmKind::kReject};
  atm.input_alphabet = "01";
  atm.tape_alphabet = "01#";
  atm.start_state = 0;
  atm.space_coefficient = 1;

  auto fill = [&](int from, int parity, bool existential) {
    for (char sym : std::string("01#")) {
      std::array<LinearSpaceATM::Rule, 2> opts;
      if (sym == kBlank) {
        // End of input: decide by the accumulated parity; both choices agree.
        int target = parity == 1 ? 4 : 5;
        opts[0] = {kBlank, TapeMove::kStay, target};
        opts[1] = {kBlank, TapeMove::kStay, target};
      } else {
        for (int b = 0; b < 2; ++b) {
          int eff = (sym == '1' && b == 1) ? 1 : 0;
          int next_parity = parity ^ eff;
          int next_state = (existential ? 2 : 0) + next_parity;
          opts[static_cast<size_t>(b)] = {sym, TapeMove::kRight, next_state};
        }
      }
      atm.rules[{from, sym}] = opts;
    }
  };
  fill(0, 0, true);
  fill(1, 1, true);
  fill(2, 0, false);
  fill(3, 1, false);
  return atm;
}

bool bitgame_member(const std::string& w) {
  int last_one = -1;
  for (size_t i = 0; i < w.size(); ++i)
    if (w[i] == '1') last_one = static_cast<int>(i) + 1;
  return last_one > 0 && last_one % 2 == 1;
}

}  // namespace qdl
