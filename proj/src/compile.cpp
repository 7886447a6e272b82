#include "qdl/compile.hpp"

#include <sstream>
#include <stdexcept>

namespace qdl {

long choose_d(long m, int alphabet_size) {
  if (m < 2) throw std::invalid_argument("choose_d: base must be at least 2");
  long bound = std::max(2 * m, 2 * static_cast<long>(alphabet_size) + 2);
  long d = 1;
  while (d <= bound) d *= 2;
  return d;
}

long choose_d(const SingleTapeTM& tm, long m) {
  ConfigAlphabet alpha(tm.tape_alphabet, static_cast<int>(tm.states.size()));
  return choose_d(m, alpha.size());
}

OperationElement build_main_element(ElementKind kind, const ElementParams& p) {
  OperationElement e;
  e.matrix = RationalMatrix::zero(4);
  auto set = [&](int r, int c, long v) { e.matrix.at(r, c) = Rational(v, p.d); };
  switch (kind) {
    case ElementKind::kFirstBlockDigit:
      set(0, 0, 1);
      set(1, 0, p.gamma);
      set(1, 1, p.m);
      e.label = "b1digit";
      break;
    case ElementKind::kDigitPair:
      set(0, 0, 1);
      set(1, 1, 1);
      set(2, 0, p.sigma);
      set(2, 2, p.m);
      set(3, 0, p.gamma);
      set(3, 3, p.m);
      e.label = "digit-pair";
      break;
    case ElementKind::kConfigDigit:
      set(0, 0, 1);
      set(1, 1, 1);
      set(2, 0, p.sigma);
      set(2, 2, p.m);
      set(3, 3, 1);
      e.label = "config-digit";
      break;
    case ElementKind::kNextDigit:
      set(0, 0, 1);
      set(1, 1, 1);
      set(2, 2, 1);
      set(3, 0, p.gamma);
      set(3, 3, p.m);
      e.label = "next-digit";
      break;
    case ElementKind::kPad:
      set(0, 0, 1);
      set(1, 1, 1);
      if (!p.block1) {
        set(2, 2, 1);
        set(3, 3, 1);
      }
      e.label = "pad";
      break;
    case ElementKind::kTransitionCheck:
      set(1, 1, 1);
      set(1, 2, -1);
      e.label = "transition-check";
      e.action = p.decide;
      break;
    case ElementKind::kHaltDecide:
      set(0, 0, 1);
      e.label = "halt-decide";
      e.action = p.decide;
      break;
    case ElementKind::kAdvance:
      set(0, 0, 1);
      if (p.fold_gamma > 0) {
        // advance composed with a trailing successor digit
        set(1, 0, p.fold_gamma);
        if (p.block1)
          set(1, 1, p.m);
        else
          set(1, 3, p.m);
      } else {
        if (p.block1)
          set(1, 1, 1);
        else
          set(1, 3, 1);
      }
      e.label = "advance";
      e.action = p.decide;
      break;
  }
  return e;
}

std::vector<mpz_class> greedy_squares(mpz_class n) {
  std::vector<mpz_class> out;
  while (n > 0) {
    mpz_class x;
    mpz_sqrt(x.get_mpz_t(), n.get_mpz_t());
    out.push_back(x);
    n -= x * x;
    if (out.size() > 128) throw std::logic_error("greedy_squares: runaway decomposition");
  }
  return out;
}

Superoperator complete_superoperator(std::vector<OperationElement> mains, long d,
                                     const std::string& label) {
  if (mains.empty()) throw std::invalid_argument("complete_superoperator: no main elements");
  int dim = mains.front().matrix.dim;
  RationalMatrix residual = RationalMatrix::identity(dim);
  for (const auto& e : mains) {
    RationalMatrix t = e.matrix.transpose() * e.matrix;
    for (size_t i = 0; i < residual.cells.size(); ++i) residual.cells[i] -= t.cells[i];
  }

  Superoperator op;
  op.label = label;
  op.elements = std::move(mains);

  auto add_aux = [&](const std::vector<Rational>& row) {
    OperationElement aux;
    aux.matrix = RationalMatrix::zero(dim);
    for (int c = 0; c < dim; ++c) aux.matrix.at(0, c) = row[static_cast<size_t>(c)];
    aux.action = OutcomeAction::kRestart;
    aux.label = "aux-" + std::to_string(op.elements.size());
    op.elements.push_back(std::move(aux));
  };

  auto split_scalar = [&](const Rational& c, const std::vector<Rational>& direction) {
    // c = sum q_k^2 with q_k = x_k / den, where num*den = sum x_k^2.
    mpz_class num = c.numerator(), den = c.denominator();
    for (const auto& x : greedy_squares(num * den)) {
      Rational q(x, den);
      std::vector<Rational> row(direction.size());
      for (size_t i = 0; i < direction.size(); ++i) row[i] = q * direction[i];
      add_aux(row);
    }
  };

  bool all_zero = true;
  for (const auto& cell : residual.cells)
    if (!cell.is_zero()) all_zero = false;

  if (!all_zero) {
    bool scalar = true;
    for (int r = 0; r < dim && scalar; ++r)
      for (int c = 0; c < dim && scalar; ++c) {
        if (r == c && !(residual.at(r, c) == residual.at(0, 0))) scalar = false;
        if (r != c && !residual.at(r, c).is_zero()) scalar = false;
      }
    if (scalar) {
      if (residual.at(0, 0).sign() < 0)
        throw std::invalid_argument("complete_superoperator: residual not PSD; increase d (" +
                                    std::to_string(d) + ")");
      // c * I = sum_k (q_k I)^T (q_k I): one scaled-identity element per square.
      mpz_class num = residual.at(0, 0).numerator(), den = residual.at(0, 0).denominator();
      for (const auto& x : greedy_squares(num * den)) {
        Rational q(x, den);
        OperationElement aux;
        aux.matrix = RationalMatrix::zero(dim);
        for (int k = 0; k < dim; ++k) aux.matrix.at(k, k) = q;
        aux.action = OutcomeAction::kRestart;
        aux.label = "aux-" + std::to_string(op.elements.size());
        op.elements.push_back(std::move(aux));
      }
    } else {
      // LDL^T factorization over the rationals; each pivot contributes
      // rank-one auxiliaries along its unit column.
      RationalMatrix a = residual;
      for (int i = 0; i < dim; ++i) {
        Rational pivot = a.at(i, i);
        if (pivot.sign() < 0)
          throw std::invalid_argument("complete_superoperator: residual not PSD; increase d (" +
                                      std::to_string(d) + ")");
        if (pivot.is_zero()) {
          for (int c = 0; c < dim; ++c)
            if (!a.at(i, c).is_zero())
              throw std::invalid_argument(
                  "complete_superoperator: residual not PSD (zero pivot, nonzero row); increase d");
          continue;
        }
        std::vector<Rational> column(static_cast<size_t>(dim), Rational(0));
        column[static_cast<size_t>(i)] = Rational(1);
        for (int r = i + 1; r < dim; ++r) column[static_cast<size_t>(r)] = a.at(r, i) / pivot;
        split_scalar(pivot, column);
        // eliminate
        for (int r = i + 1; r < dim; ++r) {
          Rational f = a.at(r, i) / pivot;
          for (int c = 0; c < dim; ++c) a.at(r, c) -= f * a.at(i, c);
        }
        for (int c = i; c < dim; ++c) a.at(i, c) = Rational(0);
        for (int r = i + 1; r < dim; ++r) a.at(r, i) = Rational(0);
      }
    }
  }

  if (!check_completeness(op))
    throw std::logic_error("complete_superoperator: completion failed for '" + label + "'");
  return op;
}

// ---------------------------------------------------------------------------
// Successor emitter.
// ---------------------------------------------------------------------------

bool SuccessorEmitter::fresh() const { return !started_; }

std::string SuccessorEmitter::key() const {
  std::ostringstream os;
  os << static_cast<int>(mode_) << ':' << a_ << ':' << b_ << ':' << static_cast<int>(halt_) << ':'
     << growth_ << ':' << started_;
  return os.str();
}

int SuccessorEmitter::feed(int code, int choice, const void* machine, const ConfigAlphabet& alpha,
                           MoveOracle oracle) {
  const int kDollar = 0;
  bool at_edge = !started_;
  if (code != kDollar) started_ = true;
  auto viol = [&]() {
    mode_ = M::kViolation;
    return 0;
  };

  if (mode_ == M::kViolation || mode_ == M::kFlushed) return viol();

  bool composite = code != kDollar && alpha.is_composite(code);

  if (!lag1_) {
    switch (mode_) {
      case M::kScan0: {
        if (code == kDollar) return viol();  // no marker in the description
        if (!composite) return code;         // successor copies this cell
        Move mv = oracle(machine, alpha, code, choice, at_edge);
        if (!mv.ok) return viol();
        halt_ = mv.halt;
        if (mv.dir == TapeMove::kRight) {
          mode_ = M::kRNext;
          a_ = mv.next_state;
          return mv.write_code;
        }
        // stay (including clamped left moves at the edge)
        mode_ = M::kPost0;
        return alpha.composite_code(mv.next_state,
                                    alpha.plain_char(mv.write_code));
      }
      case M::kRNext:
        if (code == kDollar || composite) return viol();
        mode_ = M::kPostR;
        return alpha.composite_code(a_, alpha.plain_char(code));
      case M::kPostR:
        if (code == kDollar) {  // head walked onto the appended blank
          mode_ = M::kFlushed;
          return alpha.plain_code(kBlank);
        }
        if (composite) return viol();
        mode_ = M::kPost0;
        return code;
      case M::kPost0:
        if (code == kDollar) {
          mode_ = M::kFlushed;
          return 0;
        }
        if (composite) return viol();
        return code;
      default: return viol();
    }
  }

  switch (mode_) {
    case M::kScan0: mode_ = M::kPre; [[fallthrough]];
    case M::kPre: {
      if (code == kDollar) {
        if (a_ == 0) return viol();  // empty or marker-free description
        return viol();               // marker never appeared
      }
      if (composite) {
        Move mv = oracle(machine, alpha, code, choice, at_edge);
        if (!mv.ok) return viol();
        halt_ = mv.halt;
        if (at_edge) {
          // No digit precedes the marker; emit in place like the
          // in-place variant.
          if (mv.dir == TapeMove::kRight) {
            mode_ = M::kRNext;
            a_ = mv.next_state;
            return mv.write_code;
          }
          mode_ = M::kPost0;
          return alpha.composite_code(mv.next_state, alpha.plain_char(mv.write_code));
        }
        int prev = a_;
        switch (mv.dir) {
          case TapeMove::kLeft: {
            int digit = alpha.composite_code(mv.next_state, alpha.plain_char(prev));
            mode_ = M::kMarkL;
            a_ = mv.write_code;
            return digit;
          }
          case TapeMove::kStay: {
            mode_ = M::kMarkS;
            a_ = alpha.composite_code(mv.next_state, alpha.plain_char(mv.write_code));
            return prev;
          }
          case TapeMove::kRight: {
            mode_ = M::kMarkR;
            a_ = mv.write_code;
            b_ = mv.next_state;
            return prev;
          }
        }
        return viol();
      }
      if (a_ == 0) {
        a_ = code;
        return 0;  // first symbol: one step behind from here on
      }
      int digit = a_;
      a_ = code;
      return digit;
    }
    case M::kMarkL:
      if (code == kDollar || composite) return viol();
      mode_ = M::kPost1;
      std::swap(a_, code);
      return code;  // the written symbol at the marker cell
    case M::kMarkS:
      if (code == kDollar || composite) return viol();
      mode_ = M::kPost1;
      std::swap(a_, code);
      return code;
    case M::kMarkR:
      if (code == kDollar || composite) return viol();
      mode_ = M::kMarkR2;
      std::swap(b_, code);  // b_ now holds the consumed symbol, code the state
      std::swap(a_, code);
      return code;  // emit the written symbol
    case M::kMarkR2: {
      // a_ = successor state, b_ = symbol under the moved head
      int digit = alpha.composite_code(a_, alpha.plain_char(b_));
      if (code == kDollar) {
        growth_ = true;  // the appended blank folds into the block-final element
        mode_ = M::kFlushed;
        return digit;
      }
      if (composite) return viol();
      mode_ = M::kPost1;
      a_ = code;
      b_ = 0;
      return digit;
    }
    case M::kPost1:
      if (code == kDollar) {
        if (a_ == 0) return viol();
        int digit = a_;
        a_ = 0;
        mode_ = M::kFlushed;
        return digit;
      }
      if (composite) return viol();
      std::swap(a_, code);
      return code;
    case M::kRNext:
      if (code == kDollar || composite) return viol();
      mode_ = M::kPostR;
      return alpha.composite_code(a_, alpha.plain_char(code));
    case M::kPostR:
      if (code == kDollar) {
        mode_ = M::kFlushed;
        return alpha.plain_code(kBlank);
      }
      if (composite) return viol();
      mode_ = M::kPost0;
      return code;
    case M::kPost0:
      if (code == kDollar) {
        mode_ = M::kFlushed;
        return 0;
      }
      if (composite) return viol();
      return code;
    default: return viol();
  }
}

// ---------------------------------------------------------------------------
// Compiled verifier.
// ---------------------------------------------------------------------------

namespace {
bool atm_has_left_moves(const LinearSpaceATM& atm) {
  for (const auto& [key, opts] : atm.rules)
    for (const auto& r : opts)
      if (r.move == TapeMove::kLeft) return true;
  return false;
}
}  // namespace

std::string HistoryDebateVerifier::HState::key() const {
  std::ostringstream os;
  os << static_cast<int>(phase) << '|' << first_block << b1_trailing_done << final_dollar << '|'
     << em.key() << '|' << static_cast<int>(traced) << '|' << static_cast<int>(pending_choice)
     << p1_announces << '|' << static_cast<int>(pace_dir) << ':' << static_cast<int>(bounce);
  return os.str();
}

HistoryDebateVerifier::HistoryDebateVerifier(Mode mode, SingleTapeTM tm, long m)
    : mode_(mode), tm_(std::move(tm)), m_(m) {
  if (mode == Mode::kTheoremThree)
    throw std::invalid_argument("alternating-machine construction takes an ATM");
  auto defects = tm_.validate();
  if (!defects.empty()) throw std::invalid_argument("invalid machine: " + defects.front());
  if (m_ < 2) throw std::invalid_argument("base m must be at least 2");
  alpha_ = ConfigAlphabet(tm_.tape_alphabet, static_cast<int>(tm_.states.size()));
  d_ = choose_d(m_, alpha_.size());
  lag1_ = tm_.has_left_moves();
  build_library();
}

HistoryDebateVerifier::HistoryDebateVerifier(LinearSpaceATM atm, long m)
    : mode_(Mode::kTheoremThree), atm_(std::move(atm)), m_(m) {
  auto defects = atm_.validate();
  if (!defects.empty()) throw std::invalid_argument("invalid machine: " + defects.front());
  alpha_ = ConfigAlphabet(atm_.tape_alphabet, static_cast<int>(atm_.states.size()));
  if (m_ <= 0) m_ = alpha_.size() + 1;
  if (m_ < 2) throw std::invalid_argument("base m must be at least 2");
  d_ = choose_d(m_, alpha_.size());
  lag1_ = atm_has_left_moves(atm_);
  build_library();
}

std::string HistoryDebateVerifier::name() const {
  switch (mode_) {
    case Mode::kFact1: return "fact1(" + tm_.name + ",m=" + std::to_string(m_) + ")";
    case Mode::kTheoremOne: return "theorem1(" + tm_.name + ",m=" + std::to_string(m_) + ")";
    case Mode::kTheoremThree: return "theorem3(" + atm_.name + ",m=" + std::to_string(m_) + ")";
  }
  return "?";
}

void HistoryDebateVerifier::build_library() {
  alphabet_.clear();
  alphabet_.push_back(".");
  alphabet_.push_back("$");
  for (int code = 1; code <= alpha_.size(); ++code) alphabet_.push_back(alpha_.symbol_name(code));
  auto ensure = [&](const std::string& s) {
    for (const auto& t : alphabet_)
      if (t == s) return;
    alphabet_.push_back(s);
  };
  ensure("0");
  ensure("1");
  choice0_sym_ = comm_symbol("0");
  choice1_sym_ = comm_symbol("1");

  auto add = [&](const std::string& descriptor, Superoperator op) {
    op_index_.emplace(descriptor, static_cast<int>(library_.size()));
    library_.push_back(std::move(op));
  };

  {
    Superoperator id;
    id.label = "identity";
    id.elements.push_back({RationalMatrix::identity(4), OutcomeAction::kContinue, "identity"});
    add("identity", std::move(id));
  }
  {
    Superoperator coin;
    coin.label = "coin";
    for (int i = 0; i < 4; ++i) {
      OperationElement e;
      e.matrix = RationalMatrix::zero(4);
      for (int k = 0; k < 4; ++k) e.matrix.at(k, k) = Rational(1, 2);
      e.label = "coin";
      coin.elements.push_back(std::move(e));
    }
    add("coin", std::move(coin));
  }

  ElementParams base;
  base.m = m_;
  base.d = d_;

  {
    ElementParams p = base;
    p.block1 = true;
    add("b1pad", complete_superoperator({build_main_element(ElementKind::kPad, p)}, d_, "b1pad"));
    add("pad", complete_superoperator({build_main_element(ElementKind::kPad, base)}, d_, "pad"));
  }
  for (int code = 1; code <= alpha_.size(); ++code) {
    ElementParams p = base;
    p.gamma = code;
    p.block1 = true;
    add("b1digit:" + std::to_string(code),
        complete_superoperator({build_main_element(ElementKind::kFirstBlockDigit, p)}, d_,
                               "b1digit:" + std::to_string(code)));
  }
  for (int code = 1; code <= alpha_.size(); ++code) {
    ElementParams p = base;
    p.sigma = code;
    add("config:" + std::to_string(code),
        complete_superoperator({build_main_element(ElementKind::kConfigDigit, p)}, d_,
                               "config:" + std::to_string(code)));
    ElementParams q = base;
    q.gamma = code;
    add("next:" + std::to_string(code),
        complete_superoperator({build_main_element(ElementKind::kNextDigit, q)}, d_,
                               "next:" + std::to_string(code)));
  }
  for (int s = 1; s <= alpha_.size(); ++s)
    for (int g = 1; g <= alpha_.size(); ++g) {
      ElementParams p = base;
      p.sigma = s;
      p.gamma = g;
      std::string desc = "pair:" + std::to_string(s) + ":" + std::to_string(g);
      add(desc, complete_superoperator({build_main_element(ElementKind::kDigitPair, p)}, d_, desc));
    }

  int blank = alpha_.plain_code(kBlank);
  auto final_op = [&](const std::string& desc, bool block1, bool check,
                      OutcomeAction check_action, int halt, bool fold,
                      OutcomeAction advance_action) {
    std::vector<OperationElement> mains;
    if (check) {
      ElementParams p = base;
      p.decide = check_action;
      mains.push_back(build_main_element(ElementKind::kTransitionCheck, p));
    }
    if (halt == 1 || halt == 2) {
      ElementParams p = base;
      p.decide = halt == 1 ? OutcomeAction::kAccept : OutcomeAction::kReject;
      mains.push_back(build_main_element(ElementKind::kHaltDecide, p));
    } else {
      ElementParams p = base;
      p.block1 = block1;
      p.fold_gamma = fold ? blank : 0;
      p.decide = advance_action;
      mains.push_back(build_main_element(ElementKind::kAdvance, p));
    }
    add(desc, complete_superoperator(std::move(mains), d_, desc));
  };

  for (bool b1 : {true, false}) {
    std::string pre = b1 ? "final:b1" : "final:agree";
    final_op(pre + ":adv", b1, false, OutcomeAction::kContinue, 0, false, OutcomeAction::kContinue);
    final_op(pre + ":advfold", b1, false, OutcomeAction::kContinue, 0, true,
             OutcomeAction::kContinue);
    final_op(pre + ":acc", b1, false, OutcomeAction::kContinue, 1, false, OutcomeAction::kContinue);
    final_op(pre + ":rej", b1, false, OutcomeAction::kContinue, 2, false, OutcomeAction::kContinue);
  }
  for (int side : {1, 0}) {
    // Catching the traced debater decides for the opponent.
    OutcomeAction caught = side == 1 ? OutcomeAction::kReject : OutcomeAction::kAccept;
    std::string pre = "final:traced" + std::to_string(side);
    final_op(pre + ":adv", false, true, caught, 0, false, OutcomeAction::kContinue);
    final_op(pre + ":advfold", false, true, caught, 0, true, OutcomeAction::kContinue);
    final_op(pre + ":acc", false, true, caught, 1, false, OutcomeAction::kContinue);
    final_op(pre + ":rej", false, true, caught, 2, false, OutcomeAction::kContinue);
    // Zero-error variant: one check, then an unconditional restart.
    std::string v0 = "final:v0traced" + std::to_string(side);
    final_op(v0 + ":restart", false, true, caught, 0, false, OutcomeAction::kRestart);
    final_op(v0 + ":restartfold", false, true, caught, 0, true, OutcomeAction::kRestart);
  }

  // Intern the fixed states: initial, accept, reject.
  HState init;
  init.phase = HState::Phase::kInit;
  intern(init);
  HState acc;
  acc.phase = HState::Phase::kAccept;
  intern(acc);
  HState rej;
  rej.phase = HState::Phase::kReject;
  intern(rej);
}

int HistoryDebateVerifier::op_index(const std::string& descriptor) const {
  auto it = op_index_.find(descriptor);
  if (it == op_index_.end())
    throw std::logic_error("compiled verifier: missing operator '" + descriptor + "'");
  return it->second;
}

StateId HistoryDebateVerifier::intern(const HState& s) const {
  std::string k = s.key();
  auto it = state_ids_.find(k);
  if (it != state_ids_.end()) return it->second;
  StateId id = static_cast<StateId>(states_.size());
  states_.push_back(s);
  state_ids_.emplace(std::move(k), id);
  return id;
}

StateKind HistoryDebateVerifier::state_kind(StateId s) const {
  const HState& st = states_.at(static_cast<size_t>(s));
  switch (st.phase) {
    case HState::Phase::kAccept: return StateKind::kAccept;
    case HState::Phase::kReject: return StateKind::kReject;
    case HState::Phase::kAnnounceComm:
    case HState::Phase::kStreamComm: return StateKind::kComm;
    default: return StateKind::kRead;
  }
}

std::string HistoryDebateVerifier::state_name(StateId s) const {
  if (s == kRestartTarget) return "<restart>";
  const HState& st = states_.at(static_cast<size_t>(s));
  static const char* names[] = {"init", "ann_c", "ann_r", "stream_c", "stream_r", "accept",
                                "reject"};
  std::string out = names[static_cast<int>(st.phase)];
  if (st.phase == HState::Phase::kStreamComm || st.phase == HState::Phase::kStreamRead) {
    out += st.first_block ? "/b1" : "/b";
    if (st.traced >= 0) out += st.traced == 1 ? "/t1" : "/t0";
  }
  return out;
}

SuccessorEmitter::Move HistoryDebateVerifier::tm_oracle(const void* machine,
                                                        const ConfigAlphabet& alpha, int code,
                                                        int choice, bool at_edge) {
  (void)choice;
  const auto* tm = static_cast<const SingleTapeTM*>(machine);
  SuccessorEmitter::Move mv;
  auto [state, sym] = alpha.composite_parts(code);
  if (tm->is_halting(state)) return mv;  // halting configurations are never streamed
  auto it = tm->rules.find({state, sym});
  if (it == tm->rules.end()) return mv;
  mv.ok = true;
  mv.write_code = alpha.plain_code(it->second.write);
  mv.next_state = it->second.next;
  mv.dir = it->second.move == TapeMove::kLeft && at_edge ? TapeMove::kStay : it->second.move;
  if (it->second.next == tm->accept_state) mv.halt = 1;
  if (it->second.next == tm->reject_state) mv.halt = 2;
  return mv;
}

SuccessorEmitter::Move HistoryDebateVerifier::atm_oracle(const void* machine,
                                                         const ConfigAlphabet& alpha, int code,
                                                         int choice, bool at_edge) {
  const auto* atm = static_cast<const LinearSpaceATM*>(machine);
  SuccessorEmitter::Move mv;
  if (choice != 0 && choice != 1) return mv;
  auto [state, sym] = alpha.composite_parts(code);
  if (atm->is_halting(state)) return mv;
  auto it = atm->rules.find({state, sym});
  if (it == atm->rules.end()) return mv;
  const auto& rule = it->second[static_cast<size_t>(choice)];
  mv.ok = true;
  mv.write_code = alpha.plain_code(rule.write);
  mv.next_state = rule.next;
  mv.dir = rule.move == TapeMove::kLeft && at_edge ? TapeMove::kStay : rule.move;
  AtmKind k = atm->kinds[static_cast<size_t>(rule.next)];
  if (k == AtmKind::kAccept) mv.halt = 1;
  if (k == AtmKind::kReject) mv.halt = 2;
  return mv;
}

HistoryDebateVerifier::Dispatched HistoryDebateVerifier::decide_against(const HState& s,
                                                                        int8_t debater) const {
  (void)s;
  Dispatched d;
  d.op = op_index("identity");
  d.classical = debater == 1 ? TerminalKind::kReject : TerminalKind::kAccept;
  return d;
}

HeadMove HistoryDebateVerifier::pace_move(HState& s, char input_sym) const {
  if (input_sym == kRightEndmarker) {
    s.pace_dir = -1;
    ++s.bounce;
    return HeadMove::kLeft;
  }
  if (input_sym == kLeftEndmarker) {
    s.pace_dir = 1;
    ++s.bounce;
    return HeadMove::kRight;
  }
  return s.pace_dir > 0 ? HeadMove::kRight : HeadMove::kLeft;
}

HistoryDebateVerifier::Dispatched HistoryDebateVerifier::dispatch(const HState& s, char input_sym,
                                                                  Symbol gp, Symbol gr) const {
  switch (s.phase) {
    case HState::Phase::kInit: {
      Dispatched d;
      d.op = op_index("identity");
      d.next = HState{};
      d.next.phase = mode_ == Mode::kTheoremThree ? HState::Phase::kAnnounceComm
                                                  : HState::Phase::kStreamComm;
      d.next.em = SuccessorEmitter(lag1_);
      d.move = HeadMove::kRight;
      return d;
    }
    case HState::Phase::kAnnounceRead: {
      Symbol a = s.p1_announces ? gp : gr;
      int choice = a == choice0_sym_ ? 0 : a == choice1_sym_ ? 1 : -1;
      if (choice < 0) return decide_against(s, s.p1_announces ? 1 : 0);
      Dispatched d;
      d.op = op_index("identity");
      d.next = s;
      d.next.phase = HState::Phase::kStreamComm;
      d.next.pending_choice = static_cast<int8_t>(choice);
      d.next.p1_announces = !s.p1_announces;
      return d;
    }
    case HState::Phase::kStreamRead: {
      if (s.first_block) return dispatch_block1(s, input_sym, gp, gr);
      if (s.traced < 0 && gp != gr) {
        Dispatched d;
        d.op = op_index("coin");
        d.coin = true;
        return d;
      }
      Symbol eff = s.traced == 0 ? gr : gp;
      return dispatch_symbol(s, eff, input_sym);
    }
    default: throw SpecIncompleteError("dispatch on a non-reading phase");
  }
}

HistoryDebateVerifier::Dispatched HistoryDebateVerifier::dispatch_block1(HState s, char input_sym,
                                                                         Symbol gp,
                                                                         Symbol gr) const {
  // Expected symbol derived from the input tape under the head.
  Symbol expected;
  bool trailing_blank = false;
  bool is_final = false;
  if (s.final_dollar) {
    expected = dollar_sym_;
    is_final = true;
  } else if (s.b1_trailing_done) {
    expected = dollar_sym_;
  } else {
    char tape_char = input_sym == kRightEndmarker ? kBlank : input_sym;
    int code;
    if (s.em.fresh()) {
      int start = mode_ == Mode::kTheoremThree ? atm_.start_state : tm_.start_state;
      code = alpha_.composite_code(start, tape_char);
    } else {
      code = alpha_.plain_code(tape_char);
      trailing_blank = input_sym == kRightEndmarker;
    }
    expected = config_symbol(code);
  }

  bool p1_ok = gp == expected;
  bool p0_ok = mode_ == Mode::kFact1 ? true : gr == expected;
  if (!p1_ok) return decide_against(s, 1);  // both wrong also counts against the claimant
  if (!p0_ok) return decide_against(s, 0);

  Dispatched d;
  if (is_final) {
    int halt = s.em.halt();
    bool fold = s.em.growth_pending();
    std::string desc = halt == 1   ? "final:b1:acc"
                       : halt == 2 ? "final:b1:rej"
                       : fold      ? "final:b1:advfold"
                                   : "final:b1:adv";
    d.op = op_index(desc);
    d.next = s;
    d.next.first_block = false;
    d.next.b1_trailing_done = false;
    d.next.final_dollar = false;
    d.next.em = SuccessorEmitter(lag1_);
    d.next.traced = mode_ == Mode::kFact1 ? 1 : -1;
    d.next.pace_dir = -1;
    d.next.bounce = 0;
    d.next.pending_choice = -1;
    d.next.phase = mode_ == Mode::kTheoremThree ? HState::Phase::kAnnounceComm
                                                : HState::Phase::kStreamComm;
    return d;
  }

  int gamma;
  HState n = s;
  if (expected == dollar_sym_) {
    gamma = n.em.feed(0, n.pending_choice, machine_ptr(), alpha_, oracle());
    n.final_dollar = true;
  } else {
    gamma = n.em.feed(expected - 1, n.pending_choice, machine_ptr(), alpha_, oracle());
    if (trailing_blank) n.b1_trailing_done = true;
  }
  if (n.em.violation()) return decide_against(s, 1);
  d.op = op_index(gamma > 0 ? "b1digit:" + std::to_string(gamma) : "b1pad");
  d.next = std::move(n);
  d.next.phase = HState::Phase::kStreamComm;
  d.move = (!s.b1_trailing_done && !s.final_dollar && input_sym != kRightEndmarker)
               ? HeadMove::kRight
               : HeadMove::kStay;
  return d;
}

HistoryDebateVerifier::Dispatched HistoryDebateVerifier::dispatch_symbol(HState s, Symbol eff,
                                                                         char input_sym) const {
  HeadMove move = HeadMove::kStay;
  if (mode_ == Mode::kTheoremThree) {
    move = pace_move(s, input_sym);
    unsigned limit = 2u * static_cast<unsigned>(atm_.space_coefficient) + 2u;
    if (s.bounce >= limit) {
      // Configuration block outlived the head's traversal budget.
      return decide_against(s, s.traced < 0 ? 1 : s.traced);
    }
  }

  Dispatched d;
  d.move = move;
  if (eff == dollar_sym_) {
    if (!s.final_dollar) {
      HState n = s;
      int gamma = n.em.feed(0, n.pending_choice, machine_ptr(), alpha_, oracle());
      if (n.em.violation()) return decide_against(s, s.traced < 0 ? 1 : s.traced);
      n.final_dollar = true;
      n.phase = HState::Phase::kStreamComm;
      d.op = op_index(gamma > 0 ? "next:" + std::to_string(gamma) : "pad");
      d.next = std::move(n);
      return d;
    }
    // Block-final operator.
    int halt = s.em.halt();
    bool fold = s.em.growth_pending();
    std::string desc;
    if (s.traced < 0) {
      desc = halt == 1 ? "final:agree:acc" : halt == 2 ? "final:agree:rej"
                       : fold ? "final:agree:advfold" : "final:agree:adv";
    } else if (mode_ == Mode::kTheoremThree) {
      desc = "final:v0traced" + std::to_string(static_cast<int>(s.traced)) +
             (fold ? ":restartfold" : ":restart");
    } else {
      desc = "final:traced" + std::to_string(static_cast<int>(s.traced)) +
             (halt == 1 ? ":acc" : halt == 2 ? ":rej" : fold ? ":advfold" : ":adv");
    }
    d.op = op_index(desc);
    d.next = s;
    d.next.final_dollar = false;
    d.next.em = SuccessorEmitter(lag1_);
    d.next.bounce = 0;
    d.next.pending_choice = -1;
    d.next.phase = mode_ == Mode::kTheoremThree ? HState::Phase::kAnnounceComm
                                                : HState::Phase::kStreamComm;
    return d;
  }

  int code = eff - 1;
  bool is_config = eff >= 2 && code >= 1 && code <= alpha_.size();
  if (!is_config || s.final_dollar) {
    // Foreign symbol, or a description symbol between the two separators.
    return decide_against(s, s.traced < 0 ? 1 : s.traced);
  }
  HState n = s;
  int gamma = n.em.feed(code, n.pending_choice, machine_ptr(), alpha_, oracle());
  if (n.em.violation()) return decide_against(s, s.traced < 0 ? 1 : s.traced);
  n.phase = HState::Phase::kStreamComm;
  d.op = op_index(gamma > 0 ? "pair:" + std::to_string(code) + ":" + std::to_string(gamma)
                            : "config:" + std::to_string(code));
  d.next = std::move(n);
  return d;
}

CommWrite HistoryDebateVerifier::delta_c(StateId s, char input_sym) const {
  (void)input_sym;
  const HState& st = states_.at(static_cast<size_t>(s));
  HState next = st;
  if (st.phase == HState::Phase::kAnnounceComm)
    next.phase = HState::Phase::kAnnounceRead;
  else if (st.phase == HState::Phase::kStreamComm)
    next.phase = HState::Phase::kStreamRead;
  else
    throw SpecIncompleteError("delta_c on a non-communication state");
  return {filler_sym_, intern(next)};
}

QuantumAction HistoryDebateVerifier::delta_q(StateId s, char input_sym, Symbol gp,
                                             Symbol gr) const {
  const HState st = states_.at(static_cast<size_t>(s));
  Dispatched d = dispatch(st, input_sym, gp, gr);
  QuantumAction qa;
  qa.superop = d.op;
  return qa;
}

ClassicalUpdate HistoryDebateVerifier::delta_s(StateId s, char input_sym, Symbol gp, Symbol gr,
                                               int outcome) const {
  const HState st = states_.at(static_cast<size_t>(s));
  Dispatched d = dispatch(st, input_sym, gp, gr);
  if (d.coin) {
    HState n = st;
    n.traced = outcome < 2 ? 1 : 0;
    return {intern(n), HeadMove::kStay};
  }
  if (d.classical == TerminalKind::kAccept) return {1, HeadMove::kStay};
  if (d.classical == TerminalKind::kReject) return {2, HeadMove::kStay};
  return {intern(d.next), d.move};
}

std::vector<std::string> HistoryDebateVerifier::self_check() const {
  std::vector<std::string> defects;
  if (m_ < 2) defects.push_back("base m below 2");
  if (d_ <= std::max(2 * m_, 2L * alpha_.size() + 2))
    defects.push_back("denominator d below the completion bound");
  return defects;
}

const void* HistoryDebateVerifier::machine_ptr() const {
  return mode_ == Mode::kTheoremThree ? static_cast<const void*>(&atm_)
                                      : static_cast<const void*>(&tm_);
}

SuccessorEmitter::MoveOracle HistoryDebateVerifier::oracle() const {
  return mode_ == Mode::kTheoremThree ? &atm_oracle : &tm_oracle;
}

std::shared_ptr<HistoryDebateVerifier> build_fact1_verifier(const SingleTapeTM& tm, long m) {
  return std::make_shared<HistoryDebateVerifier>(HistoryDebateVerifier::Mode::kFact1, tm, m);
}

std::shared_ptr<HistoryDebateVerifier> build_theorem1_verifier(const SingleTapeTM& tm, long m) {
  return std::make_shared<HistoryDebateVerifier>(HistoryDebateVerifier::Mode::kTheoremOne, tm, m);
}

std::shared_ptr<HistoryDebateVerifier> build_theorem3_verifier(const LinearSpaceATM& atm, long m) {
  return std::make_shared<HistoryDebateVerifier>(atm, m);
}

}  // namespace qdl
