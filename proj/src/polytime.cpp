#include "qdl/polytime.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qdl {

Rational walk_probability(long n, int attenuation) {
  Rational ruin(1, n + 1);
  return pow_int(Rational(1, 2), attenuation) * ruin * ruin;
}

bool is_prime(long n) {
  if (n < 2) return false;
  for (long f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

bool is_square(long n) {
  if (n < 1) return false;
  long r = static_cast<long>(std::sqrt(static_cast<double>(n)));
  for (long x = std::max(0L, r - 2); x <= r + 2; ++x)
    if (x * x == n) return true;
  return false;
}

bool is_power_of_two(long n) { return n >= 2 && (n & (n - 1)) == 0; }

bool is_fibonacci(long n) {
  if (n < 1) return false;
  long a = 1, b = 1;
  while (b < n) {
    long t = a + b;
    a = b;
    b = t;
  }
  return b == n;
}

bool is_palindrome(const std::string& w) {
  for (size_t i = 0, j = w.size(); i + 1 <= j; ++i, --j)
    if (w[i] != w[j - 1]) return false;
  return true;
}

MpReal min_q1_probability(long max_steps) {
  MpReal best(2.0);
  for (long k = 1; k <= max_steps; ++k) {
    MpReal p = sinsq_rotation(k, Rational(1));
    if (p < best) best = p;
  }
  return best;
}

// ---------------------------------------------------------------------------
// PolyVerifier.
// ---------------------------------------------------------------------------

namespace {
constexpr StateId kAcceptId = 1;
constexpr StateId kRejectId = 2;
}  // namespace

std::uint64_t PolyVerifier::PState::key() const {
  std::uint64_t k = 0;
  auto put = [&k](std::uint64_t v, int bits) { k = (k << bits) | v; };
  put(static_cast<std::uint64_t>(phase), 5);
  put(count, 5);
  put(blk_type, 2);
  put(blk_len1, 1);
  put(first_block, 1);
  put(seen_b, 1);
  put(buf, 8);
  put(buf2, 8);
  put(parity, 2);
  put(ksmall, 2);
  put(post, 1);
  put(posthash, 2);
  put(pal_phase, 2);
  put(pending, 2);
  put(walk_kind, 1);
  return k;
}

PolyVerifier::PolyVerifier(UnaryLanguage lang) : lang_(lang) {
  switch (lang_) {
    case UnaryLanguage::kPal:
      talker_p1_ = false;
      trackers_ = 1;
      attenuation_ = 2;
      break;
    case UnaryLanguage::kUprime:
      talker_p1_ = false;
      trackers_ = 2;
      attenuation_ = 2;
      break;
    case UnaryLanguage::kUsquare:
      talker_p1_ = true;
      trackers_ = 3;
      attenuation_ = 2;
      break;
    case UnaryLanguage::kUpower:
      talker_p1_ = true;
      trackers_ = 2;
      attenuation_ = 4;  // comparisons reach 2n steps; the walk stays below half their floor
      break;
    case UnaryLanguage::kUfib:
      talker_p1_ = true;
      trackers_ = 3;
      attenuation_ = 4;
      break;
  }
  alphabet_ = {".", "a", "b", "#", "!"};
  sym_a_ = 1;
  sym_b_ = 2;
  sym_hash_ = 3;
  sym_bang_ = 4;
  PState init;
  intern(init);
  PState acc;
  acc.phase = PState::Phase::kAccept;
  intern(acc);
  PState rej;
  rej.phase = PState::Phase::kReject;
  intern(rej);
}

std::string PolyVerifier::name() const {
  switch (lang_) {
    case UnaryLanguage::kPal: return "pal";
    case UnaryLanguage::kUprime: return "uprime";
    case UnaryLanguage::kUsquare: return "usquare";
    case UnaryLanguage::kUpower: return "upower";
    case UnaryLanguage::kUfib: return "ufib";
  }
  return "?";
}

long PolyVerifier::max_comparison_steps(long n) const {
  switch (lang_) {
    case UnaryLanguage::kUpower:
    case UnaryLanguage::kUfib: return 2 * n;
    default: return n;
  }
}

StateId PolyVerifier::intern(const PState& s) const {
  std::uint64_t k = s.key();
  auto it = state_ids_.find(k);
  if (it != state_ids_.end()) return it->second;
  StateId id = static_cast<StateId>(states_.size());
  states_.push_back(s);
  state_ids_.emplace(k, id);
  return id;
}

StateKind PolyVerifier::state_kind(StateId s) const {
  switch (states_.at(static_cast<size_t>(s)).phase) {
    case PState::Phase::kAccept: return StateKind::kAccept;
    case PState::Phase::kReject: return StateKind::kReject;
    case PState::Phase::kScanComm: return StateKind::kComm;
    default: return StateKind::kRead;
  }
}

std::string PolyVerifier::state_name(StateId s) const {
  if (s == kRestartTarget) return "<restart>";
  static const char* names[] = {"init",  "count", "rewind", "comm",  "move",  "proc",
                                "proc2", "flush", "cmp",    "p2seek", "wseek", "wdrop",
                                "walk1", "walk2", "atten",  "accept", "reject"};
  return names[static_cast<int>(states_.at(static_cast<size_t>(s)).phase)];
}

const Superoperator& PolyVerifier::superop(int) const {
  throw std::logic_error("rotation verifier has no superoperator library");
}

TerminalKind PolyVerifier::catch_talker() const {
  // Catching the talker decides for the opposing claim.
  switch (lang_) {
    case UnaryLanguage::kPal:
    case UnaryLanguage::kUprime: return TerminalKind::kAccept;
    default: return TerminalKind::kReject;
  }
}

int PolyVerifier::small_threshold() const {
  switch (lang_) {
    case UnaryLanguage::kPal: return 1;
    case UnaryLanguage::kUprime: return 3;
    case UnaryLanguage::kUsquare: return 0;
    case UnaryLanguage::kUfib: return 3;
    case UnaryLanguage::kUpower: return -1;  // no classical carve-out
  }
  return -1;
}

TerminalKind PolyVerifier::small_decision(long n) const {
  bool member = false;
  switch (lang_) {
    case UnaryLanguage::kPal: member = true; break;  // length <= 1 is a palindrome
    case UnaryLanguage::kUprime: member = is_prime(n); break;
    case UnaryLanguage::kUsquare: member = is_square(n); break;
    case UnaryLanguage::kUfib: member = is_fibonacci(n); break;
    case UnaryLanguage::kUpower: member = false; break;
  }
  return member ? TerminalKind::kAccept : TerminalKind::kReject;
}

PolyVerifier::PState PolyVerifier::enter_walk(const PState& s, std::uint8_t kind) const {
  PState n = s;
  n.phase = PState::Phase::kWalkSeek;
  n.walk_kind = kind;
  n.count = 0;
  n.pending = 0;
  return n;
}

PolyVerifier::Dispatched PolyVerifier::dispatch(const PState& s, char input_sym, Symbol gp,
                                                Symbol gr) const {
  Symbol talker = talker_p1_ ? gp : gr;
  Dispatched d;
  PState n = s;

  auto decide = [&](TerminalKind t) {
    Dispatched x;
    x.arm0.terminal = t;
    return x;
  };

  switch (s.phase) {
    case PState::Phase::kInit: {
      if (small_threshold() < 0) {
        n.phase = PState::Phase::kScanComm;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kStay};
        return d;
      }
      n.phase = PState::Phase::kCount;
      n.count = 1;
      d.arm0 = {TerminalKind::kNone, n, HeadMove::kRight};
      return d;
    }
    case PState::Phase::kCount: {
      if (input_sym == kRightEndmarker) return decide(small_decision(s.count - 1));
      if (s.count > static_cast<std::uint8_t>(small_threshold())) {
        n.phase = PState::Phase::kRewind;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kLeft};
        return d;
      }
      n.count = s.count + 1;
      d.arm0 = {TerminalKind::kNone, n, HeadMove::kRight};
      return d;
    }
    case PState::Phase::kRewind: {
      if (input_sym == kLeftEndmarker) {
        n.phase = PState::Phase::kScanComm;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kStay};
        return d;
      }
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kLeft};
      return d;
    }
    case PState::Phase::kScanMove: {
      HeadMove mv = HeadMove::kRight;
      if (lang_ == UnaryLanguage::kPal)
        mv = talker == sym_a_ ? (s.pal_phase == 1 ? HeadMove::kRight : HeadMove::kLeft)
                              : HeadMove::kStay;
      if (lang_ == UnaryLanguage::kUfib) mv = talker == sym_a_ ? HeadMove::kRight : HeadMove::kStay;
      n.phase = PState::Phase::kScanProcess;
      d.arm0 = {TerminalKind::kNone, n, mv};
      return d;
    }
    case PState::Phase::kScanProcess: return scan_process(s, talker, input_sym);
    case PState::Phase::kScanProcess2: return scan_process(s, talker, input_sym);
    case PState::Phase::kFlush: return flush_step(s, input_sym);
    case PState::Phase::kCmp: {
      int cmp_tracker = s.parity;
      if (input_sym == kLeftEndmarker) {
        d.action.kind = RotationAction::Kind::kMeasure;
        d.action.tracker = cmp_tracker;
        d.arm0 = {TerminalKind::kNone, enter_walk(s, 0), HeadMove::kStay};
        d.q1 = TerminalKind::kReject;
        return d;
      }
      if (input_sym != kRightEndmarker) {
        d.action.kind = RotationAction::Kind::kRotate;
        d.action.deltas.assign(static_cast<size_t>(trackers_), 0);
        d.action.deltas[static_cast<size_t>(cmp_tracker)] = -1;
      }
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kLeft};
      return d;
    }
    case PState::Phase::kP2Seek: {
      if (input_sym == kRightEndmarker) {
        n.phase = PState::Phase::kScanComm;
        n.pal_phase = 2;
        n.blk_type = 0;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kStay};
        return d;
      }
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kRight};
      return d;
    }
    case PState::Phase::kWalkSeek: {
      if (input_sym == kRightEndmarker) {
        n.phase = PState::Phase::kWalk1;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kLeft};
        return d;
      }
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kRight};
      return d;
    }
    case PState::Phase::kWalk1: {
      if (input_sym == kLeftEndmarker) {
        n.phase = PState::Phase::kWalk2;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kRight};
        return d;
      }
      if (input_sym == kRightEndmarker) return decide(TerminalKind::kRestart);
      d.action.kind = RotationAction::Kind::kCoin;
      d.action.outcomes = 2;
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kLeft};
      d.arm1 = {TerminalKind::kNone, s, HeadMove::kRight};
      d.has_arm1 = true;
      return d;
    }
    case PState::Phase::kWalk2: {
      if (input_sym == kRightEndmarker) {
        n.phase = PState::Phase::kAtten;
        n.count = 0;
        d.arm0 = {TerminalKind::kNone, n, HeadMove::kStay};
        return d;
      }
      if (input_sym == kLeftEndmarker) return decide(TerminalKind::kRestart);
      d.action.kind = RotationAction::Kind::kCoin;
      d.action.outcomes = 2;
      d.arm0 = {TerminalKind::kNone, s, HeadMove::kLeft};
      d.arm1 = {TerminalKind::kNone, s, HeadMove::kRight};
      d.has_arm1 = true;
      return d;
    }
    case PState::Phase::kAtten: {
      int att = s.walk_kind == 1 ? attenuation_ + 1 : attenuation_;
      TerminalKind side;
      if (lang_ == UnaryLanguage::kUprime)
        side = TerminalKind::kReject;
      else if (lang_ == UnaryLanguage::kPal)
        side = s.walk_kind == 1 ? TerminalKind::kReject : TerminalKind::kAccept;
      else
        side = TerminalKind::kAccept;
      d.action.kind = RotationAction::Kind::kCoin;
      d.action.outcomes = 2;
      d.arm0 = {TerminalKind::kRestart, s, HeadMove::kStay};
      if (s.count + 1 >= att) {
        d.arm1 = {side, s, HeadMove::kStay};
      } else {
        n.count = s.count + 1;
        d.arm1 = {TerminalKind::kNone, n, HeadMove::kStay};
      }
      d.has_arm1 = true;
      return d;
    }
    default: throw SpecIncompleteError("poly verifier: dispatch on a non-reading phase");
  }
}

PolyVerifier::Dispatched PolyVerifier::scan_process(PState s, Symbol talker,
                                                    char input_sym) const {
  bool second_pass = s.phase == PState::Phase::kScanProcess2;
  Dispatched d;
  auto decide = [&](TerminalKind t) {
    Dispatched x;
    x.arm0.terminal = t;
    return x;
  };
  auto to_comm = [&](PState n, HeadMove mv = HeadMove::kStay) {
    n.phase = PState::Phase::kScanComm;
    n.pending = 0;
    Dispatched x;
    x.arm0 = {TerminalKind::kNone, std::move(n), mv};
    return x;
  };
  auto rotate = [&](Dispatched& x, std::initializer_list<std::pair<int, long>> deltas) {
    bool any = false;
    for (auto& [t, v] : deltas)
      if (v != 0) any = true;
    if (!any) return;
    x.action.kind = RotationAction::Kind::kRotate;
    x.action.deltas.assign(static_cast<size_t>(trackers_), 0);
    for (auto& [t, v] : deltas) x.action.deltas[static_cast<size_t>(t)] += v;
  };
  TerminalKind q1_side =
      (lang_ == UnaryLanguage::kPal || lang_ == UnaryLanguage::kUprime) ? TerminalKind::kAccept
                                                                        : TerminalKind::kReject;

  // Terminal positions on the tape.
  bool at_right = input_sym == kRightEndmarker;
  bool at_left = input_sym == kLeftEndmarker;

  switch (lang_) {
    case UnaryLanguage::kUprime:
    case UnaryLanguage::kUsquare: {
      if (at_right) {
        PState n = s;
        n.phase = PState::Phase::kFlush;
        n.count = 0;
        Dispatched x;
        x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return x;
      }
      if (talker != sym_a_ && talker != sym_b_) return decide(catch_talker());
      std::uint8_t t = talker == sym_a_ ? 1 : 2;
      bool block_start = s.blk_type == 0 || s.blk_type != t;
      bool boundary = s.blk_type != 0 && s.blk_type != t;
      if (s.blk_type == 0 && t == 2) return decide(catch_talker());  // must open with 'a'
      if (boundary && lang_ == UnaryLanguage::kUprime && s.blk_len1)
        return decide(catch_talker());  // no block of length one
      // Boundary measurements: a-block end closes the (b, a) pair on
      // tracker 1; b-block end closes the (a, b) pair on tracker 0.
      if (boundary && !second_pass) {
        bool closes_t0 = t == 1;  // entering 'a' means a b-block just ended
        bool measure = closes_t0 || !s.first_block;
        if (measure) {
          Dispatched x;
          x.action.kind = RotationAction::Kind::kMeasure;
          x.action.tracker = closes_t0 ? 0 : 1;
          PState n = s;
          n.phase = PState::Phase::kScanProcess2;
          x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
          x.q1 = q1_side;
          return x;
        }
      }
      PState n = s;
      if (s.blk_type == 0) {
        n.blk_type = t;
        n.blk_len1 = true;
      } else if (boundary) {
        n.first_block = false;
        if (t == 2) n.seen_b = true;
        n.blk_type = t;
        n.blk_len1 = true;
      } else {
        n.blk_len1 = false;
      }
      Dispatched x = to_comm(std::move(n));
      long q3 = 0;
      if (lang_ == UnaryLanguage::kUsquare) {
        if (s.first_block && !boundary) q3 += 1;  // first-block symbol
        if (block_start) q3 -= 1;                 // one unit per block
      }
      if (t == 1)
        rotate(x, {{0, +1}, {1, s.first_block && !boundary ? 0L : -1L}, {2, q3}});
      else
        rotate(x, {{0, -1}, {1, +1}, {2, q3}});
      return x;
    }

    case UnaryLanguage::kUpower: {
      if (at_right) {
        PState n = s;
        n.phase = PState::Phase::kFlush;
        n.count = 0;
        Dispatched x;
        x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return x;
      }
      if (talker != sym_a_ && talker != sym_b_) return decide(TerminalKind::kReject);
      std::uint8_t incoming = talker == sym_a_ ? 1 : 2;
      if (s.buf == 0) {
        PState n = s;
        n.buf = incoming;
        return to_comm(std::move(n));
      }
      std::uint8_t cur = s.buf;  // the delayed symbol being processed now
      bool boundary = s.blk_type != 0 && s.blk_type != cur;
      if (s.blk_type == 0 && cur == 2) return decide(TerminalKind::kReject);
      if (boundary && s.first_block && !s.blk_len1)
        return decide(TerminalKind::kReject);  // first block must have length 1
      if (boundary && !s.first_block && !second_pass) {
        // Block k ended: the (k-1, k) comparison closes on the qubit of k-1.
        Dispatched x;
        x.action.kind = RotationAction::Kind::kMeasure;
        x.action.tracker = s.parity == 1 ? 1 : 0;
        PState n = s;
        n.phase = PState::Phase::kScanProcess2;
        x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        x.q1 = TerminalKind::kReject;
        return x;
      }
      PState n = s;
      bool first_sym = s.blk_type == 0;
      std::uint8_t parity_now;  // parity of the block the processed symbol belongs to
      if (first_sym) {
        n.blk_type = cur;
        n.parity = 1;
        n.blk_len1 = true;
        parity_now = 1;
      } else if (boundary) {
        n.blk_type = cur;
        n.parity = s.parity == 1 ? 2 : 1;
        n.first_block = false;
        n.blk_len1 = true;
        parity_now = n.parity;
      } else {
        n.blk_len1 = false;
        parity_now = s.parity;
      }
      n.buf = incoming;
      Dispatched x = to_comm(std::move(n));
      int qk = parity_now == 1 ? 0 : 1;   // q(k)
      int qk1 = parity_now == 1 ? 1 : 0;  // q(k-1)
      bool has_prev = !first_sym && (boundary || !s.first_block);
      // During block k: +2 on q(k), -1 on q(k-1) when a previous block exists.
      rotate(x, {{qk, +2}, {qk1, has_prev ? -1L : 0L}});
      return x;
    }

    case UnaryLanguage::kUfib: {
      if (at_right) {
        if (!s.post) return decide(TerminalKind::kReject);  // member longer than the input
        PState n = s;
        n.phase = PState::Phase::kFlush;
        n.count = 0;
        Dispatched x;
        x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return x;
      }
      int k_tracker = (s.parity + 2) % 3;  // q(k) for the current member index k
      if (talker == sym_a_) {
        PState n = s;
        n.blk_len1 = n.blk_type == 0;  // member length so far == 1
        n.blk_type = 1;
        Dispatched x = to_comm(std::move(n));
        // Member k feeds its own check negatively and the two upcoming ones.
        long dk = s.ksmall == 0 ? -1 : 0;
        long dk1 = (s.ksmall == 0 || s.ksmall == 2) ? +1 : 0;
        std::initializer_list<std::pair<int, long>> ds = {
            {k_tracker, dk}, {(k_tracker + 1) % 3, dk1}, {(k_tracker + 2) % 3, +1}};
        rotate(x, ds);
        return x;
      }
      if (talker == sym_hash_ || talker == sym_bang_) {
        if (s.blk_type == 0) return decide(TerminalKind::kReject);  // empty member
        bool bang = talker == sym_bang_;
        if (bang && s.post) return decide(TerminalKind::kReject);
        if (bang && s.ksmall == 1) return decide(TerminalKind::kReject);
        if (!bang && s.post && s.posthash >= 1) return decide(TerminalKind::kReject);
        if (s.ksmall != 0 && !s.blk_len1) return decide(TerminalKind::kReject);  // F1=F2=1
        if (!second_pass && s.ksmall == 0) {
          Dispatched x;
          x.action.kind = RotationAction::Kind::kMeasure;
          x.action.tracker = k_tracker;
          PState n = s;
          n.phase = PState::Phase::kScanProcess2;
          x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
          x.q1 = TerminalKind::kReject;
          return x;
        }
        PState n = s;
        n.blk_type = 0;
        n.blk_len1 = true;
        n.parity = (s.parity + 1) % 3;
        if (n.ksmall != 0) n.ksmall = n.ksmall == 1 ? 2 : 0;
        if (bang) n.post = true;
        if (!bang && s.post) n.posthash = s.posthash + 1;
        if (!s.post) {
          n.phase = PState::Phase::kRewind;
          Dispatched x;
          x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kLeft};
          return x;
        }
        return to_comm(std::move(n));
      }
      return decide(TerminalKind::kReject);
    }

    case UnaryLanguage::kPal: {
      if (s.pal_phase == 1) {
        if (at_right) return decide(TerminalKind::kAccept);  // claimed position beyond the input
        if (talker == sym_a_) {
          PState n = s;
          n.blk_type = 1;  // at least one unary digit
          Dispatched x = to_comm(std::move(n));
          rotate(x, {{0, +1}});
          return x;
        }
        if (talker == sym_hash_) {
          if (s.blk_type == 0) return decide(TerminalKind::kAccept);
          PState n = s;
          n.buf = static_cast<std::uint8_t>(input_sym);
          n.blk_type = 0;
          n.phase = PState::Phase::kP2Seek;
          Dispatched x;
          x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
          return x;
        }
        return decide(TerminalKind::kAccept);
      }
      // Phase 2: walking left from the right endmarker.
      if (at_left) return decide(TerminalKind::kAccept);
      if (talker == sym_a_) {
        PState n = s;
        n.blk_type = 1;
        Dispatched x = to_comm(std::move(n));
        rotate(x, {{0, -1}});
        return x;
      }
      if (talker == sym_hash_) {
        if (s.blk_type == 0) return decide(TerminalKind::kAccept);
        PState n = s;
        n.buf2 = static_cast<std::uint8_t>(input_sym);
        n.phase = PState::Phase::kFlush;
        n.count = 0;
        Dispatched x;
        x.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return x;
      }
      return decide(TerminalKind::kAccept);
    }
  }
  throw std::logic_error("unreachable");
}

PolyVerifier::Dispatched PolyVerifier::flush_step(PState s, char input_sym) const {
  (void)input_sym;
  Dispatched d;
  auto decide = [&](TerminalKind t) {
    Dispatched x;
    x.arm0.terminal = t;
    return x;
  };

  switch (lang_) {
    case UnaryLanguage::kUprime: {
      if (s.count == 0) {
        if (!s.seen_b) return decide(TerminalKind::kAccept);      // no alternation at all
        if (s.blk_len1) return decide(TerminalKind::kAccept);     // final block of length one
        // Ended inside an a-block: the (b, a) pair on tracker 1 closes; ended
        // inside a b-block: the (a, b) pair on tracker 0 closes.
        d.action.kind = RotationAction::Kind::kMeasure;
        d.action.tracker = s.blk_type == 1 ? 1 : 0;
        PState n = enter_walk(s, 0);
        d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        d.q1 = TerminalKind::kAccept;
        return d;
      }
      break;
    }
    case UnaryLanguage::kUsquare: {
      if (s.count == 0) {
        if (s.blk_type == 0) return decide(TerminalKind::kReject);  // empty certificate scan
        PState n = s;
        n.count = 1;
        if (!s.first_block) {
          d.action.kind = RotationAction::Kind::kMeasure;
          d.action.tracker = s.blk_type == 1 ? 1 : 0;
          n.phase = PState::Phase::kFlush;
          d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
          d.q1 = TerminalKind::kReject;
          return d;
        }
        n.phase = PState::Phase::kFlush;
        d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return d;
      }
      if (s.count == 1) {
        d.action.kind = RotationAction::Kind::kMeasure;
        d.action.tracker = 2;  // block count vs first-block length
        d.arm0 = {TerminalKind::kNone, enter_walk(s, 0), HeadMove::kStay};
        d.q1 = TerminalKind::kReject;
        return d;
      }
      break;
    }
    case UnaryLanguage::kUpower: {
      if (s.count == 0) {
        if (s.first_block) {
          // Certificate had a single block: it must be exactly "a".
          if (!(s.blk_type == 1 && s.blk_len1)) return decide(TerminalKind::kReject);
          d.arm0 = {TerminalKind::kNone, enter_walk(s, 0), HeadMove::kStay};
          return d;
        }
        // Final pair (k-1, k) closes on the qubit of k-1.
        d.action.kind = RotationAction::Kind::kMeasure;
        d.action.tracker = s.parity == 1 ? 1 : 0;
        d.arm0 = {TerminalKind::kNone, enter_walk(s, 0), HeadMove::kStay};
        d.q1 = TerminalKind::kReject;
        return d;
      }
      break;
    }
    case UnaryLanguage::kUfib: {
      if (s.count == 0) {
        if (s.posthash < 1) return decide(TerminalKind::kReject);  // only one member after '!'
        if (s.blk_type == 0) return decide(TerminalKind::kReject);
        PState n = s;
        n.count = 1;
        n.phase = PState::Phase::kCmp;
        if (s.ksmall == 0) {
          d.action.kind = RotationAction::Kind::kMeasure;
          d.action.tracker = (s.parity + 2) % 3;  // the final member's own check
          d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
          d.q1 = TerminalKind::kReject;
          return d;
        }
        d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        return d;
      }
      break;
    }
    case UnaryLanguage::kPal: {
      if (s.count == 0) {
        PState n = s;
        n.count = 1;
        n.phase = PState::Phase::kFlush;
        d.action.kind = RotationAction::Kind::kMeasure;
        d.action.tracker = 0;
        d.arm0 = {TerminalKind::kNone, std::move(n), HeadMove::kStay};
        d.q1 = TerminalKind::kAccept;
        return d;
      }
      if (s.count == 1) {
        std::uint8_t kind = s.buf == s.buf2 ? 0 : 1;
        d.arm0 = {TerminalKind::kNone, enter_walk(s, kind), HeadMove::kStay};
        return d;
      }
      break;
    }
  }
  throw std::logic_error("poly verifier: bad flush step");
}

CommWrite PolyVerifier::delta_c(StateId s, char) const {
  const PState& st = states_.at(static_cast<size_t>(s));
  if (st.phase != PState::Phase::kScanComm)
    throw SpecIncompleteError("poly verifier: delta_c on a non-communication state");
  PState n = st;
  n.phase = PState::Phase::kScanMove;
  return {0, intern(n)};
}

QuantumAction PolyVerifier::delta_q(StateId s, char input_sym, Symbol gp, Symbol gr) const {
  const PState st = states_.at(static_cast<size_t>(s));
  Dispatched d = dispatch(st, input_sym, gp, gr);
  QuantumAction qa;
  RotationAction ra = d.action;
  if (ra.kind == RotationAction::Kind::kRotate && ra.deltas.empty())
    ra.deltas.assign(static_cast<size_t>(trackers_), 0);
  qa.rotation = ra;
  return qa;
}

ClassicalUpdate PolyVerifier::delta_s(StateId s, char input_sym, Symbol gp, Symbol gr,
                                      int outcome) const {
  const PState st = states_.at(static_cast<size_t>(s));
  Dispatched d = dispatch(st, input_sym, gp, gr);
  // Measurement: outcome 1 decides, outcome 0 continues.
  if (d.action.kind == RotationAction::Kind::kMeasure && outcome == 1) {
    TerminalKind t = d.q1;
    if (t == TerminalKind::kAccept) return {kAcceptId, HeadMove::kStay};
    if (t == TerminalKind::kReject) return {kRejectId, HeadMove::kStay};
    return {kRestartTarget, HeadMove::kStay};
  }
  const auto& arm = (outcome == 1 && d.has_arm1) ? d.arm1 : d.arm0;
  if (arm.terminal == TerminalKind::kAccept) return {kAcceptId, HeadMove::kStay};
  if (arm.terminal == TerminalKind::kReject) return {kRejectId, HeadMove::kStay};
  if (arm.terminal == TerminalKind::kRestart) return {kRestartTarget, HeadMove::kStay};
  return {intern(arm.next), arm.move};
}

std::shared_ptr<PolyVerifier> build_pal_verifier() {
  return std::make_shared<PolyVerifier>(UnaryLanguage::kPal);
}
std::shared_ptr<PolyVerifier> build_uprime_verifier() {
  return std::make_shared<PolyVerifier>(UnaryLanguage::kUprime);
}
std::shared_ptr<PolyVerifier> build_usquare_verifier() {
  return std::make_shared<PolyVerifier>(UnaryLanguage::kUsquare);
}
std::shared_ptr<PolyVerifier> build_upower_verifier() {
  return std::make_shared<PolyVerifier>(UnaryLanguage::kUpower);
}
std::shared_ptr<PolyVerifier> build_ufib_verifier() {
  return std::make_shared<PolyVerifier>(UnaryLanguage::kUfib);
}

// ---------------------------------------------------------------------------
// Walk probe.
// ---------------------------------------------------------------------------

namespace {

class WalkProbe : public VerifierSpec {
 public:
  explicit WalkProbe(int attenuation) : att_(attenuation) {}
  std::string name() const override { return "walk-probe"; }
  bool uses_vector_register() const override { return false; }
  int tracker_count() const override { return 1; }
  StateId initial_state() const override { return 0; }
  StateKind state_kind(StateId s) const override {
    if (s == 101) return StateKind::kAccept;
    if (s == 102) return StateKind::kReject;
    return StateKind::kRead;
  }
  std::string state_name(StateId s) const override { return "w" + std::to_string(s); }
  const std::vector<std::string>& comm_alphabet() const override {
    static const std::vector<std::string> a{"."};
    return a;
  }
  CommWrite delta_c(StateId, char) const override {
    throw SpecIncompleteError("walk probe has no communication states");
  }
  // States: 0 seek, 1 walk1, 2 walk2, 3.. attenuation coins.
  QuantumAction delta_q(StateId s, char sym, Symbol, Symbol) const override {
    QuantumAction qa;
    RotationAction ra;
    ra.kind = RotationAction::Kind::kNoop;
    bool coin = false;
    if (s == 1 || s == 2) coin = sym != kLeftEndmarker && sym != kRightEndmarker;
    if (s >= 3) coin = true;
    if (coin) {
      ra.kind = RotationAction::Kind::kCoin;
      ra.outcomes = 2;
    }
    qa.rotation = ra;
    return qa;
  }
  ClassicalUpdate delta_s(StateId s, char sym, Symbol, Symbol, int outcome) const override {
    if (s == 0) {
      if (sym == kRightEndmarker) return {1, HeadMove::kLeft};
      return {0, HeadMove::kRight};
    }
    if (s == 1) {
      if (sym == kLeftEndmarker) return {2, HeadMove::kRight};
      if (sym == kRightEndmarker) return {kRestartTarget, HeadMove::kStay};
      return {1, outcome == 0 ? HeadMove::kLeft : HeadMove::kRight};
    }
    if (s == 2) {
      if (sym == kRightEndmarker) return {att_ == 0 ? 101 : 3, HeadMove::kStay};
      if (sym == kLeftEndmarker) return {kRestartTarget, HeadMove::kStay};
      return {2, outcome == 0 ? HeadMove::kLeft : HeadMove::kRight};
    }
    // attenuation chain
    if (outcome == 0) return {kRestartTarget, HeadMove::kStay};
    int step = s - 3 + 1;
    if (step >= att_) return {101, HeadMove::kStay};
    return {s + 1, HeadMove::kStay};
  }
  int superop_count() const override { return 0; }
  const Superoperator& superop(int) const override {
    throw std::logic_error("walk probe has no superoperators");
  }

 private:
  int att_;
};

}  // namespace

std::shared_ptr<VerifierSpec> build_walk_probe(int attenuation) {
  return std::make_shared<WalkProbe>(attenuation);
}

}  // namespace qdl
