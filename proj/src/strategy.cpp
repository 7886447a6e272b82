#include "qdl/strategy.hpp"

#include <sstream>
#include <stdexcept>

namespace qdl {

ScriptedStrategy::ScriptedStrategy(std::string strategy_name, std::vector<std::string> symbols,
                                   bool cyclic)
    : name_(std::move(strategy_name)), symbols_(std::move(symbols)), cyclic_(cyclic) {
  if (symbols_.empty()) throw std::invalid_argument("scripted strategy needs symbols");
}

std::string ScriptedStrategy::emit() {
  if (pos_ >= symbols_.size()) {
    if (!cyclic_) throw StrategyContractError("scripted strategy '" + name_ + "' exhausted");
    pos_ = 0;
  }
  return symbols_[pos_++];
}

namespace {

/// Emits a precomputed list of blocks (code sequences) separated by "$","$";
/// optionally stalls inside one block, optionally loops past the end.
class BlockStreamStrategy : public DebaterStrategy {
 public:
  BlockStreamStrategy(std::string strategy_name, const ConfigAlphabet* alpha,
                      std::vector<std::vector<int>> blocks, int stall_block)
      : name_(std::move(strategy_name)),
        alpha_(alpha),
        blocks_(std::move(blocks)),
        stall_block_(stall_block) {}

  std::string name() const override { return name_; }
  void reset() override {
    block_ = 0;
    pos_ = 0;
    dollars_ = 0;
  }

  std::string emit() override {
    if (block_ >= blocks_.size()) return "$";  // past the history; caller restarts soon
    const auto& blk = blocks_[block_];
    if (stall_block_ > 0 && static_cast<size_t>(stall_block_) == block_ + 1 && pos_ >= blk.size())
      return alpha_->symbol_name(blk.empty() ? 1 : blk.back());  // never closes the block
    if (pos_ < blk.size()) return alpha_->symbol_name(blk[pos_++]);
    if (dollars_ < 2) {
      ++dollars_;
      if (dollars_ == 2) {
        ++block_;
        pos_ = 0;
        dollars_ = 0;
      }
      return "$";
    }
    return "$";
  }

  std::unique_ptr<DebaterStrategy> clone() const override {
    return std::make_unique<BlockStreamStrategy>(*this);
  }
  std::string state_key() const override {
    return std::to_string(block_) + ":" + std::to_string(pos_) + ":" + std::to_string(dollars_);
  }

 private:
  std::string name_;
  const ConfigAlphabet* alpha_;
  std::vector<std::vector<int>> blocks_;
  int stall_block_ = 0;
  size_t block_ = 0;
  size_t pos_ = 0;
  int dollars_ = 0;
};

/// Shared alphabets per machine shape, kept alive for the strategies.
const ConfigAlphabet* alphabet_for(const SingleTapeTM& tm) {
  static std::vector<std::pair<std::string, std::unique_ptr<ConfigAlphabet>>> cache;
  std::string key = tm.tape_alphabet + "/" + std::to_string(tm.states.size());
  for (auto& [k, a] : cache)
    if (k == key) return a.get();
  cache.emplace_back(key, std::make_unique<ConfigAlphabet>(
                              tm.tape_alphabet, static_cast<int>(tm.states.size())));
  return cache.back().second.get();
}

const ConfigAlphabet* alphabet_for(const LinearSpaceATM& atm) {
  static std::vector<std::pair<std::string, std::unique_ptr<ConfigAlphabet>>> cache;
  std::string key = atm.tape_alphabet + "/" + std::to_string(atm.states.size());
  for (auto& [k, a] : cache)
    if (k == key) return a.get();
  cache.emplace_back(key, std::make_unique<ConfigAlphabet>(
                              atm.tape_alphabet, static_cast<int>(atm.states.size())));
  return cache.back().second.get();
}

int rotate_code(const ConfigAlphabet& alpha, int code, int delta, const SingleTapeTM& tm) {
  // Rotate within the same kind; composites only among non-halting states.
  std::vector<int> pool;
  bool comp = alpha.is_composite(code);
  for (int c = 1; c <= alpha.size(); ++c) {
    if (alpha.is_composite(c) != comp) continue;
    if (comp && tm.is_halting(alpha.composite_parts(c).first)) continue;
    pool.push_back(c);
  }
  size_t at = 0;
  for (size_t i = 0; i < pool.size(); ++i)
    if (pool[i] == code) at = i;
  return pool[(at + static_cast<size_t>(delta)) % pool.size()];
}

std::vector<std::vector<int>> corrupted_blocks(const SingleTapeTM& tm, const std::string& w,
                                               const std::vector<ErrorSpec>& errors,
                                               long max_blocks) {
  const ConfigAlphabet& alpha = *alphabet_for(tm);
  std::vector<std::vector<int>> blocks;
  Configuration c = start_configuration(tm, w);
  for (long b = 1; b <= max_blocks; ++b) {
    std::vector<int> codes = describe(c, alpha);
    bool corrupted = false;
    for (const auto& e : errors) {
      if (e.block != b) continue;
      if (e.block < 2) throw std::invalid_argument("spurious_history: corrupt blocks >= 2 only");
      if (e.position < 1 || e.position > static_cast<int>(codes.size()))
        throw std::invalid_argument("spurious_history: position out of range");
      if (e.position == static_cast<int>(codes.size()))
        throw std::invalid_argument(
            "spurious_history: perturbing the final symbol would break the gap bound");
      if (e.delta == 0) continue;
      int& slot = codes[static_cast<size_t>(e.position) - 1];
      slot = rotate_code(alpha, slot, e.delta, tm);
      corrupted = true;
    }
    if (corrupted) {
      auto parsed = configuration_from_codes(codes, alpha);
      if (!parsed)
        throw std::invalid_argument("spurious_history: corruption produced an illegal description");
      c = *parsed;
    }
    blocks.push_back(std::move(codes));
    Configuration n = next_configuration(tm, c);
    if (is_halting(tm, n)) break;
    c = n;
  }
  return blocks;
}

}  // namespace

std::unique_ptr<DebaterStrategy> honest_history(const SingleTapeTM& tm, const std::string& w) {
  return std::make_unique<BlockStreamStrategy>("honest", alphabet_for(tm),
                                               corrupted_blocks(tm, w, {}, 4096), 0);
}

std::unique_ptr<DebaterStrategy> spurious_history(const SingleTapeTM& tm, const std::string& w,
                                                  const ErrorSpec& error) {
  return spurious_history(tm, w, std::vector<ErrorSpec>{error});
}

std::unique_ptr<DebaterStrategy> spurious_history(const SingleTapeTM& tm, const std::string& w,
                                                  const std::vector<ErrorSpec>& errors) {
  std::ostringstream label;
  label << "spurious";
  for (const auto& e : errors) label << ":b" << e.block << "p" << e.position << "d" << e.delta;
  return std::make_unique<BlockStreamStrategy>(label.str(), alphabet_for(tm),
                                               corrupted_blocks(tm, w, errors, 4096), 0);
}

std::unique_ptr<DebaterStrategy> staller(const SingleTapeTM& tm, const std::string& w,
                                         int after_blocks) {
  return std::make_unique<BlockStreamStrategy>("staller:b" + std::to_string(after_blocks),
                                               alphabet_for(tm), corrupted_blocks(tm, w, {}, 4096),
                                               after_blocks);
}

std::optional<bool> spurious_outcome(const SingleTapeTM& tm, const std::string& w,
                                     const std::vector<ErrorSpec>& errors, long max_blocks) {
  const ConfigAlphabet& alpha = *alphabet_for(tm);
  auto blocks = corrupted_blocks(tm, w, errors, max_blocks);
  if (blocks.empty()) return std::nullopt;
  auto last = configuration_from_codes(blocks.back(), alpha);
  if (!last) return std::nullopt;
  Configuration halting = next_configuration(tm, *last);
  if (!is_halting(tm, halting)) return std::nullopt;
  return halting.state == tm.accept_state;
}

// ---------------------------------------------------------------------------
// Alternation game.
// ---------------------------------------------------------------------------

namespace {

class AtmGame : public DebaterStrategy {
 public:
  AtmGame(int role_p1, const LinearSpaceATM* atm, std::string w, AtmStrategyOptions opt)
      : role_p1_(role_p1), atm_(atm), alpha_(alphabet_for(*atm)), w_(std::move(w)),
        opt_(std::move(opt)) {
    reset();
  }

  std::string name() const override {
    std::string n = role_p1_ ? "atm-p1" : "atm-p0";
    if (!opt_.scripted_choices.empty()) n += ":scripted";
    if (!opt_.errors.empty()) n += ":spurious";
    if (opt_.stall_block) n += ":stall";
    if (opt_.pad_blocks) n += ":pad";
    return n;
  }

  void bind(const VerifierSpec& spec) override {
    bit_symbol_[0] = spec.comm_symbol("0");
    bit_symbol_[1] = spec.comm_symbol("1");
  }

  void reset() override {
    config_ = atm_start_configuration(*atm_, w_);
    block_index_ = 1;
    announcing_ = true;
    p1_turn_ = true;
    pending_choice_ = -1;
    script_pos_ = 0;
    load_block();
  }

  void observe(const PublicEvent& ev) override {
    if (ev.kind != PublicEvent::Kind::kDebatersWrote || !announce_step_) return;
    announce_step_ = false;
    Symbol sym = p1_turn_ ? ev.p1_symbol : ev.p0_symbol;
    // The verifier's alphabet places "0"/"1" wherever they landed; decode by
    // comparing against our own encoding of the two bits.
    pending_choice_ = sym == bit_symbol_[1] ? 1 : 0;
    announcing_ = false;
  }

  std::string emit() override {
    if (announcing_) {
      announce_step_ = true;
      std::string bit = "0";
      if (p1_turn_ == (role_p1_ != 0)) {
        int choice = my_choice();
        bit = choice == 1 ? "1" : "0";
      } else {
        return ".";  // opponent's turn to announce
      }
      return bit;
    }
    // Stream the current block description.
    if (opt_.stall_block > 0 && block_index_ == opt_.stall_block && pos_ >= block_.size())
      return alpha_->symbol_name(block_.back());
    if (pos_ < block_.size()) return alpha_->symbol_name(block_[pos_++]);
    if (dollars_ < 2) {
      ++dollars_;
      if (dollars_ == 2) advance_block();
      return "$";
    }
    return "$";
  }

  std::unique_ptr<DebaterStrategy> clone() const override {
    return std::make_unique<AtmGame>(*this);
  }

  std::string state_key() const override {
    std::ostringstream os;
    os << config_.state << ':' << config_.head << ':' << config_.tape << ':' << block_index_ << ':'
       << announcing_ << announce_step_ << p1_turn_ << ':' << static_cast<int>(pending_choice_)
       << ':' << pos_ << ':' << dollars_ << ':' << script_pos_;
    return os.str();
  }

 private:
  int my_choice() {
    if (!opt_.scripted_choices.empty()) {
      if (script_pos_ >= opt_.scripted_choices.size())
        throw StrategyContractError("atm strategy: scripted choices exhausted");
      return opt_.scripted_choices[script_pos_++];
    }
    if (atm_->is_halting(config_.state)) return 0;
    return atm_optimal_choice(*atm_, config_);
  }

  void load_block() {
    block_ = atm_describe(config_, *alpha_);
    for (const auto& e : opt_.errors) {
      if (e.block != static_cast<int>(block_index_)) continue;
      if (e.position < 1 || e.position >= static_cast<int>(block_.size()))
        throw std::invalid_argument("atm strategy: corruption position out of range");
      int& slot = block_[static_cast<size_t>(e.position) - 1];
      // Rotate among same-kind codes, composites kept non-halting.
      std::vector<int> pool;
      bool comp = alpha_->is_composite(slot);
      for (int c = 1; c <= alpha_->size(); ++c) {
        if (alpha_->is_composite(c) != comp) continue;
        if (comp && atm_->is_halting(alpha_->composite_parts(c).first)) continue;
        pool.push_back(c);
      }
      size_t at = 0;
      for (size_t i = 0; i < pool.size(); ++i)
        if (pool[i] == slot) at = i;
      slot = pool[(at + static_cast<size_t>(e.delta)) % pool.size()];
    }
    for (int i = 0; i < opt_.pad_blocks; ++i) block_.push_back(alpha_->plain_code(kBlank));
    pos_ = 0;
    dollars_ = 0;
  }

  void advance_block() {
    if (!atm_->is_halting(config_.state) && pending_choice_ >= 0) {
      AtmConfiguration n = atm_next(*atm_, config_, pending_choice_);
      config_ = n;
    }
    ++block_index_;
    announcing_ = !atm_->is_halting(config_.state);
    p1_turn_ = !p1_turn_;
    pending_choice_ = -1;
    load_block();
  }

  int role_p1_;
  const LinearSpaceATM* atm_;
  const ConfigAlphabet* alpha_;
  std::string w_;
  AtmStrategyOptions opt_;

  AtmConfiguration config_;
  int block_index_ = 1;
  bool announcing_ = true;
  bool announce_step_ = false;
  bool p1_turn_ = true;
  int pending_choice_ = -1;
  std::vector<int> block_;
  size_t pos_ = 0;
  int dollars_ = 0;
  size_t script_pos_ = 0;
  Symbol bit_symbol_[2] = {-1, -1};
};

}  // namespace

std::unique_ptr<DebaterStrategy> atm_game_strategy(int role_p1, const LinearSpaceATM& atm,
                                                   const std::string& w,
                                                   const AtmStrategyOptions& options) {
  return std::make_unique<AtmGame>(role_p1, &atm, w, options);
}

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------

std::string uprime_certificate(long i, long j) {
  std::string out;
  for (long b = 0; b < j; ++b) out += std::string(static_cast<size_t>(i), b % 2 ? 'b' : 'a');
  return out;
}

std::string usquare_certificate(long m) {
  std::string out;
  for (long b = 0; b < m; ++b) out += std::string(static_cast<size_t>(m), b % 2 ? 'b' : 'a');
  return out;
}

std::string upower_certificate(long m) {
  std::string out;
  long len = 1;
  for (long b = 0; b < m; ++b, len *= 2) out += std::string(static_cast<size_t>(len), b % 2 ? 'b' : 'a');
  return out;
}

std::string ufib_certificate(long n) {
  // Fibonacci members up to F_{i-1} for n = F_i, "!" before the second-last.
  std::vector<long> fib{1, 1};
  while (fib.back() < n) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
  if (fib.back() != n) throw std::invalid_argument("ufib_certificate: not a Fibonacci number");
  // fib.back() == F_i == n; members F_1 .. F_{i-1} are streamed.
  fib.pop_back();
  if (fib.size() < 2) throw std::invalid_argument("ufib_certificate: index too small");
  std::string out;
  for (size_t k = 0; k < fib.size(); ++k) {
    if (k > 0) out += (k == fib.size() - 2) ? '!' : '#';
    out += std::string(static_cast<size_t>(fib[k]), 'a');
  }
  return out;
}

std::string pal_certificate(long i, long i_second) {
  if (i_second < 0) i_second = i;
  return std::string(static_cast<size_t>(i), 'a') + "#" +
         std::string(static_cast<size_t>(i_second), 'a') + "#";
}

std::unique_ptr<DebaterStrategy> certificate_strategy(const std::string& name,
                                                      const std::string& certificate) {
  std::vector<std::string> symbols;
  symbols.reserve(certificate.size());
  for (char c : certificate) symbols.emplace_back(1, c);
  if (symbols.empty()) symbols.emplace_back("#");
  return std::make_unique<ScriptedStrategy>(name, std::move(symbols), true);
}

// ---------------------------------------------------------------------------
// Adversarial families.
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, StrategyFactory>> history_adversary_family(
    const SingleTapeTM& tm, const std::string& w, bool prefer_accept) {
  std::vector<std::pair<std::string, StrategyFactory>> out;
  long blocks = static_cast<long>(corrupted_blocks(tm, w, {}, 4096).size());
  const ConfigAlphabet& alpha = *alphabet_for(tm);

  auto block_len = [&](long b) {
    Configuration c = start_configuration(tm, w);
    for (long k = 1; k < b; ++k) c = next_configuration(tm, c);
    return static_cast<long>(describe(c, alpha).size());
  };

  for (long b = 2; b <= blocks; ++b) {
    long len = block_len(b);
    for (int pos = 1; pos < len; ++pos) {
      for (int delta : {1, 2}) {
        ErrorSpec e{static_cast<int>(b), pos, delta};
        std::vector<ErrorSpec> errs{e};
        std::optional<bool> outcome;
        try {
          outcome = spurious_outcome(tm, w, errs);
        } catch (const std::exception&) {
          continue;  // illegal perturbation (kind pool of size one, etc.)
        }
        if (!outcome || *outcome != prefer_accept) continue;
        std::string label = "spurious:b" + std::to_string(b) + "p" + std::to_string(pos) + "d" +
                            std::to_string(delta);
        out.emplace_back(label, [&tm, w, errs] { return spurious_history(tm, w, errs); });
      }
    }
  }
  // Double corruptions in the first two corruptible blocks.
  if (blocks >= 3) {
    std::vector<ErrorSpec> errs{{2, 1, 1}, {3, 1, 1}};
    try {
      auto outcome = spurious_outcome(tm, w, errs);
      if (outcome && *outcome == prefer_accept)
        out.emplace_back("spurious:double", [&tm, w, errs] { return spurious_history(tm, w, errs); });
    } catch (const std::exception&) {
    }
  }
  for (long b = 2; b <= blocks + 1; ++b)
    out.emplace_back("staller:b" + std::to_string(b),
                     [&tm, w, b] { return staller(tm, w, static_cast<int>(b)); });
  return out;
}

std::vector<std::pair<std::string, StrategyFactory>> atm_adversary_family(
    const LinearSpaceATM& atm, const std::string& w, int adversary_is_p1) {
  std::vector<std::pair<std::string, StrategyFactory>> out;
  auto mk = [&](const std::string& label, AtmStrategyOptions opt) {
    out.emplace_back(label, [&atm, w, adversary_is_p1, opt] {
      return atm_game_strategy(adversary_is_p1, atm, w, opt);
    });
  };
  for (int b = 2; b <= 4; ++b)
    for (int pos = 1; pos <= 2; ++pos) {
      AtmStrategyOptions opt;
      opt.errors = {{b, pos, 1}};
      mk("spurious:b" + std::to_string(b) + "p" + std::to_string(pos), opt);
    }
  {
    AtmStrategyOptions opt;
    opt.errors = {{2, 1, 1}, {3, 1, 1}};
    mk("spurious:double", opt);
  }
  for (int b = 2; b <= 3; ++b) {
    AtmStrategyOptions opt;
    opt.stall_block = b;
    mk("staller:b" + std::to_string(b), opt);
  }
  {
    AtmStrategyOptions opt;
    opt.pad_blocks = static_cast<int>(w.size()) * atm.space_coefficient + 8;
    mk("overlong", opt);
  }
  {
    AtmStrategyOptions opt;
    opt.scripted_choices = std::vector<int>(64, 0);
    mk("scripted:zeros", opt);
  }
  {
    AtmStrategyOptions opt;
    opt.scripted_choices = std::vector<int>(64, 1);
    mk("scripted:ones", opt);
  }
  return out;
}

std::vector<std::pair<std::string, StrategyFactory>> unary_adversary_family(
    const std::string& language, long n) {
  std::vector<std::pair<std::string, StrategyFactory>> out;
  auto script = [&out](const std::string& label, const std::string& text) {
    out.emplace_back(label, [label, text] { return certificate_strategy(label, text); });
  };

  if (language == "pal") {
    for (long i = 1; i <= n; ++i) script("claim:" + std::to_string(i), pal_certificate(i));
    for (long i = 1; i + 1 <= n; ++i)
      script("mismatch:" + std::to_string(i), pal_certificate(i, i + 1));
    script("overlong", pal_certificate(n + 2));
    return out;
  }

  // Unary block languages: equal-block tilings, off-by-one blocks, single
  // blocks, length-one blocks, and slightly wrong totals.
  for (long i = 1; i <= n; ++i) {
    if (n % i == 0) script("tile:" + std::to_string(i), uprime_certificate(i, n / i));
    script("pair:" + std::to_string(i),
           std::string(static_cast<size_t>(i), 'a') + std::string(static_cast<size_t>(i), 'b'));
  }
  script("single", std::string(static_cast<size_t>(std::max(n, 1L)), 'a'));
  script("ones", uprime_certificate(1, std::max(n, 1L)));
  if (n >= 3) script("offbyone", uprime_certificate((n - 1) / 2, 2) + "a");
  if (language == "upower") {
    // Doubling chains with a wrong final block.
    long m = 1;
    while (upower_certificate(m + 1).size() + 1 <= static_cast<size_t>(n)) ++m;
    script("chain", upower_certificate(m));
    if (m >= 2) script("chain-short", upower_certificate(m - 1));
  }
  if (language == "ufib") {
    script("fib-like", "a#a!aa#aaa");
    script("fib-near", "a#a#aa!aaa#aaaa");
  }
  return out;
}

}  // namespace qdl
