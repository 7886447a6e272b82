#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdl/compile.hpp"
#include "qdl/machine.hpp"
#include "qdl/tm.hpp"

namespace qdl {

/// Always emits the same symbol (default the filler "."): the silent or
/// ignored debater.
class FillerStrategy : public DebaterStrategy {
 public:
  explicit FillerStrategy(std::string sym = ".") : sym_(std::move(sym)) {}
  std::string name() const override { return "silent"; }
  void reset() override {}
  std::string emit() override { return sym_; }
  std::unique_ptr<DebaterStrategy> clone() const override {
    return std::make_unique<FillerStrategy>(sym_);
  }
  std::string state_key() const override { return "-"; }

 private:
  std::string sym_;
};

/// Replays a fixed symbol sequence, cyclically. Restart events rewind it.
class ScriptedStrategy : public DebaterStrategy {
 public:
  ScriptedStrategy(std::string strategy_name, std::vector<std::string> symbols, bool cyclic = true);
  std::string name() const override { return name_; }
  void reset() override { pos_ = 0; }
  std::string emit() override;
  std::unique_ptr<DebaterStrategy> clone() const override {
    return std::make_unique<ScriptedStrategy>(*this);
  }
  std::string state_key() const override { return std::to_string(pos_); }

 private:
  std::string name_;
  std::vector<std::string> symbols_;
  bool cyclic_;
  size_t pos_ = 0;
};

/// Corruption request for spurious histories: block index (1-based, >= 2),
/// symbol position within the block (1-based), and a nonzero rotation among
/// symbols of the same kind (plain stays plain, composite stays composite
/// and non-halting). The final blank of a block may not be perturbed.
struct ErrorSpec {
  int block = 2;
  int position = 1;
  int delta = 1;
};

/// Streams the honest computation history of `tm` on `w`.
std::unique_ptr<DebaterStrategy> honest_history(const SingleTapeTM& tm, const std::string& w);

/// Honest stream with one corrupted block, continued consistently from the
/// corrupted configuration to its halting configuration. Throws when the
/// error spec would change the final symbol of the block or produce an
/// illegal description.
std::unique_ptr<DebaterStrategy> spurious_history(const SingleTapeTM& tm, const std::string& w,
                                                  const ErrorSpec& error);
std::unique_ptr<DebaterStrategy> spurious_history(const SingleTapeTM& tm, const std::string& w,
                                                  const std::vector<ErrorSpec>& errors);

/// Behaves honestly for `after_blocks` blocks, then keeps a configuration
/// open forever (no separators).
std::unique_ptr<DebaterStrategy> staller(const SingleTapeTM& tm, const std::string& w,
                                         int after_blocks);

/// Reports the halting outcome a corrupted history reaches (for picking
/// adversaries whose history ends in their preferred decision).
std::optional<bool> spurious_outcome(const SingleTapeTM& tm, const std::string& w,
                                     const std::vector<ErrorSpec>& errors, long max_blocks = 4096);

// ---------------------------------------------------------------------------
// Alternation-game strategies (zero-error verifier).
// ---------------------------------------------------------------------------

struct AtmStrategyOptions {
  // Scripted choice bits consumed on this debater's announcement turns;
  // empty = play optimally.
  std::vector<int> scripted_choices;
  // Corruptions applied to this debater's own block transmissions.
  std::vector<ErrorSpec> errors;
  // Stall (never close the block) starting at this 1-based block, 0 = never.
  int stall_block = 0;
  // Append this many copies of the final blank to each block description
  // (overlong-configuration cheat), 0 = none.
  int pad_blocks = 0;
};

/// Plays the alternation game: announces choices on its own turns, echoes
/// the configuration stream, and honors the options' corruptions.
std::unique_ptr<DebaterStrategy> atm_game_strategy(int role_p1, const LinearSpaceATM& atm,
                                                   const std::string& w,
                                                   const AtmStrategyOptions& options = {});

// ---------------------------------------------------------------------------
// Certificates for the polynomial-time verifiers.
// ---------------------------------------------------------------------------

/// Certificate text per language ("a"/"b" blocks, "#"/"!" separators).
std::string uprime_certificate(long i, long j);
std::string usquare_certificate(long m);
std::string upower_certificate(long m);
std::string ufib_certificate(long n);  // for the Fibonacci number n = F_i
std::string pal_certificate(long i, long i_second = -1);  // unary position claims

/// Wraps a certificate string as a cyclic one-symbol-per-character stream.
std::unique_ptr<DebaterStrategy> certificate_strategy(const std::string& name,
                                                      const std::string& certificate);

/// Named adversarial families. Each entry is (label, strategy factory).
using StrategyFactory = std::function<std::unique_ptr<DebaterStrategy>()>;
std::vector<std::pair<std::string, StrategyFactory>> history_adversary_family(
    const SingleTapeTM& tm, const std::string& w, bool prefer_accept);
std::vector<std::pair<std::string, StrategyFactory>> atm_adversary_family(
    const LinearSpaceATM& atm, const std::string& w, int adversary_is_p1);
std::vector<std::pair<std::string, StrategyFactory>> unary_adversary_family(
    const std::string& language, long n);

}  // namespace qdl
