#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdl/strategy.hpp"

using namespace qdl;

namespace {

std::string drain(DebaterStrategy& s, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) {
    std::string sym = s.emit();
    out += sym.size() == 1 ? sym : "<" + sym + ">";
  }
  return out;
}

}  // namespace

TEST_CASE("paired honest strategies emit identical streams") {
  auto tm = parity_tm();
  auto a = honest_history(tm, "11");
  auto b = honest_history(tm, "11");
  for (int i = 0; i < 40; ++i) CHECK(a->emit() == b->emit());
}

TEST_CASE("honest streams contain no separator inside configurations") {
  auto tm = parity_tm();
  auto s = honest_history(tm, "111");
  int run_without_dollar = 0;
  bool prev_dollar = false;
  for (int i = 0; i < 60; ++i) {
    std::string sym = s->emit();
    if (sym == "$") {
      prev_dollar = true;
      run_without_dollar = 0;
    } else {
      CHECK(sym.find('$') == std::string::npos);
      ++run_without_dollar;
      CHECK(run_without_dollar <= 6);  // parity configs on |w|=3 stay short
      (void)prev_dollar;
    }
  }
}

TEST_CASE("reset rewinds emission to the initial prefix") {
  auto tm = parity_tm();
  auto s = honest_history(tm, "11");
  std::string first = drain(*s, 10);
  s->reset();
  CHECK(drain(*s, 10) == first);

  auto c = certificate_strategy("cert", uprime_certificate(3, 5));
  std::string p = drain(*c, 7);
  c->reset();
  CHECK(drain(*c, 7) == p);
}

TEST_CASE("zero-perturbation spurious history equals the honest stream") {
  auto tm = parity_tm();
  auto honest = honest_history(tm, "11");
  auto zero = spurious_history(tm, "11", ErrorSpec{2, 1, 0});
  for (int i = 0; i < 40; ++i) CHECK(honest->emit() == zero->emit());
}

TEST_CASE("spurious history rejects perturbations of the final blank") {
  auto tm = parity_tm();
  // block 2 of parity on "11" is 1[odd,1]# (3 symbols): position 3 is final.
  CHECK_THROWS_AS(spurious_history(tm, "11", ErrorSpec{2, 3, 1}), std::invalid_argument);
}

TEST_CASE("spurious corruption flips the streamed outcome when it flips the state") {
  auto tm = parity_tm();
  // "1" is odd: honest history rejects. Corrupting the parity composite in
  // block 2 can flip the final decision to accept.
  bool found_flip = false;
  for (int pos = 1; pos <= 2; ++pos)
    for (int delta = 1; delta <= 3; ++delta) {
      std::optional<bool> out;
      try {
        out = spurious_outcome(tm, "1", {{2, pos, delta}});
      } catch (const std::exception&) {
        continue;
      }
      if (out && *out) found_flip = true;
    }
  CHECK(found_flip);
}

TEST_CASE("staller emits endlessly within one block after the stall point") {
  auto tm = parity_tm();
  auto s = staller(tm, "11", 2);
  int dollars = 0;
  for (int i = 0; i < 200; ++i)
    if (s->emit() == "$") ++dollars;
  CHECK(dollars == 2);  // only block 1 ever closes
}

TEST_CASE("certificate strings match their closed forms") {
  CHECK(uprime_certificate(3, 5) == "aaabbbaaabbbaaa");
  CHECK(uprime_certificate(2, 2) == "aabb");
  CHECK(usquare_certificate(3) == "aaabbbaaa");
  CHECK(usquare_certificate(1) == "a");
  CHECK(upower_certificate(3) == "abbaaaa");
  CHECK(upower_certificate(1) == "a");
  CHECK(ufib_certificate(8) == "a#a#aa!aaa#aaaaa");
  CHECK(ufib_certificate(5) == "a#a!aa#aaa");
  CHECK(pal_certificate(2) == "aa#aa#");
  CHECK(pal_certificate(1, 2) == "a#aa#");
  CHECK_THROWS(ufib_certificate(6));
}

TEST_CASE("uprime certificates emit exactly i*j symbols per repetition") {
  for (long i : {2L, 3L})
    for (long j : {2L, 5L}) CHECK(uprime_certificate(i, j).size() == static_cast<size_t>(i * j));
}

TEST_CASE("atm strategies: both optimal produce a unanimous history with the game outcome") {
  auto atm = bitgame_atm();
  for (const std::string& w : {std::string("10"), std::string("101")}) {
    auto p1 = atm_game_strategy(1, atm, w);
    auto p0 = atm_game_strategy(0, atm, w);
    // Drive both by hand through announce and block steps. Announcement
    // steps need the public event loop, so just check the two agree
    // symbol-by-symbol when fed the same events.
    for (int step = 0; step < 30; ++step) {
      std::string s1 = p1->emit();
      std::string s0 = p0->emit();
      PublicEvent ev{PublicEvent::Kind::kDebatersWrote, -1, 0, 0, -1};
      // Announcement steps differ by role (one side fills); block symbols agree.
      if (s1 != s0) {
        bool announce = (s1 == "." || s0 == ".");
        CHECK(announce);
      }
      p1->observe(ev);
      p0->observe(ev);
    }
  }
}

TEST_CASE("optimal-vs-spurious atm strategies disagree exactly at the corrupted block") {
  auto atm = bitgame_atm();
  const std::string w = "10";
  AtmStrategyOptions lie;
  lie.errors = {{2, 1, 1}};
  auto honest = atm_game_strategy(0, atm, w);
  auto cheat = atm_game_strategy(0, atm, w, lie);
  int diff_at = -1;
  int block = 1, pos = 0;
  for (int step = 0; step < 40 && diff_at < 0; ++step) {
    std::string a = honest->emit();
    std::string b = cheat->emit();
    if (a == "$") {
      ++pos;
      if (pos == 2) {
        ++block;
        pos = 0;
      }
    }
    if (a != b) diff_at = block;
    PublicEvent ev{PublicEvent::Kind::kDebatersWrote, -1, 0, 0, -1};
    honest->observe(ev);
    cheat->observe(ev);
  }
  CHECK(diff_at == 2);
}
