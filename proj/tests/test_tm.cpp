#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "qdl/quantum.hpp"
#include "qdl/tm.hpp"

using namespace qdl;

namespace {

/// Independent TM interpreter used as an oracle: sparse tape over a map,
/// no configuration-description machinery shared with the implementation.
struct OracleTM {
  std::map<long, char> tape;
  long head = 0;
  int state = 0;

  void load(const SingleTapeTM& tm, const std::string& w) {
    tape.clear();
    for (size_t i = 0; i < w.size(); ++i) tape[static_cast<long>(i)] = w[i];
    head = 0;
    state = tm.start_state;
  }
  char read() const {
    auto it = tape.find(head);
    return it == tape.end() ? kBlank : it->second;
  }
  void step(const SingleTapeTM& tm) {
    auto rule = tm.rules.at({state, read()});
    tape[head] = rule.write;
    state = rule.next;
    if (rule.move == TapeMove::kLeft && head > 0) --head;
    if (rule.move == TapeMove::kRight) ++head;
  }
};

/// Renders a Configuration back to (state, head, stripped tape) for
/// comparison with the oracle.
void check_against_oracle(const SingleTapeTM& tm, const Configuration& c, const OracleTM& o) {
  CHECK(c.state == o.state);
  CHECK(static_cast<long>(c.head) == o.head);
  for (size_t i = 0; i < c.tape.size(); ++i) {
    auto it = o.tape.find(static_cast<long>(i));
    char oc = it == o.tape.end() ? kBlank : it->second;
    CHECK(c.tape[i] == oc);
  }
}

SingleTapeTM random_small_tm(Rng& rng) {
  SingleTapeTM tm;
  tm.name = "random";
  tm.states = {"s0", "s1", "s2", "acc", "rej"};
  tm.input_alphabet = "ab";
  tm.tape_alphabet = "ab#";
  tm.start_state = 0;
  tm.accept_state = 3;
  tm.reject_state = 4;
  for (int s = 0; s < 3; ++s)
    for (char c : std::string("ab#")) {
      SingleTapeTM::Rule r;
      r.write = "ab#"[rng.next_u64() % 3];
      r.move = static_cast<TapeMove>(rng.next_u64() % 3);
      // Bias away from halting so runs have some length.
      r.next = static_cast<int>(rng.next_u64() % 8);
      if (r.next >= 5) r.next %= 3;
      tm.rules[{s, c}] = r;
    }
  return tm;
}

}  // namespace

TEST_CASE("bundled machines validate") {
  CHECK(parity_tm().validate().empty());
  CHECK(one_move_tm().validate().empty());
  CHECK(bitgame_atm().validate().empty());
}

TEST_CASE("start configuration of the one-move TM steps to an accepting configuration") {
  auto tm = one_move_tm();
  auto c = start_configuration(tm, "");
  auto n = next_configuration(tm, c);
  CHECK(is_halting(tm, n));
  CHECK(n.state == tm.accept_state);
  CHECK_THROWS(next_configuration(tm, n));
}

TEST_CASE("successor descriptions keep their length or grow by one") {
  auto tm = parity_tm();
  for (const std::string& w : {std::string(""), std::string("1"), std::string("111")}) {
    Configuration c = start_configuration(tm, w);
    while (!is_halting(tm, c)) {
      Configuration n = next_configuration(tm, c);
      auto len = [](const Configuration& k) { return k.tape.size(); };
      CHECK((len(n) == len(c) || len(n) == len(c) + 1));
      CHECK(n.tape.back() == kBlank);
      CHECK(n.head < static_cast<int>(n.tape.size()) - 1);
      c = n;
    }
  }
}

TEST_CASE("next_configuration agrees with an independent interpreter for 50 steps") {
  Rng rng(2718);
  for (int machine = 0; machine < 20; ++machine) {
    auto tm = random_small_tm(rng);
    REQUIRE(tm.validate().empty());
    for (const std::string& w : {std::string("ab"), std::string("baab")}) {
      Configuration c = start_configuration(tm, w);
      OracleTM oracle;
      oracle.load(tm, w);
      for (int step = 0; step < 50 && !is_halting(tm, c); ++step) {
        c = next_configuration(tm, c);
        oracle.step(tm);
        check_against_oracle(tm, c, oracle);
      }
    }
  }
}

TEST_CASE("encode_string: base-m positional value, most significant first") {
  ConfigAlphabet alpha("ab#", 0);
  EncodingParams p{10, &alpha, 0};
  CHECK(encode_string("", p) == 0);
  // e(a)=1, e(b)=2, m=10: "ab" -> 12; recurrence new = old*m + e.
  CHECK(encode_string("ab", p) == 12);
  mpz_class acc(0);
  for (char c : std::string("ab")) acc = acc * 10 + alpha.plain_code(c);
  CHECK(acc == encode_string("ab", p));
  CHECK_THROWS(encode_string("z", p));
}

TEST_CASE("same final symbol forces encode difference of at least m") {
  // Descriptions that differ but share the final blank: difference of their
  // encodings is a nonzero multiple of m.
  ConfigAlphabet alpha("1#", 4);
  long m = 11;
  auto tm = parity_tm();
  Configuration c = start_configuration(tm, "11");
  auto codes1 = describe(c, alpha);
  auto codes2 = codes1;
  codes2[0] = alpha.plain_code('1');  // perturb a non-final digit
  mpz_class e1 = encode_codes(codes1, m), e2 = encode_codes(codes2, m);
  REQUIRE(e1 != e2);
  mpz_class diff = abs(e1 - e2);
  CHECK(diff >= m);
  CHECK(diff % m == 0);
}

TEST_CASE("history stream: configurations pairwise satisfy next, no separators inside") {
  auto tm = parity_tm();
  ConfigAlphabet alpha(tm.tape_alphabet, static_cast<int>(tm.states.size()));
  HistoryStream hs(tm, alpha, "11");
  // Collect blocks until the stream finishes (parity halts on every input).
  std::vector<std::vector<std::string>> blocks(1);
  for (int guard = 0; guard < 200; ++guard) {
    std::string s = hs.next();
    if (s == "$") {
      std::string s2 = hs.next();
      REQUIRE(s2 == "$");
      if (blocks.back().empty()) break;  // stream exhausted
      blocks.emplace_back();
      continue;
    }
    CHECK(s.find('$') == std::string::npos);
    blocks.back().push_back(s);
  }
  while (!blocks.empty() && blocks.back().empty()) blocks.pop_back();
  // Parity on "11": even -> odd -> even@blank, then next is accepting.
  REQUIRE(blocks.size() == 3);

  // Fold next_configuration over the stream: each block must describe the
  // successor of the previous one.
  Configuration c = start_configuration(tm, "11");
  for (size_t b = 0; b < blocks.size(); ++b) {
    auto codes = describe(c, alpha);
    REQUIRE(codes.size() == blocks[b].size());
    for (size_t i = 0; i < codes.size(); ++i) CHECK(alpha.symbol_name(codes[i]) == blocks[b][i]);
    if (b + 1 < blocks.size()) c = next_configuration(tm, c);
  }
  // The block after the last one would be halting.
  CHECK(is_halting(tm, next_configuration(tm, c)));
}

TEST_CASE("one-move TM on empty input streams exactly c1 $$") {
  auto tm = one_move_tm();
  ConfigAlphabet alpha(tm.tape_alphabet, static_cast<int>(tm.states.size()));
  HistoryStream hs(tm, alpha, "");
  CHECK(hs.next() == "[0,#]");
  CHECK(hs.next() == "#");
  CHECK(hs.next() == "$");
  CHECK(hs.next() == "$");
  // next(c1) is accepting, so the history ends here.
  CHECK(hs.next() == "$");
}

TEST_CASE("bitgame: solver agrees with the closed-form membership rule") {
  auto atm = bitgame_atm();
  for (int len = 0; len <= 6; ++len) {
    for (int bits = 0; bits < (1 << len); ++bits) {
      std::string w;
      for (int i = 0; i < len; ++i) w += ((bits >> i) & 1) ? '1' : '0';
      bool solver = atm_existential_wins(atm, atm_start_configuration(atm, w));
      CHECK(solver == bitgame_member(w));
    }
  }
}

TEST_CASE("bitgame: optimal play reaches the predicted outcome") {
  auto atm = bitgame_atm();
  for (const std::string& w : {std::string("010"), std::string("0110"), std::string("101")}) {
    AtmConfiguration c = atm_start_configuration(atm, w);
    while (!atm.is_halting(c.state)) c = atm_next(atm, c, atm_optimal_choice(atm, c));
    bool accepted = atm.kinds[static_cast<size_t>(c.state)] == AtmKind::kAccept;
    CHECK(accepted == bitgame_member(w));
  }
}

TEST_CASE("atm strict alternation is validated") {
  auto atm = bitgame_atm();
  // Break alternation: make an existential state loop to itself.
  atm.rules[{0, '0'}][0].next = 1;
  CHECK(!atm.validate().empty());
}
