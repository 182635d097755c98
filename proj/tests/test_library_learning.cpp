#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "fixtures/oracles.hpp"
#include "pattern/library_learning.hpp"

using namespace pattern;

namespace {

Program P(Primitive p) { return Program::leaf(p); }
Program bin(Op op, Program a, Program b) { return Program::binary(op, std::move(a), std::move(b)); }
Program un(Op op, Program a) { return Program::unary(op, std::move(a)); }
const Program lh = P(Primitive::line_horizontal);
const Program lv = P(Primitive::line_vertical);
const Program sq = P(Primitive::square);

}  // namespace

TEST_CASE("compression utility matches the preorder-interval oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    auto [corpus, helpers] = oracle::random_corpus(rng);
    for (const auto& p : corpus) REQUIRE(oracle::node_count(p) <= 15);
    CAPTURE(trial);
    CHECK(compression_utility(helpers, corpus) == oracle::compression_utility(helpers, corpus));
    auto shuffled = helpers;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(compression_utility(shuffled, corpus) == compression_utility(helpers, corpus));
  }
}

TEST_CASE("larger helpers claim their subtrees first") {
  Program plus = bin(Op::add, lh, lv);
  Program p = un(Op::invert, plus);
  CHECK(compression_utility({plus}, {p}) == 3);
  CHECK(compression_utility({plus, lh}, {p}) == 3);
  CHECK(compression_utility({lh}, {p}) == 1);
  CHECK(compression_utility({}, {p}) == 0);
  CHECK(compression_utility({sq}, {p}) == 0);
  CHECK(compression_utility({plus}, {p, plus, sq}) == 6);
  Program q = bin(Op::add, plus, lh);
  CHECK(compression_utility({plus, lh}, {q}) == 4);  // the outer lh is outside plus
}

TEST_CASE("helper references are expanded through the library") {
  Library lib;
  lib.insert(bin(Op::add, lh, lv), 1, "plus");
  CHECK(compression_utility({Program::helper("plus")}, {un(Op::invert, Program::helper("plus"))}, lib) == 3);
}

TEST_CASE("retrospective compression picks by marginal utility") {
  Program plus = bin(Op::add, lh, lv);
  Program solved = un(Op::invert, plus);
  DerivationTrace trace{distinct_subtrees(solved)};
  std::vector<Program> corpus = {solved, bin(Op::subtract, sq, plus)};
  auto picked = abstract_rc(trace, corpus, 1);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == plus);  // 3 * 2 beats 4 * 1
  auto two = abstract_rc(trace, corpus, 2);
  REQUIRE(two.size() == 2);
  CHECK(compression_utility(two, corpus) == 4 + 3);
  Library lib;
  lib.insert(plus, 1);
  auto skipped = abstract_rc(trace, corpus, 1, lib);
  for (const auto& p : skipped) CHECK_FALSE(p == plus);
  CHECK(abstract_rc(DerivationTrace{}, corpus, 1).empty());
  CHECK_THROWS_AS(abstract_rc(trace, corpus, 0), std::invalid_argument);
}

TEST_CASE("retrospective compression stops on zero gain") {
  DerivationTrace trace{{lh, sq}};
  CHECK(abstract_rc(trace, {lv}, 3).empty());
}

TEST_CASE("greedy library learning keeps the final program") {
  Program plus = bin(Op::add, lh, lv);
  DerivationTrace trace{distinct_subtrees(un(Op::invert, plus))};
  auto gl = abstract_gl(trace);
  REQUIRE(gl.size() == 1);
  CHECK(gl[0] == un(Op::invert, plus));
  CHECK_THROWS_AS(abstract_gl(DerivationTrace{}), EmptyTrace);
}

TEST_CASE("probabilistic learning keeps elements at rate q") {
  DerivationTrace trace{{lh, lv, sq, bin(Op::add, lh, lv)}};
  const double q = 0.3;
  const int runs = 20000;
  std::vector<int> kept(4, 0);
  for (int s = 0; s < runs; ++s) {
    auto out = abstract_pl(trace, q, static_cast<std::uint64_t>(s));
    for (const auto& p : out)
      for (std::size_t i = 0; i < 4; ++i)
        if (p == trace.programs[i]) ++kept[i];
  }
  for (int k : kept) CHECK(std::abs(static_cast<double>(k) / runs - q) < 0.015);
  CHECK(abstract_pl(trace, q, 7) == abstract_pl(trace, q, 7));
  CHECK_THROWS_AS(abstract_pl(trace, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(abstract_pl(trace, 1.0, 1), std::invalid_argument);
}

TEST_CASE("greedy ties are broken uniformly by seed") {
  Program a = bin(Op::add, lh, lv), b = bin(Op::add, lh, sq), c = bin(Op::add, lv, sq);
  std::vector<Program> corpus = {un(Op::invert, a), un(Op::invert, b), un(Op::invert, c)};
  std::map<std::string, int> freq;
  const int runs = 3000;
  for (int s = 0; s < runs; ++s) {
    auto pick = greedy_by_utility({a, b, c}, corpus, 1, static_cast<std::uint64_t>(s));
    REQUIRE(pick.size() == 1);
    ++freq[pick[0].text()];
  }
  REQUIRE(freq.size() == 3);
  for (const auto& [k, v] : freq) CHECK(std::abs(static_cast<double>(v) / runs - 1.0 / 3) < 0.04);
}

TEST_CASE("oracle helpers come from ground-truth subtrees up to the trial") {
  Program plus = bin(Op::add, lh, lv);
  std::vector<Program> corpus = {plus, un(Op::invert, plus), bin(Op::subtract, sq, plus)};
  auto o1 = oracle_helpers(corpus, 1, 1, 0);
  REQUIRE(o1.size() == 1);
  CHECK(o1[0] == plus);
  auto o3 = oracle_helpers(corpus, 3, 5, 0);
  std::set<std::string> allowed;
  for (int t = 0; t < 3; ++t)
    for (const auto& s : distinct_subtrees(corpus[static_cast<std::size_t>(t)])) allowed.insert(s.text());
  for (const auto& h : o3) CHECK(allowed.count(h.text()));
  CHECK(compression_utility(o3, corpus) >= compression_utility(o1, corpus));
  CHECK_THROWS_AS(oracle_helpers(corpus, 4, 1, 0), std::invalid_argument);
  CHECK(oracle_helpers(corpus, 1, 0, 0).empty());
}

TEST_CASE("strategy configuration") {
  CHECK(parse_strategy("rc") == Strategy::rc);
  CHECK(parse_strategy(strategy_name(Strategy::oracle_prospective)) == Strategy::oracle_prospective);
  CHECK_THROWS_AS(parse_strategy("xx"), std::invalid_argument);
  AbstractionConfig cfg;
  cfg.k = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.strategy = Strategy::pl;
  cfg.q = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.q = 0.5;
  CHECK_NOTHROW(cfg.validate());
}
