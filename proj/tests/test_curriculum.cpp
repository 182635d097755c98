#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "pattern/curriculum.hpp"

using namespace pattern;

namespace {

Program P(Primitive p) { return Program::leaf(p); }
const Program lh = P(Primitive::line_horizontal);
const Program lv = P(Primitive::line_vertical);

Grid rows(const std::vector<std::vector<int>>& r) { return Grid::from_rows(r); }

}  // namespace

TEST_CASE("first curriculum reproduces the printed targets") {
  Curriculum c = build_e1();
  REQUIRE(c.size() == 14);
  CHECK(c.trials[0].target == rows({{0, 0, 0, 0, 1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0, 0, 0},
                                    {0, 0, 0, 0, 1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0, 0, 0},
                                    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
                                    {0, 0, 0, 0, 1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0, 0, 0},
                                    {0, 0, 0, 0, 1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 0, 0, 0, 0}}));
  CHECK(c.trials[1].target == rows({{1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {1, 0, 0, 0, 1, 1, 0, 0, 0, 1},
                                    {1, 0, 0, 0, 1, 1, 0, 0, 0, 1}, {1, 0, 0, 0, 1, 1, 0, 0, 0, 1},
                                    {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
                                    {1, 0, 0, 0, 1, 1, 0, 0, 0, 1}, {1, 0, 0, 0, 1, 1, 0, 0, 0, 1},
                                    {1, 0, 0, 0, 1, 1, 0, 0, 0, 1}, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}}));
  CHECK(c.trials[2].target == rows({{0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 1, 1, 1, 0, 0, 1, 1, 1, 0},
                                    {0, 1, 1, 1, 0, 0, 1, 1, 1, 0}, {0, 1, 1, 1, 0, 0, 1, 1, 1, 0},
                                    {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0},
                                    {0, 1, 1, 1, 0, 0, 1, 1, 1, 0}, {0, 1, 1, 1, 0, 0, 1, 1, 1, 0},
                                    {0, 1, 1, 1, 0, 0, 1, 1, 1, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0}}));
  CHECK(evaluate(fat_cross()) == c.trials[0].target);
  std::set<std::string> keys;
  for (const Trial& t : c.trials) {
    CHECK(t.index == static_cast<int>(&t - c.trials.data()) + 1);
    CHECK(evaluate(t.solution) == t.target);
    CHECK_FALSE(t.target.empty());
    keys.insert(t.target.key());
  }
  CHECK(keys.size() == 14);
  CHECK(c.definition("Diagonal_Cross") != nullptr);
}

TEST_CASE("sequential validation of the first curriculum") {
  Curriculum c = build_e1();
  SequentialReport r = validate_sequential(c);
  CHECK(r.status == CheckStatus::pass);
  REQUIRE(r.trials.size() == 14);
  int long_range = 0, sequential = 0;
  for (const auto& t : r.trials) {
    CHECK_MESSAGE(t.status == CheckStatus::pass, t.index, ": ", t.message);
    long_range += t.observed == TrialKind::long_range;
    sequential += t.observed == TrialKind::sequential;
  }
  CHECK(long_range > 0);
  CHECK(sequential > 0);
}

TEST_CASE("a corrupted annotation is reported") {
  Curriculum c = build_e1();
  c.trials[5].target = invert(c.trials[5].target);
  SequentialReport r = validate_sequential(c);
  CHECK(r.status == CheckStatus::fail);
  CHECK(r.trials[5].status == CheckStatus::fail);

  Curriculum d = build_e1();
  for (auto& t : d.trials)
    if (t.meta.kind == TrialKind::sequential) {
      t.meta.kind = TrialKind::long_range;
      break;
    }
  CHECK(validate_sequential(d).status == CheckStatus::fail);
}

TEST_CASE("derivations resolve earlier trials only") {
  Curriculum c = build_e1();
  Program ref = Program::helper(trial_ref(1));
  CHECK(evaluate_derivation(c, 2, ref) == c.trials[0].target);
  CHECK(expand_derivation(c, 2, ref) == c.trials[0].solution);
  CHECK_THROWS_AS(evaluate_derivation(c, 1, ref), UnknownHelper);
  CHECK_THROWS_AS(evaluate_derivation(c, 3, Program::helper("nope")), UnknownHelper);
}

TEST_CASE("operator groups of the second curriculum validate") {
  Curriculum c = build_e2();
  REQUIRE(c.size() == 16);
  for (int g = 1; g <= 4; ++g) {
    OperatorGroup grp = group_of(c, g);
    GroupReport r = validate_group(grp, {}, 2);
    CHECK_MESSAGE(r.status == CheckStatus::pass, "group ", g);
    CHECK(r.problems.empty());
    CHECK(r.pairs.size() == 12);
    for (int s = 0; s < 4; ++s) CHECK(grp.targets[static_cast<std::size_t>(s)] == c.trials[static_cast<std::size_t>(4 * (g - 1) + s)].target);
  }
}

TEST_CASE("group validation is independent of job count") {
  OperatorGroup grp = group_of(build_e2(), 1);
  GroupReport a = validate_group(grp, {}, 1);
  GroupReport b = validate_group(grp, {}, 4);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].from == b.pairs[i].from);
    CHECK(a.pairs[i].to == b.pairs[i].to);
    CHECK(a.pairs[i].status == b.pairs[i].status);
    CHECK(a.pairs[i].candidates == b.pairs[i].candidates);
  }
}

TEST_CASE("generated group slots") {
  Program h = fat_cross();
  OperatorGroup g = generate_group(h, Primitive::diagonal);
  Grid hg = evaluate(h), xg = primitive(Primitive::diagonal);
  CHECK(g.targets[0] == add(hg, xg));
  CHECK(g.targets[1] == subtract(hg, xg));
  CHECK(g.targets[2] == intersect(hg, xg));
  CHECK(g.targets[3] == add(invert(hg), xg));
  for (std::size_t i = 0; i < 4; ++i) CHECK(evaluate(g.prescribed[i]) == g.targets[i]);
  CHECK(g.prescribed[3].authored_size() == h.authored_size() + 3);
}

TEST_CASE("a shortcut between group members fails validation") {
  Program c1 = Program::binary(Op::add, lh, lv);
  Program c2 = Program::binary(Op::intersect, Program::unary(Op::invert, lh), Program::unary(Op::invert, lv));
  Program c3 = Program::binary(Op::subtract, P(Primitive::square), P(Primitive::diagonal));
  Program c4 = Program::binary(Op::add, P(Primitive::triangle), P(Primitive::diagonal));
  GroupReport r = validate_group(make_group({c1, c2, c3, c4}));
  CHECK(r.status == CheckStatus::fail);
  const PairCheck* found = nullptr;
  for (const auto& p : r.pairs)
    if (p.from == 1 && p.to == 2) found = &p;
  REQUIRE(found != nullptr);
  CHECK(found->status == CheckStatus::fail);
  REQUIRE(found->witness.has_value());
  CHECK(found->witness->text() == "invert(@c1)");
  CHECK(found->witness_size == 4);
  CHECK(found->prescribed_size == 5);
}

TEST_CASE("duplicate and blank group targets are problems") {
  Program a = Program::binary(Op::add, lh, lv);
  Program blank = Program::binary(Op::subtract, lh, lh);
  GroupReport r = validate_group(make_group({a, a, blank, P(Primitive::square)}));
  CHECK(r.status == CheckStatus::fail);
  CHECK(r.problems.size() == 2);
}

TEST_CASE("trial kind names roundtrip") {
  for (TrialKind k : {TrialKind::root, TrialKind::sequential, TrialKind::long_range, TrialKind::shared_helper,
                      TrialKind::group})
    CHECK(parse_trial_kind(trial_kind_name(k)) == k);
  CHECK_THROWS(parse_trial_kind("bogus"));
}
