#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <unordered_map>

#include "fixtures/oracles.hpp"
#include "pattern/synthesizer.hpp"

using namespace pattern;

namespace {

Program P(Primitive p) { return Program::leaf(p); }
Program bin(Op op, Program a, Program b) { return Program::binary(op, std::move(a), std::move(b)); }
Program un(Op op, Program a) { return Program::unary(op, std::move(a)); }
const Program lh = P(Primitive::line_horizontal);
const Program lv = P(Primitive::line_vertical);

}  // namespace

TEST_CASE("search-space lower bound values") {
  CHECK(enumerate_counts(0) == 6);
  CHECK(enumerate_counts(1) == 108);
  CHECK(enumerate_counts(2) == 6 * 6 * 6 * 6 * 27);
  CHECK(enumerate_counts(4) > 1'000'000);
  boost::multiprecision::cpp_int expect = 1;
  for (int i = 0; i < 16; ++i) expect *= 6;
  for (int i = 0; i < 15; ++i) expect *= 3;
  CHECK(enumerate_counts(4) == expect);
  CHECK_THROWS_AS(enumerate_counts(-1), std::invalid_argument);
}

TEST_CASE("pruning keeps the reachable set at small sizes") {
  auto oracle = oracle::all_outputs_by_size(4);
  std::unordered_set<Grid> expected;
  std::size_t programs = 0;
  for (const auto& layer : oracle) {
    programs += layer.size();
    expected.insert(layer.begin(), layer.end());
  }
  SearchOptions unpruned;
  unpruned.prune = false;
  ReachableSet full = reachable(4, {}, unpruned);
  ReachableSet pruned = reachable(4);
  CHECK(full.complete);
  CHECK(pruned.complete);
  CHECK(full.outputs == expected);
  CHECK(pruned.outputs == expected);
  CHECK(static_cast<std::size_t>(full.candidates_explored) == programs);
  CHECK(pruned.candidates_explored < full.candidates_explored);
  CHECK(pruned.programs_retained == static_cast<std::int64_t>(expected.size()));
}

TEST_CASE("solutions have minimal size") {
  auto oracle = oracle::all_outputs_by_size(5);
  std::unordered_map<Grid, int> min_size;
  for (int s = 1; s <= 5; ++s)
    for (const Grid& g : oracle[static_cast<std::size_t>(s)]) min_size.try_emplace(g, s);
  int checked = 0;
  for (const auto& [g, s] : min_size) {
    if (checked++ % 7) continue;
    SynthesisResult r = solve(g);
    REQUIRE(r.solved);
    CHECK(r.solution_size == s);
    CHECK(r.program->authored_size() == s);
    CHECK(evaluate(*r.program) == g);
  }
}

TEST_CASE("the plus target is solved as one add") {
  SynthesisResult r = solve(add(primitive(Primitive::line_horizontal), primitive(Primitive::line_vertical)));
  REQUIRE(r.solved);
  CHECK(r.solution_size == 3);
  CHECK(r.failure == FailureReason::none);
  DerivationTrace t = trace_of(r);
  CHECK(t.final_program() == *r.expanded);
  CHECK(t.size() == 3);
}

TEST_CASE("helpers shorten authored solutions and are expanded afterwards") {
  Program fat = bin(Op::add, bin(Op::add, lh, un(Op::reflect_horizontal, lh)), bin(Op::add, lv, un(Op::reflect_vertical, lv)));
  Library lib;
  lib.insert(fat, 1, "fat");
  Grid target = invert(evaluate(fat));
  SynthesisResult r = solve(target, lib);
  REQUIRE(r.solved);
  CHECK(r.program->text() == "invert(@fat)");
  CHECK(r.solution_size == 2);
  CHECK(*r.expanded == un(Op::invert, fat));

  SearchOptions expanded;
  expanded.measure = SizeMeasure::expanded;
  SynthesisResult e = solve(target, lib, {}, expanded);
  REQUIRE(e.solved);
  CHECK(e.solution_size <= 10);
}

TEST_CASE("required helper must appear in the solution") {
  Library lib;
  lib.insert(bin(Op::add, lh, lv), 1, "plus");
  SearchOptions opt;
  opt.required_helper = "plus";
  SynthesisResult r = solve(primitive(Primitive::square), lib, {}, opt);
  REQUIRE(r.solved);
  CHECK(r.program->text().find("@plus") != std::string::npos);
  CHECK(evaluate(*r.program, lib) == primitive(Primitive::square));
  opt.required_helper = "missing";
  CHECK_THROWS_AS(solve(primitive(Primitive::square), lib, {}, opt), UnknownHelper);
}

TEST_CASE("failure reasons") {
  Grid hard = Grid::from_key(std::string(50, '1') + std::string(49, '0') + "1");
  SynthesisBudget tiny;
  tiny.max_candidates = 100;
  SynthesisResult r = solve(hard, {}, tiny);
  CHECK_FALSE(r.solved);
  CHECK(r.failure == FailureReason::budget_exhausted);
  CHECK(r.candidates_explored == 100);
  CHECK_THROWS_AS(trace_of(r), NoSolution);

  SynthesisBudget capped;
  capped.max_size = 3;
  SynthesisResult s = solve(hard, {}, capped);
  CHECK(s.failure == FailureReason::size_limit);
  CHECK(s.layers_completed == 3);
  CHECK(failure_reason_name(FailureReason::space_exhausted) == "space_exhausted");
}

TEST_CASE("all_retained traces end at the solution") {
  SearchOptions opt;
  opt.record_retained = true;
  SynthesisResult r = solve(add(primitive(Primitive::diagonal), primitive(Primitive::square)), {}, {}, opt);
  REQUIRE(r.solved);
  DerivationTrace t = trace_of(r, TraceMode::all_retained);
  CHECK(t.final_program() == *r.program);
  CHECK(t.size() > 6);
}
