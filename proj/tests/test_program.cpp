#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pattern/program.hpp"

using namespace pattern;

namespace {
Program P(Primitive p) { return Program::leaf(p); }
Program bin(Op op, Program a, Program b) { return Program::binary(op, std::move(a), std::move(b)); }
Program un(Op op, Program a) { return Program::unary(op, std::move(a)); }
const Program lh = P(Primitive::line_horizontal);
const Program lv = P(Primitive::line_vertical);
}  // namespace

TEST_CASE("sizes, rendering and structural equality") {
  Program plus = bin(Op::add, lh, lv);
  CHECK(plus.text() == "add(line_horizontal,line_vertical)");
  CHECK(plus.authored_size() == 3);
  CHECK(plus.authored_ops() == 1);
  Program fat = bin(Op::add, bin(Op::add, lh, un(Op::reflect_horizontal, lh)), bin(Op::add, lv, un(Op::reflect_vertical, lv)));
  CHECK(fat.authored_size() == 9);
  CHECK(size(fat) == SizeReport{9, 5});
  CHECK(bin(Op::add, lh, lv) == plus);
  CHECK_FALSE(bin(Op::add, lv, lh) == plus);
  CHECK_THROWS_AS(Program::unary(Op::add, lh), ArityMismatch);
  CHECK_THROWS_AS(Program::binary(Op::invert, lh, lv), ArityMismatch);
  CHECK_THROWS_AS(Program::apply(Op::add, {lh}), ArityMismatch);
}

TEST_CASE("canonical order is size then text") {
  CHECK(canonical_less(lh, bin(Op::add, lh, lv)));
  CHECK(canonical_less(P(Primitive::blank), P(Primitive::diagonal)));
  CHECK_FALSE(canonical_less(lh, lh));
}

TEST_CASE("library deduplicates by output and tracks expanded sizes") {
  Library lib;
  std::string a = lib.insert(bin(Op::add, lh, lv), 1);
  CHECK(a == "h1");
  CHECK(lib.insert(bin(Op::add, lv, lh), 2) == "h1");
  CHECK(lib.size() == 1);
  std::string b = lib.insert(un(Op::invert, Program::helper(a)), 2);
  CHECK(b == "h2");
  CHECK(lib.at(b).expanded_size == SizeReport{4, 2});
  CHECK(size(Program::helper(b), lib) == SizeReport{4, 2});
  CHECK(expand(Program::helper(b), lib) == un(Op::invert, bin(Op::add, lh, lv)));
  CHECK(evaluate(Program::helper(b), lib) == invert(add(primitive(Primitive::line_horizontal), primitive(Primitive::line_vertical))));
  CHECK(lib.find_by_output(evaluate(bin(Op::add, lh, lv)))->id == "h1");
  CHECK_THROWS_AS(lib.insert(P(Primitive::square), 3, "h1"), std::invalid_argument);
  CHECK(lib.insert(P(Primitive::square), 3, "frame") == "frame");
  CHECK_THROWS_AS(lib.at("nope"), UnknownHelper);
  CHECK_THROWS_AS(evaluate(Program::helper("nope"), lib), UnknownHelper);
  CHECK(canonical_key(P(Primitive::square)) == primitive(Primitive::square).key());
}

TEST_CASE("occurrences are reported on expanded trees") {
  Library lib;
  Program plus = bin(Op::add, lh, lv);
  lib.insert(plus, 1, "plus");
  Program p = bin(Op::subtract, Program::helper("plus"), un(Op::invert, bin(Op::add, lh, lv)));
  auto occ = subprogram_occurrences(Program::helper("plus"), p, lib);
  REQUIRE(occ.size() == 2);
  CHECK(occ[0] == TreePath{0});
  CHECK(occ[1] == TreePath{1, 0});
  CHECK(authored_occurrences(plus, p).size() == 1);
  CHECK(authored_occurrences(lh, plus) == std::vector<TreePath>{{0}});
}

TEST_CASE("distinct subtrees come out in post-order") {
  Program p = bin(Op::add, un(Op::invert, lh), un(Op::invert, lh));
  auto subs = distinct_subtrees(p);
  REQUIRE(subs.size() == 3);
  CHECK(subs[0] == lh);
  CHECK(subs[1] == un(Op::invert, lh));
  CHECK(subs[2] == p);
}

TEST_CASE("helper cycles are detected") {
  Library lib;
  lib.insert(P(Primitive::square), 1, "a");
  CHECK_NOTHROW(expand(bin(Op::add, Program::helper("a"), lh), lib));
  CHECK_THROWS_AS(expand(Program::helper("missing"), lib), UnknownHelper);
}
