#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pattern/model_suite.hpp"

using namespace pattern;

namespace {

RunRecord run(const Curriculum& c, Model m, std::uint64_t seed = 1) {
  RunSpec spec;
  spec.model = m;
  spec.seed = seed;
  return run_symbolic(c, spec);
}

void check_record(const RunRecord& r, const Curriculum& c) {
  REQUIRE(r.trials.size() == c.size());
  for (const TrialRecord& t : r.trials) {
    if (!t.solved) {
      CHECK(t.failure != FailureReason::none);
      continue;
    }
    REQUIRE(t.expanded.has_value());
    CHECK(evaluate(*t.expanded) == c.trials[static_cast<std::size_t>(t.index - 1)].target);
    CHECK(t.raw == size(*t.expanded));
    CHECK(t.authored_size <= t.raw.node_count);
  }
  for (std::size_t i = 1; i < r.library.size(); ++i)
    CHECK(r.library[i - 1].created_at_trial <= r.library[i].created_at_trial);
}

}  // namespace

TEST_CASE("first curriculum: compressive learner completes, empty library does not") {
  Curriculum c = build_e1();
  RunRecord rc = run(c, Model::rc);
  RunRecord nolib = run(c, Model::nolib);
  check_record(rc, c);
  check_record(nolib, c);
  CHECK(rc.solved_count() == 14);
  CHECK_FALSE(rc.first_failure().has_value());
  CHECK(nolib.solved_count() < 14);
  CHECK(nolib.library.empty());
  CHECK(rc.library_after(14).size() == rc.library.size());
}

TEST_CASE("second curriculum: greedy learner trails compressive learner") {
  Curriculum c = build_e2();
  RunRecord rc = run(c, Model::rc);
  RunRecord gl = run(c, Model::gl);
  check_record(rc, c);
  check_record(gl, c);
  CHECK(gl.solved_count() < rc.solved_count());
}

TEST_CASE("stochastic learner is reproducible per seed") {
  Curriculum c = build_e1();
  RunRecord a = run(c, Model::pl, 5);
  RunRecord b = run(c, Model::pl, 5);
  REQUIRE(a.library.size() == b.library.size());
  for (std::size_t i = 0; i < a.library.size(); ++i) CHECK(a.library[i].program == b.library[i].program);
}

TEST_CASE("run spec validation") {
  RunSpec s;
  s.model = Model::pl;
  s.q = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {};
  s.k = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  for (Model m : {Model::nolib, Model::rc, Model::gl, Model::pl, Model::oracle, Model::llm, Model::llm_h})
    CHECK(parse_model(model_name(m)) == m);
  CHECK_FALSE(is_symbolic(Model::llm));
}
