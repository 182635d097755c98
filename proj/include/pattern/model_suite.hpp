#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pattern/curriculum.hpp"
#include "pattern/library_learning.hpp"
#include "pattern/synthesizer.hpp"

namespace pattern {

enum class Model { nolib, rc, gl, pl, oracle, llm, llm_h };

std::string_view model_name(Model m);
Model parse_model(std::string_view name);
bool is_symbolic(Model m);

struct RunSpec {
  Model model = Model::rc;
  SynthesisBudget budget;
  int k = 1;
  double q = 0.3;
  std::uint64_t seed = 0;
  TraceMode trace_mode = TraceMode::solution_subtrees;

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
};

struct HelperRecord {
  std::string id;
  Program program;  // fully expanded
  Grid output;
  int created_at_trial = 0;
};

struct TrialRecord {
  int index = 0;
  bool solved = false;
  FailureReason failure = FailureReason::none;
  std::optional<Program> program;   // as found, may reference helpers
  std::optional<Program> expanded;  // helpers inlined
  /// Node and operator counts of the program as written (the model's steps).
  int authored_size = 0;
  int authored_ops = 0;
  /// Counts over the expanded program.
  SizeReport raw;
  std::int64_t candidates_explored = 0;
  std::int64_t classes_retained = 0;
  double wall_time_ms = 0.0;
  std::vector<Program> trace;
  std::vector<std::string> new_helpers;
  std::size_t library_size = 0;
  int attempts = 0;  // LLM models only
};

struct RunRecord {
  std::string curriculum;
  RunSpec spec;
  std::vector<TrialRecord> trials;
  std::vector<HelperRecord> library;

  int solved_count() const;
  /// 1-based index of the first unsolved trial, if any.
  std::optional<int> first_failure() const;
  /// Helpers that existed after trial t (1-based), in creation order.
  std::vector<Program> library_after(int t) const;
};

/// Solves the curriculum's targets in order, growing the library with the
/// model's abstraction operator after every solved trial.
RunRecord run_symbolic(const Curriculum& c, const RunSpec& spec);

}  // namespace pattern
