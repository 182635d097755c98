#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "pattern/grid.hpp"
#include "pattern/program.hpp"

namespace pattern {

inline constexpr std::int64_t kDefaultCandidateBudget = 2'000'000;

struct SynthesisBudget {
  std::int64_t max_candidates = kDefaultCandidateBudget;
  /// Largest program size explored (in the search's size measure).
  std::optional<int> max_size;
};

enum class SizeMeasure {
  /// A helper reference costs one node.
  authored,
  /// A helper reference costs its fully expanded node count.
  expanded,
};

struct SearchOptions {
  SizeMeasure measure = SizeMeasure::authored;
  /// Observational-equivalence pruning: one representative per output.
  bool prune = true;
  /// Only programs that reference this helper count as solutions; the search
  /// keeps separate representatives for programs with and without it.
  std::optional<std::string> required_helper;
  /// When set, helpers outside this list are not used as leaves.
  std::optional<std::vector<std::string>> leaf_helpers;
  /// Keep every retained representative (needed for the all_retained trace).
  bool record_retained = false;
};

enum class FailureReason { none, budget_exhausted, size_limit, space_exhausted, attempts_exhausted };

std::string_view failure_reason_name(FailureReason r);

struct SynthesisResult {
  bool solved = false;
  /// Solution as found (may reference helpers).
  std::optional<Program> program;
  /// Solution with helpers inlined.
  std::optional<Program> expanded;
  /// Size of the solution in the search measure.
  int solution_size = 0;
  std::int64_t candidates_explored = 0;
  std::int64_t classes_retained = 0;
  /// Largest layer that was fully enumerated.
  int layers_completed = 0;
  FailureReason failure = FailureReason::none;
  double wall_time_ms = 0.0;
  /// Retained representatives in discovery order (record_retained only).
  std::vector<Program> retained;
};

SynthesisResult solve(const Grid& target, const Library& lib = {},
                      const SynthesisBudget& budget = {}, const SearchOptions& options = {});

/// Output keys reachable with programs up to `max_size`, plus how many
/// candidates were constructed to get there.
struct ReachableSet {
  std::unordered_set<Grid> outputs;
  std::int64_t candidates_explored = 0;
  std::int64_t programs_retained = 0;
  bool complete = false;
};

ReachableSet reachable(int max_size, const Library& lib = {}, const SearchOptions& options = {},
                       std::int64_t max_candidates = 50'000'000);

/// Lower bound on the number of full binary trees of depth `depth` with
/// leaves drawn from the six primitives and internal nodes from the three
/// binary operators: 6^(2^d) * 3^(2^d - 1).
boost::multiprecision::cpp_int enumerate_counts(int depth);

enum class TraceMode { solution_subtrees, all_retained };

class NoSolution : public std::logic_error {
 public:
  NoSolution() : std::logic_error("synthesis result has no solution") {}
};

struct DerivationTrace {
  std::vector<Program> programs;
  bool empty() const { return programs.empty(); }
  std::size_t size() const { return programs.size(); }
  const Program& final_program() const { return programs.back(); }
};

/// solution_subtrees: distinct subtrees of the expanded solution in post-order.
/// all_retained: every retained representative up to the solution.
DerivationTrace trace_of(const SynthesisResult& result, TraceMode mode = TraceMode::solution_subtrees);

}  // namespace pattern
