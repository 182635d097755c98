#include "pattern/synthesizer.hpp"

#include <chrono>
#include <array>
#include <functional>
#include <limits>

namespace pattern {

std::string_view failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::budget_exhausted: return "budget_exhausted";
    case FailureReason::size_limit: return "size_limit";
    case FailureReason::space_exhausted: return "space_exhausted";
    case FailureReason::attempts_exhausted: return "attempts_exhausted";
  }
  return "?";
}

namespace {

struct Leaf {
  Program program;
  Grid grid;
  int weight = 1;
  bool required = false;
};

struct Entry {
  Grid grid;
  int size = 0;
  int leaf = -1;  // index into leaves when >= 0
  Op op = Op::add;
  int left = -1;
  int right = -1;
  bool required = false;
};

/// Layered bottom-up enumerator. Layer s holds retained programs of size s;
/// layer s is built from leaves of weight s, then for every operator in
/// order, from retained programs of smaller layers.
class Enumerator {
 public:
  // Returning true from the visitor stops the enumeration.
  using Visitor = std::function<bool(int entry)>;

  Enumerator(const Library& lib, const SearchOptions& options) : lib_(lib), options_(options) {
    for (Primitive p : kPrimitives) leaves_.push_back({Program::leaf(p), primitive(p), 1, false});
    for (const auto& e : lib.entries()) {
      bool is_required = options.required_helper && *options.required_helper == e.id;
      if (options.leaf_helpers && !is_required) {
        const auto& allowed = *options.leaf_helpers;
        if (std::find(allowed.begin(), allowed.end(), e.id) == allowed.end()) continue;
      }
      int w = options.measure == SizeMeasure::expanded ? e.expanded_size.node_count : 1;
      leaves_.push_back({Program::helper(e.id), e.output, w, is_required});
    }
    if (options.required_helper && !lib.contains(*options.required_helper)) {
      throw UnknownHelper(*options.required_helper);
    }
    for (const auto& l : leaves_) {
      max_leaf_weight_ = std::max(max_leaf_weight_, l.weight);
      if (l.required) required_weight_ = l.weight;
    }
  }

  FailureReason run(std::int64_t max_candidates, std::optional<int> max_size, const Visitor& visit) {
    max_candidates_ = max_candidates;
    // A solution must contain the required helper, so helper-free parts
    // larger than this can never fit under the size limit.
    if (max_size && required_weight_ > 0) free_cap_ = *max_size - required_weight_ - 1;
    for (int s = 1;; ++s) {
      if (max_size && s > *max_size) return FailureReason::size_limit;
      if (s > 2 * max_nonempty_ + 1 && s > max_leaf_weight_) return FailureReason::space_exhausted;
      layers_.resize(static_cast<std::size_t>(s) + 1);
      auto r = build_layer(s, visit);
      if (r) return *r;
      if (!layers_[s][0].empty() || !layers_[s][1].empty()) max_nonempty_ = s;
      layers_completed_ = s;
    }
  }

  Program program_of(int idx) const {
    const Entry& e = entries_[idx];
    if (e.leaf >= 0) return leaves_[e.leaf].program;
    if (e.right < 0) return Program::unary(e.op, program_of(e.left));
    return Program::binary(e.op, program_of(e.left), program_of(e.right));
  }

  const Entry& entry(int idx) const { return entries_[idx]; }
  std::int64_t candidates() const { return candidates_; }
  std::int64_t retained() const { return static_cast<std::int64_t>(entries_.size()); }
  int layers_completed() const { return layers_completed_; }
  const std::unordered_set<Grid>& outputs() const { return outputs_; }

 private:
  static constexpr bool kStop = true;

  // Returns a failure reason to stop with, or nullopt to continue; sets
  // stopped_ when the visitor asked to stop.
  std::optional<FailureReason> offer(const Grid& g, int size, int leaf, Op op, int left, int right,
                                     bool required, const Visitor& visit) {
    if (candidates_ >= max_candidates_) return FailureReason::budget_exhausted;
    ++candidates_;
    outputs_.insert(g);
    if (options_.prune) {
      auto& seen = seen_[required ? 1 : 0];
      if (!seen.insert(g).second) return std::nullopt;
    }
    int idx = static_cast<int>(entries_.size());
    entries_.push_back({g, size, leaf, op, left, right, required});
    layers_[size][required ? 1 : 0].push_back(idx);
    if (visit && visit(idx)) {
      stopped_ = true;
      return FailureReason::none;
    }
    return std::nullopt;
  }

  std::optional<FailureReason> build_layer(int s, const Visitor& visit) {
    for (std::size_t i = 0; i < leaves_.size(); ++i) {
      const Leaf& l = leaves_[i];
      if (l.weight != s) continue;
      if (auto r = offer(l.grid, s, static_cast<int>(i), Op::add, -1, -1, l.required, visit)) return r;
    }
    const bool free_allowed = s <= free_cap_;
    for (Op op : kOperators) {
      if (is_binary(op)) {
        for (int i = 1; i <= s - 2; ++i) {
          int j = s - 1 - i;
          for (int ra = 0; ra < 2; ++ra) {
            for (int rb = 0; rb < 2; ++rb) {
              const bool required = ra || rb;
              if (!required && !free_allowed) continue;
              // Index loops: offer() may grow layers_[s] but never layers i, j < s.
              const auto& left_layer = layers_[i][ra];
              const auto& right_layer = layers_[j][rb];
              for (int a : left_layer) {
                const Grid ga = entries_[a].grid;
                for (int b : right_layer) {
                  Grid g = apply_binary(op, ga, entries_[b].grid);
                  if (auto r = offer(g, s, -1, op, a, b, required, visit)) return r;
                }
              }
            }
          }
        }
      } else if (s >= 2) {
        for (int r = 0; r < 2; ++r) {
          if (!r && !free_allowed) continue;
          for (int a : layers_[s - 1][r]) {
            Grid g = apply_unary(op, entries_[a].grid);
            if (auto res = offer(g, s, -1, op, a, -1, r == 1, visit)) return res;
          }
        }
      }
    }
    return std::nullopt;
  }

  const Library& lib_;
  SearchOptions options_;
  std::vector<Leaf> leaves_;
  std::vector<Entry> entries_;
  std::vector<std::array<std::vector<int>, 2>> layers_;
  std::unordered_set<Grid> seen_[2];
  std::unordered_set<Grid> outputs_;
  std::int64_t candidates_ = 0;
  std::int64_t max_candidates_ = 0;
  int max_nonempty_ = 0;
  int max_leaf_weight_ = 1;
  int required_weight_ = 0;
  int free_cap_ = std::numeric_limits<int>::max();
  int layers_completed_ = 0;

 public:
  bool stopped_ = false;
};

}  // namespace

SynthesisResult solve(const Grid& target, const Library& lib, const SynthesisBudget& budget,
                      const SearchOptions& options) {
  if (budget.max_candidates <= 0) throw std::invalid_argument("max_candidates must be positive");
  auto start = std::chrono::steady_clock::now();
  Enumerator en(lib, options);
  const bool need_required = options.required_helper.has_value();
  int hit = -1;
  SynthesisResult result;
  auto reason = en.run(budget.max_candidates, budget.max_size, [&](int idx) {
    const auto& e = en.entry(idx);
    if (options.record_retained) result.retained.push_back(en.program_of(idx));
    if (e.grid == target && (!need_required || e.required)) {
      hit = idx;
      return true;
    }
    return false;
  });
  result.candidates_explored = en.candidates();
  result.classes_retained = en.retained();
  result.layers_completed = en.layers_completed();
  if (hit >= 0) {
    result.solved = true;
    result.program = en.program_of(hit);
    result.expanded = expand(*result.program, lib);
    result.solution_size = en.entry(hit).size;
  } else {
    result.failure = reason;
  }
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

ReachableSet reachable(int max_size, const Library& lib, const SearchOptions& options,
                       std::int64_t max_candidates) {
  Enumerator en(lib, options);
  auto reason = en.run(max_candidates, max_size, {});
  ReachableSet out;
  out.outputs = en.outputs();
  out.candidates_explored = en.candidates();
  out.programs_retained = en.retained();
  out.complete = reason == FailureReason::size_limit || reason == FailureReason::space_exhausted;
  return out;
}

boost::multiprecision::cpp_int enumerate_counts(int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::pow;
  cpp_int leaves = pow(cpp_int(2), depth);
  unsigned n = leaves.convert_to<unsigned>();
  return pow(cpp_int(6), n) * pow(cpp_int(3), n - 1);
}

DerivationTrace trace_of(const SynthesisResult& result, TraceMode mode) {
  if (!result.solved) throw NoSolution();
  DerivationTrace trace;
  if (mode == TraceMode::solution_subtrees) {
    trace.programs = distinct_subtrees(*result.expanded);
  } else {
    trace.programs = result.retained;
    if (trace.programs.empty() || !(trace.programs.back() == *result.program)) {
      trace.programs.push_back(*result.program);
    }
  }
  return trace;
}

}  // namespace pattern
