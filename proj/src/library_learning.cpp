#include "pattern/library_learning.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

namespace pattern {

namespace {

bool is_strict_prefix(const TreePath& outer, const TreePath& inner) {
  return outer.size() < inner.size() && std::equal(outer.begin(), outer.end(), inner.begin());
}

struct ExpandedHelper {
  Program program;
  int size;
};

std::vector<ExpandedHelper> claiming_order(const std::vector<Program>& helpers, const Library& lib) {
  std::vector<ExpandedHelper> out;
  std::unordered_set<Program> seen;
  for (const auto& h : helpers) {
    Program e = expand(h, lib);
    if (seen.insert(e).second) out.push_back({e, e.authored_size()});
  }
  std::sort(out.begin(), out.end(), [](const ExpandedHelper& a, const ExpandedHelper& b) {
    if (a.size != b.size) return a.size > b.size;
    return a.program.text() < b.program.text();
  });
  return out;
}

}  // namespace

std::vector<HelperCandidateScore> score_helpers(const std::vector<Program>& helpers,
                                                const std::vector<Program>& corpus,
                                                const Library& lib) {
  auto order = claiming_order(helpers, lib);
  std::vector<HelperCandidateScore> scores;
  for (const auto& h : order) scores.push_back({h.program, h.size, 0});
  for (const auto& raw : corpus) {
    Program p = expand(raw, lib);
    std::vector<TreePath> claimed;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto occurrences = authored_occurrences(order[i].program, p);
      bool counted = false;
      for (auto& path : occurrences) {
        bool inside = std::any_of(claimed.begin(), claimed.end(),
                                  [&](const TreePath& c) { return is_strict_prefix(c, path); });
        if (inside) continue;
        counted = true;
        claimed.push_back(std::move(path));
      }
      if (counted) ++scores[i].occ;
    }
  }
  return scores;
}

int compression_utility(const std::vector<Program>& helpers, const std::vector<Program>& corpus,
                        const Library& lib) {
  int total = 0;
  for (const auto& s : score_helpers(helpers, corpus, lib)) total += s.utility();
  return total;
}

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::rc: return "rc";
    case Strategy::gl: return "gl";
    case Strategy::pl: return "pl";
    case Strategy::oracle_prospective: return "oracle";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::rc, Strategy::gl, Strategy::pl, Strategy::oracle_prospective}) {
    if (strategy_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown abstraction strategy: " + std::string(name));
}

void AbstractionConfig::validate() const {
  if ((strategy == Strategy::rc || strategy == Strategy::oracle_prospective) && k < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (strategy == Strategy::pl && !(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("q must lie strictly between 0 and 1");
  }
}

namespace {

struct Candidates {
  std::vector<Program> programs;
  std::vector<Grid> outputs;
};

// Distinct trace elements whose output is not already a helper.
Candidates fresh_candidates(const std::vector<Program>& pool, const Library& lib) {
  Candidates out;
  std::unordered_set<Program> seen;
  for (const auto& p : pool) {
    Program e = expand(p, lib);
    if (!seen.insert(e).second) continue;
    Grid g = evaluate(e);
    if (lib.find_by_output(g)) continue;
    out.programs.push_back(e);
    out.outputs.push_back(g);
  }
  return out;
}

// Picking a candidate retires every other candidate with the same output,
// since the library would store it only once.
template <typename PickTie>
std::vector<Program> greedy(const Candidates& candidates, const std::vector<Program>& corpus, int k,
                            PickTie pick_tie) {
  const auto& programs = candidates.programs;
  std::vector<Program> picked;
  std::vector<bool> used(programs.size(), false);
  int base = 0;
  while (static_cast<int>(picked.size()) < k) {
    int best_gain = 0;
    std::vector<std::size_t> best;
    for (std::size_t i = 0; i < programs.size(); ++i) {
      if (used[i]) continue;
      picked.push_back(programs[i]);
      int gain = compression_utility(picked, corpus) - base;
      picked.pop_back();
      if (gain <= 0) continue;
      if (gain > best_gain) {
        best_gain = gain;
        best.assign(1, i);
      } else if (gain == best_gain) {
        best.push_back(i);
      }
    }
    if (best.empty()) break;
    std::size_t choice = best.size() == 1 ? best.front() : pick_tie(best);
    for (std::size_t i = 0; i < programs.size(); ++i) {
      if (candidates.outputs[i] == candidates.outputs[choice]) used[i] = true;
    }
    picked.push_back(programs[choice]);
    base += best_gain;
  }
  return picked;
}

}  // namespace

std::vector<Program> abstract_rc(const DerivationTrace& trace, const std::vector<Program>& corpus,
                                 int k, const Library& lib) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (trace.empty()) return {};
  std::vector<Program> expanded_corpus;
  for (const auto& p : corpus) expanded_corpus.push_back(expand(p, lib));
  // Deterministic: ties go to the earliest trace element.
  return greedy(fresh_candidates(trace.programs, lib), expanded_corpus, k,
                [](const std::vector<std::size_t>& tied) { return tied.front(); });
}

std::vector<Program> abstract_gl(const DerivationTrace& trace) {
  if (trace.empty()) throw EmptyTrace();
  return {trace.final_program()};
}

std::vector<Program> abstract_pl(const DerivationTrace& trace, double q, std::uint64_t seed) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must lie strictly between 0 and 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(q);
  std::vector<Program> out;
  for (const auto& p : trace.programs) {
    if (keep(rng)) out.push_back(p);
  }
  return out;
}

std::vector<Program> greedy_by_utility(const std::vector<Program>& pool,
                                       const std::vector<Program>& corpus, int k,
                                       std::uint64_t seed, const Library& lib) {
  if (k <= 0) return {};
  std::vector<Program> expanded_corpus;
  for (const auto& p : corpus) expanded_corpus.push_back(expand(p, lib));
  std::mt19937_64 rng(seed);
  return greedy(fresh_candidates(pool, lib), expanded_corpus, k,
                [&](const std::vector<std::size_t>& tied) {
                  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
                  return tied[pick(rng)];
                });
}

std::vector<Program> oracle_helpers(const std::vector<Program>& full_corpus, int upto_trial, int k,
                                    std::uint64_t seed) {
  if (k <= 0) return {};
  if (upto_trial < 1 || upto_trial > static_cast<int>(full_corpus.size())) {
    throw std::invalid_argument("upto_trial out of range");
  }
  std::vector<Program> pool;
  for (int t = 0; t < upto_trial; ++t) {
    for (auto& s : distinct_subtrees(expand(full_corpus[t]))) pool.push_back(std::move(s));
  }
  return greedy_by_utility(pool, full_corpus, k, seed);
}

std::vector<Program> abstract_oracle_prospective(const DerivationTrace& trace,
                                                 const std::vector<Program>& full_corpus, int k,
                                                 std::uint64_t seed, const Library& lib) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  return greedy_by_utility(trace.programs, full_corpus, k, seed, lib);
}

}  // namespace pattern
