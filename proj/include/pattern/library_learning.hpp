#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pattern/program.hpp"
#include "pattern/synthesizer.hpp"

namespace pattern {

struct HelperCandidateScore {
  Program candidate;
  int size = 0;  // expanded node count
  int occ = 0;
  int utility() const { return size * occ; }
};

/// Compression utility of a helper set over a corpus: the sum over helpers of
/// expanded node count times the number of corpus programs containing the
/// helper outside every counted occurrence of a larger helper in the set.
/// Larger helpers claim subtrees first (ties by canonical order).
int compression_utility(const std::vector<Program>& helpers, const std::vector<Program>& corpus,
                        const Library& lib = {});

/// Per-helper breakdown of compression_utility, in claiming order.
std::vector<HelperCandidateScore> score_helpers(const std::vector<Program>& helpers,
                                                const std::vector<Program>& corpus,
                                                const Library& lib = {});

enum class Strategy { rc, gl, pl, oracle_prospective };

std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

struct AbstractionConfig {
  Strategy strategy = Strategy::rc;
  int k = 1;
  double q = 0.3;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when the parameters do not fit the strategy.
  void validate() const;
};

class EmptyTrace : public std::invalid_argument {
 public:
  EmptyTrace() : std::invalid_argument("derivation trace is empty") {}
};

/// Retrospective compression: greedily picks up to k trace elements by
/// marginal CU over `corpus`; stops early on non-positive gain. Elements whose
/// output already has a helper in `lib` are skipped.
std::vector<Program> abstract_rc(const DerivationTrace& trace, const std::vector<Program>& corpus,
                                 int k, const Library& lib = {});

/// Greedy library learning: the final trace element only.
std::vector<Program> abstract_gl(const DerivationTrace& trace);

/// Probabilistic library learning: each element kept with probability q.
std::vector<Program> abstract_pl(const DerivationTrace& trace, double q, std::uint64_t seed);

/// Greedy top-k from `pool` by marginal CU over `corpus`. Ties among equal
/// gains are broken uniformly at random from `seed`. Pool elements whose
/// output matches a helper in `lib` are skipped.
std::vector<Program> greedy_by_utility(const std::vector<Program>& pool,
                                       const std::vector<Program>& corpus, int k,
                                       std::uint64_t seed, const Library& lib = {});

/// Ground-truth subtrees of trials 1..upto_trial ranked greedily by CU over
/// the full corpus.
std::vector<Program> oracle_helpers(const std::vector<Program>& full_corpus, int upto_trial, int k,
                                    std::uint64_t seed = 0);

/// Clairvoyant prospective operator: greedy top-k of the current trace by CU
/// over the full ground-truth corpus.
std::vector<Program> abstract_oracle_prospective(const DerivationTrace& trace,
                                                 const std::vector<Program>& full_corpus, int k,
                                                 std::uint64_t seed, const Library& lib = {});

}  // namespace pattern
