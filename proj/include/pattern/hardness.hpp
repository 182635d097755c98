#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pattern::hardness {

/// Flat-tuple corpus: every program is f(c_1, ..., c_n) over a symbol
/// alphabet, and a helper is a set of positions pinned to a reference tuple.
struct FlatCorpus {
  int arity = 0;
  std::vector<std::string> alphabet;
  std::vector<std::string> reference;
  std::vector<std::vector<std::string>> tuples;

  /// Throws std::invalid_argument if any tuple or the reference has the wrong length.
  void validate() const;
};

class InstanceTooLarge : public std::invalid_argument {
 public:
  explicit InstanceTooLarge(int n)
      : std::invalid_argument("arity " + std::to_string(n) + " exceeds the brute-force limit") {}
};

inline constexpr int kMaxBruteForceArity = 24;

/// Positions are 1-based, sorted ascending.
using PositionSet = std::vector<int>;

int occurrences(const FlatCorpus& fc, const PositionSet& s);
/// |S| * occ(S).
std::int64_t utility(const FlatCorpus& fc, const PositionSet& s);

struct BestHelper {
  PositionSet positions;
  std::int64_t utility = 0;
};

/// Exact maximizer of utility over all position subsets. Ties go to the
/// smaller set, then the lexicographically smaller one.
BestHelper best_single_helper_bruteforce(const FlatCorpus& fc);

struct BipartiteGraph {
  int left = 0;   // n
  int right = 0;  // m
  /// (i, j) with 0 <= i < left, 0 <= j < right.
  std::vector<std::pair<int, int>> edges;

  bool has_edge(int i, int j) const;
};

struct ReducedInstance {
  FlatCorpus corpus;
  std::int64_t threshold = 0;  // omega
  int copies = 0;              // M = n + 1
};

/// Maximum-Edge-Biclique to Best-Single-Helper: one block of M = n + 1 tuples
/// per right vertex v_j; position i holds a_i when (u_i, v_j) is an edge and a
/// fresh blocker b_{i,j,l} otherwise; threshold omega = M * k.
ReducedInstance biclique_reduction(const BipartiteGraph& g, std::int64_t k);

/// Decision answer of Best-Single-Helper on the reduced instance.
bool reduction_decision(const ReducedInstance& inst);

/// The worked three-program example over {A, B, X, Y} with reference (A, A, X).
FlatCorpus worked_example();

}  // namespace pattern::hardness
