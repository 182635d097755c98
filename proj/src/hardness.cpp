#include "pattern/hardness.hpp"

#include <algorithm>

namespace pattern::hardness {

void FlatCorpus::validate() const {
  if (arity < 0) throw std::invalid_argument("arity must be non-negative");
  if (static_cast<int>(reference.size()) != arity) {
    throw std::invalid_argument("reference tuple length differs from arity");
  }
  for (std::size_t j = 0; j < tuples.size(); ++j) {
    if (static_cast<int>(tuples[j].size()) != arity) {
      throw std::invalid_argument("tuple " + std::to_string(j) + " length differs from arity");
    }
  }
}

int occurrences(const FlatCorpus& fc, const PositionSet& s) {
  int occ = 0;
  for (const auto& t : fc.tuples) {
    bool match = std::all_of(s.begin(), s.end(), [&](int pos) {
      return t.at(pos - 1) == fc.reference.at(pos - 1);
    });
    if (match) ++occ;
  }
  return occ;
}

std::int64_t utility(const FlatCorpus& fc, const PositionSet& s) {
  return static_cast<std::int64_t>(s.size()) * occurrences(fc, s);
}

BestHelper best_single_helper_bruteforce(const FlatCorpus& fc) {
  fc.validate();
  const int n = fc.arity;
  if (n > kMaxBruteForceArity) throw InstanceTooLarge(n);

  // Per tuple, the bit mask of positions agreeing with the reference; a
  // tuple matches S iff S is a subset of its mask.
  std::vector<std::uint32_t> agree;
  agree.reserve(fc.tuples.size());
  for (const auto& t : fc.tuples) {
    std::uint32_t m = 0;
    for (int i = 0; i < n; ++i) {
      if (t[i] == fc.reference[i]) m |= 1u << i;
    }
    agree.push_back(m);
  }

  auto positions_of = [n](std::uint32_t mask) {
    PositionSet s;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(i + 1);
    }
    return s;
  };

  BestHelper best{{}, 0};
  const std::uint32_t limit = n == 0 ? 1u : (1u << n);
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    std::int64_t occ = 0;
    for (auto a : agree) {
      if ((mask & a) == mask) ++occ;
    }
    std::int64_t u = static_cast<std::int64_t>(__builtin_popcount(mask)) * occ;
    if (u < best.utility) continue;
    PositionSet s = positions_of(mask);
    if (u > best.utility || s.size() < best.positions.size() ||
        (s.size() == best.positions.size() && s < best.positions)) {
      best = {std::move(s), u};
    }
  }
  return best;
}

bool BipartiteGraph::has_edge(int i, int j) const {
  return std::find(edges.begin(), edges.end(), std::pair{i, j}) != edges.end();
}

ReducedInstance biclique_reduction(const BipartiteGraph& g, std::int64_t k) {
  const int n = g.left;
  const int m = g.right;
  if (n < 1 || m < 1) throw std::invalid_argument("graph sides must be nonempty");
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  for (const auto& [i, j] : g.edges)
    if (i < 0 || i >= n || j < 0 || j >= m)
      throw std::invalid_argument("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
  const int copies = n + 1;
  ReducedInstance out;
  out.copies = copies;
  out.threshold = static_cast<std::int64_t>(copies) * k;
  FlatCorpus& fc = out.corpus;
  fc.arity = n;
  for (int i = 1; i <= n; ++i) {
    fc.reference.push_back("a_" + std::to_string(i));
    fc.alphabet.push_back(fc.reference.back());
  }
  for (int j = 0; j < m; ++j) {
    for (int l = 1; l <= copies; ++l) {
      std::vector<std::string> tuple;
      for (int i = 0; i < n; ++i) {
        if (g.has_edge(i, j)) {
          tuple.push_back(fc.reference[i]);
        } else {
          tuple.push_back("b_" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                          std::to_string(l));
          fc.alphabet.push_back(tuple.back());
        }
      }
      fc.tuples.push_back(std::move(tuple));
    }
  }
  return out;
}

bool reduction_decision(const ReducedInstance& inst) {
  return best_single_helper_bruteforce(inst.corpus).utility >= inst.threshold;
}

FlatCorpus worked_example() {
  FlatCorpus fc;
  fc.arity = 3;
  fc.alphabet = {"A", "B", "X", "Y"};
  fc.reference = {"A", "A", "X"};
  fc.tuples = {{"A", "A", "X"}, {"A", "A", "Y"}, {"A", "B", "X"}};
  return fc;
}

}  // namespace pattern::hardness
