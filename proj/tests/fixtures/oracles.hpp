#pragma once

// Reference implementations shared by the unit tests and the acceptance
// binary. They use only public types and avoid the library's own algorithms.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pattern/grid.hpp"
#include "pattern/hardness.hpp"
#include "pattern/program.hpp"

namespace oracle {

using pattern::Grid;
using pattern::Op;
using pattern::Primitive;
using pattern::Program;

inline Grid from_strings(const std::vector<std::string>& rows) {
  Grid g;
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c)
      if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '1') g.set(r, c);
  return g;
}

// Printed primitive arrays, row by row.
inline std::vector<std::pair<Primitive, std::vector<std::string>>> printed_primitives() {
  std::vector<std::string> zeros(10, "0000000000");
  auto lh = zeros;
  lh[5] = "1111111111";
  std::vector<std::string> lv(10, "0000010000");
  std::vector<std::string> diag;
  for (int r = 0; r < 10; ++r) {
    std::string row(10, '0');
    row[static_cast<std::size_t>(r)] = '1';
    diag.push_back(row);
  }
  std::vector<std::string> sq(10, "1000000001");
  sq[0] = sq[9] = "1111111111";
  std::vector<std::string> tri;
  for (int r = 0; r < 10; ++r)
    tri.push_back(std::string(static_cast<std::size_t>(r + 1), '1') + std::string(static_cast<std::size_t>(9 - r), '0'));
  return {{Primitive::blank, zeros}, {Primitive::line_horizontal, lh}, {Primitive::line_vertical, lv},
          {Primitive::diagonal, diag}, {Primitive::square, sq},        {Primitive::triangle, tri}};
}

inline std::vector<std::string> printed_plus() {
  std::vector<std::string> plus(10, "0000010000");
  plus[5] = "1111111111";
  return plus;
}

inline std::vector<std::string> printed_target_1() {
  std::vector<std::string> t(10, "0000110000");
  t[4] = t[5] = "1111111111";
  return t;
}

inline std::vector<std::string> printed_target_2() {
  std::vector<std::string> t(10, "1000110001");
  t[0] = t[4] = t[5] = t[9] = "1111111111";
  return t;
}

inline Grid random_grid(std::mt19937_64& rng) {
  Grid g;
  std::bernoulli_distribution coin(0.5);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) g.set(r, c, coin(rng));
  return g;
}

// Number of algebraic identity violations over `cases` random grid pairs.
inline int algebra_violations(int cases, std::uint64_t seed) {
  using namespace pattern;
  std::mt19937_64 rng(seed);
  int bad = 0;
  for (int i = 0; i < cases; ++i) {
    Grid a = random_grid(rng), b = random_grid(rng);
    bad += !(invert(invert(a)) == a);
    bad += !(reflect_horizontal(reflect_horizontal(a)) == a);
    bad += !(reflect_vertical(reflect_vertical(a)) == a);
    bad += !(reflect_diag(reflect_diag(a)) == a);
    bad += !(add(a, b) == add(b, a));
    bad += !(intersect(a, b) == intersect(b, a));
    bad += !(subtract(a, b) == intersect(a, invert(b)));
    bad += !(invert(add(a, b)) == intersect(invert(a), invert(b)));
    bad += !(invert(intersect(a, b)) == add(invert(a), invert(b)));
  }
  return bad;
}

// Cellwise mirror test on a key string. Axis 0 flips rows, 1 flips columns,
// 2 transposes, 3 transposes across the anti-diagonal.
inline bool mirror_symmetric(const std::string& key, int axis) {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      int r = i, c = j;
      switch (axis) {
        case 0: r = 9 - i; break;
        case 1: c = 9 - j; break;
        case 2: r = j; c = i; break;
        default: r = 9 - j; c = 9 - i; break;
      }
      if (key[static_cast<std::size_t>(i * 10 + j)] != key[static_cast<std::size_t>(r * 10 + c)]) return false;
    }
  return true;
}

inline bool any_symmetry(const std::string& key) {
  for (int a = 0; a < 4; ++a)
    if (mirror_symmetric(key, a)) return true;
  return false;
}

// Every program output by exact node count, built without any pruning.
inline std::vector<std::vector<Grid>> all_outputs_by_size(int max_size) {
  using namespace pattern;
  std::vector<std::vector<Grid>> by(static_cast<std::size_t>(max_size) + 1);
  for (Primitive p : kPrimitives) by[1].push_back(primitive(p));
  for (int s = 2; s <= max_size; ++s) {
    auto& out = by[static_cast<std::size_t>(s)];
    for (Op op : kOperators) {
      if (!is_binary(op)) {
        for (const Grid& g : by[static_cast<std::size_t>(s - 1)]) out.push_back(apply_unary(op, g));
        continue;
      }
      for (int l = 1; l + 1 < s; ++l)
        for (const Grid& a : by[static_cast<std::size_t>(l)])
          for (const Grid& b : by[static_cast<std::size_t>(s - 1 - l)]) out.push_back(apply_binary(op, a, b));
    }
  }
  return by;
}

// Compression utility by preorder intervals: a helper occurrence counts when
// its root is not strictly inside an interval already claimed by a larger
// helper; a program contributes the helper size once if any occurrence counts.
namespace detail {

inline std::string serialize(const Program& p) {
  switch (p.kind()) {
    case Program::Kind::primitive: return "P" + std::to_string(static_cast<int>(p.primitive()));
    case Program::Kind::helper: return "H" + p.helper_id();
    default: break;
  }
  std::string s = "(" + std::to_string(static_cast<int>(p.op()));
  for (const auto& c : p.children()) s += " " + serialize(c);
  return s + ")";
}

struct Flat {
  std::vector<std::string> repr;
  std::vector<int> end;
};

inline int flatten(const Program& p, Flat& f) {
  int me = static_cast<int>(f.repr.size());
  f.repr.push_back(serialize(p));
  f.end.push_back(0);
  int last = me + 1;
  for (const auto& c : p.children()) last = flatten(c, f);
  f.end[static_cast<std::size_t>(me)] = last;
  return last;
}

}  // namespace detail

inline int node_count(const Program& p) {
  int n = 1;
  for (const auto& c : p.children()) n += node_count(c);
  return n;
}

inline int compression_utility(const std::vector<Program>& helpers, const std::vector<Program>& corpus) {
  std::vector<std::pair<int, std::string>> hs;
  std::set<std::string> seen;
  std::map<std::string, std::string> text_of;
  for (const auto& h : helpers) {
    auto rep = detail::serialize(h);
    text_of[rep] = h.text();
    if (seen.insert(rep).second) hs.push_back({node_count(h), rep});
  }
  std::sort(hs.begin(), hs.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return text_of[a.second] < text_of[b.second];
  });
  int total = 0;
  for (const auto& prog : corpus) {
    detail::Flat f;
    detail::flatten(prog, f);
    std::vector<std::pair<int, int>> claimed;
    for (const auto& [sz, rep] : hs) {
      bool counted = false;
      for (int i = 0; i < static_cast<int>(f.repr.size()); ++i) {
        if (f.repr[static_cast<std::size_t>(i)] != rep) continue;
        bool inside = std::any_of(claimed.begin(), claimed.end(), [&](auto iv) { return iv.first < i && i < iv.second; });
        if (inside) continue;
        counted = true;
        claimed.push_back({i, f.end[static_cast<std::size_t>(i)]});
      }
      if (counted) total += sz;
    }
  }
  return total;
}

// Random program over three primitives and four operators with at most
// `budget` nodes.
inline Program random_program(std::mt19937_64& rng, int budget) {
  static const Primitive prims[] = {Primitive::line_horizontal, Primitive::line_vertical, Primitive::square};
  static const Op ops[] = {Op::add, Op::subtract, Op::invert, Op::reflect_vertical};
  std::uniform_int_distribution<int> d(0, 99);
  if (budget < 2 || d(rng) < 25) return Program::leaf(prims[d(rng) % 3]);
  Op op = ops[d(rng) % 4];
  if (pattern::is_binary(op) && budget >= 3) {
    int left = 1 + d(rng) % (budget - 2);
    return Program::binary(op, random_program(rng, left), random_program(rng, budget - 1 - left));
  }
  return Program::unary(op == Op::invert ? Op::invert : Op::reflect_vertical, random_program(rng, budget - 1));
}

struct RandomCorpus {
  std::vector<Program> corpus;
  std::vector<Program> helpers;
};

// Up to 6 programs of at most 15 nodes, helpers mostly drawn from their subtrees.
inline RandomCorpus random_corpus(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 999);
  RandomCorpus rc;
  int n = 1 + d(rng) % 6;
  for (int i = 0; i < n; ++i) rc.corpus.push_back(random_program(rng, 1 + d(rng) % 15));
  int nh = 1 + d(rng) % 4;
  for (int i = 0; i < nh; ++i) {
    if (d(rng) % 4 == 0) {
      rc.helpers.push_back(random_program(rng, 1 + d(rng) % 5));
    } else {
      auto subs = pattern::distinct_subtrees(rc.corpus[static_cast<std::size_t>(d(rng)) % rc.corpus.size()]);
      rc.helpers.push_back(subs[static_cast<std::size_t>(d(rng)) % subs.size()]);
    }
  }
  return rc;
}

// Largest |S| * |J| with S x J inside the edge set.
inline std::int64_t max_edge_biclique(const pattern::hardness::BipartiteGraph& g) {
  std::int64_t best = 0;
  for (unsigned mask = 1; mask < (1u << g.left); ++mask) {
    int s = 0;
    for (int i = 0; i < g.left; ++i) s += (mask >> i) & 1u;
    int j_count = 0;
    for (int j = 0; j < g.right; ++j) {
      bool all = true;
      for (int i = 0; i < g.left && all; ++i)
        if ((mask >> i) & 1u) all = g.has_edge(i, j);
      j_count += all;
    }
    best = std::max<std::int64_t>(best, static_cast<std::int64_t>(s) * j_count);
  }
  return best;
}

inline pattern::hardness::BipartiteGraph random_graph(std::mt19937_64& rng, int max_side) {
  pattern::hardness::BipartiteGraph g;
  g.left = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_side));
  g.right = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_side));
  std::bernoulli_distribution edge(static_cast<double>(rng() % 100) / 100.0);
  for (int i = 0; i < g.left; ++i)
    for (int j = 0; j < g.right; ++j)
      if (edge(rng)) g.edges.emplace_back(i, j);
  return g;
}

}  // namespace oracle
