#include "pattern/explorer.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace pattern {

void WalkConfig::validate() const {
  if (steps <= 0) throw std::invalid_argument("steps must be positive");
  if (pool_size < kPrimitives.size()) throw std::invalid_argument("pool_size must hold the six primitives");
  if (symmetry_axes.empty()) throw std::invalid_argument("at least one symmetry axis is required");
}

std::size_t WalkResult::discovered_by(std::int64_t step) const {
  auto it = std::upper_bound(discoveries.begin(), discoveries.end(), step,
                             [](std::int64_t s, const Discovery& d) { return s < d.step; });
  return static_cast<std::size_t>(it - discoveries.begin());
}

std::map<int, std::int64_t> WalkResult::node_count_histogram() const {
  std::map<int, std::int64_t> h;
  for (const auto& d : discoveries) ++h[d.node_count];
  return h;
}

namespace {

bool evicts_before(const Program& a, const Program& b) {
  // true when a should be evicted ahead of b
  if (a.authored_size() != b.authored_size()) return a.authored_size() > b.authored_size();
  return canonical_less(b, a);
}

}  // namespace

WalkResult random_walk(const WalkConfig& cfg) {
  cfg.validate();
  WalkResult out;
  out.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Program> pool;
  std::unordered_set<Grid> seen;

  auto symmetric = [&](const Grid& g) { return symmetry_axes(g).intersects(cfg.symmetry_axes); };

  for (Primitive p : kPrimitives) {
    Program prog = Program::leaf(p);
    pool.push_back(prog);
    const Grid& g = primitive(p);
    if (symmetric(g) && seen.insert(g).second) out.discoveries.push_back({0, g.key(), 1, prog});
  }

  std::uniform_int_distribution<std::size_t> op_dist(0, kOperators.size() - 1);
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    const Program a = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    Op op = kOperators[op_dist(rng)];
    Program cand = a;
    if (is_binary(op)) {
      std::size_t j = std::uniform_int_distribution<std::size_t>(0, pool.size() + kPrimitives.size() - 1)(rng);
      Program b = j < pool.size() ? pool[j] : Program::leaf(kPrimitives[j - pool.size()]);
      cand = Program::binary(op, a, b);
    } else {
      cand = Program::unary(op, a);
    }
    Grid g = evaluate(cand);
    if (seen.count(g) || !symmetric(g)) continue;
    seen.insert(g);
    out.discoveries.push_back({step, g.key(), cand.authored_size(), cand});

    if (pool.size() >= cfg.pool_size) {
      auto it = std::min_element(pool.begin(), pool.end(), evicts_before);
      const Program victim = *it;
      pool.erase(it);
      ++out.evictions;
      if (cfg.check_invariants) {
        for (const Program& p : pool)
          if (evicts_before(p, victim)) throw std::logic_error("eviction skipped a longer program");
      }
    }
    pool.push_back(cand);
    if (cfg.check_invariants && pool.size() > cfg.pool_size) throw std::logic_error("pool exceeded its bound");
  }
  out.final_pool = std::move(pool);
  return out;
}

std::string discoveries_jsonl(const WalkResult& r) {
  std::ostringstream os;
  for (const auto& d : r.discoveries) {
    nlohmann::json j = {{"step", d.step}, {"key", d.key}, {"node_count", d.node_count}, {"program", d.program.text()}};
    os << j.dump() << '\n';
  }
  return os.str();
}

nlohmann::json walk_summary_json(const WalkResult& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [n, count] : r.node_count_histogram()) hist[std::to_string(n)] = count;
  nlohmann::json axes = nlohmann::json::array();
  for (Axis a : kAxes)
    if (r.config.symmetry_axes.contains(a)) axes.push_back(axis_name(a));
  return {{"config",
           {{"steps", r.config.steps}, {"pool_size", r.config.pool_size}, {"seed", r.config.seed}, {"symmetry_axes", axes}}},
          {"total_discovered", r.discoveries.size()},
          {"evictions", r.evictions},
          {"histogram", hist}};
}

}  // namespace pattern
