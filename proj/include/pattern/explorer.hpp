#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pattern/program.hpp"

namespace pattern {

struct WalkConfig {
  std::int64_t steps = 100'000;
  std::size_t pool_size = 256;
  std::uint64_t seed = 0;
  AxisSet symmetry_axes = AxisSet::all();
  /// Re-checks pool bounds and the eviction rule after every step.
  bool check_invariants = false;

  /// Throws std::invalid_argument.
  void validate() const;
};

struct Discovery {
  std::int64_t step = 0;  // 0 for the initial pool
  std::string key;
  int node_count = 0;
  Program program = Program::leaf(Primitive::blank);
};

struct WalkResult {
  WalkConfig config;
  std::vector<Discovery> discoveries;  // in discovery order
  std::vector<Program> final_pool;
  std::int64_t evictions = 0;

  /// Number of discoveries made at or before `step`.
  std::size_t discovered_by(std::int64_t step) const;
  std::map<int, std::int64_t> node_count_histogram() const;
};

/// Bounded-pool random walk over the DSL that keeps only unseen outputs
/// symmetric about at least one configured axis. When the pool is full the
/// member with the largest node count is evicted, ties going to the last in
/// canonical order.
WalkResult random_walk(const WalkConfig& cfg);

/// One `{step, key, node_count, program}` object per line.
std::string discoveries_jsonl(const WalkResult& r);
nlohmann::json walk_summary_json(const WalkResult& r);

}  // namespace pattern
