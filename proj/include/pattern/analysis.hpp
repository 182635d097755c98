#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pattern/curriculum.hpp"
#include "pattern/model_suite.hpp"

namespace pattern {

inline constexpr const char* kSessionSchemaVersion = "pbt-session-1";

class RejectLog : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OperandRef {
  enum class Kind { primitive, helper, step };
  Kind kind = Kind::primitive;
  Primitive primitive = Primitive::blank;
  std::string helper_id;
  int step = 0;  // 0-based index of a committed step in the same trial

  static OperandRef of(Primitive p) { return {Kind::primitive, p, {}, 0}; }
  static OperandRef of_helper(std::string id) { return {Kind::helper, Primitive::blank, std::move(id), 0}; }
  static OperandRef of_step(int s) { return {Kind::step, Primitive::blank, {}, s}; }
};

struct StepSpec {
  Op op = Op::add;
  std::vector<OperandRef> operands;
};

enum class EventKind { preview, commit, cancel, save_helper, delete_helper, submit };
std::string_view event_kind_name(EventKind k);
EventKind parse_event_kind(std::string_view name);

struct Event {
  std::int64_t t_ms = 0;
  EventKind kind = EventKind::commit;
  std::optional<StepSpec> step;     // preview, commit
  std::string helper_id;            // save_helper, delete_helper
  int from_step = -1;               // save_helper
  std::optional<std::string> result;  // grid key: preview, commit, save_helper, submit
};

struct TrialLog {
  int trial_index = 0;
  Grid target;
  std::vector<Event> events;
  Grid submitted;
  bool correct = false;
  int steps_committed = 0;
};

struct SessionLog {
  std::string experiment_id;
  std::string participant_id;
  std::string dsl_version = kDslVersion;
  std::vector<TrialLog> trials;
};

nlohmann::json session_to_json(const SessionLog& log);
/// Throws RejectLog on schema violations.
SessionLog session_from_json(const nlohmann::json& j);

struct Discrepancy {
  int trial_index = 0;
  int event_index = -1;  // -1 for trial-level findings
  std::string message;
};

struct ReplayReport {
  bool pass = true;
  std::vector<Discrepancy> discrepancies;
};

/// Re-executes every step of the log and checks recorded results, helper
/// bookkeeping, submission and scoring.
ReplayReport replay(const SessionLog& log);

/// Per-trial helper state reconstructed from a log.
struct HelperCreation {
  std::string id;
  Grid output;
  Program program;  // fully expanded
  int trial_index = 0;
};
struct SessionHelpers {
  std::vector<HelperCreation> created;  // creation order, deduplicated by output
  /// Helpers alive at the end of each trial (index t-1).
  std::vector<std::size_t> alive_after_trial;
};
SessionHelpers session_helpers(const SessionLog& log);

/// Deterministic scripted participant used to exercise the log pipeline
/// without the interactive app.
struct SyntheticParticipant {
  std::string participant_id = "synthetic";
  std::string experiment_id = "synthetic";
  std::uint64_t seed = 0;
  std::int64_t budget = 300'000;
  double error_rate = 0.1;
  double preview_rate = 0.3;
  double delete_rate = 0.05;
  /// Helpers saved per correct trial, chosen by compression utility.
  int saves_per_trial = 1;
};
SessionLog generate_session(const Curriculum& c, const SyntheticParticipant& p);

// ---------------------------------------------------------------------------
// Metrics

/// Half-up rounding used when k is derived from a mean library size.
int round_half_up(double x);

/// Most frequently created helper outputs across participants, up to and
/// including `trial`. Frequencies count each participant once per output.
/// Ties are ordered by a seeded shuffle.
std::vector<std::string> topk_helpers(const std::vector<SessionLog>& logs, int trial, int k,
                                      std::uint64_t seed);
/// Mean number of live helpers after `trial`, over participants.
double mean_library_size(const std::vector<SessionLog>& logs, int trial);

struct CompressionResult {
  int utility = 0;
  int unresolved = 0;
};

/// CU of the helpers (given by output key) against the curriculum's
/// ground-truth solutions. A key maps to the first ground-truth subtree with
/// that output, else to `fallback` programs with that output.
CompressionResult corpus_compression(const std::vector<std::string>& helper_keys, const Curriculum& c,
                                     const std::vector<Program>& fallback = {});

struct StepsRow {
  int trial = 0;
  std::optional<double> mean_steps;  // empty when no trial was built correctly
  int raw_op_count = 0;
  int correct_count = 0;
};

/// Shortest known raw-primitive op count for each trial: the empty-library
/// search result when it succeeds within `budget`, else the ground truth.
std::vector<int> raw_op_counts(const Curriculum& c, std::int64_t budget = kDefaultCandidateBudget);

std::vector<StepsRow> steps_vs_raw(const std::vector<SessionLog>& logs, const Curriculum& c,
                                   const std::vector<int>& raw);

struct MetricsRow {
  std::string condition;
  int trial = 0;
  int k = 0;
  std::optional<double> accuracy;
  std::optional<double> mean_steps;
  double mean_library_size = 0.0;
  std::vector<std::string> topk_helpers;  // grid keys
  int cu_topk = 0;
  int cu_oracle_topk = 0;
  int raw_program_length = 0;
};

struct MetricsConfig {
  std::uint64_t seed = 0;
  /// k at trial t when no logs are given: round_half_up(k_rate * t).
  double k_rate = 1.0;
  /// When set, overrides both the rate and the log-derived k.
  std::optional<int> fixed_k;
  std::int64_t raw_budget = kDefaultCandidateBudget;
};

/// k used at trial t: fixed, else the human mean library size when logs are
/// present, else the configured rate.
int topk_size(const MetricsConfig& cfg, const std::vector<SessionLog>& logs, int trial);

/// Top-k of a model's library after trial t, greedy by CU over the full corpus.
std::vector<Program> model_topk(const RunRecord& run, int trial, int k, const Curriculum& c,
                                std::uint64_t seed);

std::vector<MetricsRow> metrics_table(const Curriculum& c, const std::vector<SessionLog>& logs,
                                      const std::vector<RunRecord>& runs, const MetricsConfig& cfg);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace pattern
