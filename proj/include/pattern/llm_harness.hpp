#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pattern/curriculum.hpp"
#include "pattern/model_suite.hpp"
#include "pattern/program.hpp"

namespace pattern::llm {

inline constexpr int kMaxAttempts = 5;

enum class PromptMode { memoryless, with_history };
std::string_view prompt_mode_name(PromptMode m);

// ---------------------------------------------------------------------------
// Constrained source language

enum class Rule {
  syntax,
  forbidden_loop,
  forbidden_comprehension,
  forbidden_import,
  forbidden_literal,
  forbidden_index,
  forbidden_attribute,
  forbidden_parameters,
  redefinition,
  unknown_name,
  wrong_arity,
  missing_reconstructed,
};
std::string_view rule_name(Rule r);

struct Diagnostic {
  Rule rule = Rule::syntax;
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;

  /// `line:col: rule: message`
  std::string render() const;
};

struct Expr {
  enum class Kind { name, call };
  /// What a name resolved to during validation.
  enum class Ref { none, primitive, local, transform, function, carried };
  Kind kind = Kind::name;
  std::string name;
  std::vector<Expr> args;
  int line = 0;
  int column = 0;
  Ref ref = Ref::none;
  int function_index = -1;  // Ref::function
};

struct Binding {
  std::string name;
  Expr value;
};

struct FunctionDef {
  std::string name;
  std::vector<Binding> bindings;
  Expr result;
  std::string text;  // source lines of the definition
  int line = 0;
};

struct ConstrainedSource {
  std::string raw;
  std::vector<FunctionDef> functions;  // the last one is `reconstructed`
};

/// Names callable from model code in addition to primitives and operators.
struct NameScope {
  std::vector<std::string> carried_helpers;
};

struct ParseResult {
  std::optional<ConstrainedSource> source;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return source.has_value(); }
};

/// Parses and validates model output. Markdown fences, `--- Start ---` /
/// `--- End ---` markers and `#` comments are skipped.
ParseResult parse_constrained(std::string_view text, const NameScope& scope = {});

struct LoweredFunction {
  std::string name;
  /// Calls to other functions and carried helpers become helper references
  /// named after the function; local bindings are inlined.
  Program authored;
  Program expanded;
  Grid output;
  std::string text;
};

struct LoweringResult {
  Grid grid;
  Program lowered = Program::leaf(Primitive::blank);  // expanded reconstructed()
  Program authored = Program::leaf(Primitive::blank);
  /// Every function other than `reconstructed`, in definition order.
  std::vector<LoweredFunction> new_helpers;
};

/// Evaluates the validated source over grids and lowers it to DSL programs.
/// `carried` maps helper names to programs over primitives.
LoweringResult lower_and_run(const ConstrainedSource& cs, const Library& carried);

/// Evaluates by walking the source with a name-to-grid environment, without
/// building programs.
Grid evaluate_direct(const ConstrainedSource& cs, const Library& carried);

/// Renders a program as the body of a zero-argument Python function.
std::string render_function(const std::string& name, const Program& p);

// ---------------------------------------------------------------------------
// Prompts

struct CarriedHelper {
  std::string name;
  std::string source;  // full `def name(): ...` text
  Program program;     // expanded
};

struct HistoryEntry {
  Grid target;
  bool built_correctly = false;
};

struct FailureFeedback {
  std::string source;
  std::optional<Grid> produced;
  std::vector<std::string> diagnostics;
};

struct PromptContext {
  PromptMode mode = PromptMode::with_history;
  std::string dsl_version = kDslVersion;
  int trial = 1;
  int total_trials = 1;
  Grid target;
  std::vector<CarriedHelper> carried_helpers;
  std::vector<HistoryEntry> history;  // with_history only
  int attempt_index = 1;
  std::optional<FailureFeedback> last_failure;

  /// Throws std::invalid_argument when ill-formed.
  void validate() const;
};

std::string build_prompt(const PromptContext& ctx);

/// Hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

// ---------------------------------------------------------------------------
// Backends

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendClient {
 public:
  virtual ~BackendClient() = default;
  /// Throws TransportError on failures worth retrying.
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Replays fixed responses in order; the last response repeats once the
/// script runs out. Records every prompt received.
class ScriptedBackend : public BackendClient {
 public:
  explicit ScriptedBackend(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const std::string& prompt) override;
  const std::vector<std::string>& prompts() const { return prompts_; }

 private:
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
};

/// Wraps a callable, for tests that compute responses from the prompt.
class FunctionBackend : public BackendClient {
 public:
  explicit FunctionBackend(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string complete(const std::string& prompt) override { return fn_(prompt); }

 private:
  std::function<std::string(const std::string&)> fn_;
};

struct RemoteConfig {
  /// Base URL of an OpenAI-compatible API, e.g. `https://host/v1`.
  std::string endpoint;
  std::string api_key;
  std::string model;
  std::optional<double> temperature;
  int timeout_seconds = 300;

  /// Reads PBT_LLM_ENDPOINT, PBT_LLM_MODEL and the key from the variable
  /// named by PBT_LLM_API_KEY_VAR (default OPENAI_API_KEY).
  static RemoteConfig from_env();
};

/// Single-message chat completion client.
class RemoteBackend : public BackendClient {
 public:
  explicit RemoteBackend(RemoteConfig cfg);
  std::string complete(const std::string& prompt) override;

 private:
  RemoteConfig cfg_;
  std::string scheme_host_port_;
  std::string path_;
};

// ---------------------------------------------------------------------------
// Trials and runs

struct AttemptRecord {
  int attempt = 0;
  std::string prompt;
  std::string prompt_hash;
  std::string source;
  std::vector<std::string> diagnostics;
  std::optional<Grid> produced;
  bool correct = false;
};

struct TrialTranscript {
  PromptMode mode = PromptMode::with_history;
  int trial = 0;
  std::vector<AttemptRecord> attempts;
  bool solved = false;
  std::optional<LoweringResult> result;  // the correct attempt
  /// Ids of helpers promoted into the carried library.
  std::vector<std::string> new_helpers;
};

nlohmann::json transcript_to_json(const TrialTranscript& t);

/// Helper library carried across trials, with the source shown to the model.
struct CarriedLibrary {
  Library library;  // expanded programs, ids are function names
  std::vector<std::string> sources;  // parallel to library.entries()

  std::vector<CarriedHelper> prompt_helpers() const;
};

struct TrialOptions {
  int transport_retries = 2;
};

class TrialInterrupted : public std::runtime_error {
 public:
  TrialInterrupted(const std::string& what, TrialTranscript partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const TrialTranscript& partial() const { return partial_; }

 private:
  TrialTranscript partial_;
};

/// Runs up to five prompt/parse/evaluate attempts. `ctx.carried_helpers` is
/// filled from `carried`. On success the functions of the correct attempt are
/// promoted into `carried`.
TrialTranscript run_trial(BackendClient& backend, PromptContext ctx, CarriedLibrary& carried,
                          const TrialOptions& opts = {});

struct LlmRun {
  RunRecord record;
  std::vector<TrialTranscript> transcripts;
};

/// Sequential run over the curriculum; `spec.model` must be llm or llm-h.
LlmRun run_llm(const Curriculum& c, const RunSpec& spec, BackendClient& backend,
               const TrialOptions& opts = {});

}  // namespace pattern::llm
