#include "pattern/model_suite.hpp"

#include <stdexcept>

namespace pattern {

std::string_view model_name(Model m) {
  switch (m) {
    case Model::nolib: return "nolib";
    case Model::rc: return "rc";
    case Model::gl: return "gl";
    case Model::pl: return "pl";
    case Model::oracle: return "oracle";
    case Model::llm: return "llm";
    case Model::llm_h: return "llm-h";
  }
  return "?";
}

Model parse_model(std::string_view name) {
  for (Model m : {Model::nolib, Model::rc, Model::gl, Model::pl, Model::oracle, Model::llm, Model::llm_h}) {
    if (model_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown model: " + std::string(name));
}

bool is_symbolic(Model m) { return m != Model::llm && m != Model::llm_h; }

void RunSpec::validate() const {
  if (budget.max_candidates <= 0) throw std::invalid_argument("budget must be positive");
  if ((model == Model::rc || model == Model::oracle) && k < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (model == Model::pl && !(q > 0.0 && q < 1.0)) {
    throw std::invalid_argument("q must lie strictly between 0 and 1");
  }
}

int RunRecord::solved_count() const {
  int n = 0;
  for (const auto& t : trials) n += t.solved ? 1 : 0;
  return n;
}

std::optional<int> RunRecord::first_failure() const {
  for (const auto& t : trials) {
    if (!t.solved) return t.index;
  }
  return std::nullopt;
}

std::vector<Program> RunRecord::library_after(int t) const {
  std::vector<Program> out;
  for (const auto& h : library) {
    if (h.created_at_trial <= t) out.push_back(h.program);
  }
  return out;
}

RunRecord run_symbolic(const Curriculum& c, const RunSpec& spec) {
  spec.validate();
  if (!is_symbolic(spec.model)) {
    throw std::invalid_argument("model " + std::string(model_name(spec.model)) + " needs an LLM backend");
  }
  RunRecord record;
  record.curriculum = c.name;
  record.spec = spec;

  const std::vector<Program> ground_truth = c.solutions();
  std::vector<Program> solved_corpus;
  Library lib;
  SearchOptions options;
  options.record_retained = spec.trace_mode == TraceMode::all_retained;

  for (const auto& trial : c.trials) {
    TrialRecord tr;
    tr.index = trial.index;
    auto result = solve(trial.target, lib, spec.budget, options);
    tr.solved = result.solved;
    tr.failure = result.failure;
    tr.candidates_explored = result.candidates_explored;
    tr.classes_retained = result.classes_retained;
    tr.wall_time_ms = result.wall_time_ms;

    if (result.solved) {
      tr.program = result.program;
      tr.expanded = result.expanded;
      tr.authored_size = result.program->authored_size();
      tr.authored_ops = result.program->authored_ops();
      tr.raw = size(*result.expanded);
      DerivationTrace trace = trace_of(result, spec.trace_mode);
      tr.trace = trace.programs;
      solved_corpus.push_back(*result.expanded);

      std::vector<Program> picked;
      // Per-trial streams keep PL and oracle tie-breaks independent of earlier trials.
      const std::uint64_t trial_seed = spec.seed + static_cast<std::uint64_t>(trial.index);
      switch (spec.model) {
        case Model::nolib: break;
        case Model::rc: picked = abstract_rc(trace, solved_corpus, spec.k, lib); break;
        case Model::gl: picked = abstract_gl(trace); break;
        case Model::pl: picked = abstract_pl(trace, spec.q, trial_seed); break;
        case Model::oracle:
          picked = abstract_oracle_prospective(trace, ground_truth, spec.k, trial_seed, lib);
          break;
        default: break;
      }
      for (const auto& p : picked) {
        Program e = expand(p, lib);
        const std::size_t before = lib.size();
        std::string id = lib.insert(e, trial.index);
        if (lib.size() > before) {
          tr.new_helpers.push_back(id);
          record.library.push_back({id, e, lib.at(id).output, trial.index});
        }
      }
    }
    tr.library_size = lib.size();
    record.trials.push_back(std::move(tr));
  }
  return record;
}

}  // namespace pattern
