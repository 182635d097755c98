#include "pattern/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "pattern/library_learning.hpp"

namespace pattern {

using Json = nlohmann::json;

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::preview: return "preview";
    case EventKind::commit: return "commit";
    case EventKind::cancel: return "cancel";
    case EventKind::save_helper: return "save_helper";
    case EventKind::delete_helper: return "delete_helper";
    case EventKind::submit: return "submit";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::preview, EventKind::commit, EventKind::cancel, EventKind::save_helper,
                      EventKind::delete_helper, EventKind::submit}) {
    if (event_kind_name(k) == name) return k;
  }
  throw RejectLog("unknown event kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Json operand_to_json(const OperandRef& r) {
  switch (r.kind) {
    case OperandRef::Kind::primitive: return {{"primitive", primitive_name(r.primitive)}};
    case OperandRef::Kind::helper: return {{"helper", r.helper_id}};
    case OperandRef::Kind::step: return {{"step", r.step}};
  }
  return nullptr;
}

OperandRef operand_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 1) throw RejectLog("operand must have exactly one of primitive/helper/step");
  if (j.contains("primitive")) {
    auto p = find_primitive(j["primitive"].get<std::string>());
    if (!p) throw RejectLog("unknown primitive operand " + j["primitive"].get<std::string>());
    return OperandRef::of(*p);
  }
  if (j.contains("helper")) return OperandRef::of_helper(j["helper"].get<std::string>());
  if (j.contains("step")) return OperandRef::of_step(j["step"].get<int>());
  throw RejectLog("operand must have exactly one of primitive/helper/step");
}

const Json& need(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw RejectLog(std::string("missing field '") + key + "'");
  return *it;
}

Grid key_grid(const Json& j) {
  try {
    return Grid::from_key(j.get<std::string>());
  } catch (const std::exception& e) {
    throw RejectLog(std::string("bad grid key: ") + e.what());
  }
}

}  // namespace

Json session_to_json(const SessionLog& log) {
  Json trials = Json::array();
  for (const auto& t : log.trials) {
    Json events = Json::array();
    for (const auto& e : t.events) {
      Json ej = {{"t_ms", e.t_ms}, {"kind", event_kind_name(e.kind)}};
      if (e.step) {
        Json ops = Json::array();
        for (const auto& o : e.step->operands) ops.push_back(operand_to_json(o));
        ej["step"] = {{"op", op_name(e.step->op)}, {"operands", ops}};
      }
      if (e.kind == EventKind::save_helper || e.kind == EventKind::delete_helper) ej["helper_id"] = e.helper_id;
      if (e.kind == EventKind::save_helper) ej["from_step"] = e.from_step;
      if (e.result) ej["result"] = *e.result;
      events.push_back(std::move(ej));
    }
    trials.push_back({{"trial_index", t.trial_index},
                      {"target", t.target.key()},
                      {"events", events},
                      {"submitted", t.submitted.key()},
                      {"correct", t.correct},
                      {"steps_committed", t.steps_committed}});
  }
  return {{"schema_version", kSessionSchemaVersion},
          {"experiment_id", log.experiment_id},
          {"participant_id", log.participant_id},
          {"dsl_version", log.dsl_version},
          {"trials", trials}};
}

SessionLog session_from_json(const Json& j) {
  SessionLog log;
  try {
    if (!j.is_object()) throw RejectLog("session log must be an object");
    auto version = need(j, "schema_version").get<std::string>();
    if (version != kSessionSchemaVersion) throw RejectLog("unsupported schema_version " + version);
    log.experiment_id = need(j, "experiment_id").get<std::string>();
    log.participant_id = need(j, "participant_id").get<std::string>();
    log.dsl_version = need(j, "dsl_version").get<std::string>();
    if (log.dsl_version != kDslVersion) throw RejectLog("unsupported dsl_version " + log.dsl_version);
    for (const auto& tj : need(j, "trials")) {
      TrialLog t;
      t.trial_index = need(tj, "trial_index").get<int>();
      t.target = key_grid(need(tj, "target"));
      t.submitted = key_grid(need(tj, "submitted"));
      t.correct = need(tj, "correct").get<bool>();
      t.steps_committed = need(tj, "steps_committed").get<int>();
      for (const auto& ej : need(tj, "events")) {
        Event e;
        e.t_ms = need(ej, "t_ms").get<std::int64_t>();
        e.kind = parse_event_kind(need(ej, "kind").get<std::string>());
        if (e.kind == EventKind::preview || e.kind == EventKind::commit) {
          const auto& sj = need(ej, "step");
          StepSpec s;
          auto op = find_op(need(sj, "op").get<std::string>());
          if (!op) throw RejectLog("unknown operator " + sj["op"].get<std::string>());
          s.op = *op;
          for (const auto& oj : need(sj, "operands")) s.operands.push_back(operand_from_json(oj));
          if (static_cast<int>(s.operands.size()) != arity(s.op)) {
            throw RejectLog(std::string(op_name(s.op)) + " needs " + std::to_string(arity(s.op)) + " operand(s)");
          }
          e.step = std::move(s);
        }
        if (e.kind == EventKind::save_helper || e.kind == EventKind::delete_helper) {
          e.helper_id = need(ej, "helper_id").get<std::string>();
        }
        if (e.kind == EventKind::save_helper) e.from_step = need(ej, "from_step").get<int>();
        if (e.kind == EventKind::preview || e.kind == EventKind::commit || e.kind == EventKind::save_helper ||
            e.kind == EventKind::submit) {
          e.result = need(ej, "result").get<std::string>();
          if (e.result->size() != static_cast<std::size_t>(kGridCells)) throw RejectLog("bad result key");
        }
        t.events.push_back(std::move(e));
      }
      log.trials.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw RejectLog(std::string("session log: ") + e.what());
  }
  return log;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

struct LiveHelper {
  std::string id;
  Grid output;
  Program program;  // expanded
};

struct Walker {
  ReplayReport report;
  SessionHelpers helpers;
  std::vector<LiveHelper> live;
  std::set<std::string> used_ids;
  std::unordered_map<Grid, std::size_t> created_by_output;

  void flag(int trial, int event, std::string msg) {
    report.pass = false;
    report.discrepancies.push_back({trial, event, std::move(msg)});
  }

  const LiveHelper* find_live(const std::string& id) const {
    for (const auto& h : live) {
      if (h.id == id) return &h;
    }
    return nullptr;
  }

  // Evaluates a step; returns nullopt (after flagging) on a bad reference.
  std::optional<std::pair<Grid, Program>> run_step(const StepSpec& s, const std::vector<std::pair<Grid, Program>>& steps,
                                                   int trial, int event) {
    std::vector<Grid> grids;
    std::vector<Program> programs;
    for (const auto& o : s.operands) {
      switch (o.kind) {
        case OperandRef::Kind::primitive:
          grids.push_back(primitive(o.primitive));
          programs.push_back(Program::leaf(o.primitive));
          break;
        case OperandRef::Kind::helper: {
          const LiveHelper* h = find_live(o.helper_id);
          if (!h) {
            flag(trial, event, "reference to missing helper " + o.helper_id);
            return std::nullopt;
          }
          grids.push_back(h->output);
          programs.push_back(h->program);
          break;
        }
        case OperandRef::Kind::step:
          if (o.step < 0 || o.step >= static_cast<int>(steps.size())) {
            flag(trial, event, "reference to uncommitted step " + std::to_string(o.step));
            return std::nullopt;
          }
          grids.push_back(steps[o.step].first);
          programs.push_back(steps[o.step].second);
          break;
      }
    }
    Grid g = is_binary(s.op) ? apply_binary(s.op, grids[0], grids[1]) : apply_unary(s.op, grids[0]);
    return std::pair{g, Program::apply(s.op, programs)};
  }

  void walk(const SessionLog& log) {
    std::set<int> seen_trials;
    for (const auto& t : log.trials) {
      const int ti = t.trial_index;
      if (!seen_trials.insert(ti).second) flag(ti, -1, "duplicate trial index");
      std::vector<std::pair<Grid, Program>> steps;
      int commits = 0;
      int submits = 0;
      std::optional<Grid> submitted;
      for (std::size_t i = 0; i < t.events.size(); ++i) {
        const Event& e = t.events[i];
        const int ei = static_cast<int>(i);
        if (submits > 0) flag(ti, ei, "event after submit");
        if (i > 0 && e.t_ms < t.events[i - 1].t_ms) flag(ti, ei, "timestamps decrease");
        switch (e.kind) {
          case EventKind::preview:
          case EventKind::commit: {
            auto r = run_step(*e.step, steps, ti, ei);
            if (!r) break;
            if (e.result && *e.result != r->first.key()) {
              flag(ti, ei, std::string(event_kind_name(e.kind)) + " result differs from recomputation");
            }
            if (e.kind == EventKind::commit) {
              steps.push_back(*r);
              ++commits;
            }
            break;
          }
          case EventKind::cancel: break;
          case EventKind::save_helper: {
            if (e.from_step < 0 || e.from_step >= static_cast<int>(steps.size())) {
              flag(ti, ei, "helper saved from uncommitted step " + std::to_string(e.from_step));
              break;
            }
            const auto& [g, prog] = steps[e.from_step];
            if (e.result && *e.result != g.key()) flag(ti, ei, "saved helper result differs from its step");
            const LiveHelper* same = nullptr;
            for (const auto& h : live) {
              if (h.output == g) same = &h;
            }
            if (same) {
              if (same->id != e.helper_id) flag(ti, ei, "duplicate pattern saved under a new id " + e.helper_id);
              break;
            }
            if (used_ids.count(e.helper_id)) {
              flag(ti, ei, "helper id " + e.helper_id + " reused");
              break;
            }
            used_ids.insert(e.helper_id);
            live.push_back({e.helper_id, g, prog});
            if (!created_by_output.count(g)) {
              created_by_output[g] = helpers.created.size();
              helpers.created.push_back({e.helper_id, g, prog, ti});
            }
            break;
          }
          case EventKind::delete_helper: {
            auto it = std::find_if(live.begin(), live.end(), [&](const LiveHelper& h) { return h.id == e.helper_id; });
            if (it == live.end()) {
              flag(ti, ei, "delete of missing helper " + e.helper_id);
            } else {
              live.erase(it);
            }
            break;
          }
          case EventKind::submit: {
            ++submits;
            Grid canvas = steps.empty() ? Grid() : steps.back().first;
            submitted = canvas;
            if (e.result && *e.result != canvas.key()) flag(ti, ei, "submitted grid differs from the canvas");
            break;
          }
        }
      }
      if (submits != 1) flag(ti, -1, "trial must end with exactly one submit");
      if (submitted && !(*submitted == t.submitted)) flag(ti, -1, "trial submitted grid differs from submit event");
      if (t.correct != (t.submitted == t.target)) flag(ti, -1, "correct flag disagrees with exact match");
      if (t.steps_committed != commits) flag(ti, -1, "steps_committed differs from commit count");
      helpers.alive_after_trial.push_back(live.size());
    }
  }
};

}  // namespace

ReplayReport replay(const SessionLog& log) {
  Walker w;
  w.walk(log);
  return w.report;
}

SessionHelpers session_helpers(const SessionLog& log) {
  Walker w;
  w.walk(log);
  return w.helpers;
}

// ---------------------------------------------------------------------------
// Synthetic participant

namespace {

struct StepBuilder {
  std::vector<StepSpec> specs;
  std::vector<Program> programs;  // as written, may reference helpers
  std::unordered_map<Program, int> index;

  OperandRef operand(const Program& p) {
    switch (p.kind()) {
      case Program::Kind::primitive: return OperandRef::of(p.primitive());
      case Program::Kind::helper: return OperandRef::of_helper(p.helper_id());
      default: return OperandRef::of_step(build(p));
    }
  }

  Program program_of(const StepSpec& s) const {
    std::vector<Program> args;
    for (const auto& o : s.operands) {
      switch (o.kind) {
        case OperandRef::Kind::primitive: args.push_back(Program::leaf(o.primitive)); break;
        case OperandRef::Kind::helper: args.push_back(Program::helper(o.helper_id)); break;
        case OperandRef::Kind::step: args.push_back(programs[o.step]); break;
      }
    }
    return Program::apply(s.op, args);
  }

  int build(const Program& p) {
    if (auto it = index.find(p); it != index.end()) return it->second;
    StepSpec s;
    s.op = p.op();
    for (const auto& c : p.children()) s.operands.push_back(operand(c));
    specs.push_back(std::move(s));
    programs.push_back(p);
    int idx = static_cast<int>(specs.size()) - 1;
    index.emplace(p, idx);
    return idx;
  }
};

}  // namespace

SessionLog generate_session(const Curriculum& c, const SyntheticParticipant& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pause(400, 4000);

  SessionLog log;
  log.experiment_id = cfg.experiment_id;
  log.participant_id = cfg.participant_id;

  std::vector<LiveHelper> live;
  int next_id = 1;
  std::int64_t clock = 0;
  std::vector<Program> solved_corpus;

  auto current_library = [&] {
    Library lib;
    for (const auto& h : live) lib.insert(h.program, 0, h.id);
    return lib;
  };

  for (const auto& trial : c.trials) {
    TrialLog tl;
    tl.trial_index = trial.index;
    tl.target = trial.target;
    auto emit = [&](Event e) {
      clock += pause(rng);
      e.t_ms = clock;
      tl.events.push_back(std::move(e));
    };

    Library lib = current_library();
    auto result = solve(trial.target, lib, {cfg.budget, std::nullopt});
    StepBuilder sb;
    if (result.solved) {
      const Program& p = *result.program;
      if (p.is_leaf()) {
        sb.build(Program::binary(Op::add, p, p));
      } else {
        sb.build(p);
      }
    }
    std::size_t commits = sb.specs.size();
    if (commits > 0 && unit(rng) < cfg.error_rate) --commits;

    std::vector<Grid> step_grids;
    for (std::size_t i = 0; i < commits; ++i) {
      const StepSpec& s = sb.specs[i];
      if (unit(rng) < cfg.preview_rate) {
        StepSpec alt = s;
        if (alt.operands.size() == 2) {
          std::swap(alt.operands[0], alt.operands[1]);
          alt.op = kOperators[std::uniform_int_distribution<int>(0, 2)(rng)];
        } else {
          alt.op = kOperators[std::uniform_int_distribution<int>(3, 6)(rng)];
        }
        Event pe;
        pe.kind = EventKind::preview;
        pe.step = alt;
        pe.result = evaluate(sb.program_of(alt), lib).key();
        emit(pe);
        Event ce;
        ce.kind = EventKind::cancel;
        emit(ce);
      }
      Event e;
      e.kind = EventKind::commit;
      e.step = s;
      Grid g = evaluate(sb.programs[i], lib);
      step_grids.push_back(g);
      e.result = g.key();
      emit(e);
    }

    Grid canvas = step_grids.empty() ? Grid() : step_grids.back();
    const bool correct = canvas == trial.target;

    if (correct && !step_grids.empty() && cfg.saves_per_trial > 0) {
      std::vector<Program> expanded_steps;
      for (std::size_t i = 0; i < commits; ++i) expanded_steps.push_back(expand(sb.programs[i], lib));
      solved_corpus.push_back(expanded_steps.back());
      DerivationTrace trace{expanded_steps};
      for (const auto& pick : abstract_rc(trace, solved_corpus, cfg.saves_per_trial, lib)) {
        auto it = std::find(expanded_steps.begin(), expanded_steps.end(), pick);
        if (it == expanded_steps.end()) continue;
        int step = static_cast<int>(it - expanded_steps.begin());
        Grid g = step_grids[step];
        bool duplicate = std::any_of(live.begin(), live.end(), [&](const LiveHelper& h) { return h.output == g; });
        if (duplicate) continue;
        Event se;
        se.kind = EventKind::save_helper;
        se.helper_id = "h" + std::to_string(next_id++);
        se.from_step = step;
        se.result = g.key();
        emit(se);
        live.push_back({se.helper_id, g, pick});
      }
    }
    if (!live.empty() && unit(rng) < cfg.delete_rate) {
      std::size_t victim = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
      Event de;
      de.kind = EventKind::delete_helper;
      de.helper_id = live[victim].id;
      emit(de);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    Event sub;
    sub.kind = EventKind::submit;
    sub.result = canvas.key();
    emit(sub);
    tl.submitted = canvas;
    tl.correct = correct;
    tl.steps_committed = static_cast<int>(commits);
    log.trials.push_back(std::move(tl));
  }
  return log;
}

// ---------------------------------------------------------------------------
// Metrics

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

std::vector<std::string> topk_helpers(const std::vector<SessionLog>& logs, int trial, int k, std::uint64_t seed) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  std::map<std::string, int> freq;
  for (const auto& log : logs) {
    std::set<std::string> mine;
    for (const auto& h : session_helpers(log).created) {
      if (h.trial_index <= trial) mine.insert(h.output.key());
    }
    for (const auto& key : mine) ++freq[key];
  }
  std::vector<std::pair<std::string, int>> ranked(freq.begin(), freq.end());
  std::mt19937_64 rng(seed);
  std::shuffle(ranked.begin(), ranked.end(), rng);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < k; ++i) out.push_back(ranked[i].first);
  return out;
}

double mean_library_size(const std::vector<SessionLog>& logs, int trial) {
  double total = 0.0;
  int n = 0;
  for (const auto& log : logs) {
    auto h = session_helpers(log);
    for (std::size_t i = 0; i < log.trials.size(); ++i) {
      if (log.trials[i].trial_index == trial) {
        total += static_cast<double>(h.alive_after_trial[i]);
        ++n;
      }
    }
  }
  return n == 0 ? 0.0 : total / n;
}

CompressionResult corpus_compression(const std::vector<std::string>& helper_keys, const Curriculum& c,
                                     const std::vector<Program>& fallback) {
  std::unordered_map<std::string, Program> by_key;
  for (const auto& sol : c.solutions()) {
    for (const auto& s : distinct_subtrees(expand(sol))) by_key.emplace(evaluate(s).key(), s);
  }
  for (const auto& f : fallback) {
    Program e = expand(f);
    by_key.emplace(evaluate(e).key(), e);
  }
  CompressionResult out;
  std::vector<Program> helpers;
  std::set<std::string> seen;
  for (const auto& key : helper_keys) {
    if (!seen.insert(key).second) continue;
    auto it = by_key.find(key);
    if (it == by_key.end()) {
      ++out.unresolved;
      continue;
    }
    helpers.push_back(it->second);
  }
  out.utility = compression_utility(helpers, c.solutions());
  return out;
}

std::vector<int> raw_op_counts(const Curriculum& c, std::int64_t budget) {
  std::vector<int> out;
  for (const auto& t : c.trials) {
    SizeReport best = size(t.solution);
    auto r = solve(t.target, {}, {budget, std::nullopt});
    if (r.solved) {
      SizeReport found = size(*r.expanded);
      if (found.node_count < best.node_count ||
          (found.node_count == best.node_count && found.op_count < best.op_count)) {
        best = found;
      }
    }
    out.push_back(best.op_count);
  }
  return out;
}

std::vector<StepsRow> steps_vs_raw(const std::vector<SessionLog>& logs, const Curriculum& c,
                                   const std::vector<int>& raw) {
  std::vector<StepsRow> rows;
  for (std::size_t i = 0; i < c.trials.size(); ++i) {
    StepsRow row;
    row.trial = c.trials[i].index;
    row.raw_op_count = i < raw.size() ? raw[i] : 0;
    double total = 0.0;
    for (const auto& log : logs) {
      for (const auto& t : log.trials) {
        if (t.trial_index == row.trial && t.correct) {
          total += t.steps_committed;
          ++row.correct_count;
        }
      }
    }
    if (row.correct_count > 0) row.mean_steps = total / row.correct_count;
    rows.push_back(row);
  }
  return rows;
}

int topk_size(const MetricsConfig& cfg, const std::vector<SessionLog>& logs, int trial) {
  if (cfg.fixed_k) return *cfg.fixed_k;
  if (!logs.empty()) return round_half_up(mean_library_size(logs, trial));
  return round_half_up(cfg.k_rate * trial);
}

std::vector<Program> model_topk(const RunRecord& run, int trial, int k, const Curriculum& c, std::uint64_t seed) {
  return greedy_by_utility(run.library_after(trial), c.solutions(), k, seed);
}

std::vector<MetricsRow> metrics_table(const Curriculum& c, const std::vector<SessionLog>& logs,
                                      const std::vector<RunRecord>& runs, const MetricsConfig& cfg) {
  const auto solutions = c.solutions();
  const auto raw = raw_op_counts(c, cfg.raw_budget);
  std::vector<MetricsRow> rows;

  std::vector<int> ks;
  std::vector<int> oracle_cu;
  for (const auto& t : c.trials) {
    int k = topk_size(cfg, logs, t.index);
    ks.push_back(k);
    oracle_cu.push_back(compression_utility(oracle_helpers(solutions, t.index, k, cfg.seed), solutions));
  }

  if (!logs.empty()) {
    std::vector<Program> fallback;
    for (const auto& log : logs) {
      for (const auto& h : session_helpers(log).created) fallback.push_back(h.program);
    }
    auto steps = steps_vs_raw(logs, c, raw);
    for (std::size_t i = 0; i < c.trials.size(); ++i) {
      const int ti = c.trials[i].index;
      MetricsRow row;
      row.condition = "human";
      row.trial = ti;
      row.k = ks[i];
      int n = 0;
      int correct = 0;
      for (const auto& log : logs) {
        for (const auto& t : log.trials) {
          if (t.trial_index == ti) {
            ++n;
            correct += t.correct ? 1 : 0;
          }
        }
      }
      if (n > 0) row.accuracy = static_cast<double>(correct) / n;
      row.mean_steps = steps[i].mean_steps;
      row.mean_library_size = mean_library_size(logs, ti);
      row.topk_helpers = topk_helpers(logs, ti, row.k, cfg.seed);
      row.cu_topk = corpus_compression(row.topk_helpers, c, fallback).utility;
      row.cu_oracle_topk = oracle_cu[i];
      row.raw_program_length = raw[i];
      rows.push_back(std::move(row));
    }
  }

  std::map<std::string, int> name_count;
  for (const auto& run : runs) {
    std::string name(model_name(run.spec.model));
    if (name_count[name]++ > 0) name += "#" + std::to_string(name_count[name]);
    for (std::size_t i = 0; i < c.trials.size() && i < run.trials.size(); ++i) {
      const auto& tr = run.trials[i];
      MetricsRow row;
      row.condition = name;
      row.trial = tr.index;
      row.k = ks[i];
      row.accuracy = tr.solved ? 1.0 : 0.0;
      if (tr.solved) row.mean_steps = tr.authored_ops;
      row.mean_library_size = static_cast<double>(tr.library_size);
      auto top = model_topk(run, tr.index, row.k, c, cfg.seed);
      for (const auto& p : top) row.topk_helpers.push_back(evaluate(p).key());
      row.cu_topk = compression_utility(top, solutions);
      row.cu_oracle_topk = oracle_cu[i];
      row.raw_program_length = raw[i];
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "condition,trial,k,accuracy,mean_steps,mean_library_size,topk_helpers,cu_topk,cu_oracle_topk,"
         "raw_program_length\n";
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream s;
    s << std::setprecision(6) << *v;
    return s.str();
  };
  for (const auto& r : rows) {
    std::string keys;
    for (std::size_t i = 0; i < r.topk_helpers.size(); ++i) {
      if (i) keys += ';';
      keys += r.topk_helpers[i];
    }
    std::ostringstream lib;
    lib << std::setprecision(6) << r.mean_library_size;
    out << r.condition << ',' << r.trial << ',' << r.k << ',' << opt(r.accuracy) << ',' << opt(r.mean_steps) << ','
        << lib.str() << ',' << keys << ',' << r.cu_topk << ',' << r.cu_oracle_topk << ',' << r.raw_program_length
        << '\n';
  }
  return out.str();
}

}  // namespace pattern
