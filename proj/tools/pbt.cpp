#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "pattern/analysis.hpp"
#include "pattern/curriculum.hpp"
#include "pattern/explorer.hpp"
#include "pattern/hardness.hpp"
#include "pattern/io.hpp"
#include "pattern/llm_harness.hpp"
#include "pattern/model_suite.hpp"

using namespace pattern;
namespace fs = std::filesystem;

namespace {

constexpr const char* kTool = "pbt";

// Reads JSON config files. Flat keys apply to the selected subcommand, an
// object under a subcommand name applies to that subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* app) : app_(app) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    Json j = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || opt->get_configurable() == false) continue;
      auto res = opt->results();
      if (res.empty() && default_also) res = {opt->get_default_str()};
      if (res.empty()) continue;
      j[opt->get_lnames().front()] = res.size() == 1 ? Json(res.front()) : Json(res);
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<std::string> chain;
    for (const CLI::App* cur = app_; cur != nullptr;) {
      auto subs = cur->get_subcommands();
      if (subs.empty()) break;
      cur = subs.front();
      chain.push_back(cur->get_name());
    }
    std::vector<CLI::ConfigItem> items;
    collect(j, chain, 0, items);
    return items;
  }

 private:
  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  void collect(const Json& j, const std::vector<std::string>& chain, std::size_t depth,
               std::vector<CLI::ConfigItem>& items) const {
    std::vector<std::string> parents(chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(depth));
    // The first value seen for an option wins, so nested sections go first.
    for (const auto& [key, value] : j.items())
      if (value.is_object() && depth < chain.size() && key == chain[depth]) collect(value, chain, depth + 1, items);
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) continue;
      CLI::ConfigItem item;
      item.parents = depth == 0 && !chain.empty() ? chain : parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  const CLI::App* app_;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Curriculum load_curriculum(const std::string& ref) {
  if (ref == "builtin:e1") return build_e1();
  if (ref == "builtin:e2") return build_e2();
  return curriculum_from_json(read_json_file(ref));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Json header(const std::string& command, Json config) {
  return {{"tool", kTool}, {"command", command}, {"dsl_version", kDslVersion}, {"config", std::move(config)}};
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string model;
  std::string curriculum;
  std::int64_t budget = kDefaultCandidateBudget;
  int max_size = 0;
  int k = 1;
  double q = 0.3;
  std::vector<std::uint64_t> seeds;
  std::string trace_mode = "solution_subtrees";
  std::string out;
  std::string transcripts;
  int retries = 2;
  int jobs = 1;
};

void setup_run(CLI::App& app, RunArgs& a) {
  auto* cmd = app.add_subcommand("run", "Run a model over a curriculum");
  cmd->add_option("--model", a.model, "nolib | rc | gl | pl | oracle | llm | llm-h")->required();
  cmd->add_option("--curriculum", a.curriculum, "Curriculum JSON path, or builtin:e1 / builtin:e2")->required();
  cmd->add_option("--budget", a.budget, "Candidate budget per trial")->check(CLI::PositiveNumber);
  cmd->add_option("--max-size", a.max_size, "Size cap per trial (0 = none)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--k", a.k, "Helpers added per trial (rc, oracle)");
  cmd->add_option("--q", a.q, "Retention probability (pl)");
  cmd->add_option("--seed", a.seeds, "Seed; repeat for several runs");
  cmd->add_option("--trace-mode", a.trace_mode)->check(CLI::IsMember({"solution_subtrees", "all_retained"}));
  cmd->add_option("--out", a.out, "Run-record JSON path (- for stdout)")->required();
  cmd->add_option("--transcripts", a.transcripts, "LLM transcript JSONL path");
  cmd->add_option("--retries", a.retries, "LLM transport retries")->check(CLI::NonNegativeNumber);
  cmd->add_option("--jobs", a.jobs, "Parallel runs across seeds")->check(CLI::PositiveNumber);
  cmd->callback([&a] {
    Model m = parse_model(a.model);
    if (a.seeds.empty()) {
      if (m == Model::pl || m == Model::oracle) throw UsageError("--seed is required for model " + a.model);
      a.seeds = {0};
    }
    Curriculum c = load_curriculum(a.curriculum);
    std::vector<RunSpec> specs;
    for (std::uint64_t s : a.seeds) {
      RunSpec spec;
      spec.model = m;
      spec.budget.max_candidates = a.budget;
      if (a.max_size > 0) spec.budget.max_size = a.max_size;
      spec.k = a.k;
      spec.q = a.q;
      spec.seed = s;
      spec.trace_mode = a.trace_mode == "all_retained" ? TraceMode::all_retained : TraceMode::solution_subtrees;
      spec.validate();
      specs.push_back(spec);
    }
    std::vector<Json> runs(specs.size());
    Json transcripts = Json::array();
    if (is_symbolic(m)) {
      parallel_for(specs.size(), a.jobs, [&](std::size_t i) { runs[i] = run_record_to_json(run_symbolic(c, specs[i])); });
    } else {
      llm::RemoteConfig rc = llm::RemoteConfig::from_env();
      if (rc.endpoint.empty() || rc.model.empty()) throw UsageError("PBT_LLM_ENDPOINT and PBT_LLM_MODEL must be set");
      llm::TrialOptions opts;
      opts.transport_retries = a.retries;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        llm::RemoteBackend backend(rc);
        try {
          llm::LlmRun r = llm::run_llm(c, specs[i], backend, opts);
          runs[i] = run_record_to_json(r.record);
          for (const auto& t : r.transcripts) transcripts.push_back(llm::transcript_to_json(t));
        } catch (const llm::TrialInterrupted& e) {
          transcripts.push_back(llm::transcript_to_json(e.partial()));
          if (!a.transcripts.empty()) {
            std::string lines;
            for (const auto& t : transcripts) lines += t.dump() + "\n";
            write_text(a.transcripts, lines);
          }
          throw;
        }
      }
    }
    Json config = {{"model", a.model},   {"curriculum", a.curriculum}, {"budget", a.budget},
                   {"max_size", a.max_size}, {"k", a.k},               {"q", a.q},
                   {"seeds", a.seeds},   {"trace_mode", a.trace_mode}};
    if (!is_symbolic(m)) config["llm_model"] = llm::RemoteConfig::from_env().model;
    Json out = header("run", config);
    out["runs"] = runs;
    write_json(a.out, out);
    if (!a.transcripts.empty()) {
      std::string lines;
      for (const auto& t : transcripts) lines += t.dump() + "\n";
      write_text(a.transcripts, lines);
    }
    for (const auto& r : runs) {
      RunRecord rec = run_record_from_json(r);
      std::cerr << model_name(rec.spec.model) << " seed " << rec.spec.seed << ": solved " << rec.solved_count() << "/"
                << rec.trials.size() << "\n";
    }
  });
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string target;
  std::string target_program;
  std::string library;
  std::int64_t budget = kDefaultCandidateBudget;
  int max_size = 0;
  std::string measure = "authored";
  bool no_prune = false;
  std::string require;
  std::string out = "-";
};

void setup_synth(CLI::App& app, SynthArgs& a) {
  auto* cmd = app.add_subcommand("synth", "Search for the smallest program producing one target");
  auto* t = cmd->add_option("--target", a.target, "100-character grid key");
  auto* tp = cmd->add_option("--target-program", a.target_program, "Program whose output is the target");
  t->excludes(tp);
  cmd->add_option("--library", a.library, "Library JSON path");
  cmd->add_option("--budget", a.budget)->check(CLI::PositiveNumber);
  cmd->add_option("--max-size", a.max_size)->check(CLI::NonNegativeNumber);
  cmd->add_option("--measure", a.measure)->check(CLI::IsMember({"authored", "expanded"}));
  cmd->add_flag("--no-prune", a.no_prune, "Disable observational-equivalence pruning");
  cmd->add_option("--require", a.require, "Helper id that must appear in the solution");
  cmd->add_option("--out", a.out);
  cmd->callback([&a] {
    if (a.target.empty() == a.target_program.empty()) throw UsageError("give exactly one of --target, --target-program");
    Library lib = a.library.empty() ? Library{} : library_from_json(read_json_file(a.library));
    Grid target = a.target.empty() ? evaluate(parse_program(a.target_program), lib) : Grid::from_key(a.target);
    SynthesisBudget budget;
    budget.max_candidates = a.budget;
    if (a.max_size > 0) budget.max_size = a.max_size;
    SearchOptions opt;
    opt.measure = a.measure == "expanded" ? SizeMeasure::expanded : SizeMeasure::authored;
    opt.prune = !a.no_prune;
    if (!a.require.empty()) opt.required_helper = a.require;
    SynthesisResult r = solve(target, lib, budget, opt);
    Json out = header("synth", {{"target", target.key()},
                                {"library", a.library},
                                {"budget", a.budget},
                                {"max_size", a.max_size},
                                {"measure", a.measure},
                                {"prune", !a.no_prune},
                                {"require", a.require}});
    out["result"] = {{"solved", r.solved},
                     {"failure", failure_reason_name(r.failure)},
                     {"program", r.program ? Json(r.program->text()) : Json(nullptr)},
                     {"expanded", r.expanded ? Json(r.expanded->text()) : Json(nullptr)},
                     {"solution_size", r.solution_size},
                     {"candidates_explored", r.candidates_explored},
                     {"classes_retained", r.classes_retained},
                     {"layers_completed", r.layers_completed},
                     {"wall_time_ms", r.wall_time_ms}};
    write_json(a.out, out);
  });
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string curriculum;
  std::vector<std::string> logs;
  int synthetic = 0;
  std::vector<std::string> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  double k_rate = 1.0;
  std::int64_t raw_budget = kDefaultCandidateBudget;
  std::string out;
  std::string save_logs;
  int jobs = 1;
};

std::vector<RunRecord> load_runs(const std::string& path) {
  Json j = read_json_file(path);
  std::vector<RunRecord> out;
  if (j.contains("runs")) {
    for (const auto& r : j["runs"]) out.push_back(run_record_from_json(r));
  } else {
    out.push_back(run_record_from_json(j));
  }
  return out;
}

void setup_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* cmd = app.add_subcommand("analyze", "Replay session logs and compute the metrics table");
  cmd->add_option("--curriculum", a.curriculum)->required();
  cmd->add_option("--logs", a.logs, "SessionLog JSON files")->check(CLI::ExistingFile);
  cmd->add_option("--synthetic", a.synthetic, "Add N scripted participants")->check(CLI::NonNegativeNumber);
  cmd->add_option("--runs", a.runs, "Run-record files from `run`")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "Tie-break seed")->required();
  cmd->add_option("--k", a.k, "Fixed top-k size")->check(CLI::PositiveNumber);
  cmd->add_option("--k-rate", a.k_rate, "k per trial when there are no logs");
  cmd->add_option("--raw-budget", a.raw_budget)->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "CSV path; a .json sidecar is written next to it")->required();
  cmd->add_option("--save-logs", a.save_logs, "Directory to write every session log to");
  cmd->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  cmd->callback([&a] {
    Curriculum c = load_curriculum(a.curriculum);
    std::vector<SessionLog> logs(a.logs.size() + static_cast<std::size_t>(a.synthetic));
    std::vector<ReplayReport> reports(logs.size());
    parallel_for(logs.size(), a.jobs, [&](std::size_t i) {
      if (i < a.logs.size()) {
        logs[i] = session_from_json(read_json_file(a.logs[i]));
      } else {
        SyntheticParticipant p;
        p.seed = *a.seed + (i - a.logs.size());
        p.participant_id = "synthetic-" + std::to_string(i - a.logs.size() + 1);
        p.experiment_id = c.name;
        logs[i] = generate_session(c, p);
      }
      reports[i] = replay(logs[i]);
    });
    Json replay_json = Json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      Json d = Json::array();
      for (const auto& x : reports[i].discrepancies)
        d.push_back({{"trial", x.trial_index}, {"event", x.event_index}, {"message", x.message}});
      replay_json.push_back({{"participant", logs[i].participant_id}, {"pass", reports[i].pass}, {"discrepancies", d}});
      if (!reports[i].pass) {
        all_pass = false;
        for (const auto& x : reports[i].discrepancies)
          std::cerr << logs[i].participant_id << " trial " << x.trial_index << " event " << x.event_index << ": "
                    << x.message << "\n";
      }
    }
    if (!all_pass) throw std::runtime_error("session logs failed replay");
    if (!a.save_logs.empty())
      for (const auto& log : logs) write_json((fs::path(a.save_logs) / (log.participant_id + ".json")).string(), session_to_json(log));
    std::vector<RunRecord> runs;
    for (const auto& p : a.runs) {
      auto r = load_runs(p);
      runs.insert(runs.end(), r.begin(), r.end());
    }
    MetricsConfig cfg;
    cfg.seed = *a.seed;
    cfg.k_rate = a.k_rate;
    cfg.fixed_k = a.k;
    cfg.raw_budget = a.raw_budget;
    auto rows = metrics_table(c, logs, runs, cfg);
    write_text(a.out, metrics_csv(rows));
    Json side = header("analyze", {{"curriculum", a.curriculum},
                                   {"logs", a.logs},
                                   {"synthetic", a.synthetic},
                                   {"runs", a.runs},
                                   {"seed", *a.seed},
                                   {"k", a.k ? Json(*a.k) : Json(nullptr)},
                                   {"k_rate", a.k_rate},
                                   {"raw_budget", a.raw_budget}});
    side["replay"] = replay_json;
    side["rows"] = rows.size();
    write_json(a.out + ".json", side);
  });
}

// ---------------------------------------------------------------------------
// explore

struct ExploreArgs {
  int steps = 100000;
  int pool_size = 256;
  std::vector<std::string> axes;
  std::optional<std::uint64_t> seed;
  bool check = false;
  std::string out;
  std::string summary;
};

void setup_explore(CLI::App& app, ExploreArgs& a) {
  auto* cmd = app.add_subcommand("explore", "Symmetry-biased random walk over programs");
  cmd->add_option("--steps", a.steps)->check(CLI::NonNegativeNumber);
  cmd->add_option("--pool-size", a.pool_size)->check(CLI::PositiveNumber);
  cmd->add_option("--axes", a.axes, "horizontal vertical main_diagonal anti_diagonal");
  cmd->add_option("--seed", a.seed)->required();
  cmd->add_flag("--check-invariants", a.check);
  cmd->add_option("--out", a.out, "Discoveries JSONL path")->required();
  cmd->add_option("--summary", a.summary, "Summary JSON path");
  cmd->callback([&a] {
    WalkConfig cfg;
    cfg.steps = a.steps;
    cfg.pool_size = a.pool_size;
    cfg.seed = *a.seed;
    cfg.check_invariants = a.check;
    if (!a.axes.empty()) {
      cfg.symmetry_axes = AxisSet{};
      for (const auto& name : a.axes) cfg.symmetry_axes.insert(parse_axis(name));
    }
    WalkResult r = random_walk(cfg);
    Json summary = walk_summary_json(r);
    Json head = {{"tool", kTool}, {"command", "explore"}, {"config", summary["config"]}};
    write_text(a.out, head.dump() + "\n" + discoveries_jsonl(r));
    if (!a.summary.empty()) {
      Json s = header("explore", summary["config"]);
      s["summary"] = summary;
      write_json(a.summary, s);
    }
    std::cerr << "discovered " << r.discoveries.size() << " patterns in " << a.steps << " steps\n";
  });
}

// ---------------------------------------------------------------------------
// hardness

struct HardnessArgs {
  int count = 200;
  int max_side = 7;
  std::optional<std::uint64_t> seed;
  std::string graph;
  std::int64_t k = 1;
  std::string out = "-";
};

std::int64_t max_biclique(const hardness::BipartiteGraph& g) {
  std::int64_t best = 0;
  for (unsigned mask = 1; mask < (1u << g.left); ++mask) {
    int s = std::popcount(mask);
    int common = 0;
    for (int j = 0; j < g.right; ++j) {
      bool all = true;
      for (int i = 0; i < g.left && all; ++i)
        if ((mask >> i) & 1u) all = g.has_edge(i, j);
      common += all;
    }
    best = std::max<std::int64_t>(best, static_cast<std::int64_t>(s) * common);
  }
  return best;
}

void setup_hardness(CLI::App& app, HardnessArgs& a) {
  auto* cmd = app.add_subcommand("hardness", "Best-single-helper checkers");
  cmd->require_subcommand(1);
  auto* demo = cmd->add_subcommand("demo", "Utilities of the worked example");
  demo->add_option("--out", a.out);
  demo->callback([&a] {
    auto fc = hardness::worked_example();
    Json out = header("hardness demo", Json::object());
    out["corpus"] = flat_corpus_to_json(fc);
    Json subsets = Json::array();
    for (unsigned mask = 1; mask < (1u << fc.arity); ++mask) {
      hardness::PositionSet s;
      for (int i = 0; i < fc.arity; ++i)
        if ((mask >> i) & 1u) s.push_back(i + 1);
      subsets.push_back({{"positions", s}, {"occurrences", occurrences(fc, s)}, {"utility", utility(fc, s)}});
    }
    out["subsets"] = subsets;
    auto best = hardness::best_single_helper_bruteforce(fc);
    out["best"] = {{"positions", best.positions}, {"utility", best.utility}};
    write_json(a.out, out);
  });
  auto* random = cmd->add_subcommand("random", "Check the reduction on random graphs against a biclique oracle");
  random->add_option("--count", a.count)->check(CLI::PositiveNumber);
  random->add_option("--max-side", a.max_side)->check(CLI::Range(1, 12));
  random->add_option("--seed", a.seed)->required();
  random->add_option("--out", a.out);
  random->callback([&a] {
    std::mt19937_64 rng(*a.seed);
    int agree = 0;
    Json cases = Json::array();
    for (int rep = 0; rep < a.count; ++rep) {
      hardness::BipartiteGraph g;
      g.left = 1 + static_cast<int>(rng() % static_cast<unsigned>(a.max_side));
      g.right = 1 + static_cast<int>(rng() % static_cast<unsigned>(a.max_side));
      std::bernoulli_distribution edge(std::uniform_real_distribution<double>(0, 1)(rng));
      for (int i = 0; i < g.left; ++i)
        for (int j = 0; j < g.right; ++j)
          if (edge(rng)) g.edges.emplace_back(i, j);
      std::int64_t k = 1 + static_cast<std::int64_t>(rng() % static_cast<unsigned>(g.left * g.right));
      bool decision = hardness::reduction_decision(hardness::biclique_reduction(g, k));
      std::int64_t opt = max_biclique(g);
      agree += decision == (opt >= k);
      cases.push_back({{"graph", graph_to_json(g)}, {"k", k}, {"decision", decision}, {"max_biclique", opt}});
    }
    Json out = header("hardness random", {{"count", a.count}, {"max_side", a.max_side}, {"seed", *a.seed}});
    out["agree"] = agree;
    out["cases"] = cases;
    write_json(a.out, out);
    std::cerr << "reduction agrees with the oracle on " << agree << "/" << a.count << " graphs\n";
  });
  auto* reduce = cmd->add_subcommand("reduce", "Reduce a biclique instance to a flat corpus");
  reduce->add_option("--graph", a.graph)->required()->check(CLI::ExistingFile);
  reduce->add_option("--k", a.k)->required()->check(CLI::NonNegativeNumber);
  reduce->add_option("--out", a.out);
  reduce->callback([&a] {
    auto g = graph_from_json(read_json_file(a.graph));
    auto inst = hardness::biclique_reduction(g, a.k);
    Json out = header("hardness reduce", {{"graph", a.graph}, {"k", a.k}});
    out["corpus"] = flat_corpus_to_json(inst.corpus);
    out["threshold"] = inst.threshold;
    out["copies"] = inst.copies;
    if (inst.corpus.arity <= hardness::kMaxBruteForceArity) out["decision"] = hardness::reduction_decision(inst);
    write_json(a.out, out);
  });
}

// ---------------------------------------------------------------------------
// curriculum

struct CurriculumArgs {
  std::string out = "-";
  std::string h;
  std::string x;
  std::string library;
  std::string curriculum;
  std::int64_t budget = kDefaultCandidateBudget;
  int jobs = 1;
};

Json group_report_json(const GroupReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"from", p.from},
                     {"to", p.to},
                     {"status", check_status_name(p.status)},
                     {"reason", p.reason},
                     {"witness", p.witness ? Json(p.witness->text()) : Json(nullptr)},
                     {"witness_size", p.witness_size},
                     {"prescribed_size", p.prescribed_size},
                     {"candidates", p.candidates}});
  return {{"status", check_status_name(r.status)}, {"problems", r.problems}, {"pairs", pairs}};
}

void setup_curriculum(CLI::App& app, CurriculumArgs& a) {
  auto* cmd = app.add_subcommand("curriculum", "Build, generate and validate curricula");
  cmd->require_subcommand(1);
  for (const char* which : {"build-e1", "build-e2"}) {
    auto* b = cmd->add_subcommand(which, std::string("Write the built-in ") + (which[7] == '1' ? "sequential" : "operator-group") +
                                             " curriculum");
    b->add_option("--out", a.out);
    std::string name = which;
    b->callback([&a, name] {
      Json j = curriculum_to_json(name == "build-e1" ? build_e1() : build_e2());
      write_json(a.out, j);
    });
  }
  auto* gen = cmd->add_subcommand("generate-group", "Four operator-group targets from h and x");
  gen->add_option("--helper", a.h, "Program text for h")->required();
  gen->add_option("--x", a.x, "Primitive name")->required();
  gen->add_option("--library", a.library);
  gen->add_option("--budget", a.budget)->check(CLI::PositiveNumber);
  gen->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  gen->add_option("--out", a.out);
  gen->callback([&a] {
    Library lib = a.library.empty() ? Library{} : library_from_json(read_json_file(a.library));
    OperatorGroup g = generate_group(parse_program(a.h), parse_primitive(a.x), lib);
    SynthesisBudget b;
    b.max_candidates = a.budget;
    Json out = header("curriculum generate-group", {{"h", a.h}, {"x", a.x}, {"library", a.library}, {"budget", a.budget}});
    Json slots = Json::array();
    for (std::size_t i = 0; i < 4; ++i)
      slots.push_back({{"slot", i + 1}, {"target", grid_to_json(g.targets[i])}, {"prescribed", g.prescribed[i].text()}});
    out["slots"] = slots;
    out["validation"] = group_report_json(validate_group(g, b, a.jobs));
    write_json(a.out, out);
  });
  auto* val = cmd->add_subcommand("validate", "Check derivations and operator groups");
  val->add_option("--curriculum", a.curriculum)->required();
  val->add_option("--budget", a.budget)->check(CLI::PositiveNumber);
  val->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  val->add_option("--out", a.out);
  val->callback([&a] {
    Curriculum c = load_curriculum(a.curriculum);
    SequentialReport seq = validate_sequential(c);
    Json trials = Json::array();
    for (const auto& t : seq.trials)
      trials.push_back({{"index", t.index},
                        {"status", check_status_name(t.status)},
                        {"annotated", trial_kind_name(t.annotated)},
                        {"observed", trial_kind_name(t.observed)},
                        {"n", t.n},
                        {"message", t.message}});
    std::set<int> ids;
    for (const auto& t : c.trials)
      if (t.meta.kind == TrialKind::group) ids.insert(t.meta.group_id);
    SynthesisBudget b;
    b.max_candidates = a.budget;
    Json groups = Json::array();
    bool ok = seq.status == CheckStatus::pass;
    for (int id : ids) {
      GroupReport r = validate_group(group_of(c, id), b, a.jobs);
      ok = ok && r.status == CheckStatus::pass;
      Json g = group_report_json(r);
      g["group"] = id;
      groups.push_back(g);
    }
    Json out = header("curriculum validate", {{"curriculum", a.curriculum}, {"budget", a.budget}});
    out["status"] = check_status_name(ok ? CheckStatus::pass : CheckStatus::fail);
    out["sequential"] = {{"status", check_status_name(seq.status)}, {"trials", trials}};
    out["groups"] = groups;
    write_json(a.out, out);
    std::cerr << "curriculum " << c.name << ": " << check_status_name(ok ? CheckStatus::pass : CheckStatus::fail) << "\n";
  });
}

// ---------------------------------------------------------------------------
// export-ui

struct ExportArgs {
  std::string curriculum;
  std::string out;
  std::string golden;
  int golden_count = 1000;
  std::optional<std::uint64_t> seed;
};

void setup_export(CLI::App& app, ExportArgs& a) {
  auto* cmd = app.add_subcommand("export-ui", "Curriculum JSON and evaluator golden cases for the builder app");
  cmd->add_option("--curriculum", a.curriculum)->required();
  cmd->add_option("--out", a.out)->required();
  cmd->add_option("--golden", a.golden, "Golden operator cases JSON path");
  cmd->add_option("--golden-count", a.golden_count)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Seed for golden cases");
  cmd->callback([&a] {
    Curriculum c = load_curriculum(a.curriculum);
    Json j = curriculum_to_json(c);
    j["primitives"] = Json::object();
    for (Primitive p : kPrimitives) j["primitives"][std::string(primitive_name(p))] = grid_to_json(primitive(p));
    j["session_schema_version"] = kSessionSchemaVersion;
    write_json(a.out, j);
    if (a.golden.empty()) return;
    if (!a.seed) throw UsageError("--seed is required with --golden");
    std::mt19937_64 rng(*a.seed);
    auto random_grid = [&] {
      std::string key(100, '0');
      std::bernoulli_distribution d(std::uniform_real_distribution<double>(0.1, 0.9)(rng));
      for (char& ch : key) ch = d(rng) ? '1' : '0';
      return Grid::from_key(key);
    };
    Json cases = Json::array();
    for (int i = 0; i < a.golden_count; ++i) {
      for (Op op : kOperators) {
        Grid x = random_grid();
        Json item = {{"op", op_name(op)}, {"a", x.key()}};
        if (is_binary(op)) {
          Grid y = random_grid();
          item["b"] = y.key();
          item["result"] = apply_binary(op, x, y).key();
        } else {
          item["result"] = apply_unary(op, x).key();
        }
        cases.push_back(item);
      }
    }
    Json g = header("export-ui golden", {{"golden_count", a.golden_count}, {"seed", *a.seed}});
    g["cases"] = cases;
    write_json(a.golden, g);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern Builder workbench: synthesis, library learning, curricula and analysis", kTool};
  app.require_subcommand(1);
  app.set_config("--config", "", "JSON file mirroring the command's flags");
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  RunArgs run_args;
  SynthArgs synth_args;
  AnalyzeArgs analyze_args;
  ExploreArgs explore_args;
  HardnessArgs hardness_args;
  CurriculumArgs curriculum_args;
  ExportArgs export_args;
  setup_run(app, run_args);
  setup_synth(app, synth_args);
  setup_analyze(app, analyze_args);
  setup_explore(app, explore_args);
  setup_hardness(app, hardness_args);
  setup_curriculum(app, curriculum_args);
  setup_export(app, export_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
