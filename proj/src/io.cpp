#include "pattern/io.hpp"

#include <cctype>
#include <fstream>

namespace pattern {

namespace {

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view text) : text_(text) {}

  Program parse() {
    Program p = expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("program text, offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  Program expr() {
    if (eat('@')) return Program::helper(identifier());
    std::string name = identifier();
    if (!eat('(')) {
      if (auto p = find_primitive(name)) return Program::leaf(*p);
      fail("unknown primitive '" + name + "'");
    }
    auto op = find_op(name);
    if (!op) fail("unknown operator '" + name + "'");
    std::vector<Program> args;
    if (!eat(')')) {
      do {
        args.push_back(expr());
      } while (eat(','));
      if (!eat(')')) fail("expected ')'");
    }
    if (static_cast<int>(args.size()) != arity(*op)) {
      fail(name + " takes " + std::to_string(arity(*op)) + " argument(s)");
    }
    return Program::apply(*op, args);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

const Json& require(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

Program parse_program(std::string_view text) { return ProgramParser(text).parse(); }

Json grid_to_json(const Grid& g) { return g.rows(); }

Grid grid_from_json(const Json& j) {
  try {
    if (j.is_string()) return Grid::from_key(j.get<std::string>());
    return Grid::from_rows(j.get<std::vector<std::vector<int>>>());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("grid: ") + e.what());
  }
}

Json program_to_json(const Program& p) {
  switch (p.kind()) {
    case Program::Kind::primitive: return {{"primitive", primitive_name(p.primitive())}};
    case Program::Kind::helper: return {{"helper", p.helper_id()}};
    default: {
      Json args = Json::array();
      for (const auto& c : p.children()) args.push_back(program_to_json(c));
      return {{"op", op_name(p.op())}, {"args", args}};
    }
  }
}

Program program_from_json(const Json& j) {
  if (j.is_string()) return parse_program(j.get<std::string>());
  if (!j.is_object()) throw FormatError("program must be an object or a string");
  if (j.contains("primitive")) return Program::leaf(parse_primitive(j["primitive"].get<std::string>()));
  if (j.contains("helper")) return Program::helper(j["helper"].get<std::string>());
  Op op = parse_op(require(j, "op").get<std::string>());
  std::vector<Program> args;
  for (const auto& a : require(j, "args")) args.push_back(program_from_json(a));
  if (static_cast<int>(args.size()) != arity(op)) {
    throw ArityMismatch(std::string(op_name(op)) + " takes " + std::to_string(arity(op)) + " argument(s)");
  }
  return Program::apply(op, args);
}

Json library_to_json(const Library& lib) {
  Json out = Json::array();
  for (const auto& e : lib.entries()) {
    out.push_back({{"id", e.id},
                   {"program", e.program.text()},
                   {"output", e.output.key()},
                   {"created_at_trial", e.created_at_trial}});
  }
  return out;
}

Library library_from_json(const Json& j) {
  Library lib;
  for (const auto& e : j) {
    Program p = program_from_json(require(e, "program"));
    std::string id = require(e, "id").get<std::string>();
    if (lib.insert(p, get_or<int>(e, "created_at_trial", 0), id) != id) {
      throw FormatError("helper " + id + " duplicates the output of an earlier helper");
    }
  }
  return lib;
}

namespace {

Json meta_to_json(const TrialMeta& m) {
  Json j = {{"kind", trial_kind_name(m.kind)}};
  if (m.derivation) j["derivation"] = m.derivation->text();
  if (m.kind == TrialKind::group) {
    j["group_id"] = m.group_id;
    j["slot"] = m.slot;
    j["h_id"] = m.h_id;
  } else if (m.kind == TrialKind::sequential || m.kind == TrialKind::long_range) {
    j["n"] = m.n;
  }
  if (m.x) j["x"] = primitive_name(*m.x);
  return j;
}

TrialMeta meta_from_json(const Json& j) {
  TrialMeta m;
  m.kind = parse_trial_kind(require(j, "kind").get<std::string>());
  if (j.contains("derivation")) m.derivation = program_from_json(j["derivation"]);
  m.n = get_or<int>(j, "n", 0);
  m.group_id = get_or<int>(j, "group_id", 0);
  m.slot = get_or<int>(j, "slot", 0);
  m.h_id = get_or<std::string>(j, "h_id", "");
  if (j.contains("x")) m.x = parse_primitive(j["x"].get<std::string>());
  return m;
}

}  // namespace

Json curriculum_to_json(const Curriculum& c) {
  Json defs = Json::array();
  for (const auto& d : c.definitions) defs.push_back({{"name", d.name}, {"program", d.program.text()}});
  Json trials = Json::array();
  for (const auto& t : c.trials) {
    trials.push_back({{"index", t.index},
                      {"target", grid_to_json(t.target)},
                      {"solution", program_to_json(t.solution)},
                      {"solution_text", t.solution.text()},
                      {"meta", meta_to_json(t.meta)}});
  }
  return {{"name", c.name}, {"dsl_version", c.dsl_version}, {"definitions", defs}, {"trials", trials}};
}

Curriculum curriculum_from_json(const Json& j) {
  Curriculum c;
  try {
    c.name = require(j, "name").get<std::string>();
    c.dsl_version = get_or<std::string>(j, "dsl_version", kDslVersion);
    if (j.contains("definitions")) {
      for (const auto& d : j["definitions"]) {
        c.definitions.push_back({require(d, "name").get<std::string>(), program_from_json(require(d, "program"))});
      }
    }
    for (const auto& tj : require(j, "trials")) {
      Trial t;
      t.index = require(tj, "index").get<int>();
      t.target = grid_from_json(require(tj, "target"));
      t.solution = program_from_json(require(tj, "solution"));
      if (tj.contains("meta")) t.meta = meta_from_json(tj["meta"]);
      c.trials.push_back(std::move(t));
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("curriculum: ") + e.what());
  }
  if (c.dsl_version != kDslVersion) throw FormatError("unsupported dsl_version " + c.dsl_version);
  for (std::size_t i = 0; i < c.trials.size(); ++i) {
    const auto& t = c.trials[i];
    if (t.index != static_cast<int>(i) + 1) throw FormatError("trial indices must run 1..N in order");
    if (!(evaluate(t.solution) == t.target)) {
      throw FormatError("trial " + std::to_string(t.index) + ": solution does not evaluate to the target");
    }
  }
  return c;
}

Json run_spec_to_json(const RunSpec& s) {
  Json j = {{"model", model_name(s.model)},
            {"max_candidates", s.budget.max_candidates},
            {"max_size", s.budget.max_size ? Json(*s.budget.max_size) : Json(nullptr)},
            {"seed", s.seed},
            {"trace_mode", s.trace_mode == TraceMode::solution_subtrees ? "solution_subtrees" : "all_retained"}};
  if (s.model == Model::rc || s.model == Model::oracle) j["k"] = s.k;
  if (s.model == Model::pl) j["q"] = s.q;
  return j;
}

RunSpec run_spec_from_json(const Json& j) {
  RunSpec s;
  s.model = parse_model(require(j, "model").get<std::string>());
  s.budget.max_candidates = get_or<std::int64_t>(j, "max_candidates", kDefaultCandidateBudget);
  if (j.contains("max_size") && !j["max_size"].is_null()) s.budget.max_size = j["max_size"].get<int>();
  s.k = get_or<int>(j, "k", 1);
  s.q = get_or<double>(j, "q", 0.3);
  s.seed = get_or<std::uint64_t>(j, "seed", 0);
  auto mode = get_or<std::string>(j, "trace_mode", "solution_subtrees");
  if (mode == "solution_subtrees") {
    s.trace_mode = TraceMode::solution_subtrees;
  } else if (mode == "all_retained") {
    s.trace_mode = TraceMode::all_retained;
  } else {
    throw FormatError("unknown trace_mode " + mode);
  }
  return s;
}

Json run_record_to_json(const RunRecord& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) {
    Json trace = Json::array();
    for (const auto& p : t.trace) trace.push_back(p.text());
    Json j = {{"index", t.index},
              {"solved", t.solved},
              {"failure", failure_reason_name(t.failure)},
              {"program", t.program ? Json(t.program->text()) : Json(nullptr)},
              {"expanded", t.expanded ? Json(t.expanded->text()) : Json(nullptr)},
              {"authored_size", t.authored_size},
              {"authored_ops", t.authored_ops},
              {"raw_node_count", t.raw.node_count},
              {"raw_op_count", t.raw.op_count},
              {"trace", trace},
              {"candidates_explored", t.candidates_explored},
              {"classes_retained", t.classes_retained},
              {"wall_time_ms", t.wall_time_ms},
              {"new_helpers", t.new_helpers},
              {"library_size", t.library_size}};
    if (t.attempts > 0) j["attempts"] = t.attempts;
    trials.push_back(std::move(j));
  }
  Json lib = Json::array();
  for (const auto& h : r.library) {
    lib.push_back({{"id", h.id},
                   {"program", h.program.text()},
                   {"output", h.output.key()},
                   {"created_at_trial", h.created_at_trial}});
  }
  return {{"curriculum", r.curriculum}, {"config", run_spec_to_json(r.spec)}, {"trials", trials}, {"library", lib}};
}

namespace {

FailureReason parse_failure(const std::string& s) {
  for (auto r : {FailureReason::none, FailureReason::budget_exhausted, FailureReason::size_limit,
                 FailureReason::space_exhausted, FailureReason::attempts_exhausted}) {
    if (failure_reason_name(r) == s) return r;
  }
  throw FormatError("unknown failure reason " + s);
}

}  // namespace

RunRecord run_record_from_json(const Json& j) {
  RunRecord r;
  try {
    r.curriculum = get_or<std::string>(j, "curriculum", "");
    r.spec = run_spec_from_json(require(j, "config"));
    for (const auto& tj : require(j, "trials")) {
      TrialRecord t;
      t.index = require(tj, "index").get<int>();
      t.solved = require(tj, "solved").get<bool>();
      t.failure = parse_failure(get_or<std::string>(tj, "failure", "none"));
      if (tj.contains("program") && !tj["program"].is_null()) t.program = program_from_json(tj["program"]);
      if (tj.contains("expanded") && !tj["expanded"].is_null()) t.expanded = program_from_json(tj["expanded"]);
      t.authored_size = get_or<int>(tj, "authored_size", 0);
      t.authored_ops = get_or<int>(tj, "authored_ops", 0);
      t.raw.node_count = get_or<int>(tj, "raw_node_count", 0);
      t.raw.op_count = get_or<int>(tj, "raw_op_count", 0);
      if (tj.contains("trace")) {
        for (const auto& p : tj["trace"]) t.trace.push_back(program_from_json(p));
      }
      t.candidates_explored = get_or<std::int64_t>(tj, "candidates_explored", 0);
      t.classes_retained = get_or<std::int64_t>(tj, "classes_retained", 0);
      t.wall_time_ms = get_or<double>(tj, "wall_time_ms", 0.0);
      t.new_helpers = get_or<std::vector<std::string>>(tj, "new_helpers", {});
      t.library_size = get_or<std::size_t>(tj, "library_size", 0);
      t.attempts = get_or<int>(tj, "attempts", 0);
      r.trials.push_back(std::move(t));
    }
    if (j.contains("library")) {
      for (const auto& h : j["library"]) {
        Program p = program_from_json(require(h, "program"));
        r.library.push_back({require(h, "id").get<std::string>(), p, evaluate(p),
                             get_or<int>(h, "created_at_trial", 0)});
      }
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("run record: ") + e.what());
  }
  return r;
}

Json flat_corpus_to_json(const hardness::FlatCorpus& fc) {
  return {{"arity", fc.arity}, {"alphabet", fc.alphabet}, {"reference", fc.reference}, {"tuples", fc.tuples}};
}

hardness::FlatCorpus flat_corpus_from_json(const Json& j) {
  hardness::FlatCorpus fc;
  try {
    fc.arity = require(j, "arity").get<int>();
    fc.alphabet = get_or<std::vector<std::string>>(j, "alphabet", {});
    fc.reference = require(j, "reference").get<std::vector<std::string>>();
    fc.tuples = require(j, "tuples").get<std::vector<std::vector<std::string>>>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("flat corpus: ") + e.what());
  }
  fc.validate();
  return fc;
}

Json graph_to_json(const hardness::BipartiteGraph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.left));
  for (auto [i, j] : g.edges) adj.at(static_cast<std::size_t>(i)).push_back(j);
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return {{"left", g.left}, {"right", g.right}, {"adjacency", adj}};
}

hardness::BipartiteGraph graph_from_json(const Json& j) {
  hardness::BipartiteGraph g;
  try {
    g.left = require(j, "left").get<int>();
    g.right = require(j, "right").get<int>();
    auto adj = require(j, "adjacency").get<std::vector<std::vector<int>>>();
    if (static_cast<int>(adj.size()) != g.left) throw FormatError("adjacency needs one row per left vertex");
    for (int i = 0; i < g.left; ++i) {
      for (int v : adj[static_cast<std::size_t>(i)]) {
        if (v < 0 || v >= g.right) throw FormatError("right vertex out of range");
        g.edges.emplace_back(i, v);
      }
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("graph: ") + e.what());
  }
  return g;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace pattern
