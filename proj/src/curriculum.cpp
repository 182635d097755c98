#include "pattern/curriculum.hpp"

#include <algorithm>
#include <future>
#include <map>

namespace pattern {

namespace {

Program P(Primitive p) { return Program::leaf(p); }
Program href(const std::string& name) { return Program::helper(name); }
Program bin(Op op, Program a, Program b) { return Program::binary(op, std::move(a), std::move(b)); }
Program un(Op op, Program a) { return Program::unary(op, std::move(a)); }

using Resolver = std::function<Program(const std::string&)>;

Program inline_refs(const Program& p, const Resolver& resolve) {
  if (!p.uses_helpers()) return p;
  switch (p.kind()) {
    case Program::Kind::helper: return resolve(p.helper_id());
    case Program::Kind::unary: return un(p.op(), inline_refs(p.child(0), resolve));
    case Program::Kind::binary:
      return bin(p.op(), inline_refs(p.child(0), resolve), inline_refs(p.child(1), resolve));
    default: return p;
  }
}

std::optional<int> parse_trial_ref(const std::string& id) {
  if (id.size() < 2 || id[0] != 'P') return std::nullopt;
  if (!std::all_of(id.begin() + 1, id.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
    return std::nullopt;
  }
  return std::stoi(id.substr(1));
}

void collect_refs(const Program& p, std::vector<std::string>& out) {
  if (p.kind() == Program::Kind::helper) {
    out.push_back(p.helper_id());
    return;
  }
  for (const auto& c : p.children()) collect_refs(c, out);
}

// Resolves references for trial t (1-based): earlier trials and definitions.
Resolver resolver_for(const Curriculum& c, int t) {
  return [&c, t](const std::string& id) -> Program {
    if (auto s = parse_trial_ref(id)) {
      if (*s >= 1 && *s < t && *s <= static_cast<int>(c.trials.size())) {
        return c.trials[*s - 1].solution;
      }
      throw UnknownHelper(id);
    }
    const NamedProgram* def = c.definition(id);
    if (!def) throw UnknownHelper(id);
    // Definitions may reference earlier definitions only.
    return inline_refs(def->program, [&c, id](const std::string& inner) -> Program {
      for (const auto& d : c.definitions) {
        if (d.name == id) break;
        if (d.name == inner) return expand_derivation(c, 0, href(inner));
      }
      throw UnknownHelper(inner);
    });
  };
}

}  // namespace

std::string_view trial_kind_name(TrialKind k) {
  switch (k) {
    case TrialKind::root: return "root";
    case TrialKind::sequential: return "sequential";
    case TrialKind::long_range: return "long_range";
    case TrialKind::shared_helper: return "helper";
    case TrialKind::group: return "group";
  }
  return "?";
}

TrialKind parse_trial_kind(std::string_view name) {
  for (TrialKind k : {TrialKind::root, TrialKind::sequential, TrialKind::long_range,
                      TrialKind::shared_helper, TrialKind::group}) {
    if (trial_kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown trial kind: " + std::string(name));
}

std::vector<Program> Curriculum::solutions() const {
  std::vector<Program> out;
  for (const auto& t : trials) out.push_back(t.solution);
  return out;
}

std::vector<Grid> Curriculum::targets() const {
  std::vector<Grid> out;
  for (const auto& t : trials) out.push_back(t.target);
  return out;
}

const NamedProgram* Curriculum::definition(const std::string& name) const {
  for (const auto& d : definitions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::string trial_ref(int t) { return "P" + std::to_string(t); }

Program expand_derivation(const Curriculum& c, int t, const Program& derivation) {
  return inline_refs(derivation, resolver_for(c, t));
}

Grid evaluate_derivation(const Curriculum& c, int t, const Program& derivation) {
  return evaluate(expand_derivation(c, t, derivation));
}

Program fat_cross() {
  auto lh = P(Primitive::line_horizontal);
  auto lv = P(Primitive::line_vertical);
  return bin(Op::add, bin(Op::add, lh, un(Op::reflect_horizontal, lh)),
             bin(Op::add, lv, un(Op::reflect_vertical, lv)));
}

Program diagonal_cross() {
  auto d = P(Primitive::diagonal);
  return bin(Op::add, d, un(Op::reflect_vertical, d));
}

Curriculum build_e1() {
  Curriculum c;
  c.name = "e1";
  c.definitions = {{"fat_cross", fat_cross()}, {"Diagonal_Cross", diagonal_cross()}};

  const auto sq = P(Primitive::square);
  const auto dc = href("Diagonal_Cross");
  auto p = [](int t) { return href(trial_ref(t)); };

  struct Row {
    Program derivation;
    TrialKind kind;
  };
  const std::vector<Row> rows = {
      {href("fat_cross"), TrialKind::root},
      {bin(Op::add, p(1), sq), TrialKind::sequential},
      {un(Op::invert, p(2)), TrialKind::sequential},
      {bin(Op::subtract, sq, dc), TrialKind::shared_helper},
      {bin(Op::add, sq, dc), TrialKind::shared_helper},
      {un(Op::invert, p(5)), TrialKind::sequential},
      {bin(Op::add, dc, p(1)), TrialKind::long_range},
      {bin(Op::intersect, dc, p(1)), TrialKind::long_range},
      {bin(Op::add, p(8), sq), TrialKind::sequential},
      {un(Op::invert, p(9)), TrialKind::sequential},
      {bin(Op::add, p(8), un(Op::invert, p(1))), TrialKind::long_range},
      {bin(Op::add, un(Op::invert, p(11)), sq), TrialKind::sequential},
      {bin(Op::subtract, dc, p(8)), TrialKind::long_range},
      {bin(Op::subtract, p(7), p(8)), TrialKind::long_range},
  };

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int t = static_cast<int>(i) + 1;
    Trial trial;
    trial.index = t;
    trial.meta.kind = rows[i].kind;
    trial.meta.derivation = rows[i].derivation;
    std::vector<std::string> refs;
    collect_refs(rows[i].derivation, refs);
    int latest = 0;
    for (const auto& r : refs) {
      if (auto s = parse_trial_ref(r)) latest = std::max(latest, *s);
    }
    trial.meta.n = latest > 0 ? t - latest : 0;
    trial.solution = expand_derivation(c, t, rows[i].derivation);
    trial.target = evaluate(trial.solution);
    c.trials.push_back(std::move(trial));
  }
  return c;
}

// ---------------------------------------------------------------------------

OperatorGroup make_group(const std::array<Program, 4>& prescribed) {
  OperatorGroup g;
  for (std::size_t i = 0; i < 4; ++i) {
    g.prescribed[i] = prescribed[i];
    g.targets[i] = evaluate(prescribed[i]);
  }
  return g;
}

OperatorGroup generate_group(const Program& h, Primitive x, const Library& lib) {
  Program he = expand(h, lib);
  Program xp = P(x);
  OperatorGroup g = make_group({bin(Op::add, he, xp), bin(Op::subtract, he, xp),
                                bin(Op::intersect, he, xp), bin(Op::add, un(Op::invert, he), xp)});
  g.h = he;
  g.x = x;
  return g;
}

std::string_view check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::fail: return "FAIL";
    case CheckStatus::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

PairCheck check_pair(const OperatorGroup& g, int a, int b, const SynthesisBudget& budget) {
  PairCheck pc;
  pc.from = a + 1;
  pc.to = b + 1;
  pc.prescribed_size = g.prescribed[b].authored_size();
  if (g.targets[a] == g.targets[b]) {
    pc.status = CheckStatus::fail;
    pc.reason = "duplicate";
    return pc;
  }
  Library lib;
  const std::string id = "c" + std::to_string(a + 1);
  lib.insert(g.prescribed[a], 0, id);
  SearchOptions opts;
  opts.measure = SizeMeasure::expanded;
  opts.required_helper = id;
  SynthesisBudget bounded = budget;
  bounded.max_size = pc.prescribed_size - 1;
  auto r = solve(g.targets[b], lib, bounded, opts);
  pc.candidates = r.candidates_explored;
  if (r.solved) {
    pc.status = CheckStatus::fail;
    pc.reason = "shorter cross-derivation";
    pc.witness = r.program;
    pc.witness_size = r.solution_size;
  } else if (r.failure == FailureReason::budget_exhausted) {
    pc.status = CheckStatus::inconclusive;
    pc.reason = "budget exhausted";
  } else {
    pc.status = CheckStatus::pass;
  }
  return pc;
}

}  // namespace

GroupReport validate_group(const OperatorGroup& g, const SynthesisBudget& budget, int jobs) {
  GroupReport report;
  for (int i = 0; i < 4; ++i) {
    if (g.targets[i].empty()) report.problems.push_back("blank target in slot " + std::to_string(i + 1));
    for (int j = i + 1; j < 4; ++j) {
      if (g.targets[i] == g.targets[j]) {
        report.problems.push_back("duplicate targets in slots " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1));
      }
    }
  }
  std::vector<std::pair<int, int>> order;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a != b) order.emplace_back(a, b);
    }
  }
  report.pairs.resize(order.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      report.pairs[i] = check_pair(g, order[i].first, order[i].second, budget);
    }
  } else {
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(jobs)) {
      std::vector<std::future<PairCheck>> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + jobs); ++i) {
        batch.push_back(std::async(std::launch::async, check_pair, std::cref(g), order[i].first,
                                   order[i].second, std::cref(budget)));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) report.pairs[start + i] = batch[i].get();
    }
  }

  bool any_fail = !report.problems.empty();
  bool any_inconclusive = false;
  for (const auto& pc : report.pairs) {
    any_fail = any_fail || pc.status == CheckStatus::fail;
    any_inconclusive = any_inconclusive || pc.status == CheckStatus::inconclusive;
  }
  report.status = any_fail            ? CheckStatus::fail
                  : any_inconclusive ? CheckStatus::inconclusive
                                     : CheckStatus::pass;
  return report;
}

SequentialReport validate_sequential(const Curriculum& c) {
  SequentialReport report;
  for (const auto& trial : c.trials) {
    SequentialCheck check;
    check.index = trial.index;
    check.annotated = trial.meta.kind;
    check.expected = trial.target;
    if (!trial.meta.derivation) {
      check.status = CheckStatus::fail;
      check.message = "missing derivation";
      report.trials.push_back(std::move(check));
      continue;
    }
    std::vector<std::string> refs;
    collect_refs(*trial.meta.derivation, refs);
    int latest = 0;
    bool uses_definition = false;
    for (const auto& r : refs) {
      if (auto s = parse_trial_ref(r)) {
        latest = std::max(latest, *s);
      } else {
        uses_definition = true;
      }
    }
    check.n = latest > 0 ? trial.index - latest : 0;
    if (trial.meta.kind == TrialKind::group) {
      check.observed = TrialKind::group;
    } else if (latest > 0) {
      check.observed = check.n == 1 ? TrialKind::sequential : TrialKind::long_range;
    } else {
      check.observed = uses_definition ? TrialKind::shared_helper : TrialKind::root;
    }
    try {
      check.actual = evaluate_derivation(c, trial.index, *trial.meta.derivation);
    } catch (const std::exception& e) {
      check.status = CheckStatus::fail;
      check.message = e.what();
      report.trials.push_back(std::move(check));
      continue;
    }
    if (!(*check.actual == trial.target)) {
      check.status = CheckStatus::fail;
      check.message = "derivation does not reproduce the target";
    } else if (!(evaluate(trial.solution) == trial.target)) {
      check.status = CheckStatus::fail;
      check.message = "solution does not evaluate to the target";
    } else if (check.observed != check.annotated && trial.meta.kind != TrialKind::root) {
      check.status = CheckStatus::fail;
      check.message = "annotated " + std::string(trial_kind_name(check.annotated)) + " but derivation is " +
                      std::string(trial_kind_name(check.observed));
    } else if (trial.meta.kind != TrialKind::group && latest > 0 && trial.meta.n != check.n) {
      check.status = CheckStatus::fail;
      check.message = "annotated distance " + std::to_string(trial.meta.n) + " but derivation uses " +
                      std::to_string(check.n);
    }
    report.trials.push_back(std::move(check));
  }
  for (const auto& t : report.trials) {
    if (t.status == CheckStatus::fail) report.status = CheckStatus::fail;
  }
  return report;
}

// ---------------------------------------------------------------------------

std::vector<GroupSpec> e2_group_specs() {
  const auto d = P(Primitive::diagonal);
  const auto t = P(Primitive::triangle);
  const auto lh = P(Primitive::line_horizontal);
  const auto lv = P(Primitive::line_vertical);
  const auto h1 = href("h1");
  const auto h2 = href("h2");
  return {
      {"h1", bin(Op::subtract, P(Primitive::square), bin(Op::add, d, un(Op::reflect_horizontal, t))),
       Primitive::triangle},
      {"h2",
       bin(Op::subtract, un(Op::reflect_horizontal, bin(Op::subtract, t, lh)), un(Op::reflect_vertical, lv)),
       Primitive::triangle},
      {"h3", bin(Op::intersect, un(Op::invert, h1), un(Op::invert, un(Op::reflect_diag, h2))),
       Primitive::line_horizontal},
      {"h4",
       bin(Op::subtract, un(Op::reflect_horizontal, h2), un(Op::reflect_horizontal, un(Op::reflect_vertical, h1))),
       Primitive::line_vertical},
  };
}

Curriculum build_from_groups(const std::string& name, const std::vector<GroupSpec>& specs) {
  Curriculum c;
  c.name = name;
  int t = 0;
  for (std::size_t gi = 0; gi < specs.size(); ++gi) {
    const auto& spec = specs[gi];
    c.definitions.push_back({spec.h_name, spec.h});
    const Program hx = expand_derivation(c, 0, href(spec.h_name));
    OperatorGroup g = generate_group(hx, spec.x);
    const Program xp = P(spec.x);
    const std::array<Program, 4> derivations = {
        bin(Op::add, href(spec.h_name), xp), bin(Op::subtract, href(spec.h_name), xp),
        bin(Op::intersect, href(spec.h_name), xp),
        bin(Op::add, un(Op::invert, href(spec.h_name)), xp)};
    for (int slot = 0; slot < 4; ++slot) {
      Trial trial;
      trial.index = ++t;
      trial.solution = g.prescribed[slot];
      trial.target = g.targets[slot];
      trial.meta.kind = TrialKind::group;
      trial.meta.derivation = derivations[slot];
      trial.meta.group_id = static_cast<int>(gi) + 1;
      trial.meta.slot = slot + 1;
      trial.meta.h_id = spec.h_name;
      trial.meta.x = spec.x;
      c.trials.push_back(std::move(trial));
    }
  }
  return c;
}

Curriculum build_e2() { return build_from_groups("e2", e2_group_specs()); }

OperatorGroup group_of(const Curriculum& c, int group_id) {
  std::array<Program, 4> prescribed = {P(Primitive::blank), P(Primitive::blank), P(Primitive::blank),
                                       P(Primitive::blank)};
  int found = 0;
  std::optional<Primitive> x;
  std::string h_id;
  for (const auto& t : c.trials) {
    if (t.meta.kind != TrialKind::group || t.meta.group_id != group_id) continue;
    if (t.meta.slot < 1 || t.meta.slot > 4) throw std::invalid_argument("group slot out of range");
    prescribed[t.meta.slot - 1] = t.solution;
    x = t.meta.x;
    h_id = t.meta.h_id;
    ++found;
  }
  if (found != 4) {
    throw std::invalid_argument("group " + std::to_string(group_id) + " does not have four trials");
  }
  OperatorGroup g = make_group(prescribed);
  g.x = x;
  if (!h_id.empty() && c.definition(h_id)) g.h = expand_derivation(c, 0, href(h_id));
  return g;
}

}  // namespace pattern
