#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pattern/grid.hpp"
#include "pattern/program.hpp"
#include "pattern/synthesizer.hpp"

namespace pattern {

inline constexpr const char* kDslVersion = "pbt-dsl-1";

enum class TrialKind {
  root,
  /// p_t = tau(p_{t-1}, ...)
  sequential,
  /// p_t = tau(p_{t-n}, ...) with n > 1
  long_range,
  /// built from a named curriculum helper, no earlier trial referenced
  shared_helper,
  /// member of a 4-operator group
  group,
};

std::string_view trial_kind_name(TrialKind k);
TrialKind parse_trial_kind(std::string_view name);

struct TrialMeta {
  TrialKind kind = TrialKind::root;
  /// Distance to the most recent referenced trial (sequential / long_range).
  int n = 0;
  /// Expression over primitives, earlier trials (`@P<t>`) and named
  /// definitions (`@<name>`).
  std::optional<Program> derivation;
  // group annotations
  int group_id = 0;
  int slot = 0;
  std::string h_id;
  std::optional<Primitive> x;
};

struct Trial {
  int index = 0;  // 1-based
  Grid target;
  /// Ground-truth solution over primitives only.
  Program solution = Program::leaf(Primitive::blank);
  TrialMeta meta;
};

struct NamedProgram {
  std::string name;
  Program program;  // over primitives and earlier definitions
};

struct Curriculum {
  std::string name;
  std::string dsl_version = kDslVersion;
  std::vector<NamedProgram> definitions;
  std::vector<Trial> trials;

  std::vector<Program> solutions() const;
  std::vector<Grid> targets() const;
  std::size_t size() const { return trials.size(); }
  const NamedProgram* definition(const std::string& name) const;
};

/// Reference name of trial t inside derivations.
std::string trial_ref(int t);

/// Evaluates a derivation, resolving `@P<s>` to trial targets with s < t and
/// other helper references to definitions. Throws UnknownHelper otherwise.
Grid evaluate_derivation(const Curriculum& c, int t, const Program& derivation);
/// Inlines trial references and definitions down to primitives.
Program expand_derivation(const Curriculum& c, int t, const Program& derivation);

/// fat_cross := add(add(lh, reflect_horizontal(lh)), add(lv, reflect_vertical(lv)))
Program fat_cross();
/// Diagonal_Cross := add(diagonal, reflect_vertical(diagonal))
Program diagonal_cross();

/// The 14-trial sequential / long-range curriculum of the first experiment.
Curriculum build_e1();

// ---------------------------------------------------------------------------
// Operator groups

enum class GroupSlot { add = 1, subtract = 2, overlap = 3, add_invert = 4 };

struct OperatorGroup {
  Program h = Program::leaf(Primitive::blank);
  std::optional<Primitive> x;
  std::array<Grid, 4> targets;
  /// Prescribed derivations, fully expanded.
  std::array<Program, 4> prescribed = {Program::leaf(Primitive::blank), Program::leaf(Primitive::blank),
                                       Program::leaf(Primitive::blank), Program::leaf(Primitive::blank)};
};

/// {add(h, x), subtract(h, x), intersect(h, x), add(invert(h), x)}.
OperatorGroup generate_group(const Program& h, Primitive x, const Library& lib = {});
/// A group with explicit prescribed derivations (targets are their outputs).
OperatorGroup make_group(const std::array<Program, 4>& prescribed);

enum class CheckStatus { pass, fail, inconclusive };
std::string_view check_status_name(CheckStatus s);

struct PairCheck {
  int from = 0;  // 1-based slot whose target is injected as a helper
  int to = 0;    // 1-based slot being derived
  CheckStatus status = CheckStatus::pass;
  std::string reason;
  std::optional<Program> witness;  // references helper "c<from>"
  int witness_size = 0;            // expanded node count
  int prescribed_size = 0;
  std::int64_t candidates = 0;
};

struct GroupReport {
  CheckStatus status = CheckStatus::pass;
  std::vector<std::string> problems;  // duplicate / blank findings
  std::vector<PairCheck> pairs;
};

/// For every ordered pair (a, b), searches for a program that uses target a
/// (costed at its prescribed expanded size) and produces target b with an
/// expanded node count strictly below b's prescribed derivation.
/// `jobs` > 1 checks pairs concurrently; the report does not depend on it.
GroupReport validate_group(const OperatorGroup& g, const SynthesisBudget& budget = {}, int jobs = 1);

struct SequentialCheck {
  int index = 0;
  CheckStatus status = CheckStatus::pass;
  TrialKind annotated = TrialKind::root;
  TrialKind observed = TrialKind::root;
  int n = 0;
  std::string message;
  std::optional<Grid> expected;
  std::optional<Grid> actual;
};

struct SequentialReport {
  CheckStatus status = CheckStatus::pass;
  std::vector<SequentialCheck> trials;
};

/// Checks that every annotated derivation reproduces its target from earlier
/// trials and that the sequential / long-range labels match the distance.
SequentialReport validate_sequential(const Curriculum& c);

/// (h, x) pairs behind the shipped operator-group curriculum.
struct GroupSpec {
  std::string h_name;
  Program h;
  Primitive x;
};
std::vector<GroupSpec> e2_group_specs();
/// Four operator groups of four trials each.
Curriculum build_e2();
Curriculum build_from_groups(const std::string& name, const std::vector<GroupSpec>& specs);
/// The operator group of trials 4g-3..4g of a group curriculum.
OperatorGroup group_of(const Curriculum& c, int group_id);

}  // namespace pattern
