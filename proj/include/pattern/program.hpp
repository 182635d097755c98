#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pattern/grid.hpp"

namespace pattern {

class UnknownHelper : public std::invalid_argument {
 public:
  explicit UnknownHelper(const std::string& id)
      : std::invalid_argument("unknown helper: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class CyclicLibrary : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Library;

/// Immutable program tree over primitives, helper references and operators.
/// Nodes are shared; copying a Program is cheap.
class Program {
 public:
  enum class Kind { primitive, helper, unary, binary };

  static Program leaf(Primitive p);
  static Program helper(std::string id);
  static Program unary(Op op, Program child);
  static Program binary(Op op, Program left, Program right);
  /// Dispatches on the operator's arity.
  static Program apply(Op op, const std::vector<Program>& args);

  Kind kind() const { return node_->kind; }
  bool is_leaf() const { return node_->kind == Kind::primitive || node_->kind == Kind::helper; }
  Primitive primitive() const { return node_->primitive; }
  const std::string& helper_id() const { return node_->helper_id; }
  Op op() const { return node_->op; }
  std::size_t child_count() const { return node_->children.size(); }
  const Program& child(std::size_t i) const { return node_->children.at(i); }
  const std::vector<Program>& children() const { return node_->children; }

  /// Node count of this tree as written (a helper reference counts as one node).
  int authored_size() const { return node_->authored_size; }
  int authored_ops() const { return node_->authored_ops; }
  bool uses_helpers() const { return node_->uses_helpers; }

  /// S-expression style rendering, e.g. `add(line_horizontal,@h1)`.
  /// Two programs are structurally equal iff their renderings are equal.
  const std::string& text() const { return node_->text; }
  std::size_t structural_hash() const { return node_->hash; }

  friend bool operator==(const Program& a, const Program& b) {
    return a.node_ == b.node_ || (a.node_->hash == b.node_->hash && a.node_->text == b.node_->text);
  }

 private:
  struct Node {
    Kind kind = Kind::primitive;
    Primitive primitive = Primitive::blank;
    std::string helper_id;
    Op op = Op::add;
    std::vector<Program> children;
    int authored_size = 1;
    int authored_ops = 0;
    bool uses_helpers = false;
    std::string text;
    std::size_t hash = 0;
  };

  explicit Program(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Program finish(Node node);

  std::shared_ptr<const Node> node_;
};

/// Canonical total order: smaller authored size first, then by rendering.
bool canonical_less(const Program& a, const Program& b);

struct SizeReport {
  int node_count = 0;
  int op_count = 0;
  int leaf_count() const { return node_count - op_count; }
  friend bool operator==(const SizeReport&, const SizeReport&) = default;
};

struct LibraryEntry {
  std::string id;
  Program program;
  Grid output;
  int created_at_trial = 0;
  /// Sizes of the fully expanded helper program.
  SizeReport expanded_size;
};

/// Ordered, output-deduplicated set of helpers. Helper programs may only
/// reference helpers created before them.
class Library {
 public:
  Library() = default;

  /// Adds a helper. When a helper with the same output already exists this is
  /// a no-op and the existing id is returned. `id` is assigned when empty.
  std::string insert(const Program& program, int created_at_trial = 0, std::string id = {});

  const LibraryEntry* find(const std::string& id) const;
  const LibraryEntry& at(const std::string& id) const;
  const LibraryEntry* find_by_output(const Grid& g) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }

  const std::vector<LibraryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<LibraryEntry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<Grid, std::size_t> by_output_;
  int next_id_ = 1;
};

Grid evaluate(const Program& p, const Library& lib = {});
/// Inlines every helper reference.
Program expand(const Program& p, const Library& lib = {});
SizeReport size(const Program& p, const Library& lib = {});
/// Grid key of the program's output; equal keys iff observationally equivalent.
std::string canonical_key(const Program& p, const Library& lib = {});

/// Root path of a node: child indices from the root (0 = first/only operand).
using TreePath = std::vector<int>;

/// Positions in expand(p) whose subtree is structurally equal to expand(h).
std::vector<TreePath> subprogram_occurrences(const Program& h, const Program& p,
                                             const Library& lib = {});
/// Same matching on the trees as written, without inlining helpers.
std::vector<TreePath> authored_occurrences(const Program& h, const Program& p);

/// All distinct subtrees in post-order (first occurrence wins).
std::vector<Program> distinct_subtrees(const Program& p);

}  // namespace pattern

template <>
struct std::hash<pattern::Program> {
  std::size_t operator()(const pattern::Program& p) const noexcept { return p.structural_hash(); }
};
