#include "pattern/program.hpp"

#include <functional>
#include <unordered_set>

namespace pattern {

Program Program::finish(Node node) {
  switch (node.kind) {
    case Kind::primitive:
      node.text = std::string(primitive_name(node.primitive));
      node.authored_size = 1;
      node.authored_ops = 0;
      break;
    case Kind::helper:
      node.text = "@" + node.helper_id;
      node.authored_size = 1;
      node.authored_ops = 0;
      node.uses_helpers = true;
      break;
    case Kind::unary:
    case Kind::binary: {
      node.text = std::string(op_name(node.op)) + "(";
      node.authored_size = 1;
      node.authored_ops = 1;
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        const auto& c = node.children[i];
        if (i) node.text += ",";
        node.text += c.text();
        node.authored_size += c.authored_size();
        node.authored_ops += c.authored_ops();
        node.uses_helpers = node.uses_helpers || c.uses_helpers();
      }
      node.text += ")";
      break;
    }
  }
  node.hash = std::hash<std::string>{}(node.text);
  return Program(std::make_shared<const Node>(std::move(node)));
}

Program Program::leaf(Primitive p) {
  Node n;
  n.kind = Kind::primitive;
  n.primitive = p;
  return finish(std::move(n));
}

Program Program::helper(std::string id) {
  Node n;
  n.kind = Kind::helper;
  n.helper_id = std::move(id);
  return finish(std::move(n));
}

Program Program::unary(Op op, Program child) {
  if (arity(op) != 1) {
    throw ArityMismatch(std::string(op_name(op)) + " expects two operands");
  }
  Node n;
  n.kind = Kind::unary;
  n.op = op;
  n.children.push_back(std::move(child));
  return finish(std::move(n));
}

Program Program::binary(Op op, Program left, Program right) {
  if (arity(op) != 2) {
    throw ArityMismatch(std::string(op_name(op)) + " expects one operand");
  }
  Node n;
  n.kind = Kind::binary;
  n.op = op;
  n.children.push_back(std::move(left));
  n.children.push_back(std::move(right));
  return finish(std::move(n));
}

Program Program::apply(Op op, const std::vector<Program>& args) {
  if (static_cast<int>(args.size()) != arity(op)) {
    throw ArityMismatch(std::string(op_name(op)) + " expects " + std::to_string(arity(op)) +
                        " operand(s), got " + std::to_string(args.size()));
  }
  return args.size() == 1 ? unary(op, args[0]) : binary(op, args[0], args[1]);
}

bool canonical_less(const Program& a, const Program& b) {
  if (a.authored_size() != b.authored_size()) return a.authored_size() < b.authored_size();
  return a.text() < b.text();
}

// ---------------------------------------------------------------------------

std::string Library::insert(const Program& program, int created_at_trial, std::string id) {
  Grid out = evaluate(program, *this);
  if (const auto* existing = find_by_output(out)) return existing->id;
  if (id.empty()) {
    do {
      id = "h" + std::to_string(next_id_++);
    } while (by_id_.count(id));
  } else if (by_id_.count(id)) {
    throw std::invalid_argument("duplicate helper id: " + id);
  }
  LibraryEntry entry{id, program, out, created_at_trial, pattern::size(program, *this)};
  by_id_.emplace(id, entries_.size());
  by_output_.emplace(out, entries_.size());
  entries_.push_back(std::move(entry));
  return id;
}

const LibraryEntry* Library::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const LibraryEntry& Library::at(const std::string& id) const {
  if (const auto* e = find(id)) return *e;
  throw UnknownHelper(id);
}

const LibraryEntry* Library::find_by_output(const Grid& g) const {
  auto it = by_output_.find(g);
  return it == by_output_.end() ? nullptr : &entries_[it->second];
}

// ---------------------------------------------------------------------------

Grid evaluate(const Program& p, const Library& lib) {
  switch (p.kind()) {
    case Program::Kind::primitive: return primitive(p.primitive());
    case Program::Kind::helper: return lib.at(p.helper_id()).output;
    case Program::Kind::unary: return apply_unary(p.op(), evaluate(p.child(0), lib));
    case Program::Kind::binary:
      return apply_binary(p.op(), evaluate(p.child(0), lib), evaluate(p.child(1), lib));
  }
  return {};
}

namespace {

Program expand_impl(const Program& p, const Library& lib, std::vector<std::string>& stack) {
  if (!p.uses_helpers()) return p;
  switch (p.kind()) {
    case Program::Kind::helper: {
      const auto& id = p.helper_id();
      for (const auto& open : stack) {
        if (open == id) throw CyclicLibrary("helper " + id + " references itself");
      }
      const auto& entry = lib.at(id);
      stack.push_back(id);
      Program out = expand_impl(entry.program, lib, stack);
      stack.pop_back();
      return out;
    }
    case Program::Kind::unary:
      return Program::unary(p.op(), expand_impl(p.child(0), lib, stack));
    case Program::Kind::binary:
      return Program::binary(p.op(), expand_impl(p.child(0), lib, stack),
                             expand_impl(p.child(1), lib, stack));
    default: return p;
  }
}

void collect_matches(const Program& needle, const Program& hay, TreePath& path,
                     std::vector<TreePath>& out) {
  if (hay.authored_size() < needle.authored_size()) return;
  if (hay == needle) {
    out.push_back(path);
    return;  // a strict subtree of an equal tree cannot equal it
  }
  for (std::size_t i = 0; i < hay.child_count(); ++i) {
    path.push_back(static_cast<int>(i));
    collect_matches(needle, hay.child(i), path, out);
    path.pop_back();
  }
}

}  // namespace

Program expand(const Program& p, const Library& lib) {
  std::vector<std::string> stack;
  return expand_impl(p, lib, stack);
}

SizeReport size(const Program& p, const Library& lib) {
  switch (p.kind()) {
    case Program::Kind::primitive: return {1, 0};
    case Program::Kind::helper: {
      // Entries cache their expanded size at insertion.
      const auto& e = lib.at(p.helper_id());
      return e.expanded_size;
    }
    default: {
      SizeReport r{1, 1};
      for (const auto& c : p.children()) {
        auto s = size(c, lib);
        r.node_count += s.node_count;
        r.op_count += s.op_count;
      }
      return r;
    }
  }
}

std::string canonical_key(const Program& p, const Library& lib) { return evaluate(p, lib).key(); }

std::vector<TreePath> subprogram_occurrences(const Program& h, const Program& p,
                                             const Library& lib) {
  return authored_occurrences(expand(h, lib), expand(p, lib));
}

std::vector<TreePath> authored_occurrences(const Program& h, const Program& p) {
  std::vector<TreePath> out;
  TreePath path;
  collect_matches(h, p, path, out);
  return out;
}

std::vector<Program> distinct_subtrees(const Program& p) {
  std::vector<Program> out;
  std::unordered_set<Program> seen;
  std::function<void(const Program&)> visit = [&](const Program& node) {
    for (const auto& c : node.children()) visit(c);
    if (seen.insert(node).second) out.push_back(node);
  };
  visit(p);
  return out;
}

}  // namespace pattern
