#include "pattern/llm_harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace pattern::llm {

std::string_view prompt_mode_name(PromptMode m) {
  return m == PromptMode::memoryless ? "memoryless" : "with_history";
}

std::string_view rule_name(Rule r) {
  switch (r) {
    case Rule::syntax: return "SyntaxError";
    case Rule::forbidden_loop: return "ForbiddenConstruct(loop)";
    case Rule::forbidden_comprehension: return "ForbiddenConstruct(comprehension)";
    case Rule::forbidden_import: return "ForbiddenConstruct(import)";
    case Rule::forbidden_literal: return "ForbiddenConstruct(literal)";
    case Rule::forbidden_index: return "ForbiddenConstruct(index)";
    case Rule::forbidden_attribute: return "ForbiddenConstruct(attribute)";
    case Rule::forbidden_parameters: return "ForbiddenConstruct(parameters)";
    case Rule::redefinition: return "Redefinition";
    case Rule::unknown_name: return "UnknownName";
    case Rule::wrong_arity: return "WrongArity";
    case Rule::missing_reconstructed: return "MissingReconstructed";
  }
  return "?";
}

std::string Diagnostic::render() const {
  std::ostringstream os;
  os << line << ':' << column << ": " << rule_name(rule) << ": " << message;
  return os.str();
}

namespace {

// ---------------------------------------------------------------------------
// Lexing

enum class Tk { name, number, string, lparen, rparen, lbracket, rbracket, lbrace, rbrace, comma, equals, colon, dot, arrow, other };

struct Tok {
  Tk kind;
  std::string text;
  int line;
  int col;
};

struct LogicalLine {
  int line = 0;    // first physical line
  int indent = 0;  // tab stops of 8
  int last_line = 0;
  std::vector<Tok> toks;
};

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int indent_width(std::string_view s, std::size_t* body_start) {
  int w = 0;
  std::size_t i = 0;
  for (; i < s.size(); ++i) {
    if (s[i] == ' ') ++w;
    else if (s[i] == '\t') w = (w / 8 + 1) * 8;
    else break;
  }
  if (body_start) *body_start = i;
  return w;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool skipped_line(const std::string& t) {
  return t.empty() || t.rfind("```", 0) == 0 || t == "--- Start ---" || t == "--- End ---";
}

/// Strips a trailing comment, leaving quoted text intact.
std::string strip_comment(const std::string& s) {
  char quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

void lex_into(const std::string& s, int line, int col0, std::vector<Tok>& out, int& depth) {
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    int col = col0 + static_cast<int>(i);
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (name_start(c)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      out.push_back({Tk::name, s.substr(i, j - i), line, col});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && (name_char(s[j]) || s[j] == '.')) ++j;
      out.push_back({Tk::number, s.substr(i, j - i), line, col});
      i = j;
    } else if (c == '\'' || c == '"') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != c) j += (s[j] == '\\') ? 2 : 1;
      j = std::min(j + 1, s.size());
      out.push_back({Tk::string, s.substr(i, j - i), line, col});
      i = j;
    } else {
      Tk k = Tk::other;
      std::size_t len = 1;
      switch (c) {
        case '(': k = Tk::lparen; ++depth; break;
        case ')': k = Tk::rparen; --depth; break;
        case '[': k = Tk::lbracket; ++depth; break;
        case ']': k = Tk::rbracket; --depth; break;
        case '{': k = Tk::lbrace; ++depth; break;
        case '}': k = Tk::rbrace; --depth; break;
        case ',': k = Tk::comma; break;
        case ':': k = Tk::colon; break;
        case '.': k = Tk::dot; break;
        case '=':
          if (i + 1 < s.size() && s[i + 1] == '=') len = 2;
          else k = Tk::equals;
          break;
        case '-':
          if (i + 1 < s.size() && s[i + 1] == '>') { k = Tk::arrow; len = 2; }
          break;
        default: break;
      }
      if (k == Tk::other && i + 1 < s.size() && s[i + 1] == '=' && c != '=') len = 2;
      out.push_back({k, s.substr(i, len), line, col});
      i += len;
    }
  }
}

struct SourceLines {
  std::vector<LogicalLine> lines;
  std::vector<std::string> physical;  // 1-based via index - 1
};

SourceLines split_lines(std::string_view text) {
  SourceLines out;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    out.physical.push_back(raw);
  }
  LogicalLine pending;
  int depth = 0;
  bool open = false;
  for (std::size_t n = 0; n < out.physical.size(); ++n) {
    int line = static_cast<int>(n) + 1;
    std::string body = strip_comment(out.physical[n]);
    std::string t = trim(body);
    if (!open && skipped_line(t)) continue;
    bool continued = !t.empty() && t.back() == '\\';
    if (continued) body = body.substr(0, body.rfind('\\'));
    std::size_t start = 0;
    int w = indent_width(body, &start);
    if (!open) {
      pending = LogicalLine{line, w, line, {}};
      depth = 0;
    }
    pending.last_line = line;
    lex_into(body.substr(start), line, static_cast<int>(start) + 1, pending.toks, depth);
    open = depth > 0 || continued;
    if (!open && !pending.toks.empty()) out.lines.push_back(std::move(pending));
  }
  if (open && !pending.toks.empty()) out.lines.push_back(std::move(pending));
  return out;
}

// ---------------------------------------------------------------------------
// Construct screening

const std::set<std::string>& other_keywords() {
  static const std::set<std::string> k = {
      "if",   "elif",   "else",  "try",    "except", "finally",  "with",  "class", "lambda", "yield",
      "pass", "global", "nonlocal", "assert", "raise", "del",   "break", "continue", "await",
      "async", "and",   "or",    "not",    "is",     "in",       "as"};
  return k;
}

bool is_literal_name(const std::string& s) { return s == "True" || s == "False" || s == "None"; }

/// Adds diagnostics for constructs outside the closed language; returns true
/// when any were found.
bool screen(const LogicalLine& l, std::vector<Diagnostic>& diags) {
  std::set<Rule> seen;
  auto flag = [&](Rule r, const Tok& t, std::string msg) {
    if (seen.insert(r).second) diags.push_back({r, t.line, t.col, std::move(msg)});
  };
  const auto& toks = l.toks;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Tok& t = toks[i];
    bool first = i == 0;
    switch (t.kind) {
      case Tk::name:
        if (t.text == "import" || (t.text == "from" && first)) {
          flag(Rule::forbidden_import, t, "imports are not allowed");
        } else if (t.text == "for" || t.text == "while") {
          if (first || (i == 1 && toks[0].text == "async")) flag(Rule::forbidden_loop, t, "loops are not allowed");
          else if (t.text == "for") flag(Rule::forbidden_comprehension, t, "comprehensions are not allowed");
          else flag(Rule::forbidden_loop, t, "loops are not allowed");
        } else if (is_literal_name(t.text)) {
          flag(Rule::forbidden_literal, t, "literal '" + t.text + "' is not allowed");
        } else if (other_keywords().count(t.text) && !(t.text == "async" && i + 1 < toks.size() && toks[i + 1].text == "for")) {
          flag(Rule::syntax, t, "'" + t.text + "' is not supported");
        }
        break;
      case Tk::number:
      case Tk::string:
        flag(Rule::forbidden_literal, t, "literal " + t.text + " is not allowed");
        break;
      case Tk::dot:
        flag(Rule::forbidden_attribute, t, "attribute access is not allowed");
        break;
      case Tk::lbracket:
        if (i > 0 && (toks[i - 1].kind == Tk::name || toks[i - 1].kind == Tk::rparen ||
                      toks[i - 1].kind == Tk::rbracket)) {
          flag(Rule::forbidden_index, t, "indexing is not allowed");
        } else {
          bool comp = false;
          for (std::size_t j = i + 1; j < toks.size(); ++j)
            if (toks[j].kind == Tk::name && toks[j].text == "for") comp = true;
          if (!comp) flag(Rule::forbidden_literal, t, "array literals are not allowed");
        }
        break;
      case Tk::lbrace: {
        bool comp = false;
        for (std::size_t j = i + 1; j < toks.size(); ++j)
          if (toks[j].kind == Tk::name && toks[j].text == "for") comp = true;
        if (!comp) flag(Rule::forbidden_literal, t, "literals are not allowed");
        break;
      }
      case Tk::other:
        flag(Rule::syntax, t, "operator '" + t.text + "' is not allowed; use the transformation functions");
        break;
      default: break;
    }
  }
  return !seen.empty();
}

// ---------------------------------------------------------------------------
// Structure

class LineParser {
 public:
  LineParser(const std::vector<Tok>& toks, const LogicalLine& l) : toks_(toks), line_(l) {}

  bool at_end() const { return pos_ >= toks_.size(); }
  const Tok* peek() const { return at_end() ? nullptr : &toks_[pos_]; }
  const Tok& next() { return toks_[pos_++]; }
  std::size_t pos() const { return pos_; }

  std::optional<Diagnostic> error_here(std::string msg) const {
    if (at_end()) {
      int col = toks_.empty() ? 1 : toks_.back().col + static_cast<int>(toks_.back().text.size());
      int line = toks_.empty() ? line_.line : toks_.back().line;
      return Diagnostic{Rule::syntax, line, col, std::move(msg)};
    }
    return Diagnostic{Rule::syntax, toks_[pos_].line, toks_[pos_].col, std::move(msg)};
  }

  /// expr := NAME | NAME '(' [expr (',' expr)* [',']] ')' | '(' expr ')'
  std::optional<Expr> expr(std::optional<Diagnostic>& err) {
    const Tok* t = peek();
    if (!t) {
      err = error_here("expected an expression");
      return std::nullopt;
    }
    if (t->kind == Tk::lparen) {
      next();
      auto inner = expr(err);
      if (!inner) return std::nullopt;
      if (!peek() || peek()->kind != Tk::rparen) {
        err = error_here(peek() && peek()->kind == Tk::comma ? "tuples are not allowed" : "expected ')'");
        return std::nullopt;
      }
      next();
      return inner;
    }
    if (t->kind != Tk::name) {
      err = error_here("expected a name or a call");
      return std::nullopt;
    }
    Expr e;
    e.name = t->text;
    e.line = t->line;
    e.column = t->col;
    next();
    if (peek() && peek()->kind == Tk::lparen) {
      next();
      e.kind = Expr::Kind::call;
      if (peek() && peek()->kind == Tk::rparen) {
        next();
      } else {
        while (true) {
          if (peek() && peek()->kind == Tk::name && pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == Tk::equals) {
            err = error_here("keyword arguments are not allowed");
            return std::nullopt;
          }
          auto arg = expr(err);
          if (!arg) return std::nullopt;
          e.args.push_back(std::move(*arg));
          if (peek() && peek()->kind == Tk::comma) {
            next();
            if (peek() && peek()->kind == Tk::rparen) {
              next();
              break;
            }
            continue;
          }
          if (peek() && peek()->kind == Tk::rparen) {
            next();
            break;
          }
          err = error_here("expected ',' or ')'");
          return std::nullopt;
        }
      }
      if (peek() && peek()->kind == Tk::lparen) {
        err = error_here("a call result cannot be called");
        return std::nullopt;
      }
    }
    return e;
  }

 private:
  const std::vector<Tok>& toks_;
  const LogicalLine& line_;
  std::size_t pos_ = 0;
};

struct Statement {
  bool is_return = false;
  std::string target;
  Expr value;
  int line = 0;
};

std::optional<Statement> parse_statement(const std::vector<Tok>& toks, const LogicalLine& l,
                                         std::vector<Diagnostic>& diags) {
  LineParser p(toks, l);
  Statement st;
  st.line = toks.empty() ? l.line : toks.front().line;
  std::optional<Diagnostic> err;
  const Tok* t = p.peek();
  if (t && t->kind == Tk::name && t->text == "return") {
    p.next();
    st.is_return = true;
  } else if (t && t->kind == Tk::name && t->text == "def") {
    diags.push_back({Rule::syntax, t->line, t->col, "nested function definitions are not allowed"});
    return std::nullopt;
  } else if (t && t->kind == Tk::name && toks.size() >= 2 && toks[1].kind == Tk::equals) {
    st.target = t->text;
    p.next();
    p.next();
  } else {
    auto d = p.error_here(toks.size() >= 2 && toks[1].kind == Tk::comma
                              ? "unpacking assignments are not allowed"
                              : "expected 'name = expression' or 'return expression'");
    diags.push_back(*d);
    return std::nullopt;
  }
  auto e = p.expr(err);
  if (e && !p.at_end()) err = p.error_here("unexpected '" + p.peek()->text + "'");
  if (err) {
    diags.push_back(*err);
    return std::nullopt;
  }
  st.value = std::move(*e);
  return st;
}

std::string dedent_block(const std::vector<std::string>& physical, int first, int last, int indent) {
  std::string out;
  for (int n = first; n <= last; ++n) {
    const std::string raw = strip_comment(physical[static_cast<std::size_t>(n - 1)]);
    std::string t = trim(raw);
    if (skipped_line(t) || t.rfind('#', 0) == 0) continue;
    std::string expanded;
    for (char c : raw) {
      if (c == '\t') expanded.append(8 - expanded.size() % 8, ' ');
      else expanded.push_back(c);
    }
    std::size_t cut = 0;
    while (cut < expanded.size() && cut < static_cast<std::size_t>(indent) && expanded[cut] == ' ') ++cut;
    std::string line = expanded.substr(cut);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    out += line;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// Name resolution

struct TransformSig {
  const char* name;
  Op op;
};
constexpr std::array<TransformSig, 7> kTransforms = {{{"add", Op::add},
                                                      {"subtract", Op::subtract},
                                                      {"intersect", Op::intersect},
                                                      {"invert", Op::invert},
                                                      {"reflect_horizontal", Op::reflect_horizontal},
                                                      {"reflect_vertical", Op::reflect_vertical},
                                                      {"reflect_diag", Op::reflect_diag}}};

std::optional<Op> find_transform(const std::string& name) {
  for (const auto& t : kTransforms)
    if (name == t.name) return t.op;
  return std::nullopt;
}

bool reserved(const std::string& name) {
  return find_primitive(name).has_value() || find_transform(name).has_value() || name == "np";
}

class Resolver {
 public:
  Resolver(const NameScope& scope, std::vector<Diagnostic>& diags) : diags_(diags) {
    carried_.insert(scope.carried_helpers.begin(), scope.carried_helpers.end());
  }

  void run(std::vector<FunctionDef>& fns) {
    for (std::size_t i = 0; i < fns.size(); ++i) {
      FunctionDef& f = fns[i];
      if (reserved(f.name)) {
        diags_.push_back({Rule::redefinition, f.line, 1, "'" + f.name + "' is provided and cannot be redefined"});
      } else if (defined_.count(f.name)) {
        diags_.push_back({Rule::redefinition, f.line, 1, "function '" + f.name + "' is defined twice"});
      }
      std::set<std::string> locals;
      for (Binding& b : f.bindings) {
        resolve(b.value, locals);
        if (reserved(b.name) || defined_.count(b.name) || carried_.count(b.name) || b.name == f.name) {
          diags_.push_back({Rule::redefinition, b.value.line, 1,
                            "'" + b.name + "' names a provided value or function and cannot be rebound"});
        }
        locals.insert(b.name);
      }
      resolve(f.result, locals);
      defined_[f.name] = static_cast<int>(i);
    }
  }

 private:
  void resolve(Expr& e, const std::set<std::string>& locals) {
    using Ref = Expr::Ref;
    auto fn = defined_.find(e.name);
    bool is_fn = fn != defined_.end();
    bool is_carried = !is_fn && carried_.count(e.name);
    auto transform = find_transform(e.name);
    auto prim = find_primitive(e.name);
    if (e.kind == Expr::Kind::name) {
      if (locals.count(e.name)) e.ref = Ref::local;
      else if (prim) e.ref = Ref::primitive;
      else if (transform || is_fn || is_carried)
        diags_.push_back({Rule::wrong_arity, e.line, e.column, "'" + e.name + "' is a function and must be called"});
      else
        diags_.push_back({Rule::unknown_name, e.line, e.column, "name '" + e.name + "' is not defined"});
      return;
    }
    for (Expr& a : e.args) resolve(a, locals);
    int n = static_cast<int>(e.args.size());
    if (transform) {
      e.ref = Ref::transform;
      int want = arity(*transform);
      if (n != want)
        diags_.push_back({Rule::wrong_arity, e.line, e.column,
                          e.name + " takes " + std::to_string(want) + " argument(s), " + std::to_string(n) + " given"});
    } else if (is_fn || is_carried) {
      e.ref = is_fn ? Ref::function : Ref::carried;
      if (is_fn) e.function_index = fn->second;
      if (n != 0)
        diags_.push_back({Rule::wrong_arity, e.line, e.column,
                          e.name + " takes 0 arguments, " + std::to_string(n) + " given"});
    } else if (prim || locals.count(e.name)) {
      diags_.push_back({Rule::wrong_arity, e.line, e.column, "'" + e.name + "' is an array and cannot be called"});
    } else {
      diags_.push_back({Rule::unknown_name, e.line, e.column, "name '" + e.name + "' is not defined"});
    }
  }

  std::vector<Diagnostic>& diags_;
  std::set<std::string> carried_;
  std::map<std::string, int> defined_;
};

}  // namespace

ParseResult parse_constrained(std::string_view text, const NameScope& scope) {
  ParseResult result;
  auto& diags = result.diagnostics;
  SourceLines src = split_lines(text);
  std::vector<FunctionDef> fns;

  std::size_t i = 0;
  while (i < src.lines.size()) {
    const LogicalLine& l = src.lines[i];
    const auto& toks = l.toks;
    bool is_def = toks.front().kind == Tk::name && toks.front().text == "def";
    if (!is_def) {
      if (!screen(l, diags))
        diags.push_back({Rule::syntax, l.line, toks.front().col, "only function definitions are allowed at the top level"});
      ++i;
      continue;
    }
    // Body extent first, so a bad header still skips its body.
    std::size_t j = i + 1;
    while (j < src.lines.size() && src.lines[j].indent > l.indent) ++j;

    FunctionDef f;
    f.line = l.line;
    std::vector<Tok> inline_body;
    bool header_ok = true;
    {
      if (screen(l, diags)) header_ok = false;
      std::size_t p = 1;
      if (p >= toks.size() || toks[p].kind != Tk::name) {
        diags.push_back({Rule::syntax, l.line, toks.front().col, "expected a function name after 'def'"});
        header_ok = false;
      } else {
        f.name = toks[p++].text;
        if (p >= toks.size() || toks[p].kind != Tk::lparen) {
          diags.push_back({Rule::syntax, l.line, toks[p - 1].col, "expected '(' after the function name"});
          header_ok = false;
        } else {
          ++p;
          if (p < toks.size() && toks[p].kind != Tk::rparen) {
            diags.push_back({Rule::forbidden_parameters, toks[p].line, toks[p].col,
                             "functions must take no parameters"});
            header_ok = false;
            while (p < toks.size() && toks[p].kind != Tk::rparen) ++p;
          }
          if (p < toks.size()) ++p;
          if (header_ok && p < toks.size() && toks[p].kind == Tk::arrow) {
            diags.push_back({Rule::syntax, toks[p].line, toks[p].col, "annotations are not allowed"});
            header_ok = false;
          }
          if (header_ok && (p >= toks.size() || toks[p].kind != Tk::colon)) {
            diags.push_back({Rule::syntax, l.line, toks.back().col, "expected ':' after the parameter list"});
            header_ok = false;
          }
          ++p;
          for (; p < toks.size(); ++p) inline_body.push_back(toks[p]);
        }
      }
    }

    std::vector<Statement> stmts;
    bool body_ok = header_ok;
    auto take = [&](const std::vector<Tok>& body, const LogicalLine& owner) {
      if (!body_ok) return;
      auto st = parse_statement(body, owner, diags);
      if (!st) body_ok = false;
      else stmts.push_back(std::move(*st));
    };
    if (!inline_body.empty()) take(inline_body, l);
    int body_indent = -1;
    for (std::size_t k = i + 1; k < j; ++k) {
      const LogicalLine& b = src.lines[k];
      if (screen(b, diags)) {
        body_ok = false;
        continue;
      }
      if (body_indent < 0) body_indent = b.indent;
      if (b.indent != body_indent) {
        diags.push_back({Rule::syntax, b.line, 1, "inconsistent indentation"});
        body_ok = false;
        continue;
      }
      take(b.toks, b);
    }
    if (header_ok && body_ok) {
      if (stmts.empty() || !stmts.back().is_return) {
        diags.push_back({Rule::syntax, l.line, 1, "function '" + f.name + "' must end with a return statement"});
      } else {
        bool ok = true;
        for (std::size_t k = 0; k + 1 < stmts.size(); ++k) {
          if (stmts[k].is_return) {
            diags.push_back({Rule::syntax, stmts[k + 1].line, 1, "statements after return are not allowed"});
            ok = false;
            break;
          }
          f.bindings.push_back({stmts[k].target, std::move(stmts[k].value)});
        }
        if (ok) {
          f.result = std::move(stmts.back().value);
          f.text = dedent_block(src.physical, l.line, src.lines[j - 1].last_line, l.indent);
          fns.push_back(std::move(f));
        }
      }
    }
    i = j;
  }

  if (diags.empty()) {
    Resolver(scope, diags).run(fns);
    auto it = std::find_if(fns.begin(), fns.end(), [](const FunctionDef& f) { return f.name == "reconstructed"; });
    if (it == fns.end()) {
      diags.push_back({Rule::missing_reconstructed, 1, 1, "define a function named reconstructed()"});
    } else if (it + 1 != fns.end()) {
      diags.push_back({Rule::missing_reconstructed, (it + 1)->line, 1, "reconstructed() must be the last function"});
    }
  }
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.line, a.column) < std::tie(b.line, b.column);
  });
  if (diags.empty()) result.source = ConstrainedSource{std::string(text), std::move(fns)};
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation and lowering

namespace {

std::string function_token(const FunctionDef& f, int index, const Library& carried) {
  return carried.contains(f.name) ? f.name + "#" + std::to_string(index) : f.name;
}

struct Lowered {
  Program authored;
  Program expanded;
  Grid grid;
};

class Lowerer {
 public:
  Lowerer(const ConstrainedSource& cs, const Library& carried) : cs_(cs), carried_(carried) {}

  LoweringResult run() {
    LoweringResult out;
    for (std::size_t i = 0; i < cs_.functions.size(); ++i) {
      const FunctionDef& f = cs_.functions[i];
      std::unordered_map<std::string, Lowered> locals;
      for (const Binding& b : f.bindings) locals.insert_or_assign(b.name, lower(b.value, locals));
      Lowered r = lower(f.result, locals);
      fns_.push_back(r);
      if (i + 1 < cs_.functions.size()) {
        out.new_helpers.push_back({f.name, r.authored, r.expanded, r.grid, f.text});
      } else {
        out.grid = r.grid;
        out.lowered = r.expanded;
        out.authored = r.authored;
      }
    }
    return out;
  }

 private:
  Lowered lower(const Expr& e, const std::unordered_map<std::string, Lowered>& locals) {
    using Ref = Expr::Ref;
    switch (e.ref) {
      case Ref::local: return locals.at(e.name);
      case Ref::primitive: {
        Primitive p = parse_primitive(e.name);
        return {Program::leaf(p), Program::leaf(p), primitive(p)};
      }
      case Ref::function: {
        const Lowered& f = fns_.at(static_cast<std::size_t>(e.function_index));
        const FunctionDef& def = cs_.functions[static_cast<std::size_t>(e.function_index)];
        return {Program::helper(function_token(def, e.function_index, carried_)), f.expanded, f.grid};
      }
      case Ref::carried: {
        const LibraryEntry& h = carried_.at(e.name);
        return {Program::helper(e.name), expand(h.program, carried_), h.output};
      }
      case Ref::transform: {
        Op op = parse_op(e.name);
        std::vector<Program> authored, expanded;
        std::vector<Grid> grids;
        for (const Expr& a : e.args) {
          Lowered l = lower(a, locals);
          authored.push_back(l.authored);
          expanded.push_back(l.expanded);
          grids.push_back(l.grid);
        }
        Grid g = is_binary(op) ? apply_binary(op, grids[0], grids[1]) : apply_unary(op, grids[0]);
        return {Program::apply(op, authored), Program::apply(op, expanded), g};
      }
      case Ref::none: break;
    }
    throw std::logic_error("unresolved name in validated source: " + e.name);
  }

  const ConstrainedSource& cs_;
  const Library& carried_;
  std::vector<Lowered> fns_;
};

Grid eval_direct(const Expr& e, const std::unordered_map<std::string, Grid>& locals, const std::vector<Grid>& fns,
                 const Library& carried) {
  using Ref = Expr::Ref;
  switch (e.ref) {
    case Ref::local: return locals.at(e.name);
    case Ref::primitive: return primitive(e.name);
    case Ref::function: return fns.at(static_cast<std::size_t>(e.function_index));
    case Ref::carried: return carried.at(e.name).output;
    case Ref::transform: {
      Op op = parse_op(e.name);
      if (is_binary(op))
        return apply_binary(op, eval_direct(e.args[0], locals, fns, carried), eval_direct(e.args[1], locals, fns, carried));
      return apply_unary(op, eval_direct(e.args[0], locals, fns, carried));
    }
    case Ref::none: break;
  }
  throw std::logic_error("unresolved name in validated source: " + e.name);
}

void render_expr(const Program& p, std::ostream& os) {
  switch (p.kind()) {
    case Program::Kind::primitive: os << primitive_name(p.primitive()); return;
    case Program::Kind::helper: os << p.helper_id() << "()"; return;
    default: break;
  }
  os << op_name(p.op()) << '(';
  for (std::size_t i = 0; i < p.child_count(); ++i) {
    if (i) os << ", ";
    render_expr(p.child(i), os);
  }
  os << ')';
}

Program rename_helpers(const Program& p, const std::map<std::string, std::string>& names) {
  switch (p.kind()) {
    case Program::Kind::primitive: return p;
    case Program::Kind::helper: {
      auto it = names.find(p.helper_id());
      return it == names.end() ? p : Program::helper(it->second);
    }
    default: break;
  }
  std::vector<Program> kids;
  for (const Program& c : p.children()) kids.push_back(rename_helpers(c, names));
  return Program::apply(p.op(), kids);
}

void collect_helper_refs(const Program& p, std::set<std::string>& out) {
  if (p.kind() == Program::Kind::helper) out.insert(p.helper_id());
  for (const Program& c : p.children()) collect_helper_refs(c, out);
}

}  // namespace

LoweringResult lower_and_run(const ConstrainedSource& cs, const Library& carried) {
  return Lowerer(cs, carried).run();
}

Grid evaluate_direct(const ConstrainedSource& cs, const Library& carried) {
  std::vector<Grid> fns;
  for (const FunctionDef& f : cs.functions) {
    std::unordered_map<std::string, Grid> locals;
    for (const Binding& b : f.bindings) locals.insert_or_assign(b.name, eval_direct(b.value, locals, fns, carried));
    fns.push_back(eval_direct(f.result, locals, fns, carried));
  }
  return fns.back();
}

std::string render_function(const std::string& name, const Program& p) {
  std::ostringstream os;
  os << "def " << name << "():\n    return ";
  render_expr(p, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

constexpr const char* kIntroHistory =
    "You will be given a sequence of tasks where you will write functions to\n"
    "produce 10x10 binary arrays.\n"
    "\n"
    "The tasks will be given one trial at a time, along with the history of\n"
    "tasks you completed in previous trials.\n"
    "\n"
    "On each trial, you will be given:\n"
    "(1) a target 10x10 binary array,\n"
    "(2) a set of geometric PRIMITIVES as 10x10 binary arrays, and\n"
    "    TRANSFORMATION operations as Python functions, and\n"
    "(3) any helper functions you wrote to complete the tasks on previous\n"
    "    trials.\n"
    "\n"
    "The PRIMITIVES and TRANSFORMATIONS are stable and shared across trials.\n"
    "Helper functions carry forward to all subsequent trials and may be reused.\n"
    "\n"
    "On each trial, you will be given Python starter code with gaps to fill in.\n";

constexpr const char* kIntroMemoryless =
    "You will be given a task where you will write functions to produce\n"
    "10x10 binary arrays.\n"
    "\n"
    "You will be given:\n"
    "(1) a target 10x10 binary array,\n"
    "(2) a set of geometric PRIMITIVES as 10x10 binary arrays, and\n"
    "    TRANSFORMATION operations as Python functions, and\n"
    "(3) any helper functions that are available to you.\n"
    "\n"
    "You will be given Python starter code with gaps to fill in.\n";

constexpr const char* kRules =
    "CRITICAL RULES:\n"
    "1. You must NOT create new primitives, hardcode any array elements in the\n"
    "   output, redefine any provided variables or functions --- always call\n"
    "   PRIMITIVES and TRANSFORMATION FUNCTIONS directly.\n"
    "2. You may NOT use loops, list comprehensions, or import anything.\n"
    "3. All reconstructions MUST be done using the provided PRIMITIVES,\n"
    "   TRANSFORMATIONS, and helpers only.\n"
    "4. Helpers must derive entirely from the provided PRIMITIVES,\n"
    "   TRANSFORMATIONS and prior helpers.\n"
    "5. Write Python code only. Do not include any comments or explanations.\n";

constexpr const char* kTransformText =
    "TRANSFORMATION FUNCTIONS:\n"
    "\n"
    "def add(a, b):\n"
    "    return np.logical_or(a, b).astype(int)\n"
    "\n"
    "def subtract(a, b):\n"
    "    return np.logical_and(a, np.logical_not(b)).astype(int)\n"
    "\n"
    "def intersect(a, b):\n"
    "    return np.logical_and(a, b).astype(int)\n"
    "\n"
    "def invert(a):\n"
    "    return np.logical_not(a).astype(int)\n"
    "\n"
    "def reflect_horizontal(a):\n"
    "    return np.flipud(a)\n"
    "\n"
    "def reflect_vertical(a):\n"
    "    return np.fliplr(a)\n"
    "\n"
    "def reflect_diag(a):\n"
    "    return a.T\n";

std::string primitive_block(Primitive p) {
  const Grid& g = primitive(p);
  std::ostringstream os;
  os << primitive_name(p) << " = [\n";
  for (int r = 0; r < kGridSide; ++r) {
    os << "    [";
    for (int c = 0; c < kGridSide; ++c) os << (c ? ", " : "") << (g.at(r, c) ? 1 : 0);
    os << ']' << (r + 1 < kGridSide ? "," : "") << '\n';
  }
  os << "]\n";
  return os.str();
}

std::string example_block() {
  Grid g = add(primitive(Primitive::line_horizontal), primitive(Primitive::line_vertical));
  std::ostringstream os;
  os << "EXAMPLE:\n\nUsing add(a, b) transformation\n\nTarget:\n[";
  for (int r = 0; r < kGridSide; ++r) {
    os << '[';
    for (int c = 0; c < kGridSide; ++c) os << (c ? "," : "") << (g.at(r, c) ? 1 : 0);
    os << ']';
    if (r + 1 < kGridSide) os << (r % 3 == 2 ? ",\n" : ", \n");
  }
  os << "]\n\nSolution:\ndef reconstructed():\n    return add(line_horizontal, line_vertical)\n";
  return os.str();
}

std::string starter_block(const std::vector<CarriedHelper>& helpers) {
  std::ostringstream os;
  os << "Do not include any comments or imports in your response.\n"
     << "Respond by completing the following code:\n\n--- Start ---\n\n";
  if (!helpers.empty()) {
    os << "# You previously found these helpers useful (remove comment)\n\n";
    for (const auto& h : helpers) os << h.source << "\n\n";
  }
  os << "# Define any new helpers here (remove comment)\n\n"
     << "def reconstructed():\n    # Your code here (remove comment)\n\n--- End ---\n";
  return os.str();
}

}  // namespace

void PromptContext::validate() const {
  if (attempt_index < 1 || attempt_index > kMaxAttempts)
    throw std::invalid_argument("attempt_index must be in 1.." + std::to_string(kMaxAttempts));
  if (trial < 1 || trial > total_trials) throw std::invalid_argument("trial must be in 1..total_trials");
  if (mode == PromptMode::memoryless && !history.empty())
    throw std::invalid_argument("memoryless prompts carry no history");
  if (attempt_index > 1 && !last_failure) throw std::invalid_argument("refinement attempts need the last failure");
}

std::string build_prompt(const PromptContext& ctx) {
  ctx.validate();
  std::ostringstream os;
  os << (ctx.mode == PromptMode::with_history ? kIntroHistory : kIntroMemoryless) << '\n' << kRules << '\n';
  os << "PRIMITIVES:\n\n";
  for (Primitive p : kPrimitives) os << primitive_block(p) << '\n';
  os << kTransformText << '\n' << example_block() << '\n';

  if (ctx.mode == PromptMode::with_history)
    os << "This is trial " << ctx.trial << " of " << ctx.total_trials << ".\n\n";
  os << "Target:\n" << format_rows(ctx.target) << "\n\n";

  os << starter_block(ctx.carried_helpers);

  if (ctx.mode == PromptMode::with_history && !ctx.history.empty()) {
    os << "\nBelow is the history of figures you've built on previous trials.\n";
    for (std::size_t i = 0; i < ctx.history.size(); ++i) {
      os << "\nTarget " << i + 1 << ":\n\n"
         << format_rows(ctx.history[i].target) << "\n\n"
         << (ctx.history[i].built_correctly ? "Built Correctly." : "Built Incorrectly.") << '\n';
    }
  }

  if (ctx.last_failure) {
    const FailureFeedback& f = *ctx.last_failure;
    int prev = ctx.attempt_index - 1;
    os << "\nNote: Your previous response was incorrect.\n"
       << "This was attempt " << prev << " of " << kMaxAttempts << ". You have " << kMaxAttempts - prev
       << " attempt(s) remaining.\n\n"
       << "Your code:\n" << f.source << "\n\n";
    if (f.produced) {
      os << "This is what your code produced:\n" << format_rows(*f.produced) << "\n\n";
    } else {
      os << "Your code could not be run:\n";
      for (const auto& d : f.diagnostics) os << d << '\n';
      os << '\n';
    }
    os << "This is the target you need to produce:\n" << format_rows(ctx.target) << "\n\nPlease try again.\n";
  }
  return os.str();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backends and trials

std::string ScriptedBackend::complete(const std::string& prompt) {
  prompts_.push_back(prompt);
  if (responses_.empty()) return {};
  const std::string& r = responses_[std::min(next_, responses_.size() - 1)];
  ++next_;
  return r;
}

std::vector<CarriedHelper> CarriedLibrary::prompt_helpers() const {
  std::vector<CarriedHelper> out;
  const auto& entries = library.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) out.push_back({entries[i].id, sources[i], entries[i].program});
  return out;
}

nlohmann::json transcript_to_json(const TrialTranscript& t) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : t.attempts) {
    nlohmann::json produced = nullptr;
    if (a.produced) produced = a.produced->rows();
    attempts.push_back({{"attempt", a.attempt},
                        {"prompt_hash", a.prompt_hash},
                        {"source", a.source},
                        {"diagnostics", a.diagnostics},
                        {"produced_grid", produced},
                        {"correct", a.correct}});
  }
  return {{"mode", prompt_mode_name(t.mode)},
          {"trial", t.trial},
          {"solved", t.solved},
          {"attempts", std::move(attempts)},
          {"new_helpers", t.new_helpers}};
}

namespace {

std::string unique_id(const Library& lib, const std::string& base, int trial) {
  if (!lib.contains(base)) return base;
  std::string id = base + "_t" + std::to_string(trial);
  for (int n = 2; lib.contains(id); ++n) id = base + "_t" + std::to_string(trial) + "_" + std::to_string(n);
  return id;
}

/// Promotes every non-reconstructed function; returns source-token -> id.
std::map<std::string, std::string> promote(const ConstrainedSource& cs, const LoweringResult& lr, CarriedLibrary& carried,
                                           int trial, std::vector<std::string>& created) {
  std::map<std::string, std::string> ids;
  const Library before = carried.library;
  for (std::size_t i = 0; i < lr.new_helpers.size(); ++i) {
    const LoweredFunction& f = lr.new_helpers[i];
    std::string token = function_token(cs.functions[i], static_cast<int>(i), before);
    std::string wanted = unique_id(carried.library, f.name, trial);
    std::size_t n = carried.library.size();
    std::string id = carried.library.insert(f.expanded, trial, wanted);
    ids[token] = id;
    if (carried.library.size() == n) continue;
    created.push_back(id);
    std::set<std::string> refs;
    collect_helper_refs(f.authored, refs);
    bool verbatim = id == f.name;
    for (const auto& r : refs) {
      auto it = ids.find(r);
      if (it != ids.end() ? it->second != r : !carried.library.contains(r)) verbatim = false;
    }
    carried.sources.push_back(verbatim ? f.text : render_function(id, rename_helpers(f.authored, ids)));
  }
  return ids;
}

}  // namespace

TrialTranscript run_trial(BackendClient& backend, PromptContext ctx, CarriedLibrary& carried,
                          const TrialOptions& opts) {
  TrialTranscript tr;
  tr.mode = ctx.mode;
  tr.trial = ctx.trial;
  ctx.carried_helpers = carried.prompt_helpers();
  ctx.attempt_index = 1;
  ctx.last_failure.reset();
  NameScope scope;
  for (const auto& e : carried.library.entries()) scope.carried_helpers.push_back(e.id);

  for (int a = 1; a <= kMaxAttempts; ++a) {
    ctx.attempt_index = a;
    AttemptRecord rec;
    rec.attempt = a;
    rec.prompt = build_prompt(ctx);
    rec.prompt_hash = sha256_hex(rec.prompt);
    for (int tries = 0;; ++tries) {
      try {
        rec.source = backend.complete(rec.prompt);
        break;
      } catch (const TransportError& e) {
        if (tries >= opts.transport_retries) {
          throw TrialInterrupted("backend failed on trial " + std::to_string(ctx.trial) + " attempt " +
                                     std::to_string(a) + ": " + e.what(),
                                 tr);
        }
      }
    }
    ParseResult parsed = parse_constrained(rec.source, scope);
    FailureFeedback fb;
    fb.source = rec.source;
    if (!parsed.ok()) {
      for (const auto& d : parsed.diagnostics) rec.diagnostics.push_back(d.render());
      fb.diagnostics = rec.diagnostics;
    } else {
      LoweringResult lr = lower_and_run(*parsed.source, carried.library);
      rec.produced = lr.grid;
      rec.correct = lr.grid == ctx.target;
      fb.produced = lr.grid;
      if (rec.correct) {
        auto ids = promote(*parsed.source, lr, carried, ctx.trial, tr.new_helpers);
        lr.authored = rename_helpers(lr.authored, ids);
        tr.result = std::move(lr);
        tr.solved = true;
        tr.attempts.push_back(std::move(rec));
        break;
      }
    }
    tr.attempts.push_back(std::move(rec));
    ctx.last_failure = std::move(fb);
  }
  return tr;
}

LlmRun run_llm(const Curriculum& c, const RunSpec& spec, BackendClient& backend, const TrialOptions& opts) {
  if (spec.model != Model::llm && spec.model != Model::llm_h)
    throw std::invalid_argument("run_llm needs model llm or llm-h");
  PromptMode mode = spec.model == Model::llm_h ? PromptMode::with_history : PromptMode::memoryless;
  LlmRun out;
  out.record.curriculum = c.name;
  out.record.spec = spec;
  CarriedLibrary carried;
  std::vector<HistoryEntry> history;
  int total = static_cast<int>(c.trials.size());
  for (const Trial& trial : c.trials) {
    PromptContext ctx;
    ctx.mode = mode;
    ctx.dsl_version = c.dsl_version;
    ctx.trial = trial.index;
    ctx.total_trials = total;
    ctx.target = trial.target;
    if (mode == PromptMode::with_history) ctx.history = history;

    auto t0 = std::chrono::steady_clock::now();
    TrialTranscript tr = run_trial(backend, ctx, carried, opts);
    auto t1 = std::chrono::steady_clock::now();

    TrialRecord rec;
    rec.index = trial.index;
    rec.solved = tr.solved;
    rec.failure = tr.solved ? FailureReason::none : FailureReason::attempts_exhausted;
    rec.attempts = static_cast<int>(tr.attempts.size());
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (tr.result) {
      rec.program = tr.result->authored;
      rec.expanded = tr.result->lowered;
      rec.authored_size = tr.result->authored.authored_size();
      rec.authored_ops = tr.result->authored.authored_ops();
      rec.raw = size(tr.result->lowered);
      for (const auto& f : tr.result->new_helpers) rec.trace.push_back(f.expanded);
    }
    rec.new_helpers = tr.new_helpers;
    for (const auto& id : tr.new_helpers) {
      const LibraryEntry& e = carried.library.at(id);
      out.record.library.push_back({e.id, e.program, e.output, e.created_at_trial});
    }
    rec.library_size = carried.library.size();
    out.record.trials.push_back(std::move(rec));
    history.push_back({trial.target, tr.solved});
    out.transcripts.push_back(std::move(tr));
  }
  return out;
}

}  // namespace pattern::llm
