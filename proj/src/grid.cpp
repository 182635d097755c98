#include "pattern/grid.hpp"

#include <sstream>

namespace pattern {

namespace {

Grid grid_from_pattern(const std::array<const char*, kGridSide>& rows) {
  Grid g;
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) {
      if (rows[r][c] == '1') g.set(r, c);
    }
  }
  return g;
}

// Row images of the printed primitive arrays.
const std::array<Grid, 6>& primitive_table() {
  static const std::array<Grid, 6> table = {
      Grid{},
      grid_from_pattern({"0000000000", "0000000000", "0000000000", "0000000000", "0000000000",
                         "1111111111", "0000000000", "0000000000", "0000000000", "0000000000"}),
      grid_from_pattern({"0000010000", "0000010000", "0000010000", "0000010000", "0000010000",
                         "0000010000", "0000010000", "0000010000", "0000010000", "0000010000"}),
      grid_from_pattern({"1000000000", "0100000000", "0010000000", "0001000000", "0000100000",
                         "0000010000", "0000001000", "0000000100", "0000000010", "0000000001"}),
      grid_from_pattern({"1111111111", "1000000001", "1000000001", "1000000001", "1000000001",
                         "1000000001", "1000000001", "1000000001", "1000000001", "1111111111"}),
      grid_from_pattern({"1000000000", "1100000000", "1110000000", "1111000000", "1111100000",
                         "1111110000", "1111111000", "1111111100", "1111111110", "1111111111"}),
  };
  return table;
}

template <typename F>
Grid remap(const Grid& a, F source_of) {
  Grid out;
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) {
      auto [sr, sc] = source_of(r, c);
      if (a.at(sr, sc)) out.set(r, c);
    }
  }
  return out;
}

}  // namespace

Grid Grid::filled() {
  Grid g;
  g.bits_.set();
  return g;
}

Grid Grid::from_key(std::string_view key) {
  if (key.size() != static_cast<std::size_t>(kGridCells)) {
    throw GridFormatError("grid key must have 100 characters, got " + std::to_string(key.size()));
  }
  Grid g;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] == '1') {
      g.bits_.set(i);
    } else if (key[i] != '0') {
      throw GridFormatError("grid key may only contain '0' and '1'");
    }
  }
  return g;
}

Grid Grid::from_rows(const std::vector<std::vector<int>>& rows) {
  if (rows.size() != static_cast<std::size_t>(kGridSide)) {
    throw GridFormatError("grid must have 10 rows");
  }
  Grid g;
  for (int r = 0; r < kGridSide; ++r) {
    if (rows[r].size() != static_cast<std::size_t>(kGridSide)) {
      throw GridFormatError("grid row " + std::to_string(r) + " must have 10 cells");
    }
    for (int c = 0; c < kGridSide; ++c) {
      int v = rows[r][c];
      if (v != 0 && v != 1) throw GridFormatError("grid cells must be 0 or 1");
      if (v == 1) g.set(r, c);
    }
  }
  return g;
}

std::string Grid::key() const {
  std::string out(kGridCells, '0');
  for (std::size_t i = 0; i < static_cast<std::size_t>(kGridCells); ++i) {
    if (bits_[i]) out[i] = '1';
  }
  return out;
}

std::vector<std::vector<int>> Grid::rows() const {
  std::vector<std::vector<int>> out(kGridSide, std::vector<int>(kGridSide, 0));
  for (int r = 0; r < kGridSide; ++r) {
    for (int c = 0; c < kGridSide; ++c) out[r][c] = at(r, c) ? 1 : 0;
  }
  return out;
}

std::string format_rows(const Grid& g, std::string_view indent) {
  std::ostringstream os;
  os << indent << "[\n";
  for (int r = 0; r < kGridSide; ++r) {
    os << indent << "[";
    for (int c = 0; c < kGridSide; ++c) {
      os << (g.at(r, c) ? 1 : 0);
      if (c + 1 < kGridSide) os << ", ";
    }
    os << "]" << (r + 1 < kGridSide ? "," : "") << "\n";
  }
  os << indent << "]";
  return os.str();
}

std::string_view primitive_name(Primitive p) {
  switch (p) {
    case Primitive::blank: return "blank";
    case Primitive::line_horizontal: return "line_horizontal";
    case Primitive::line_vertical: return "line_vertical";
    case Primitive::diagonal: return "diagonal";
    case Primitive::square: return "square";
    case Primitive::triangle: return "triangle";
  }
  return "?";
}

std::optional<Primitive> find_primitive(std::string_view name) {
  for (Primitive p : kPrimitives) {
    if (primitive_name(p) == name) return p;
  }
  return std::nullopt;
}

Primitive parse_primitive(std::string_view name) {
  if (auto p = find_primitive(name)) return *p;
  throw UnknownPrimitive(std::string(name));
}

const Grid& primitive(Primitive p) { return primitive_table()[static_cast<std::size_t>(p)]; }

const Grid& primitive(std::string_view name) { return primitive(parse_primitive(name)); }

std::string_view op_name(Op op) {
  switch (op) {
    case Op::add: return "add";
    case Op::subtract: return "subtract";
    case Op::intersect: return "intersect";
    case Op::invert: return "invert";
    case Op::reflect_horizontal: return "reflect_horizontal";
    case Op::reflect_vertical: return "reflect_vertical";
    case Op::reflect_diag: return "reflect_diag";
  }
  return "?";
}

std::optional<Op> find_op(std::string_view name) {
  if (name == "overlap") return Op::intersect;
  for (Op op : kOperators) {
    if (op_name(op) == name) return op;
  }
  return std::nullopt;
}

Op parse_op(std::string_view name) {
  if (auto op = find_op(name)) return *op;
  throw UnknownOperator(std::string(name));
}

int arity(Op op) {
  switch (op) {
    case Op::add:
    case Op::subtract:
    case Op::intersect: return 2;
    default: return 1;
  }
}

Grid add(const Grid& a, const Grid& b) { return Grid(a.bits() | b.bits()); }
Grid subtract(const Grid& a, const Grid& b) { return Grid(a.bits() & ~b.bits()); }
Grid intersect(const Grid& a, const Grid& b) { return Grid(a.bits() & b.bits()); }
Grid invert(const Grid& a) { return Grid(~a.bits()); }

Grid reflect_horizontal(const Grid& a) {
  return remap(a, [](int r, int c) { return std::pair{kGridSide - 1 - r, c}; });
}

Grid reflect_vertical(const Grid& a) {
  return remap(a, [](int r, int c) { return std::pair{r, kGridSide - 1 - c}; });
}

Grid reflect_diag(const Grid& a) {
  return remap(a, [](int r, int c) { return std::pair{c, r}; });
}

Grid reflect_anti_diag(const Grid& a) {
  return remap(a, [](int r, int c) { return std::pair{kGridSide - 1 - c, kGridSide - 1 - r}; });
}

Grid apply_binary(Op op, const Grid& a, const Grid& b) {
  switch (op) {
    case Op::add: return add(a, b);
    case Op::subtract: return subtract(a, b);
    case Op::intersect: return intersect(a, b);
    default:
      throw ArityMismatch(std::string(op_name(op)) + " is unary but was given two operands");
  }
}

Grid apply_unary(Op op, const Grid& a) {
  switch (op) {
    case Op::invert: return invert(a);
    case Op::reflect_horizontal: return reflect_horizontal(a);
    case Op::reflect_vertical: return reflect_vertical(a);
    case Op::reflect_diag: return reflect_diag(a);
    default:
      throw ArityMismatch(std::string(op_name(op)) + " is binary but was given one operand");
  }
}

std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::horizontal: return "horizontal";
    case Axis::vertical: return "vertical";
    case Axis::main_diagonal: return "main_diagonal";
    case Axis::anti_diagonal: return "anti_diagonal";
  }
  return "?";
}

Axis parse_axis(std::string_view name) {
  for (Axis a : kAxes) {
    if (axis_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown symmetry axis: " + std::string(name));
}

Grid reflect_about(Axis a, const Grid& g) {
  switch (a) {
    case Axis::horizontal: return reflect_horizontal(g);
    case Axis::vertical: return reflect_vertical(g);
    case Axis::main_diagonal: return reflect_diag(g);
    case Axis::anti_diagonal: return reflect_anti_diag(g);
  }
  return g;
}

AxisSet symmetry_axes(const Grid& g) {
  AxisSet out;
  for (Axis a : kAxes) {
    if (reflect_about(a, g) == g) out.insert(a);
  }
  return out;
}

}  // namespace pattern
