#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pattern {

inline constexpr int kGridSide = 10;
inline constexpr int kGridCells = kGridSide * kGridSide;

class UnknownPrimitive : public std::invalid_argument {
 public:
  explicit UnknownPrimitive(const std::string& name)
      : std::invalid_argument("unknown primitive: " + name) {}
};

class UnknownOperator : public std::invalid_argument {
 public:
  explicit UnknownOperator(const std::string& name)
      : std::invalid_argument("unknown operator: " + name) {}
};

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GridFormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A 10x10 binary pattern. Row 0 is the top row, column 0 the left column.
class Grid {
 public:
  using Bits = std::bitset<kGridCells>;

  Grid() = default;
  explicit Grid(const Bits& bits) : bits_(bits) {}

  static Grid filled();

  /// Parses the 100-character row-major '0'/'1' key.
  static Grid from_key(std::string_view key);
  static Grid from_rows(const std::vector<std::vector<int>>& rows);

  bool at(int row, int col) const { return bits_[index(row, col)]; }
  void set(int row, int col, bool value = true) { bits_.set(index(row, col), value); }

  std::string key() const;
  std::vector<std::vector<int>> rows() const;
  std::size_t count() const { return bits_.count(); }
  bool empty() const { return bits_.none(); }

  const Bits& bits() const { return bits_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t index(int row, int col) {
    return static_cast<std::size_t>(row * kGridSide + col);
  }

  Bits bits_;
};

/// Renders rows as `[[0,1,...],...]`-style text, one row per line.
std::string format_rows(const Grid& g, std::string_view indent = "");

// ---------------------------------------------------------------------------
// Primitives

enum class Primitive { blank, line_horizontal, line_vertical, diagonal, square, triangle };

inline constexpr std::array<Primitive, 6> kPrimitives = {
    Primitive::blank,  Primitive::line_horizontal, Primitive::line_vertical,
    Primitive::diagonal, Primitive::square,        Primitive::triangle};

std::string_view primitive_name(Primitive p);
Primitive parse_primitive(std::string_view name);
std::optional<Primitive> find_primitive(std::string_view name);

/// The bound grid for a primitive name; cell-for-cell the arrays shown to
/// participants and models.
const Grid& primitive(Primitive p);
const Grid& primitive(std::string_view name);

// ---------------------------------------------------------------------------
// Operators

enum class Op { add, subtract, intersect, invert, reflect_horizontal, reflect_vertical, reflect_diag };

/// Candidate-generation order used throughout the workbench.
inline constexpr std::array<Op, 7> kOperators = {
    Op::add,    Op::subtract,           Op::intersect,       Op::invert,
    Op::reflect_horizontal, Op::reflect_vertical, Op::reflect_diag};

std::string_view op_name(Op op);
/// Accepts `overlap` as an alias of `intersect`.
Op parse_op(std::string_view name);
std::optional<Op> find_op(std::string_view name);
int arity(Op op);
inline bool is_binary(Op op) { return arity(op) == 2; }

Grid apply_binary(Op op, const Grid& a, const Grid& b);
Grid apply_unary(Op op, const Grid& a);

Grid add(const Grid& a, const Grid& b);
Grid subtract(const Grid& a, const Grid& b);
Grid intersect(const Grid& a, const Grid& b);
Grid invert(const Grid& a);
/// Up-down flip (reverses row order).
Grid reflect_horizontal(const Grid& a);
/// Left-right flip (reverses column order).
Grid reflect_vertical(const Grid& a);
/// Transpose.
Grid reflect_diag(const Grid& a);
/// (i, j) -> (9 - j, 9 - i); not a DSL operator, used for symmetry checks.
Grid reflect_anti_diag(const Grid& a);

// ---------------------------------------------------------------------------
// Symmetry

enum class Axis : unsigned { horizontal = 1, vertical = 2, main_diagonal = 4, anti_diagonal = 8 };

/// Small bit set of axes.
class AxisSet {
 public:
  constexpr AxisSet() = default;
  constexpr AxisSet(std::initializer_list<Axis> axes) {
    for (Axis a : axes) bits_ |= static_cast<unsigned>(a);
  }
  static constexpr AxisSet all() {
    return {Axis::horizontal, Axis::vertical, Axis::main_diagonal, Axis::anti_diagonal};
  }

  constexpr bool contains(Axis a) const { return (bits_ & static_cast<unsigned>(a)) != 0; }
  constexpr void insert(Axis a) { bits_ |= static_cast<unsigned>(a); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool intersects(AxisSet other) const { return (bits_ & other.bits_) != 0; }
  constexpr unsigned raw() const { return bits_; }

  friend constexpr bool operator==(AxisSet, AxisSet) = default;

 private:
  unsigned bits_ = 0;
};

inline constexpr std::array<Axis, 4> kAxes = {Axis::horizontal, Axis::vertical,
                                              Axis::main_diagonal, Axis::anti_diagonal};

std::string_view axis_name(Axis a);
Axis parse_axis(std::string_view name);

/// The reflection whose fixed points define symmetry about `a`.
/// horizontal: up-down flip; vertical: left-right flip.
Grid reflect_about(Axis a, const Grid& g);
AxisSet symmetry_axes(const Grid& g);

}  // namespace pattern

template <>
struct std::hash<pattern::Grid> {
  std::size_t operator()(const pattern::Grid& g) const noexcept {
    return std::hash<pattern::Grid::Bits>{}(g.bits());
  }
};
