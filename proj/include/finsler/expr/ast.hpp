#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace finsler::expr {

/// Variables are numbered x0..x3 -> 0..3 and y0..y3 -> 4..7.
inline constexpr int kNumVars = 8;

constexpr int xvar(int i) { return i; }
constexpr int yvar(int a) { return 4 + a; }

using Point = std::array<double, kNumVars>;

enum class Op : std::uint8_t {
  kNumber,
  kVariable,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kCall,
};

enum class Func : std::uint8_t { kSqrt, kSin, kCos, kExp, kLog, kAbs, kPow };

const char* func_name(Func f);
int func_arity(Func f);
std::string var_name(int var);

struct Node {
  Op op = Op::kNumber;
  double number = 0.0;
  int var = -1;
  Func func = Func::kSqrt;
  /// Byte offset of the token that produced this node; 0 for synthesized nodes.
  std::size_t offset = 0;
  std::vector<Node> args;

  static Node num(double v);
  static Node variable(int v);
  static Node unary(Op op, Node a);
  static Node binary(Op op, Node a, Node b);
  static Node call(Func f, std::vector<Node> args);
};

/// Compares shape, operators, variables and literal values; ignores offsets.
bool structurally_equal(const Node& a, const Node& b);

/// Prints with the minimal parentheses the grammar needs, so that
/// parse(print(n)) reproduces n. Literals use 17 significant digits.
std::string print(const Node& n);

/// Immutable parsed expression in the eight variables x0..x3, y0..y3.
/// Copies share the tree; safe to evaluate from several threads.
class ScalarField {
 public:
  /// The zero field.
  ScalarField();
  explicit ScalarField(Node root);

  static ScalarField parse(std::string_view source);
  static ScalarField constant(double v);

  const Node& root() const { return *root_; }
  std::string to_string() const { return print(*root_); }

  bool is_zero() const;
  bool depends_on(int var) const;
  bool depends_on_y() const;

 private:
  std::shared_ptr<const Node> root_;
};

}  // namespace finsler::expr
