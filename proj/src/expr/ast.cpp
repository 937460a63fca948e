#include "finsler/expr/ast.hpp"

#include <cmath>
#include <cstdio>

namespace finsler::expr {

const char* func_name(Func f) {
  switch (f) {
    case Func::kSqrt: return "sqrt";
    case Func::kSin: return "sin";
    case Func::kCos: return "cos";
    case Func::kExp: return "exp";
    case Func::kLog: return "log";
    case Func::kAbs: return "abs";
    case Func::kPow: return "pow";
  }
  return "?";
}

int func_arity(Func f) { return f == Func::kPow ? 2 : 1; }

std::string var_name(int var) {
  return (var < 4 ? "x" : "y") + std::to_string(var % 4);
}

Node Node::num(double v) {
  Node n;
  if (v < 0 || std::signbit(v)) {
    // The grammar has no negative literals.
    n.op = Op::kNeg;
    n.args.push_back(num(-v));
    return n;
  }
  n.op = Op::kNumber;
  n.number = v;
  return n;
}

Node Node::variable(int v) {
  Node n;
  n.op = Op::kVariable;
  n.var = v;
  return n;
}

Node Node::unary(Op op, Node a) {
  Node n;
  n.op = op;
  n.args.push_back(std::move(a));
  return n;
}

Node Node::binary(Op op, Node a, Node b) {
  Node n;
  n.op = op;
  n.args.reserve(2);
  n.args.push_back(std::move(a));
  n.args.push_back(std::move(b));
  return n;
}

Node Node::call(Func f, std::vector<Node> args) {
  Node n;
  n.op = Op::kCall;
  n.func = f;
  n.args = std::move(args);
  return n;
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  switch (a.op) {
    case Op::kNumber:
      if (a.number != b.number) return false;
      break;
    case Op::kVariable:
      if (a.var != b.var) return false;
      break;
    case Op::kCall:
      if (a.func != b.func) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  }
  return true;
}

namespace {

// Binding levels: 1 expr, 2 term, 3 factor, 4 unary, 5 atom.
int level(const Node& n) {
  switch (n.op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kPow: return 3;
    case Op::kNeg: return 4;
    default: return 5;
  }
}

void emit(const Node& n, std::string& out);

void emit_at(const Node& n, int min_level, std::string& out) {
  if (level(n) < min_level) {
    out += '(';
    emit(n, out);
    out += ')';
  } else {
    emit(n, out);
  }
}

void emit(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::kNumber: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    }
    case Op::kVariable:
      out += var_name(n.var);
      return;
    case Op::kNeg:
      out += '-';
      emit_at(n.args[0], 4, out);
      return;
    case Op::kAdd:
    case Op::kSub:
      emit_at(n.args[0], 1, out);
      out += n.op == Op::kAdd ? " + " : " - ";
      emit_at(n.args[1], 2, out);
      return;
    case Op::kMul:
    case Op::kDiv:
      emit_at(n.args[0], 2, out);
      out += n.op == Op::kMul ? "*" : "/";
      emit_at(n.args[1], 3, out);
      return;
    case Op::kPow:
      emit_at(n.args[0], 4, out);
      out += '^';
      emit_at(n.args[1], 3, out);
      return;
    case Op::kCall:
      out += func_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i > 0) out += ", ";
        emit(n.args[i], out);
      }
      out += ')';
      return;
  }
}

bool any_var(const Node& n, int lo, int hi) {
  if (n.op == Op::kVariable) return n.var >= lo && n.var < hi;
  for (const auto& a : n.args) {
    if (any_var(a, lo, hi)) return true;
  }
  return false;
}

}  // namespace

std::string print(const Node& n) {
  std::string out;
  emit(n, out);
  return out;
}

ScalarField::ScalarField()
    : root_(std::make_shared<const Node>(Node::num(0.0))) {}

ScalarField::ScalarField(Node root)
    : root_(std::make_shared<const Node>(std::move(root))) {}

ScalarField ScalarField::constant(double v) { return ScalarField(Node::num(v)); }

bool ScalarField::is_zero() const {
  return root_->op == Op::kNumber && root_->number == 0.0;
}

bool ScalarField::depends_on(int var) const {
  return any_var(*root_, var, var + 1);
}

bool ScalarField::depends_on_y() const { return any_var(*root_, 4, 8); }

}  // namespace finsler::expr
