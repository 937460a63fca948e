#include "finsler/expr/symbolic.hpp"

namespace finsler::expr {
namespace {

bool is_const(const Node& n, double v) {
  return n.op == Op::kNumber && n.number == v;
}

bool is_number(const Node& n) { return n.op == Op::kNumber; }

}  // namespace

Node add(Node a, Node b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  return Node::binary(Op::kAdd, std::move(a), std::move(b));
}

Node sub(Node a, Node b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return Node::unary(Op::kNeg, std::move(b));
  return Node::binary(Op::kSub, std::move(a), std::move(b));
}

Node mul(Node a, Node b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return Node::num(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  return Node::binary(Op::kMul, std::move(a), std::move(b));
}

Node div(Node a, Node b) {
  if (is_const(a, 0.0)) return Node::num(0.0);
  if (is_const(b, 1.0)) return a;
  return Node::binary(Op::kDiv, std::move(a), std::move(b));
}

namespace {

bool has_var(const Node& n, int var) {
  if (n.op == Op::kVariable) return n.var == var;
  for (const auto& a : n.args) {
    if (has_var(a, var)) return true;
  }
  return false;
}

Node pow_node(Node base, Node ex) {
  return Node::binary(Op::kPow, std::move(base), std::move(ex));
}

}  // namespace

Node differentiate(const Node& n, int var) {
  if (!has_var(n, var)) return Node::num(0.0);
  switch (n.op) {
    case Op::kNumber: return Node::num(0.0);
    case Op::kVariable: return Node::num(1.0);
    case Op::kNeg: {
      Node d = differentiate(n.args[0], var);
      if (is_const(d, 0.0)) return d;
      return Node::unary(Op::kNeg, std::move(d));
    }
    case Op::kAdd:
      return add(differentiate(n.args[0], var), differentiate(n.args[1], var));
    case Op::kSub:
      return sub(differentiate(n.args[0], var), differentiate(n.args[1], var));
    case Op::kMul:
      return add(mul(differentiate(n.args[0], var), n.args[1]),
                 mul(n.args[0], differentiate(n.args[1], var)));
    case Op::kDiv: {
      // (u/v)' = u'/v - u v' / v^2
      const Node& u = n.args[0];
      const Node& v = n.args[1];
      return sub(div(differentiate(u, var), v),
                 div(mul(u, differentiate(v, var)),
                     pow_node(v, Node::num(2.0))));
    }
    case Op::kPow:
    case Op::kCall:
      break;
  }
  const Node& u = n.args[0];
  const Node du = differentiate(u, var);
  if (n.op == Op::kPow || n.func == Func::kPow) {
    const Node& ex = n.args[1];
    if (!has_var(ex, var)) {
      // p * u^(p-1) * u'
      Node lowered = is_number(ex) ? Node::num(ex.number - 1.0)
                                   : sub(ex, Node::num(1.0));
      return mul(mul(ex, pow_node(u, std::move(lowered))), du);
    }
    // u^w * (w' log u + w u'/u)
    Node log_u = Node::call(Func::kLog, {u});
    Node inner = add(mul(differentiate(ex, var), std::move(log_u)),
                     div(mul(ex, du), u));
    return mul(n, std::move(inner));
  }
  switch (n.func) {
    case Func::kSqrt:
      return div(du, mul(Node::num(2.0), n));
    case Func::kSin:
      return mul(Node::call(Func::kCos, {u}), du);
    case Func::kCos:
      return Node::unary(Op::kNeg, mul(Node::call(Func::kSin, {u}), du));
    case Func::kExp:
      return mul(n, du);
    case Func::kLog:
      return div(du, u);
    case Func::kAbs:
      return mul(div(u, n), du);
    case Func::kPow:
      break;
  }
  return Node::num(0.0);
}

ScalarField differentiate(const ScalarField& f, int var) {
  return ScalarField(differentiate(f.root(), var));
}

Node substitute(const Node& n, int var, double value) {
  if (n.op == Op::kVariable && n.var == var) return Node::num(value);
  Node out = n;
  for (auto& a : out.args) a = substitute(a, var, value);
  return out;
}

ScalarField substitute(const ScalarField& f, int var, double value) {
  return ScalarField(substitute(f.root(), var, value));
}

}  // namespace finsler::expr
