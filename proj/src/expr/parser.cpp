// Recursive-descent parser for the scalar expression grammar:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | atom
//   atom   := number | ident | func '(' expr (',' expr)* ')' | '(' expr ')'

#include <cctype>
#include <charconv>
#include <string>

#include "finsler/error.hpp"
#include "finsler/expr/ast.hpp"

namespace finsler::expr {
namespace {

struct FuncEntry {
  const char* name;
  Func func;
};

constexpr FuncEntry kFuncs[] = {
    {"sqrt", Func::kSqrt}, {"sin", Func::kSin}, {"cos", Func::kCos},
    {"exp", Func::kExp},   {"log", Func::kLog}, {"abs", Func::kAbs},
    {"pow", Func::kPow},
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Node parse() {
    skip_ws();
    if (pos_ >= src_.size()) fail({"expression"});
    Node n = expr();
    skip_ws();
    if (pos_ < src_.size()) fail({"operator", "end of input"});
    return n;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  std::string found() const {
    if (pos_ >= src_.size()) return "end of input";
    return std::string("'") + src_[pos_] + "'";
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    throw SyntaxError(pos_, std::move(expected), found());
  }

  void expect(char c) {
    if (!peek(c)) fail({std::string("'") + c + "'"});
    ++pos_;
  }

  Node expr() {
    Node lhs = term();
    while (true) {
      skip_ws();
      if (peek('+') || peek('-')) {
        const Op op = src_[pos_] == '+' ? Op::kAdd : Op::kSub;
        const std::size_t at = pos_++;
        Node rhs = term();
        lhs = Node::binary(op, std::move(lhs), std::move(rhs));
        lhs.offset = at;
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = factor();
    while (true) {
      if (peek('*') || peek('/')) {
        const Op op = src_[pos_] == '*' ? Op::kMul : Op::kDiv;
        const std::size_t at = pos_++;
        Node rhs = factor();
        lhs = Node::binary(op, std::move(lhs), std::move(rhs));
        lhs.offset = at;
      } else {
        return lhs;
      }
    }
  }

  Node factor() {
    Node base = unary();
    if (peek('^')) {
      const std::size_t at = pos_++;
      Node exponent = factor();
      base = Node::binary(Op::kPow, std::move(base), std::move(exponent));
      base.offset = at;
    }
    return base;
  }

  Node unary() {
    if (peek('-')) {
      const std::size_t at = pos_++;
      Node n = Node::unary(Op::kNeg, unary());
      n.offset = at;
      return n;
    }
    return atom();
  }

  Node atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail({"number", "identifier", "'('", "'-'"});
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Node n = expr();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return identifier();
    }
    fail({"number", "identifier", "'('", "'-'"});
  }

  Node number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t count = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail({"digit"});
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        ++pos_;
      }
      if (digits() == 0) fail({"exponent digits"});
    }
    double v = 0.0;
    const auto text = src_.substr(start, pos_ - start);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail({"finite number"});
    }
    Node n = Node::num(v);
    n.offset = start;
    return n;
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    if (name.size() == 2 && (name[0] == 'x' || name[0] == 'y') &&
        name[1] >= '0' && name[1] <= '3') {
      Node n = Node::variable((name[0] == 'x' ? 0 : 4) + (name[1] - '0'));
      n.offset = start;
      return n;
    }
    for (const auto& f : kFuncs) {
      if (name == f.name) return call(f.func, start);
    }
    throw UnknownIdentifier(start, name);
  }

  Node call(Func f, std::size_t start) {
    expect('(');
    std::vector<Node> args;
    args.push_back(expr());
    while (peek(',')) {
      ++pos_;
      args.push_back(expr());
    }
    const int arity = func_arity(f);
    if (static_cast<int>(args.size()) != arity) {
      if (static_cast<int>(args.size()) < arity) fail({"','"});
      throw SyntaxError(pos_, {"')'"},
                        std::string(func_name(f)) + " takes " +
                            std::to_string(arity) + " argument(s)");
    }
    expect(')');
    Node n = Node::call(f, std::move(args));
    n.offset = start;
    return n;
  }
};

}  // namespace

ScalarField ScalarField::parse(std::string_view source) {
  return ScalarField(Parser(source).parse());
}

}  // namespace finsler::expr
