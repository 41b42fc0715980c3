#pragma once

// Scalar field expressions over chart coordinates x1..xn.
// Grammar: + - * / unary-minus, ^ with literal integer exponents,
// sin cos exp sqrt log, parentheses, decimal literals.
// The AST is immutable; evaluation produces either a double or a Jet.
// Singularities and parse problems are reported with source offsets.

#include <cctype>
#include <cstdlib>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ptrac/core.hpp"
#include "ptrac/jet.hpp"

namespace ptrac {

enum class FuncKind { Sin, Cos, Exp, Sqrt, Log };

struct ExprNode {
  enum class Kind { Number, Var, Add, Sub, Mul, Div, Neg, Pow, Call };

  Kind kind;
  long pos = -1;  // offset into the source text, for diagnostics
  double number = 0.0;
  int var = -1;        // 0-based coordinate index
  long exponent = 0;   // Pow
  FuncKind func = FuncKind::Sin;
  std::shared_ptr<const ExprNode> a, b;
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace detail {

[[noreturn]] inline void eval_fail(const std::string& what, long pos) {
  throw EvalError(what + " (at offset " + std::to_string(pos) + ")");
}

template <class T, class VarFn, class NumFn>
T eval_node(const ExprNode& nd, const VarFn& var, const NumFn& num) {
  using Kind = ExprNode::Kind;
  switch (nd.kind) {
    case Kind::Number:
      return num(nd.number);
    case Kind::Var:
      return var(nd.var);
    case Kind::Add:
      return eval_node<T>(*nd.a, var, num) + eval_node<T>(*nd.b, var, num);
    case Kind::Sub:
      return eval_node<T>(*nd.a, var, num) - eval_node<T>(*nd.b, var, num);
    case Kind::Mul:
      return eval_node<T>(*nd.a, var, num) * eval_node<T>(*nd.b, var, num);
    case Kind::Div: {
      T lhs = eval_node<T>(*nd.a, var, num);
      T rhs = eval_node<T>(*nd.b, var, num);
      try {
        return lhs / rhs;
      } catch (const EvalError& e) {
        eval_fail(e.what(), nd.pos);
      }
    }
    case Kind::Neg:
      return -eval_node<T>(*nd.a, var, num);
    case Kind::Pow: {
      T base = eval_node<T>(*nd.a, var, num);
      try {
        return pow_int(base, nd.exponent);
      } catch (const EvalError& e) {
        eval_fail(e.what(), nd.pos);
      }
    }
    case Kind::Call: {
      T arg = eval_node<T>(*nd.a, var, num);
      try {
        switch (nd.func) {
          case FuncKind::Sin: return sin(arg);
          case FuncKind::Cos: return cos(arg);
          case FuncKind::Exp: return exp(arg);
          case FuncKind::Sqrt: return sqrt(arg);
          case FuncKind::Log: return log(arg);
        }
      } catch (const EvalError& e) {
        eval_fail(e.what(), nd.pos);
      }
    }
  }
  assert(false && "unreachable expr kind");
  std::abort();
}

// Plain-double overloads that mirror the Jet interface.
inline double pow_int(double u, long k) {
  if (k < 0 && u == 0.0) throw EvalError("division by zero");
  return std::pow(u, double(k));
}
inline double sqrt_checked(double u) {
  if (u < 0.0) throw EvalError("sqrt of a negative value");
  return std::sqrt(u);
}
inline double log_checked(double u) {
  if (!(u > 0.0)) throw EvalError("log of a non-positive value");
  return std::log(u);
}

inline double eval_double(const ExprNode& nd, const Vec& x) {
  using Kind = ExprNode::Kind;
  switch (nd.kind) {
    case Kind::Number: return nd.number;
    case Kind::Var: return x[nd.var];
    case Kind::Add: return eval_double(*nd.a, x) + eval_double(*nd.b, x);
    case Kind::Sub: return eval_double(*nd.a, x) - eval_double(*nd.b, x);
    case Kind::Mul: return eval_double(*nd.a, x) * eval_double(*nd.b, x);
    case Kind::Div: {
      double d = eval_double(*nd.b, x);
      if (d == 0.0) eval_fail("division by zero", nd.pos);
      return eval_double(*nd.a, x) / d;
    }
    case Kind::Neg: return -eval_double(*nd.a, x);
    case Kind::Pow: {
      try {
        return pow_int(eval_double(*nd.a, x), nd.exponent);
      } catch (const EvalError& e) {
        eval_fail(e.what(), nd.pos);
      }
    }
    case Kind::Call: {
      double u = eval_double(*nd.a, x);
      try {
        switch (nd.func) {
          case FuncKind::Sin: return std::sin(u);
          case FuncKind::Cos: return std::cos(u);
          case FuncKind::Exp: return std::exp(u);
          case FuncKind::Sqrt: return sqrt_checked(u);
          case FuncKind::Log: return log_checked(u);
        }
      } catch (const EvalError& e) {
        eval_fail(e.what(), nd.pos);
      }
    }
  }
  assert(false && "unreachable expr kind");
  std::abort();
}

}  // namespace detail

// An immutable scalar field on an n-dimensional chart.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(ExprPtr root, int dim) : root_(std::move(root)), dim_(dim) {}

  bool empty() const { return !root_; }
  int dim() const { return dim_; }
  const ExprPtr& root() const { return root_; }

  double value(const Vec& x) const {
    assert(root_ && int(x.size()) == dim_ && "field/point mismatch");
    return detail::eval_double(*root_, x);
  }

  // Exact derivatives to `order` (0..3) at x.
  Jet jet(const Vec& x, int order) const {
    assert(root_ && int(x.size()) == dim_ && "field/point mismatch");
    assert(order >= 0 && order <= 3 && "jet order out of range");
    auto var = [&](int i) { return Jet::variable(dim_, order, i, x[i]); };
    auto num = [&](double v) { return Jet::constant(dim_, order, v); };
    return detail::eval_node<Jet>(*root_, var, num);
  }

  std::string to_string() const;

 private:
  ExprPtr root_;
  int dim_ = 0;
};

using ScalarFieldList = std::vector<ScalarField>;

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LPar, RPar, End };

struct Token {
  Tok kind;
  long pos;
  double number = 0.0;
  std::string text;
};

class Scanner {
 public:
  explicit Scanner(const std::string& src) : src_(src) { advance(); }

  const Token& cur() const { return cur_; }

  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    cur_.pos = long(i_);
    if (i_ >= src_.size()) {
      cur_.kind = Tok::End;
      cur_.text = "<end of input>";
      return;
    }
    const char c = src_[i_];
    switch (c) {
      case '+': cur_ = {Tok::Plus, long(i_++), 0, "+"}; return;
      case '-': cur_ = {Tok::Minus, long(i_++), 0, "-"}; return;
      case '*': cur_ = {Tok::Star, long(i_++), 0, "*"}; return;
      case '/': cur_ = {Tok::Slash, long(i_++), 0, "/"}; return;
      case '^': cur_ = {Tok::Caret, long(i_++), 0, "^"}; return;
      case '(': cur_ = {Tok::LPar, long(i_++), 0, "("}; return;
      case ')': cur_ = {Tok::RPar, long(i_++), 0, ")"}; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* start = src_.c_str() + i_;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start)
        throw ParseError("malformed number", long(i_));
      cur_ = {Tok::Number, long(i_), v, std::string(start, std::size_t(end - start))};
      i_ += std::size_t(end - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
        ++j;
      cur_ = {Tok::Ident, long(i_), 0, src_.substr(i_, j - i_)};
      i_ = j;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", long(i_));
  }

 private:
  const std::string& src_;
  std::size_t i_ = 0;
  Token cur_;
};

class Parser {
 public:
  Parser(const std::string& src, int dim) : sc_(src), dim_(dim) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    if (sc_.cur().kind != Tok::End)
      throw ParseError("unexpected token '" + sc_.cur().text + "'", sc_.cur().pos);
    return e;
  }

 private:
  ExprPtr sum() {
    ExprPtr e = term();
    for (;;) {
      const Tok k = sc_.cur().kind;
      if (k != Tok::Plus && k != Tok::Minus) return e;
      long pos = sc_.cur().pos;
      sc_.advance();
      e = binary(k == Tok::Plus ? ExprNode::Kind::Add : ExprNode::Kind::Sub, pos,
                 e, term());
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      const Tok k = sc_.cur().kind;
      if (k != Tok::Star && k != Tok::Slash) return e;
      long pos = sc_.cur().pos;
      sc_.advance();
      e = binary(k == Tok::Star ? ExprNode::Kind::Mul : ExprNode::Kind::Div, pos,
                 e, factor());
    }
  }

  // Unary minus binds looser than ^ : -x1^2 parses as -(x1^2).
  ExprPtr factor() {
    if (sc_.cur().kind == Tok::Minus) {
      long pos = sc_.cur().pos;
      sc_.advance();
      auto node = std::make_shared<ExprNode>();
      node->kind = ExprNode::Kind::Neg;
      node->pos = pos;
      node->a = factor();
      return node;
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (sc_.cur().kind != Tok::Caret) return base;
    long pos = sc_.cur().pos;
    sc_.advance();
    bool parens = false;
    if (sc_.cur().kind == Tok::LPar) {
      parens = true;
      sc_.advance();
    }
    long sign = 1;
    if (sc_.cur().kind == Tok::Minus) {
      sign = -1;
      sc_.advance();
    }
    if (sc_.cur().kind != Tok::Number)
      throw ParseError("exponent must be an integer literal", sc_.cur().pos);
    const Token t = sc_.cur();
    if (t.text.find_first_of(".eE") != std::string::npos)
      throw ParseError("exponent must be an integer literal", t.pos);
    long k = std::strtol(t.text.c_str(), nullptr, 10);
    sc_.advance();
    if (parens) {
      if (sc_.cur().kind != Tok::RPar)
        throw ParseError("expected ')' after exponent", sc_.cur().pos);
      sc_.advance();
    }
    if (sc_.cur().kind == Tok::Caret)
      throw ParseError("chained '^' needs parentheses", sc_.cur().pos);
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Pow;
    node->pos = pos;
    node->exponent = sign * k;
    node->a = base;
    return node;
  }

  ExprPtr atom() {
    const Token t = sc_.cur();
    switch (t.kind) {
      case Tok::Number: {
        sc_.advance();
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Number;
        node->pos = t.pos;
        node->number = t.number;
        return node;
      }
      case Tok::LPar: {
        sc_.advance();
        ExprPtr e = sum();
        if (sc_.cur().kind != Tok::RPar)
          throw ParseError("expected ')'", sc_.cur().pos);
        sc_.advance();
        return e;
      }
      case Tok::Ident:
        sc_.advance();
        if (sc_.cur().kind == Tok::LPar) return call(t);
        return variable(t);
      default:
        throw ParseError("unexpected token '" + t.text + "'", t.pos);
    }
  }

  ExprPtr call(const Token& name) {
    FuncKind f;
    if (name.text == "sin") f = FuncKind::Sin;
    else if (name.text == "cos") f = FuncKind::Cos;
    else if (name.text == "exp") f = FuncKind::Exp;
    else if (name.text == "sqrt") f = FuncKind::Sqrt;
    else if (name.text == "log") f = FuncKind::Log;
    else throw ParseError("unknown function '" + name.text + "'", name.pos);
    sc_.advance();  // consume '('
    ExprPtr arg = sum();
    if (sc_.cur().kind != Tok::RPar)
      throw ParseError("expected ')' after function argument", sc_.cur().pos);
    sc_.advance();
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::Call;
    node->pos = name.pos;
    node->func = f;
    node->a = arg;
    return node;
  }

  ExprPtr variable(const Token& name) {
    // Coordinates are x1..xn.
    if (name.text.size() >= 2 && name.text[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.text.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name.text[i]))) digits = false;
      if (digits) {
        long idx = std::strtol(name.text.c_str() + 1, nullptr, 10);
        if (idx < 1 || idx > dim_)
          throw ParseError("variable '" + name.text + "' out of range for dimension " +
                               std::to_string(dim_),
                           name.pos);
        auto node = std::make_shared<ExprNode>();
        node->kind = ExprNode::Kind::Var;
        node->pos = name.pos;
        node->var = int(idx - 1);
        return node;
      }
    }
    throw ParseError("unknown identifier '" + name.text + "'", name.pos);
  }

  static ExprPtr binary(ExprNode::Kind k, long pos, ExprPtr a, ExprPtr b) {
    auto node = std::make_shared<ExprNode>();
    node->kind = k;
    node->pos = pos;
    node->a = std::move(a);
    node->b = std::move(b);
    return node;
  }

  Scanner sc_;
  int dim_;
};

inline int precedence(ExprNode::Kind k) {
  switch (k) {
    case ExprNode::Kind::Add:
    case ExprNode::Kind::Sub: return 1;
    case ExprNode::Kind::Mul:
    case ExprNode::Kind::Div: return 2;
    case ExprNode::Kind::Neg: return 3;
    case ExprNode::Kind::Pow: return 4;
    default: return 5;
  }
}

inline void print_node(const ExprNode& nd, std::string& out) {
  using Kind = ExprNode::Kind;
  auto child = [&](const ExprNode& c, bool needs_paren) {
    if (needs_paren) out += '(';
    print_node(c, out);
    if (needs_paren) out += ')';
  };
  switch (nd.kind) {
    case Kind::Number: out += fmt17(nd.number); return;
    case Kind::Var: out += "x" + std::to_string(nd.var + 1); return;
    case Kind::Add:
    case Kind::Sub: {
      child(*nd.a, precedence(nd.a->kind) < 1);
      out += nd.kind == Kind::Add ? " + " : " - ";
      // Right side needs parens at equal precedence: a - (b + c).
      child(*nd.b, precedence(nd.b->kind) <= 1);
      return;
    }
    case Kind::Mul:
    case Kind::Div: {
      child(*nd.a, precedence(nd.a->kind) < 2);
      out += nd.kind == Kind::Mul ? "*" : "/";
      child(*nd.b, precedence(nd.b->kind) <= 2);
      return;
    }
    case Kind::Neg:
      out += '-';
      child(*nd.a, precedence(nd.a->kind) <= 3);
      return;
    case Kind::Pow:
      child(*nd.a, precedence(nd.a->kind) < 5);
      out += '^';
      if (nd.exponent < 0) {
        out += '(';
        out += std::to_string(nd.exponent);
        out += ')';
      } else {
        out += std::to_string(nd.exponent);
      }
      return;
    case Kind::Call:
      switch (nd.func) {
        case FuncKind::Sin: out += "sin"; break;
        case FuncKind::Cos: out += "cos"; break;
        case FuncKind::Exp: out += "exp"; break;
        case FuncKind::Sqrt: out += "sqrt"; break;
        case FuncKind::Log: out += "log"; break;
      }
      out += '(';
      print_node(*nd.a, out);
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string ScalarField::to_string() const {
  if (!root_) return "";
  std::string out;
  detail::print_node(*root_, out);
  return out;
}

inline ScalarField parse_field(const std::string& text, int dim) {
  if (dim < 1) throw ValidationError("chart dimension must be positive");
  detail::Parser p(text, dim);
  return ScalarField(p.parse(), dim);
}

}  // namespace ptrac
