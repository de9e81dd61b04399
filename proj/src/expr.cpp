#include "ptrack/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ptrack {

namespace {
enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };
}

struct Expression::Node {
  Op op = Op::Num;
  double value = 0.0;  // Num
  int var = 0;         // Var: 0=x 1=y 2=z
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("expression parse error at position " + std::to_string(pos) +
                             " in \"" + s + "\": " + msg);
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool consume(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr number() {
    skip_ws();
    const char* begin = s.c_str() + pos;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected number");
    pos += static_cast<size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Num;
    n->value = v;
    return n;
  }

  NodePtr primary() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (c == '(') {
      ++pos;
      NodePtr e = expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos;
      while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
      std::string ident = s.substr(start, pos - start);
      if (ident == "x" || ident == "y" || ident == "z") {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Var;
        n->var = ident == "x" ? 0 : ident == "y" ? 1 : 2;
        return n;
      }
      if (ident == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::Num;
        n->value = M_PI;
        return n;
      }
      Op fop;
      if (ident == "sin")
        fop = Op::Sin;
      else if (ident == "cos")
        fop = Op::Cos;
      else if (ident == "exp")
        fop = Op::Exp;
      else
        fail("unknown identifier '" + ident + "'");
      if (!consume('(')) fail("expected '(' after function name");
      NodePtr arg = expr();
      if (!consume(')')) fail("expected ')'");
      return make(fop, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  // unary minus binds looser than '^': -x^2 == -(x^2)
  NodePtr factor() {
    if (consume('-')) return make(Op::Neg, factor());
    NodePtr base = primary();
    if (consume('^')) return make(Op::Pow, base, factor());
    return base;
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      char c = peek();
      if (c == '*') {
        ++pos;
        lhs = make(Op::Mul, lhs, factor());
      } else if (c == '/') {
        ++pos;
        lhs = make(Op::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      char c = peek();
      if (c == '+') {
        ++pos;
        lhs = make(Op::Add, lhs, term());
      } else if (c == '-') {
        ++pos;
        lhs = make(Op::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }
};

double eval_node(const Expression::Node& n, const Eigen::Vector3d& p) {
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return p[n.var];
    case Op::Neg: return -eval_node(*n.a, p);
    case Op::Add: return eval_node(*n.a, p) + eval_node(*n.b, p);
    case Op::Sub: return eval_node(*n.a, p) - eval_node(*n.b, p);
    case Op::Mul: return eval_node(*n.a, p) * eval_node(*n.b, p);
    case Op::Div: return eval_node(*n.a, p) / eval_node(*n.b, p);
    case Op::Pow: return std::pow(eval_node(*n.a, p), eval_node(*n.b, p));
    case Op::Sin: return std::sin(eval_node(*n.a, p));
    case Op::Cos: return std::cos(eval_node(*n.a, p));
    case Op::Exp: return std::exp(eval_node(*n.a, p));
  }
  return 0.0;
}

double eval_grad_node(const Expression::Node& n, const Eigen::Vector3d& p, Eigen::Vector3d& g) {
  Eigen::Vector3d ga, gb;
  switch (n.op) {
    case Op::Num:
      g.setZero();
      return n.value;
    case Op::Var:
      g.setZero();
      g[n.var] = 1.0;
      return p[n.var];
    case Op::Neg: {
      double v = eval_grad_node(*n.a, p, ga);
      g = -ga;
      return -v;
    }
    case Op::Add: {
      double va = eval_grad_node(*n.a, p, ga), vb = eval_grad_node(*n.b, p, gb);
      g = ga + gb;
      return va + vb;
    }
    case Op::Sub: {
      double va = eval_grad_node(*n.a, p, ga), vb = eval_grad_node(*n.b, p, gb);
      g = ga - gb;
      return va - vb;
    }
    case Op::Mul: {
      double va = eval_grad_node(*n.a, p, ga), vb = eval_grad_node(*n.b, p, gb);
      g = vb * ga + va * gb;
      return va * vb;
    }
    case Op::Div: {
      double va = eval_grad_node(*n.a, p, ga), vb = eval_grad_node(*n.b, p, gb);
      g = (ga - (va / vb) * gb) / vb;
      return va / vb;
    }
    case Op::Pow: {
      double va = eval_grad_node(*n.a, p, ga), vb = eval_grad_node(*n.b, p, gb);
      double v = std::pow(va, vb);
      if (gb.isZero()) {
        // constant exponent; valid for negative bases with integer exponents
        g = vb * std::pow(va, vb - 1.0) * ga;
      } else {
        g = v * (gb * std::log(va) + (vb / va) * ga);
      }
      return v;
    }
    case Op::Sin: {
      double v = eval_grad_node(*n.a, p, ga);
      g = std::cos(v) * ga;
      return std::sin(v);
    }
    case Op::Cos: {
      double v = eval_grad_node(*n.a, p, ga);
      g = -std::sin(v) * ga;
      return std::cos(v);
    }
    case Op::Exp: {
      double v = eval_grad_node(*n.a, p, ga);
      double e = std::exp(v);
      g = e * ga;
      return e;
    }
  }
  g.setZero();
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser parser(text);
  Expression e;
  e.root_ = parser.expr();
  parser.skip_ws();
  if (parser.pos != text.size()) parser.fail("trailing input");
  e.text_ = text;
  return e;
}

double Expression::eval(const Eigen::Vector3d& p) const {
  return root_ ? eval_node(*root_, p) : 0.0;
}

double Expression::eval_with_gradient(const Eigen::Vector3d& p, Eigen::Vector3d& grad) const {
  if (!root_) {
    grad.setZero();
    return 0.0;
  }
  return eval_grad_node(*root_, p, grad);
}

}  // namespace ptrack
