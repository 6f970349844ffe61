#include "parastab/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace parastab {

namespace {

Expr node(ExprKind k, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const Expr& e, double v) {
  return e->kind == ExprKind::Constant && e->value == v;
}

}  // namespace

Expr constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Constant;
  n->value = v;
  return n;
}

Expr variable(Var v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Var;
  n->var = v;
  return n;
}

// Construction folds constants and drops 0/1 identities; nothing deeper.
Expr operator-(Expr a) {
  if (a->kind == ExprKind::Constant) return constant(-a->value);
  return node(ExprKind::Neg, std::move(a));
}

Expr operator+(Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
    return constant(a->value + b->value);
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  return node(ExprKind::Add, std::move(a), std::move(b));
}

Expr operator-(Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
    return constant(a->value - b->value);
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return -std::move(b);
  return node(ExprKind::Sub, std::move(a), std::move(b));
}

Expr operator*(Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant)
    return constant(a->value * b->value);
  if (is_const(a, 0) || is_const(b, 0)) return constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  return node(ExprKind::Mul, std::move(a), std::move(b));
}

Expr operator/(Expr a, Expr b) {
  if (a->kind == ExprKind::Constant && b->kind == ExprKind::Constant && b->value != 0)
    return constant(a->value / b->value);
  if (is_const(a, 0)) return constant(0);
  if (is_const(b, 1)) return a;
  return node(ExprKind::Div, std::move(a), std::move(b));
}

Expr pow(Expr a, long n) {
  if (n == 0) return constant(1);
  if (n == 1) return a;
  if (a->kind == ExprKind::Constant) return constant(std::pow(a->value, double(n)));
  auto e = node(ExprKind::Pow, std::move(a));
  const_cast<ExprNode*>(e.get())->exponent = n;
  return e;
}

Expr sin(Expr a) {
  if (a->kind == ExprKind::Constant) return constant(std::sin(a->value));
  return node(ExprKind::Sin, std::move(a));
}
Expr cos(Expr a) {
  if (a->kind == ExprKind::Constant) return constant(std::cos(a->value));
  return node(ExprKind::Cos, std::move(a));
}
Expr exp(Expr a) {
  if (a->kind == ExprKind::Constant) return constant(std::exp(a->value));
  return node(ExprKind::Exp, std::move(a));
}
Expr abs(Expr a) {
  if (a->kind == ExprKind::Constant) return constant(std::abs(a->value));
  return node(ExprKind::Abs, std::move(a));
}

double eval(const Expr& e, double t, double x1, double x2) {
  switch (e->kind) {
    case ExprKind::Constant: return e->value;
    case ExprKind::Var:
      return e->var == Var::T ? t : (e->var == Var::X1 ? x1 : x2);
    case ExprKind::Neg: return -eval(e->a, t, x1, x2);
    case ExprKind::Add: return eval(e->a, t, x1, x2) + eval(e->b, t, x1, x2);
    case ExprKind::Sub: return eval(e->a, t, x1, x2) - eval(e->b, t, x1, x2);
    case ExprKind::Mul: return eval(e->a, t, x1, x2) * eval(e->b, t, x1, x2);
    case ExprKind::Div: return eval(e->a, t, x1, x2) / eval(e->b, t, x1, x2);
    case ExprKind::Pow: return std::pow(eval(e->a, t, x1, x2), double(e->exponent));
    case ExprKind::Sin: return std::sin(eval(e->a, t, x1, x2));
    case ExprKind::Cos: return std::cos(eval(e->a, t, x1, x2));
    case ExprKind::Exp: return std::exp(eval(e->a, t, x1, x2));
    case ExprKind::Abs: return std::abs(eval(e->a, t, x1, x2));
  }
  return 0;
}

Expr differentiate(const Expr& e, Var v) {
  switch (e->kind) {
    case ExprKind::Constant: return constant(0);
    case ExprKind::Var: return constant(e->var == v ? 1 : 0);
    case ExprKind::Neg: return -differentiate(e->a, v);
    case ExprKind::Add: return differentiate(e->a, v) + differentiate(e->b, v);
    case ExprKind::Sub: return differentiate(e->a, v) - differentiate(e->b, v);
    case ExprKind::Mul:
      return differentiate(e->a, v) * e->b + e->a * differentiate(e->b, v);
    case ExprKind::Div:
      return (differentiate(e->a, v) * e->b - e->a * differentiate(e->b, v)) /
             pow(e->b, 2);
    case ExprKind::Pow:
      return constant(double(e->exponent)) * pow(e->a, e->exponent - 1) *
             differentiate(e->a, v);
    case ExprKind::Sin: return cos(e->a) * differentiate(e->a, v);
    case ExprKind::Cos: return -(sin(e->a) * differentiate(e->a, v));
    case ExprKind::Exp: return exp(e->a) * differentiate(e->a, v);
    case ExprKind::Abs: {
      auto d = differentiate(e->a, v);
      if (is_const(d, 0)) return constant(0);
      throw NonDifferentiable("abs is not differentiable on the derivation path");
    }
  }
  return constant(0);
}

namespace {

// Recursive descent parser. Precedence: ^ > unary- > * / > + -.
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Expr parse() {
    auto e = sum();
    skip_ws();
    if (pos_ != s_.size()) throw ExprSyntaxError(pos_, "unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  Expr sum() {
    auto e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  Expr term() {
    auto e = unary();
    for (;;) {
      if (accept('*')) e = e * unary();
      else if (accept('/')) e = e / unary();
      else return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  Expr power() {
    auto base = atom();
    if (accept('^')) {
      // right-associative; exponent may be negated
      bool neg = accept('-');
      skip_ws();
      std::size_t start = pos_;
      long n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        n = n * 10 + (s_[pos_] - '0');
        ++pos_;
      }
      if (pos_ == start) throw ExprSyntaxError(pos_, "expected integer exponent");
      if (neg) n = -n;
      if (n < 0) return constant(1) / pow(base, -n);
      return pow(base, n);
    }
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos_ >= s_.size()) throw ExprSyntaxError(pos_, "unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = sum();
      if (!accept(')')) throw ExprSyntaxError(pos_, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    throw ExprSyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
            s_[pos_] == 'e' || s_[pos_] == 'E' ||
            ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
             (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    try {
      std::size_t used = 0;
      double v = std::stod(s_.substr(start, pos_ - start), &used);
      if (used != pos_ - start) throw std::invalid_argument("");
      return constant(v);
    } catch (const std::exception&) {
      throw ExprSyntaxError(start, "malformed number");
    }
  }

  Expr name() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_]))))
      ++pos_;
    std::string id = s_.substr(start, pos_ - start);
    if (id == "t") return variable(Var::T);
    if (id == "x1") return variable(Var::X1);
    if (id == "x2") return variable(Var::X2);
    if (id == "sin" || id == "cos" || id == "exp" || id == "abs") {
      if (!accept('(')) throw ExprSyntaxError(pos_, "expected '(' after " + id);
      auto arg = sum();
      if (!accept(')')) throw ExprSyntaxError(pos_, "expected ')'");
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      if (id == "exp") return exp(arg);
      return abs(arg);
    }
    throw ExprSyntaxError(start, "unknown identifier '" + id + "'");
  }
};

void print(const Expr& e, std::ostream& os) {
  auto paren = [&](const Expr& c) {
    os << '(';
    print(c, os);
    os << ')';
  };
  switch (e->kind) {
    case ExprKind::Constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << e->value;
      std::string s = tmp.str();
      if (e->value < 0) os << '(' << s << ')';
      else os << s;
      break;
    }
    case ExprKind::Var:
      os << (e->var == Var::T ? "t" : e->var == Var::X1 ? "x1" : "x2");
      break;
    case ExprKind::Neg:
      os << '-';
      paren(e->a);
      break;
    case ExprKind::Add:
      paren(e->a);
      os << '+';
      paren(e->b);
      break;
    case ExprKind::Sub:
      paren(e->a);
      os << '-';
      paren(e->b);
      break;
    case ExprKind::Mul:
      paren(e->a);
      os << '*';
      paren(e->b);
      break;
    case ExprKind::Div:
      paren(e->a);
      os << '/';
      paren(e->b);
      break;
    case ExprKind::Pow:
      paren(e->a);
      os << '^' << e->exponent;
      break;
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Abs:
      os << (e->kind == ExprKind::Sin   ? "sin"
             : e->kind == ExprKind::Cos ? "cos"
             : e->kind == ExprKind::Exp ? "exp"
                                        : "abs");
      paren(e->a);
      break;
  }
}

}  // namespace

Expr parse_expr(const std::string& text) {
  Parser p(text);
  return p.parse();
}

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(e, os);
  return os.str();
}

}  // namespace parastab
