#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace parastab {

// Arithmetic expressions over the variables t, x1, x2 with the functions
// sin, cos, exp, abs. Exponents of ^ are restricted to integers so that
// differentiation stays inside the grammar.
struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class ExprKind { Constant, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Abs };
enum class Var { T, X1, X2 };

struct ExprNode {
  ExprKind kind;
  double value = 0.0;    // Constant
  Var var = Var::T;      // Var
  long exponent = 0;     // Pow
  Expr a, b;             // operands
};

struct ExprSyntaxError : std::runtime_error {
  std::size_t position;
  ExprSyntaxError(std::size_t pos, const std::string& what)
      : std::runtime_error("syntax error at position " + std::to_string(pos) + ": " + what),
        position(pos) {}
};

struct NonDifferentiable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Expr constant(double v);
Expr variable(Var v);
Expr operator-(Expr a);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr pow(Expr a, long n);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);
Expr abs(Expr a);

Expr parse_expr(const std::string& text);
double eval(const Expr& e, double t, double x1, double x2);
Expr differentiate(const Expr& e, Var var);
std::string to_string(const Expr& e);

}  // namespace parastab
