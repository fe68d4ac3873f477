#pragma once

// Rate-function expressions in one or two trait variables.
//
// Grammar (whitespace ignored):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | atom ('^' factor)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//
// '^' is right-associative and unary minus applies to the whole power, so
// "-x^2" is -(x^2). Identifiers are the variables x and y, the constants pi
// and e, and the functions exp, log, sin, cos, sqrt.

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "eadlab/dual.hpp"

namespace eadlab::expr {

enum class Variable { X, Y };
enum class UnaryOp { Neg, Exp, Log, Sin, Cos, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Constant, Variable, Unary, Binary };

  Kind kind = Kind::Constant;
  double value = 0.0;
  Variable var = Variable::X;
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  NodePtr lhs;
  NodePtr rhs;
};

/// Immutable expression tree. Copies share structure; safe to evaluate
/// concurrently.
class Expr {
 public:
  /// The constant 0.
  Expr();

  static Expr constant(double v);
  static Expr variable(Variable v);
  static Expr unary(UnaryOp op, const Expr& arg);
  static Expr binary(BinaryOp op, const Expr& lhs, const Expr& rhs);

  const Node& root() const { return *root_; }
  bool uses(Variable v) const;
  std::size_t depth() const;

  /// Evaluates in binary64. Throws DomainError on log of a non-positive
  /// value, sqrt of a negative value, division by zero or any non-finite
  /// result; PreconditionError if y is used but not bound.
  double eval(double x, std::optional<double> y = std::nullopt) const;

  /// Value and exact derivative with respect to `seed`.
  Dual eval_d(double x, std::optional<double> y, Variable seed) const;

 private:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

/// Throws ParseError carrying the byte offset of the first bad token.
Expr parse(std::string_view source);

/// Fully parenthesized source that parses back to an equivalent tree.
std::string print(const Expr& e);

inline double eval(const Expr& e, double x, std::optional<double> y = std::nullopt) {
  return e.eval(x, y);
}

inline Dual eval_d(const Expr& e, double x, std::optional<double> y, Variable seed) {
  return e.eval_d(x, y, seed);
}

}  // namespace eadlab::expr
