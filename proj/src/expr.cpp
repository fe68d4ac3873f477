#include "eadlab/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "eadlab/error.hpp"

namespace eadlab::expr {

namespace {

NodePtr make_constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->value = v;
  return n;
}

// ---------------------------------------------------------------------------
// Evaluation

template <class T>
struct Bindings {
  T x;
  std::optional<T> y;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

Dual checked(Dual v, const char* what) {
  if (!std::isfinite(v.value) || !std::isfinite(v.deriv))
    throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

double value_of(double v) { return v; }
double value_of(Dual v) { return v.value; }

template <class T>
T evaluate(const Node& n, const Bindings<T>& env) {
  using std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt;
  switch (n.kind) {
    case Node::Kind::Constant:
      return T(n.value);
    case Node::Kind::Variable:
      if (n.var == Variable::X) return env.x;
      if (!env.y) throw PreconditionError("variable y is not bound");
      return *env.y;
    case Node::Kind::Unary: {
      const T a = evaluate(*n.lhs, env);
      switch (n.unary) {
        case UnaryOp::Neg:
          return -a;
        case UnaryOp::Exp:
          return checked(exp(a), "exp");
        case UnaryOp::Log:
          if (!(value_of(a) > 0.0)) throw DomainError("log of a non-positive value");
          return checked(log(a), "log");
        case UnaryOp::Sin:
          return checked(sin(a), "sin");
        case UnaryOp::Cos:
          return checked(cos(a), "cos");
        case UnaryOp::Sqrt:
          if (value_of(a) < 0.0) throw DomainError("sqrt of a negative value");
          return checked(sqrt(a), "sqrt");
      }
      break;
    }
    case Node::Kind::Binary: {
      const T a = evaluate(*n.lhs, env);
      const T b = evaluate(*n.rhs, env);
      switch (n.binary) {
        case BinaryOp::Add:
          return checked(a + b, "+");
        case BinaryOp::Sub:
          return checked(a - b, "-");
        case BinaryOp::Mul:
          return checked(a * b, "*");
        case BinaryOp::Div:
          if (value_of(b) == 0.0) throw DomainError("division by zero");
          return checked(a / b, "/");
        case BinaryOp::Pow:
          return checked(pow(a, b), "^");
      }
      break;
    }
  }
  throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Parsing

struct Function {
  std::string_view name;
  UnaryOp op;
};

constexpr std::array<Function, 5> kFunctions{{
    {"exp", UnaryOp::Exp},
    {"log", UnaryOp::Log},
    {"sin", UnaryOp::Sin},
    {"cos", UnaryOp::Cos},
    {"sqrt", UnaryOp::Sqrt},
}};

constexpr std::string_view kAtomStart = "number, identifier, '(' or '-'";

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr run() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "empty expression");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(pos_, "expected operator or end of input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (peek('+')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Add, lhs, parse_term());
      } else if (peek('-')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (peek('*')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Mul, lhs, parse_factor());
      } else if (peek('/')) {
        ++pos_;
        lhs = Expr::binary(BinaryOp::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    if (peek('-')) {
      ++pos_;
      return Expr::unary(UnaryOp::Neg, parse_factor());
    }
    Expr base = parse_atom();
    if (peek('^')) {
      ++pos_;
      return Expr::binary(BinaryOp::Pow, base, parse_factor());
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, std::string("expected ") + std::string(kAtomStart));
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError(pos_, std::string("expected ") + std::string(kAtomStart));
  }

  void expect(char c) {
    if (!peek(c)) throw ParseError(pos_, std::string("expected '") + c + "'");
    ++pos_;
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) throw ParseError(start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        // "2e" is not an exponent; leave 'e' for the caller to reject
        pos_ = save;
      }
    }
    double v = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ParseError(start, "malformed number");
    return Expr::constant(v);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (peek('(')) {
      const auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                                   [&](const Function& f) { return f.name == name; });
      if (it == kFunctions.end())
        throw ParseError(start, "unknown function '" + std::string(name) + "'");
      ++pos_;
      Expr arg = parse_expr();
      expect(')');
      return Expr::unary(it->op, arg);
    }
    if (name == "x") return Expr::variable(Variable::X);
    if (name == "y") return Expr::variable(Variable::Y);
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (name == "e") return Expr::constant(std::numbers::e);
    throw ParseError(start, "unknown variable '" + std::string(name) + "' (expected x or y)");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printing

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::fabs(v));
  std::string s(buf.data(), ptr);
  return std::signbit(v) ? "(-" + s + ")" : s;
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Constant:
      out += format_number(n.value);
      return;
    case Node::Kind::Variable:
      out += n.var == Variable::X ? "x" : "y";
      return;
    case Node::Kind::Unary:
      if (n.unary == UnaryOp::Neg) {
        out += "(-";
        print_node(*n.lhs, out);
        out += ")";
        return;
      }
      for (const auto& f : kFunctions)
        if (f.op == n.unary) out += f.name;
      out += "(";
      print_node(*n.lhs, out);
      out += ")";
      return;
    case Node::Kind::Binary: {
      static constexpr std::array<char, 5> kSymbols{'+', '-', '*', '/', '^'};
      out += "(";
      print_node(*n.lhs, out);
      out += kSymbols[static_cast<std::size_t>(n.binary)];
      print_node(*n.rhs, out);
      out += ")";
      return;
    }
  }
}

bool node_uses(const Node& n, Variable v) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return false;
    case Node::Kind::Variable:
      return n.var == v;
    case Node::Kind::Unary:
      return node_uses(*n.lhs, v);
    case Node::Kind::Binary:
      return node_uses(*n.lhs, v) || node_uses(*n.rhs, v);
  }
  return false;
}

std::size_t node_depth(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Unary:
      return 1 + node_depth(*n.lhs);
    case Node::Kind::Binary:
      return 1 + std::max(node_depth(*n.lhs), node_depth(*n.rhs));
    default:
      return 1;
  }
}

}  // namespace

Expr::Expr() : root_(make_constant(0.0)) {}

Expr Expr::constant(double v) { return Expr(make_constant(v)); }

Expr Expr::variable(Variable v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Variable;
  n->var = v;
  return Expr(std::move(n));
}

Expr Expr::unary(UnaryOp op, const Expr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Unary;
  n->unary = op;
  n->lhs = arg.root_;
  return Expr(std::move(n));
}

Expr Expr::binary(BinaryOp op, const Expr& lhs, const Expr& rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->binary = op;
  n->lhs = lhs.root_;
  n->rhs = rhs.root_;
  return Expr(std::move(n));
}

bool Expr::uses(Variable v) const { return node_uses(*root_, v); }

std::size_t Expr::depth() const { return node_depth(*root_); }

double Expr::eval(double x, std::optional<double> y) const {
  return evaluate<double>(*root_, Bindings<double>{x, y});
}

Dual Expr::eval_d(double x, std::optional<double> y, Variable seed) const {
  Bindings<Dual> env{seed == Variable::X ? Dual::seed(x) : Dual::constant(x), std::nullopt};
  if (y) env.y = seed == Variable::Y ? Dual::seed(*y) : Dual::constant(*y);
  else if (seed == Variable::Y) throw PreconditionError("seed variable y is not bound");
  return evaluate<Dual>(*root_, env);
}

Expr parse(std::string_view source) { return Parser(source).run(); }

std::string print(const Expr& e) {
  std::string out;
  print_node(e.root(), out);
  return out;
}

}  // namespace eadlab::expr
