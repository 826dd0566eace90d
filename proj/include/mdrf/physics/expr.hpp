#pragma once

// A small closed-form expression language for boundary and initial data.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Names are the coordinate variables the caller declares (x, z, t in 2D;
// ra, theta, phi, t in 3D) plus the constant `pi`. Functions: sin, cos, tan,
// exp, log, sqrt, tanh, abs.

#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdrf/errors.hpp"

namespace mdrf::physics {

class Expression {
 public:
  Expression() : Expression(0.0) {}
  explicit Expression(double constant) : root_(std::make_shared<Node>()) {
    root_->kind = Kind::Number;
    root_->number = constant;
    text_ = std::to_string(constant);
  }

  /// Parses `text`; `variables` name the slots of the evaluation point.
  static Expression parse(const std::string& text, std::vector<std::string> variables) {
    Parser p{text, 0, variables};
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("unexpected trailing input");
    e.text_ = text;
    e.arity_ = variables.size();
    return e;
  }

  double operator()(std::span<const double> point) const {
    if (arity_ != 0 && point.size() < arity_) throw InvalidArgument("expression evaluated with too few coordinates");
    return eval(*root_, point);
  }

  const std::string& text() const noexcept { return text_; }

 private:
  enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Tanh, Abs };

  struct Node {
    Kind kind = Kind::Number;
    double number = 0.0;
    std::size_t slot = 0;
    Fn fn = Fn::Sin;
    std::shared_ptr<Node> lhs, rhs;
  };
  using NodePtr = std::shared_ptr<Node>;

  static double eval(const Node& n, std::span<const double> x) {
    switch (n.kind) {
      case Kind::Number: return n.number;
      case Kind::Variable: return x[n.slot];
      case Kind::Neg: return -eval(*n.lhs, x);
      case Kind::Add: return eval(*n.lhs, x) + eval(*n.rhs, x);
      case Kind::Sub: return eval(*n.lhs, x) - eval(*n.rhs, x);
      case Kind::Mul: return eval(*n.lhs, x) * eval(*n.rhs, x);
      case Kind::Div: return eval(*n.lhs, x) / eval(*n.rhs, x);
      case Kind::Pow: return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
      case Kind::Call: {
        const double a = eval(*n.lhs, x);
        switch (n.fn) {
          case Fn::Sin: return std::sin(a);
          case Fn::Cos: return std::cos(a);
          case Fn::Tan: return std::tan(a);
          case Fn::Exp: return std::exp(a);
          case Fn::Log: return std::log(a);
          case Fn::Sqrt: return std::sqrt(a);
          case Fn::Tanh: return std::tanh(a);
          case Fn::Abs: return std::fabs(a);
        }
      }
    }
    return 0.0;
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;
    const std::vector<std::string>& vars;

    [[noreturn]] void fail(const std::string& why) const {
      throw InvalidArgument("expression '" + s + "' at offset " + std::to_string(pos) + ": " + why);
    }
    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
      auto n = std::make_shared<Node>();
      n->kind = k;
      n->lhs = std::move(a);
      n->rhs = std::move(b);
      return n;
    }

    NodePtr parse_expr() {
      NodePtr lhs = parse_term();
      for (;;) {
        if (eat('+')) lhs = binary(Kind::Add, lhs, parse_term());
        else if (eat('-')) lhs = binary(Kind::Sub, lhs, parse_term());
        else return lhs;
      }
    }
    NodePtr parse_term() {
      NodePtr lhs = parse_unary();
      for (;;) {
        if (eat('*')) lhs = binary(Kind::Mul, lhs, parse_unary());
        else if (eat('/')) lhs = binary(Kind::Div, lhs, parse_unary());
        else return lhs;
      }
    }
    NodePtr parse_unary() {
      if (eat('-')) return binary(Kind::Neg, parse_unary(), nullptr);
      if (eat('+')) return parse_unary();
      return parse_power();
    }
    NodePtr parse_power() {
      NodePtr base = parse_primary();
      if (eat('^')) return binary(Kind::Pow, base, parse_unary());
      return base;
    }
    NodePtr parse_primary() {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of input");
      if (eat('(')) {
        NodePtr e = parse_expr();
        if (!eat(')')) fail("expected ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += used;
        auto n = std::make_shared<Node>();
        n->number = v;
        return n;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        const std::string name = s.substr(start, pos - start);
        if (eat('(')) {
          auto n = std::make_shared<Node>();
          n->kind = Kind::Call;
          n->fn = function(name);
          n->lhs = parse_expr();
          if (!eat(')')) fail("expected ')' after function argument");
          return n;
        }
        auto n = std::make_shared<Node>();
        if (name == "pi") {
          n->number = 3.14159265358979323846;
          return n;
        }
        for (std::size_t i = 0; i < vars.size(); ++i) {
          if (vars[i] == name) {
            n->kind = Kind::Variable;
            n->slot = i;
            return n;
          }
        }
        fail("unknown name '" + name + "'");
      }
      fail(std::string("unexpected character '") + c + "'");
    }
    Fn function(const std::string& name) const {
      if (name == "sin") return Fn::Sin;
      if (name == "cos") return Fn::Cos;
      if (name == "tan") return Fn::Tan;
      if (name == "exp") return Fn::Exp;
      if (name == "log") return Fn::Log;
      if (name == "sqrt") return Fn::Sqrt;
      if (name == "tanh") return Fn::Tanh;
      if (name == "abs") return Fn::Abs;
      fail("unknown function '" + name + "'");
    }
  };

  NodePtr root_;
  std::string text_;
  std::size_t arity_ = 0;
};

}  // namespace mdrf::physics
