#include "vpfp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>

#include "vpfp/error.hpp"

namespace vpfp {

struct Expression::Node {
  enum class Kind { constant, variable, unary_minus, binary, call } kind = Kind::constant;
  double value = 0.0;
  std::size_t index = 0;
  char op = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> v) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return v[index];
      case Kind::unary_minus: return -lhs->eval(v);
      case Kind::call: return fn(lhs->eval(v));
      case Kind::binary: {
        const double a = lhs->eval(v), b = rhs->eval(v);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
        }
      }
    }
    return 0.0;
  }

  bool uses(std::size_t i) const {
    if (kind == Kind::variable) return index == i;
    return (lhs && lhs->uses(i)) || (rhs && rhs->uses(i));
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         const std::map<std::string, double>& consts)
      : s_(text), vars_(vars), consts_(consts) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at column " + std::to_string(pos_ + 1));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }
  static NodePtr make_constant(double v) {
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr expr() {
    NodePtr a = term();
    for (;;) {
      if (accept('+')) a = make_binary('+', a, term());
      else if (accept('-')) a = make_binary('-', a, term());
      else return a;
    }
  }
  NodePtr term() {
    NodePtr a = unary();
    for (;;) {
      if (accept('*')) a = make_binary('*', a, unary());
      else if (accept('/')) a = make_binary('/', a, unary());
      else return a;
    }
  }
  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::unary_minus;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary('^', base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make_constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name = s_.substr(start, pos_ - start);
      if (accept('(')) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::call;
        n->fn = function(name);
        n->lhs = expr();
        if (!accept(')')) fail("expected ')' after argument of " + name);
        return n;
      }
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::variable;
          n->index = i;
          return n;
        }
      }
      if (auto it = consts_.find(name); it != consts_.end()) return make_constant(it->second);
      if (name == "pi") return make_constant(std::numbers::pi);
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
  double (*function(const std::string& name))(double) {
    static const std::map<std::string, double (*)(double)> table = {
        {"sin", [](double x) { return std::sin(x); }},   {"cos", [](double x) { return std::cos(x); }},
        {"tan", [](double x) { return std::tan(x); }},   {"exp", [](double x) { return std::exp(x); }},
        {"log", [](double x) { return std::log(x); }},   {"sqrt", [](double x) { return std::sqrt(x); }},
        {"abs", [](double x) { return std::abs(x); }},   {"tanh", [](double x) { return std::tanh(x); }},
        {"cosh", [](double x) { return std::cosh(x); }}, {"sinh", [](double x) { return std::sinh(x); }},
    };
    auto it = table.find(name);
    if (it == table.end()) fail("unknown function '" + name + "'");
    return it->second;
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables,
                             const std::map<std::string, double>& constants) {
  Expression e;
  e.text_ = text;
  Parser p(e.text_, variables, constants);
  e.root_ = p.parse();
  return e;
}

double Expression::operator()(std::span<const double> values) const {
  if (!root_) throw ConfigError("evaluating an empty expression");
  return root_->eval(values);
}

bool Expression::uses(std::size_t variable) const { return root_ && root_->uses(variable); }

}  // namespace vpfp
