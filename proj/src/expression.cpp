#include "locfield/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace locfield {

struct Expression::Node {
  enum class Op { number, var_x, var_y, neg, add, sub, mul, div, pow, call };
  Op op = Op::number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  [[nodiscard]] double eval(const Location& t) const {
    switch (op) {
      case Op::number: return value;
      case Op::var_x: return t(0);
      case Op::var_y: return t(1);
      case Op::neg: return -a->eval(t);
      case Op::add: return a->eval(t) + b->eval(t);
      case Op::sub: return a->eval(t) - b->eval(t);
      case Op::mul: return a->eval(t) * b->eval(t);
      case Op::div: return a->eval(t) / b->eval(t);
      case Op::pow: return std::pow(a->eval(t), b->eval(t));
      case Op::call: return fn(a->eval(t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
    {"sqrt", [](double v) { return std::sqrt(v); }}, {"abs", [](double v) { return std::fabs(v); }},
};

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

  int dim = 0;

 private:
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
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " + std::to_string(pos_));
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::add, lhs, product());
      } else if (accept('-')) {
        lhs = make(Op::sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  // right associative; -x^2 parses as -(x^2)
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      return make_number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (name == "x") {
        dim = std::max(dim, 1);
        return make(Op::var_x);
      }
      if (name == "y") {
        dim = 2;
        return make(Op::var_y);
      }
      if (name == "pi") return make_number(std::numbers::pi);
      for (const auto& f : kFunctions) {
        if (name == f.name) {
          if (!accept('(')) fail("expected '(' after " + name);
          NodePtr arg = sum();
          if (!accept(')')) fail("expected ')'");
          auto n = std::make_shared<Expression::Node>();
          n->op = Op::call;
          n->fn = f.fn;
          n->a = std::move(arg);
          return n;
        }
      }
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse();
  e.text_ = text;
  e.required_dim_ = p.dim;
  return e;
}

double Expression::operator()(const Location& t) const {
  if (t.size() < required_dim_) {
    throw ConfigError("expression '" + text_ + "' needs a " + std::to_string(required_dim_) +
                      "D location");
  }
  return root_->eval(t);
}

bool Expression::is_constant() const { return required_dim_ == 0; }

LocalParamFunction to_param_function(const Expression& e) {
  if (e.is_constant()) return {e(Location::Zero(1))};
  return {[e](const Location& t) { return e(t); }, e.text()};
}

}  // namespace locfield
