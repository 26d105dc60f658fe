#include "bwlab/expression.hpp"

#include <cctype>
#include <charconv>
#include <utility>
#include <variant>
#include <vector>

#include "bwlab/errors.hpp"

namespace bwlab::classtest {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

LogNum LogNum::of(double v) {
  if (v == 0.0) return {0, kNegInf};
  return {v > 0.0 ? 1 : -1, std::log(std::abs(v))};
}

double LogNum::value() const { return sign == 0 ? 0.0 : sign * std::exp(la); }

LogNum operator*(LogNum a, LogNum b) {
  if (a.sign == 0 || b.sign == 0) return {};
  return {a.sign * b.sign, a.la + b.la};
}

LogNum operator/(LogNum a, LogNum b) {
  if (b.sign == 0) throw DomainError("division by zero in expression");
  if (a.sign == 0) return {};
  return {a.sign * b.sign, a.la - b.la};
}

LogNum operator+(LogNum a, LogNum b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.la < b.la) std::swap(a, b);
  const double d = b.la - a.la;  // <= 0
  if (a.sign == b.sign) return {a.sign, a.la + std::log1p(std::exp(d))};
  if (d == 0.0) return {};
  return {a.sign, a.la + std::log1p(-std::exp(d))};
}

LogNum operator-(LogNum a) { return {-a.sign, a.la}; }
LogNum operator-(LogNum a, LogNum b) { return a + (-b); }

LogNum pow(LogNum a, double e) {
  if (a.sign == 0) {
    if (e > 0.0) return {};
    throw DomainError("zero raised to a non-positive power");
  }
  if (a.sign < 0) {
    if (e != std::floor(e)) throw DomainError("negative base with non-integer exponent");
    const bool odd = std::fmod(std::abs(e), 2.0) == 1.0;
    return {odd ? -1 : 1, a.la * e};
  }
  return {1, a.la * e};
}

LogNum log(LogNum a) {
  if (a.sign <= 0) throw DomainError("log of a non-positive value");
  return LogNum::of(a.la);
}

bool operator<(LogNum a, LogNum b) {
  if (a.sign != b.sign) return a.sign < b.sign;
  if (a.sign == 0) return false;
  return a.sign > 0 ? a.la < b.la : a.la > b.la;
}

Point Point::at(double x) {
  if (!(x > 1.0)) throw DomainError("evaluation point must exceed 1");
  return {std::log(std::log(x))};
}

// ---- parser ----------------------------------------------------------------

enum class Fn { Log, LogLog, LogLogLog, Sqrt };
enum class Op { Add, Sub, Mul, Div, Pow };

struct Expression::Node {
  struct Num {
    double v;
  };
  struct Var {};
  struct Neg {
    std::shared_ptr<const Node> a;
  };
  struct Bin {
    Op op;
    std::shared_ptr<const Node> a, b;
  };
  struct Call {
    Fn fn;
    std::shared_ptr<const Node> a;
  };
  std::variant<Num, Var, Neg, Bin, Call> v;
};

namespace {

using NodeP = std::shared_ptr<const Expression::Node>;

template <class T>
NodeP make(T t) {
  return std::make_shared<const Expression::Node>(Expression::Node{std::move(t)});
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodeP parse() {
    NodeP e = expr();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DomainError("expression: " + what + " at offset " + std::to_string(i_));
  }
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  NodeP expr() {
    NodeP a = term();
    for (;;) {
      if (eat('+')) a = make(Expression::Node::Bin{Op::Add, a, term()});
      else if (eat('-')) a = make(Expression::Node::Bin{Op::Sub, a, term()});
      else return a;
    }
  }
  NodeP term() {
    NodeP a = unary();
    for (;;) {
      if (eat('*')) a = make(Expression::Node::Bin{Op::Mul, a, unary()});
      else if (eat('/')) a = make(Expression::Node::Bin{Op::Div, a, unary()});
      else return a;
    }
  }
  NodeP unary() {
    if (eat('-')) return make(Expression::Node::Neg{unary()});
    if (eat('+')) return unary();
    return power();
  }
  NodeP power() {
    NodeP a = primary();
    if (eat('^')) return make(Expression::Node::Bin{Op::Pow, a, unary()});
    return a;
  }
  NodeP primary() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    const char c = s_[i_];
    if (c == '(') {
      ++i_;
      NodeP e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const auto* first = s_.data() + i_;
      const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      i_ += static_cast<std::size_t>(ptr - first);
      return make(Expression::Node::Num{v});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = i_;
      while (i_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_]))) ++i_;
      const std::string_view id = s_.substr(start, i_ - start);
      if (id == "x") return make(Expression::Node::Var{});
      Fn fn;
      if (id == "log") fn = Fn::Log;
      else if (id == "loglog") fn = Fn::LogLog;
      else if (id == "logloglog") fn = Fn::LogLogLog;
      else if (id == "sqrt") fn = Fn::Sqrt;
      else fail("unknown identifier '" + std::string(id) + "'");
      if (!eat('(')) fail("expected '(' after function name");
      NodeP a = expr();
      if (!eat(')')) fail("missing ')'");
      return make(Expression::Node::Call{fn, a});
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

// log(x) at a Point is known exactly as exp(u), even when x is not.
LogNum eval_node(const Expression::Node& n, const Point& p);

LogNum eval_log_of(const Expression::Node& arg, const Point& p) {
  if (std::holds_alternative<Expression::Node::Var>(arg.v)) return p.log_x();
  return log(eval_node(arg, p));
}

LogNum eval_node(const Expression::Node& n, const Point& p) {
  using N = Expression::Node;
  return std::visit(
      [&](const auto& k) -> LogNum {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, N::Num>) {
          return LogNum::of(k.v);
        } else if constexpr (std::is_same_v<T, N::Var>) {
          return p.x();
        } else if constexpr (std::is_same_v<T, N::Neg>) {
          return -eval_node(*k.a, p);
        } else if constexpr (std::is_same_v<T, N::Bin>) {
          const LogNum a = eval_node(*k.a, p);
          const LogNum b = eval_node(*k.b, p);
          switch (k.op) {
            case Op::Add: return a + b;
            case Op::Sub: return a - b;
            case Op::Mul: return a * b;
            case Op::Div: return a / b;
            case Op::Pow: return pow(a, b.value());
          }
          return {};
        } else {
          switch (k.fn) {
            case Fn::Log: return eval_log_of(*k.a, p);
            case Fn::LogLog: return log(eval_log_of(*k.a, p));
            case Fn::LogLogLog: return log(log(eval_log_of(*k.a, p)));
            case Fn::Sqrt: return pow(eval_node(*k.a, p), 0.5);
          }
          return {};
        }
      },
      n.v);
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  e.root_ = Parser(text).parse();
  return e;
}

LogNum Expression::eval(const Point& p) const { return eval_node(*root_, p); }

}  // namespace bwlab::classtest
