#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <string_view>

namespace bwlab::classtest {

/// sign * exp(la). Boundary functions are evaluated at x = exp(exp(u)) for u
/// far beyond the double range of x, so values are carried by their logs.
struct LogNum {
  int sign = 0;  // -1, 0, +1
  double la = -std::numeric_limits<double>::infinity();

  static LogNum of(double v);
  static LogNum positive_log(double la) { return {1, la}; }
  double value() const;  // may overflow to ±inf
};

LogNum operator*(LogNum a, LogNum b);
LogNum operator/(LogNum a, LogNum b);
LogNum operator+(LogNum a, LogNum b);
LogNum operator-(LogNum a);
LogNum operator-(LogNum a, LogNum b);
LogNum pow(LogNum a, double e);
LogNum log(LogNum a);  // natural log of a positive value
bool operator<(LogNum a, LogNum b);

/// Point x = exp(exp(u)); x itself is only representable for u < ~6.56.
struct Point {
  double u;
  LogNum x() const { return LogNum::positive_log(std::exp(u)); }
  LogNum log_x() const { return LogNum::positive_log(u); }
  static Point at(double x);  // x > 1
};

/// Expression in x over numbers, + - * / ^, parentheses and the functions
/// log, loglog, logloglog, sqrt. `^` is right associative and binds tighter
/// than unary minus, so -x^2 = -(x^2).
class Expression {
 public:
  static Expression parse(std::string_view text);  // throws DomainError
  LogNum eval(const Point& p) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace bwlab::classtest
