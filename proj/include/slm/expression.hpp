#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slm {

// Parse failure with the 1-based column of the offending character.
struct ExprError : std::runtime_error {
  ExprError(const std::string& what, int col) : std::runtime_error(what), column(col) {}
  int column;
};

// Arithmetic in one variable x over {+, -, *, /, ^}, unary minus, the
// functions exp, log, erf, abs, and numeric literals. '^' is right-
// associative and binds tighter than unary minus, so -x^2 is -(x^2).
// Evaluation is total: out-of-domain arguments propagate NaN/inf quietly.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double eval(double x) const;

  // Canonical rendering with minimal parentheses; parsing the result yields
  // a tree that prints identically (round-trip stable).
  std::string str() const;

 private:
  enum class Op : unsigned char { lit, var, add, sub, mul, div, pow, neg, fexp, flog, ferf, fabs };
  struct Node {
    Op op;
    double value = 0.0;  // lit only
    int a = -1, b = -1;  // child indices
  };
  std::vector<Node> nodes_;  // root is the last node
  friend class ExprParser;
};

}  // namespace slm
