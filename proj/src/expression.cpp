#include "slm/expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace slm {

namespace {

bool ident_char(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

class ExprParser {
 public:
  explicit ExprParser(std::string_view text, Expression& out) : s_(text), out_(out) {}

  void run() {
    const int root = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    (void)root;  // by construction the root is the last node pushed
  }

 private:
  std::string_view s_;
  Expression& out_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError(what, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool eat(char c) {
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

  int push(Expression::Op op, int a = -1, int b = -1, double v = 0.0) {
    out_.nodes_.push_back({op, v, a, b});
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  // expr := term (('+'|'-') term)*
  int expr() {
    int lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = push(Expression::Op::add, lhs, term());
      else if (eat('-'))
        lhs = push(Expression::Op::sub, lhs, term());
      else
        return lhs;
    }
  }

  // term := unary (('*'|'/') unary)*
  int term() {
    int lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = push(Expression::Op::mul, lhs, unary());
      else if (eat('/'))
        lhs = push(Expression::Op::div, lhs, unary());
      else
        return lhs;
    }
  }

  // unary := '-' unary | power
  int unary() {
    if (eat('-')) return push(Expression::Op::neg, unary());
    return power();
  }

  // power := atom ('^' unary)?   -- right-associative, allows x^-2
  int power() {
    const int base = atom();
    if (eat('^')) return push(Expression::Op::pow, base, unary());
    return base;
  }

  int atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (ident_char(c)) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  int number() {
    const char* begin = s_.data() + pos_;
    const char* end = s_.data() + s_.size();
    double v = 0.0;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) fail("malformed number");
    pos_ = static_cast<std::size_t>(res.ptr - s_.data());
    return push(Expression::Op::lit, -1, -1, v);
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    if (name == "x") return push(Expression::Op::var);
    Expression::Op op;
    if (name == "exp")
      op = Expression::Op::fexp;
    else if (name == "log")
      op = Expression::Op::flog;
    else if (name == "erf")
      op = Expression::Op::ferf;
    else if (name == "abs")
      op = Expression::Op::fabs;
    else {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!eat('(')) fail("expected '(' after function name");
    const int arg = expr();
    if (!eat(')')) fail("expected ')'");
    return push(op, arg);
  }
};

Expression Expression::parse(std::string_view text) {
  Expression e;
  ExprParser p(text, e);
  p.run();
  return e;
}

double Expression::eval(double x) const {
  std::vector<double> v(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::lit: v[i] = n.value; break;
      case Op::var: v[i] = x; break;
      case Op::add: v[i] = v[n.a] + v[n.b]; break;
      case Op::sub: v[i] = v[n.a] - v[n.b]; break;
      case Op::mul: v[i] = v[n.a] * v[n.b]; break;
      case Op::div: v[i] = v[n.a] / v[n.b]; break;
      case Op::pow: v[i] = std::pow(v[n.a], v[n.b]); break;
      case Op::neg: v[i] = -v[n.a]; break;
      case Op::fexp: v[i] = std::exp(v[n.a]); break;
      case Op::flog: v[i] = std::log(v[n.a]); break;
      case Op::ferf: v[i] = std::erf(v[n.a]); break;
      case Op::fabs: v[i] = std::fabs(v[n.a]); break;
    }
  }
  return v.back();
}

namespace {

std::string format_literal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lg", &back);
  if (back == v) {
    // shorten when a lower precision already round-trips
    for (int p = 1; p <= 16; ++p) {
      char s[32];
      std::snprintf(s, sizeof s, "%.*g", p, v);
      std::sscanf(s, "%lg", &back);
      if (back == v) return s;
    }
  }
  return buf;
}

}  // namespace

std::string Expression::str() const {
  std::vector<std::string> v(nodes_.size());
  // Binding strength used only for parenthesis placement when printing.
  const auto prec = [](Op op) {
    switch (op) {
      case Op::add:
      case Op::sub: return 1;
      case Op::mul:
      case Op::div: return 2;
      case Op::neg: return 3;
      case Op::pow: return 4;
      default: return 5;  // atoms and calls never need wrapping
    }
  };
  auto wrap = [&](int child, int min_prec) {
    if (prec(nodes_[child].op) < min_prec) return "(" + v[child] + ")";
    return v[child];
  };
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::lit: v[i] = format_literal(n.value); break;
      case Op::var: v[i] = "x"; break;
      // left-associative pairs: the right child needs wrapping at equal level
      case Op::add: v[i] = wrap(n.a, 1) + " + " + wrap(n.b, 2); break;
      case Op::sub: v[i] = wrap(n.a, 1) + " - " + wrap(n.b, 2); break;
      case Op::mul: v[i] = wrap(n.a, 2) + "*" + wrap(n.b, 3); break;
      case Op::div: v[i] = wrap(n.a, 2) + "/" + wrap(n.b, 3); break;
      case Op::neg: v[i] = "-" + wrap(n.a, 3); break;
      // right-associative: the left child needs wrapping at equal level
      case Op::pow: v[i] = wrap(n.a, 5) + "^" + wrap(n.b, 3); break;
      case Op::fexp: v[i] = "exp(" + v[n.a] + ")"; break;
      case Op::flog: v[i] = "log(" + v[n.a] + ")"; break;
      case Op::ferf: v[i] = "erf(" + v[n.a] + ")"; break;
      case Op::fabs: v[i] = "abs(" + v[n.a] + ")"; break;
    }
  }
  return v.back();
}

}  // namespace slm
