#include "dualext/expression.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace dualext {

namespace {

/// Value and first two derivatives in x.
struct Jet {
  Complex v, d, dd;
};

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}
Jet reciprocal(const Jet& b) {
  const Complex r = 1.0 / b.v;
  return {r, -b.d * r * r, (2.0 * b.d * b.d - b.v * b.dd) * r * r * r};
}

/// g(a) with g, g', g'' evaluated at a.v.
Jet chain(const Jet& a, Complex g, Complex g1, Complex g2) { return {g, g1 * a.d, g2 * a.d * a.d + g1 * a.dd}; }

Complex power(Complex u, Complex c) {
  if (c == Complex{}) return 1.0;
  if (u == Complex{}) return c.real() > 0.0 ? Complex{} : Complex(std::numeric_limits<double>::infinity());
  return std::pow(u, c);
}

Jet jet_power(const Jet& a, Complex c) {
  if (c.imag() == 0.0 && c.real() == std::round(c.real()) && std::abs(c.real()) < 1e9) {
    const int k = static_cast<int>(c.real());
    if (k == 0) return {1.0, 0.0, 0.0};
    auto ipow = [](Complex u, int e) {
      Complex r = 1.0, b = e < 0 ? 1.0 / u : u;
      for (int n = std::abs(e); n > 0; n >>= 1, b *= b)
        if (n & 1) r *= b;
      return r;
    };
    const Complex g1 = static_cast<double>(k) * ipow(a.v, k - 1);
    const Complex g2 = k == 1 ? Complex{} : static_cast<double>(k) * (k - 1) * ipow(a.v, k - 2);
    return chain(a, ipow(a.v, k), g1, g2);
  }
  return chain(a, power(a.v, c), c * power(a.v, c - 1.0), c * (c - 1.0) * power(a.v, c - 2.0));
}

}  // namespace

struct Expression::Node {
  enum class Kind { number, x, add, sub, mul, div, pow, neg, exp, sin, cos, ind };
  Kind kind = Kind::number;
  Complex number{};
  double lo = 0.0, hi = 0.0;
  std::shared_ptr<const Node> a, b;

  bool has_x() const {
    if (kind == Kind::x || kind == Kind::ind) return true;
    return (a && a->has_x()) || (b && b->has_x());
  }

  Jet eval(double x) const {
    switch (kind) {
      case Kind::number: return {number, 0.0, 0.0};
      case Kind::x: return {x, 1.0, 0.0};
      case Kind::add: return a->eval(x) + b->eval(x);
      case Kind::sub: return a->eval(x) - b->eval(x);
      case Kind::mul: return a->eval(x) * b->eval(x);
      case Kind::div: return a->eval(x) * reciprocal(b->eval(x));
      case Kind::neg: {
        const Jet j = a->eval(x);
        return {-j.v, -j.d, -j.dd};
      }
      case Kind::pow: {
        const Jet base = a->eval(x);
        if (!b->has_x()) return jet_power(base, b->eval(x).v);
        // u^w = exp(w log u)
        const Jet lg = chain(base, std::log(base.v), 1.0 / base.v, -1.0 / (base.v * base.v));
        const Jet e = b->eval(x) * lg;
        const Complex ex = std::exp(e.v);
        return chain(e, ex, ex, ex);
      }
      case Kind::exp: {
        const Jet j = a->eval(x);
        const Complex e = std::exp(j.v);
        return chain(j, e, e, e);
      }
      case Kind::sin: {
        const Jet j = a->eval(x);
        return chain(j, std::sin(j.v), std::cos(j.v), -std::sin(j.v));
      }
      case Kind::cos: {
        const Jet j = a->eval(x);
        return chain(j, std::cos(j.v), -std::sin(j.v), -std::cos(j.v));
      }
      case Kind::ind: return {(x >= lo && x < hi) ? 1.0 : 0.0, 0.0, 0.0};
    }
    return {};
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Token {
  enum class Kind { number, imaginary, ident, op, end };
  Kind kind = Kind::end;
  double number = 0.0;
  std::string text;
  int column = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const int col = static_cast<int>(i) + 1;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(s.substr(i), &used);
      } catch (const std::exception&) {
        throw ExpressionError(col, "number out of range");
      }
      i += used;
      Token t{Token::Kind::number, value, s.substr(i - used, used), col};
      if (i < s.size() && s[i] == 'i' && (i + 1 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 1])))) {
        t.kind = Token::Kind::imaginary;
        ++i;
      }
      out.push_back(t);
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Kind::ident, 0.0, s.substr(i, j - i), col});
      i = j;
    } else if (std::string("+-*/^(),").find(c) != std::string::npos) {
      out.push_back({Token::Kind::op, 0.0, std::string(1, c), col});
      ++i;
    } else {
      throw ExpressionError(col, "unexpected character '" + std::string(1, c) + "'");
    }
  }
  out.push_back({Token::Kind::end, 0.0, "", static_cast<int>(s.size()) + 1});
  return out;
}

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_number(Complex c) {
  auto n = std::make_shared<Node>();
  n->number = c;
  return n;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

  NodePtr parse() {
    NodePtr e = expr();
    if (peek().kind != Token::Kind::end) fail(peek(), "unexpected '" + peek().text + "'");
    return e;
  }

 private:
  const Token& peek() const { return t_[pos_]; }
  const Token& next() { return t_[pos_++]; }
  bool accept(const char* op) {
    if (peek().kind == Token::Kind::op && peek().text == op) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ExpressionError(t.column, t.kind == Token::Kind::end ? "unexpected end of expression" : msg);
  }
  void expect(const char* op) {
    if (!accept(op)) fail(peek(), std::string("expected '") + op + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept("+")) {
        lhs = make(Node::Kind::add, lhs, term());
      } else if (accept("-")) {
        lhs = make(Node::Kind::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = make(Node::Kind::mul, lhs, unary());
      } else if (accept("/")) {
        lhs = make(Node::Kind::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept("-")) return make(Node::Kind::neg, unary());
    if (accept("+")) return unary();
    NodePtr base = primary();
    if (accept("^")) return make(Node::Kind::pow, base, unary());
    return base;
  }

  double constant_real(const Token& at) {
    const NodePtr e = expr();
    if (e->has_x()) fail(at, "indicator bounds must be constants");
    const Complex c = e->eval(0.0).v;
    if (c.imag() != 0.0) fail(at, "indicator bounds must be real");
    return c.real();
  }

  NodePtr primary() {
    const Token& t = next();
    switch (t.kind) {
      case Token::Kind::number: return make_number(t.number);
      case Token::Kind::imaginary: return make_number(Complex(0.0, t.number));
      case Token::Kind::op:
        if (t.text == "(") {
          NodePtr e = expr();
          expect(")");
          return e;
        }
        fail(t, "unexpected '" + t.text + "'");
      case Token::Kind::end: fail(t, "");
      case Token::Kind::ident: break;
    }
    if (t.text == "x") return make(Node::Kind::x);
    if (t.text == "i") return make_number(kI);
    if (t.text == "pi") return make_number(std::numbers::pi);
    Node::Kind k;
    if (t.text == "exp") {
      k = Node::Kind::exp;
    } else if (t.text == "sin") {
      k = Node::Kind::sin;
    } else if (t.text == "cos") {
      k = Node::Kind::cos;
    } else if (t.text == "ind") {
      expect("(");
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::ind;
      n->lo = constant_real(peek());
      expect(",");
      n->hi = constant_real(peek());
      expect(")");
      if (!(n->lo < n->hi)) fail(t, "indicator needs a < b");
      return n;
    } else {
      fail(t, "unknown name '" + t.text + "'");
    }
    expect("(");
    NodePtr arg = expr();
    expect(")");
    return make(k, arg);
  }

  std::vector<Token> t_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.source_ = text;
  e.root_ = Parser(tokenize(text)).parse();
  return e;
}

bool Expression::depends_on_x() const { return root_->has_x(); }

Complex Expression::value(double x) const { return root_->eval(x).v; }

Complex Expression::constant() const {
  if (depends_on_x()) throw Error(ErrorCode::invalid_argument, "expression depends on x: " + source_);
  return root_->eval(0.0).v;
}

Formula Expression::formula() const {
  const auto root = root_;
  Formula f;
  f.value = [root](double x) { return root->eval(x).v; };
  f.first = [root](double x) { return root->eval(x).d; };
  f.second = [root](double x) { return root->eval(x).dd; };
  return f;
}

}  // namespace dualext
