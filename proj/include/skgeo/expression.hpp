#pragma once

// Holomorphic prepotential expressions: a small language over variables
// w1..wn, complex literals, +, -, *, /, integer ^, and exp/log/sqrt.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' integer)? | '-' factor
//   atom   := number | 'i' | var | func '(' expr ')' | '(' expr ')'
//   var    := 'w' integer(1..n) ;  func := 'exp' | 'log' | 'sqrt'
//
// Whitespace is insignificant.  Precedence: ^ > unary- > *,/ > +,-.
// ASTs are immutable after parse and evaluation is pure, so expressions
// are safe to share between threads.

#include <cctype>
#include <charconv>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "skgeo/common.hpp"
#include "skgeo/jet.hpp"

namespace skgeo {

enum class FuncKind { Exp, Log, Sqrt };

struct ExprNode {
  enum class Op { Number, Imag, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Op op;
  double number = 0.0;
  int var = 0;  // 0-based
  int exponent = 0;
  FuncKind func = FuncKind::Exp;
  std::shared_ptr<const ExprNode> a, b;
};

using ExprHandle = std::shared_ptr<const ExprNode>;

// Ring dispatch points.  The template versions reach the jet/complex-
// over-ring friends by unqualified lookup; the std::complex overloads
// add the domain checks std:: functions do not perform.
inline cplx ipow(const cplx& z, int k) {
  if (k == 0) return cplx(1.0);
  cplx base = z;
  if (k < 0) {
    detail::check_inv_domain(z);
    base = 1.0 / z;
  }
  long e = std::abs(static_cast<long>(k));
  cplx acc = base;
  --e;
  while (e > 0) {
    if (e & 1) {
      acc *= base;
      --e;
    } else {
      base *= base;
      e >>= 1;
    }
  }
  return acc;
}

namespace ring {

template <class R>
R div(const R& a, const R& b) {
  return a / b;
}
inline cplx div(const cplx& a, const cplx& b) {
  detail::check_inv_domain(b);
  return a / b;
}

template <class R>
R exp_(const R& u) {
  return exp(u);
}
inline cplx exp_(const cplx& u) { return std::exp(u); }

template <class R>
R log_(const R& u) {
  return log(u);
}
inline cplx log_(const cplx& u) {
  detail::check_log_domain(u);
  return std::log(u);
}

template <class R>
R sqrt_(const R& u) {
  return sqrt(u);
}
inline cplx sqrt_(const cplx& u) {
  detail::check_sqrt_domain(u);
  return std::sqrt(u);
}

}  // namespace ring

/// Evaluate an AST over any coefficient ring.  `mk` embeds a complex
/// constant into the ring.
template <class R, class Maker>
R eval_expr(const ExprNode& e, const std::vector<R>& vars, const Maker& mk) {
  using Op = ExprNode::Op;
  switch (e.op) {
    case Op::Number:
      return mk(cplx(e.number, 0.0));
    case Op::Imag:
      return mk(cplx(0.0, 1.0));
    case Op::Var:
      return vars[e.var];
    case Op::Neg:
      return -eval_expr(*e.a, vars, mk);
    case Op::Add:
      return eval_expr(*e.a, vars, mk) + eval_expr(*e.b, vars, mk);
    case Op::Sub:
      return eval_expr(*e.a, vars, mk) - eval_expr(*e.b, vars, mk);
    case Op::Mul:
      return eval_expr(*e.a, vars, mk) * eval_expr(*e.b, vars, mk);
    case Op::Div:
      return ring::div(eval_expr(*e.a, vars, mk), eval_expr(*e.b, vars, mk));
    case Op::Pow:
      return ipow(eval_expr(*e.a, vars, mk), e.exponent);
    case Op::Call: {
      R u = eval_expr(*e.a, vars, mk);
      switch (e.func) {
        case FuncKind::Exp:
          return ring::exp_(u);
        case FuncKind::Log:
          return ring::log_(u);
        case FuncKind::Sqrt:
          return ring::sqrt_(u);
      }
    }
  }
  throw std::logic_error("corrupt expression node");
}

namespace detail {

class ExprParser {
 public:
  ExprParser(std::string_view text, int n) : text_(text), n_(n) {}

  ExprHandle run() {
    ExprHandle e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail(pos_, "end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(std::size_t at, const std::string& expected) {
    throw ParseError(at, expected,
                     "syntax error at offset " + std::to_string(at) +
                         ": expected " + expected);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprHandle parse_expr() {
    ExprHandle lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make(ExprNode::Op::Add, lhs, parse_term());
      else if (eat('-'))
        lhs = make(ExprNode::Op::Sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  ExprHandle parse_term() {
    ExprHandle lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = make(ExprNode::Op::Mul, lhs, parse_factor());
      else if (eat('/'))
        lhs = make(ExprNode::Op::Div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  ExprHandle parse_factor() {
    if (eat('-')) {
      auto node = std::make_shared<ExprNode>();
      node->op = ExprNode::Op::Neg;
      node->a = parse_factor();
      return node;
    }
    ExprHandle base = parse_atom();
    if (eat('^')) {
      skip_ws();
      auto node = std::make_shared<ExprNode>();
      node->op = ExprNode::Op::Pow;
      node->a = base;
      node->exponent = parse_integer("integer exponent");
      return node;
    }
    return base;
  }

  int parse_integer(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
    std::size_t digits = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == digits) fail(start, what);
    int value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc()) fail(start, std::string(what) + " in range");
    return value;
  }

  ExprHandle parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail(pos_, "number, variable, function or '('");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprHandle e = parse_expr();
      if (!eat(')')) fail(pos_, "')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_word();
    fail(pos_, "number, variable, function or '('");
  }

  ExprHandle parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // 'e' belonged to something else
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
      fail(start, "number");
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Number;
    node->number = value;
    return node;
  }

  ExprHandle parse_word() {
    const std::size_t start = pos_;
    // Variable: 'w' immediately followed by digits.
    if (text_[pos_] == 'w' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      ++pos_;
      int index = parse_integer("variable index");
      if (index < 1 || index > n_)
        throw ParseError(start, "variable w1..w" + std::to_string(n_),
                         "unknown variable w" + std::to_string(index) +
                             " at offset " + std::to_string(start) + " (n = " +
                             std::to_string(n_) + ")");
      auto node = std::make_shared<ExprNode>();
      node->op = ExprNode::Op::Var;
      node->var = index - 1;
      return node;
    }
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const std::string_view word = text_.substr(start, pos_ - start);
    if (word == "i") {
      auto node = std::make_shared<ExprNode>();
      node->op = ExprNode::Op::Imag;
      return node;
    }
    FuncKind func;
    if (word == "exp")
      func = FuncKind::Exp;
    else if (word == "log")
      func = FuncKind::Log;
    else if (word == "sqrt")
      func = FuncKind::Sqrt;
    else
      fail(start, "'i', 'exp', 'log', 'sqrt' or variable w<k>");
    if (!eat('(')) fail(pos_, "'(' after function name");
    ExprHandle arg = parse_expr();
    if (!eat(')')) fail(pos_, "')'");
    auto node = std::make_shared<ExprNode>();
    node->op = ExprNode::Op::Call;
    node->func = func;
    node->a = arg;
    return node;
  }

  static ExprHandle make(ExprNode::Op op, ExprHandle a, ExprHandle b) {
    auto node = std::make_shared<ExprNode>();
    node->op = op;
    node->a = std::move(a);
    node->b = std::move(b);
    return node;
  }

  std::string_view text_;
  int n_;
  std::size_t pos_ = 0;
};

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Minimal-parenthesis canonical printer.  `need` is the lowest
// precedence allowed without parentheses at this position.
inline void print_node(const ExprNode& e, int need, std::string& out) {
  using Op = ExprNode::Op;
  auto prec = [](const ExprNode& n) {
    switch (n.op) {
      case Op::Add:
      case Op::Sub:
        return 1;
      case Op::Mul:
      case Op::Div:
        return 2;
      case Op::Neg:
        return 3;
      case Op::Pow:
        return 4;
      default:
        return 5;
    }
  };
  const int p = prec(e);
  const bool parens = p < need;
  if (parens) out += '(';
  switch (e.op) {
    case Op::Number:
      out += format_double(e.number);
      break;
    case Op::Imag:
      out += 'i';
      break;
    case Op::Var:
      out += 'w';
      out += std::to_string(e.var + 1);
      break;
    case Op::Neg:
      out += '-';
      print_node(*e.a, 3, out);
      break;
    case Op::Add:
    case Op::Sub:
      print_node(*e.a, 1, out);
      out += (e.op == Op::Add ? '+' : '-');
      print_node(*e.b, 2, out);
      break;
    case Op::Mul:
    case Op::Div:
      print_node(*e.a, 2, out);
      out += (e.op == Op::Mul ? '*' : '/');
      print_node(*e.b, 3, out);
      break;
    case Op::Pow:
      print_node(*e.a, 5, out);
      out += '^';
      out += std::to_string(e.exponent);
      break;
    case Op::Call:
      out += (e.func == FuncKind::Exp ? "exp" : e.func == FuncKind::Log ? "log" : "sqrt");
      out += '(';
      print_node(*e.a, 1, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace detail

/// A parsed holomorphic function of w1..wn.
class PrepotentialExpr {
 public:
  PrepotentialExpr() = default;
  PrepotentialExpr(ExprHandle root, int n) : root_(std::move(root)), n_(n) {}

  int vars() const { return n_; }
  const ExprNode& root() const { return *root_; }

  /// Canonical text form; parsing it back yields the same canonical form.
  std::string str() const {
    std::string out;
    detail::print_node(*root_, 1, out);
    return out;
  }

  /// Plain evaluation at a complex point.
  cplx operator()(const CVec& w) const {
    require_same_size(w.size(), n_, "prepotential evaluation");
    std::vector<cplx> vars(w.data(), w.data() + w.size());
    return eval_expr(*root_, vars, [](const cplx& c) { return c; });
  }

 private:
  ExprHandle root_;
  int n_ = 0;
};

inline PrepotentialExpr parse_prepotential(std::string_view text, int n) {
  if (n < 1) throw ParseError(0, "n >= 1", "prepotential needs at least one variable");
  return PrepotentialExpr(detail::ExprParser(text, n).run(), n);
}

/// Named reference prepotentials.
///   quad_plus  = 1/2 (w1^2 + ... + wn^2)
///   quad_minus = -1/2 (w1^2 + ... + wn^2)
///   cubic      = 1/3 (w1^3 + ... + wn^3)
///   mixed2     = w1^2 w2            (n = 2 only)
inline PrepotentialExpr builtin_prepotential(std::string_view name, int n) {
  auto sum_of_powers = [n](int p) {
    std::string body;
    for (int j = 1; j <= n; ++j) {
      if (j > 1) body += '+';
      body += "w" + std::to_string(j) + "^" + std::to_string(p);
    }
    return body;
  };
  std::string text;
  if (name == "quad_plus")
    text = "1/2*(" + sum_of_powers(2) + ")";
  else if (name == "quad_minus")
    text = "-1/2*(" + sum_of_powers(2) + ")";
  else if (name == "cubic")
    text = "1/3*(" + sum_of_powers(3) + ")";
  else if (name == "mixed2") {
    if (n != 2)
      throw ParseError(0, "n = 2",
                       "builtin 'mixed2' requires n = 2, got n = " + std::to_string(n));
    text = "w1^2*w2";
  } else {
    throw ParseError(0, "builtin name",
                     "unknown builtin prepotential '" + std::string(name) + "'");
  }
  return parse_prepotential(text, n);
}

inline bool is_builtin_prepotential(std::string_view name) {
  return name == "quad_plus" || name == "quad_minus" || name == "cubic" ||
         name == "mixed2";
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Sampling box per builtin, as intervals for (Re w1, Im w1, Re w2, ...).
/// The quadratics are entire and transversal everywhere; the cubic and
/// mixed2 boxes keep Re w_j well away from their non-transversal loci.
/// Unknown names get a generic box; for expressions with log/sqrt the
/// caller is responsible for declaring a safe domain.
inline std::vector<Interval> default_domain(std::string_view name, int n) {
  Interval re{-2.0, 2.0}, im{-2.0, 2.0};
  if (name == "cubic") {
    re = {0.5, 2.0};
    im = {-1.0, 1.0};
  } else if (name == "mixed2") {
    re = {0.5, 2.0};
    im = {-0.5, 0.5};
  }
  std::vector<Interval> box;
  box.reserve(2 * n);
  for (int j = 0; j < n; ++j) {
    box.push_back(re);
    box.push_back(im);
  }
  return box;
}

/// Holomorphic Taylor data of a prepotential at w, to the given order.
/// Cauchy-Riemann consistency holds by construction: the arithmetic is
/// complex throughout and only holomorphic derivative slots exist.
inline CJet holo_jet(const PrepotentialExpr& f, const CVec& w, int order) {
  require_same_size(w.size(), f.vars(), "holo_jet");
  const int n = f.vars();
  std::vector<CJet> vars = jet_variables(w, order);
  return eval_expr(f.root(), vars, [n, order](const cplx& c) {
    return CJet::constant(c, n, order);
  });
}

}  // namespace skgeo
