#include "pfsyn/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <sstream>

namespace pfsyn {

using NodePtr = std::shared_ptr<const Expr::Node>;

ExprSyntaxError::ExprSyntaxError(std::size_t offset, const std::string& what)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

namespace {

NodePtr make(Expr::Kind kind, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprSyntaxError(pos_, "empty expression");
    NodePtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) throw ExprSyntaxError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ExprSyntaxError(pos_, std::string("expected '") + c + "' before end of input");
      throw ExprSyntaxError(pos_, std::string("expected '") + c + "'");
    }
  }

  NodePtr parse_sum() {
    NodePtr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = make(Expr::Kind::Add, {lhs, parse_product()});
      } else if (accept('-')) {
        lhs = make(Expr::Kind::Sub, {lhs, parse_product()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Expr::Kind::Mul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make(Expr::Kind::Div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Expr::Kind::Neg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // Right associative; the exponent may carry its own unary sign.
  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Expr::Kind::Pow, {base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprSyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ExprSyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    double value = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc()) throw ExprSyntaxError(start, "malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    auto n = std::make_shared<Expr::Node>();
    n->kind = Expr::Kind::Number;
    n->value = value;
    return n;
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name == "z") return make(Expr::Kind::Premise);
    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      std::size_t index = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (index == 0) throw ExprSyntaxError(start, "state variables are numbered from x1");
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Kind::State;
      n->index = index;
      return n;
    }

    struct Fn {
      std::string_view name;
      Expr::Kind kind;
      int arity;
    };
    static constexpr Fn kFunctions[] = {{"sin", Expr::Kind::Sin, 1}, {"cos", Expr::Kind::Cos, 1},
                                        {"abs", Expr::Kind::Abs, 1}, {"min", Expr::Kind::Min, 2},
                                        {"max", Expr::Kind::Max, 2}};
    for (const Fn& fn : kFunctions) {
      if (fn.name != name) continue;
      expect('(');
      std::vector<NodePtr> args{parse_sum()};
      for (int k = 1; k < fn.arity; ++k) {
        expect(',');
        args.push_back(parse_sum());
      }
      expect(')');
      return make(fn.kind, std::move(args));
    }
    throw ExprSyntaxError(start, "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw ExprEvalError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const Expr::Node& n, std::span<const double> state, double z) {
  auto arg = [&](std::size_t i) { return eval_node(*n.args[i], state, z); };
  switch (n.kind) {
    case Expr::Kind::Number:
      return n.value;
    case Expr::Kind::Premise:
      return z;
    case Expr::Kind::State:
      if (n.index > state.size())
        throw ExprEvalError("x" + std::to_string(n.index) + " exceeds state dimension " +
                            std::to_string(state.size()));
      return state[n.index - 1];
    case Expr::Kind::Neg:
      return -arg(0);
    case Expr::Kind::Add:
      return checked(arg(0) + arg(1), "addition");
    case Expr::Kind::Sub:
      return checked(arg(0) - arg(1), "subtraction");
    case Expr::Kind::Mul:
      return checked(arg(0) * arg(1), "multiplication");
    case Expr::Kind::Div: {
      const double num = arg(0);
      const double den = arg(1);
      if (den == 0.0) throw ExprEvalError("division by zero");
      return checked(num / den, "division");
    }
    case Expr::Kind::Pow:
      return checked(std::pow(arg(0), arg(1)), "power");
    case Expr::Kind::Sin:
      return std::sin(arg(0));
    case Expr::Kind::Cos:
      return std::cos(arg(0));
    case Expr::Kind::Abs:
      return std::abs(arg(0));
    case Expr::Kind::Min:
      return std::min(arg(0), arg(1));
    case Expr::Kind::Max:
      return std::max(arg(0), arg(1));
  }
  throw ExprEvalError("corrupt expression node");
}

void print(const Expr::Node& n, std::ostream& os) {
  auto binary = [&](const char* op) {
    os << '(';
    print(*n.args[0], os);
    os << ' ' << op << ' ';
    print(*n.args[1], os);
    os << ')';
  };
  auto call = [&](const char* name) {
    os << name << '(';
    for (std::size_t i = 0; i < n.args.size(); ++i) {
      if (i) os << ", ";
      print(*n.args[i], os);
    }
    os << ')';
  };
  switch (n.kind) {
    case Expr::Kind::Number: {
      // Shortest round-trip representation.
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
      os << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      break;
    }
    case Expr::Kind::Premise: os << 'z'; break;
    case Expr::Kind::State: os << 'x' << n.index; break;
    case Expr::Kind::Neg:
      os << "(-";
      print(*n.args[0], os);
      os << ')';
      break;
    case Expr::Kind::Add: binary("+"); break;
    case Expr::Kind::Sub: binary("-"); break;
    case Expr::Kind::Mul: binary("*"); break;
    case Expr::Kind::Div: binary("/"); break;
    case Expr::Kind::Pow: binary("^"); break;
    case Expr::Kind::Sin: call("sin"); break;
    case Expr::Kind::Cos: call("cos"); break;
    case Expr::Kind::Abs: call("abs"); break;
    case Expr::Kind::Min: call("min"); break;
    case Expr::Kind::Max: call("max"); break;
  }
}

std::size_t max_index(const Expr::Node& n) {
  std::size_t m = n.kind == Expr::Kind::State ? n.index : 0;
  for (const auto& a : n.args) m = std::max(m, max_index(*a));
  return m;
}

bool has_premise(const Expr::Node& n) {
  if (n.kind == Expr::Kind::Premise) return true;
  return std::any_of(n.args.begin(), n.args.end(), [](const auto& a) { return has_premise(*a); });
}

}  // namespace

Expr Expr::parse(std::string_view src) { return Expr(Parser(src).parse()); }

double Expr::eval(std::span<const double> state, double z) const {
  if (!root_) throw ExprEvalError("evaluating an empty expression");
  return checked(eval_node(*root_, state, z), "expression");
}

std::size_t Expr::max_state_index() const { return root_ ? max_index(*root_) : 0; }

bool Expr::uses_premise() const { return root_ && has_premise(*root_); }

std::string Expr::to_string() const {
  if (!root_) return {};
  std::ostringstream os;
  print(*root_, os);
  return os.str();
}

bool structurally_equal(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  if (a.kind == Expr::Kind::Number && a.value != b.value) return false;
  if (a.kind == Expr::Kind::State && a.index != b.index) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace pfsyn
