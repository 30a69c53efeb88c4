#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pfsyn {

class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(std::size_t offset, const std::string& what);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ExprEvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scalar expression over numeric literals, state variables x1..xn and the
/// premise variable z. Supports + - * / ^, unary minus and the functions
/// sin, cos, abs (one argument) and min, max (two arguments).
class Expr {
 public:
  enum class Kind { Number, State, Premise, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Abs, Min, Max };

  struct Node {
    Kind kind;
    double value = 0.0;       // Number
    std::size_t index = 0;    // State, 1-based
    std::vector<std::shared_ptr<const Node>> args;
  };

  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  /// Standard precedence: ^ (right assoc) binds tighter than unary minus,
  /// which binds tighter than * /, then + -.
  static Expr parse(std::string_view src);

  /// Evaluates at the given state and premise value.
  double eval(std::span<const double> state, double z) const;

  /// Largest state index referenced (0 when no x variables appear).
  std::size_t max_state_index() const;
  bool uses_premise() const;

  /// Fully parenthesised form that parses back to the same tree.
  std::string to_string() const;

  const Node* root() const { return root_.get(); }
  bool valid() const { return root_ != nullptr; }

 private:
  std::shared_ptr<const Node> root_;
};

bool structurally_equal(const Expr::Node& a, const Expr::Node& b);

}  // namespace pfsyn
