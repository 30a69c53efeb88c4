#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfsyn/expr.hpp"
#include "pfsyn/linalg.hpp"

namespace pfsyn {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entrywise bounds lower <= A <= upper.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  /// Throws ModelError unless shapes agree and lower <= upper entrywise.
  IntervalMatrix(Matrix lower, Matrix upper);

  static IntervalMatrix exact(const Matrix& a) { return IntervalMatrix(a, a); }
  /// Smallest interval containing both matrices.
  static IntervalMatrix hull(const Matrix& a, const Matrix& b);

  const Matrix& lower() const { return lower_; }
  const Matrix& upper() const { return upper_; }
  Matrix midpoint() const;
  bool degenerate() const { return lower_ == upper_; }

  IntervalMatrix transpose() const { return {lower_.transpose(), upper_.transpose()}; }
  /// Adds the same matrix to both bounds.
  IntervalMatrix shifted(const Matrix& offset) const;

 private:
  Matrix lower_;
  Matrix upper_;
};

enum class MatrixFamily { ALower, AUpper, B, C, D };

struct Rule {
  IntervalMatrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  std::string membership_src;
  Expr membership;
  // Bounds exactly as written in the model file; empty for exact rules.
  std::optional<std::pair<Matrix, Matrix>> declared_bounds;
};

/// Discrete-time T-S fuzzy plant
///   x(k+1) = sum_i h_i(z) (A_i x + B_i u),  y = sum_i h_i(z) (C_i x + D_i u)
/// with a single scalar premise z = premise(x).
struct FuzzyModel {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t l = 0;
  std::string premise_src;
  Expr premise;
  std::pair<double, double> z_range{-1.0, 1.0};
  std::vector<Rule> rules;
  // Load-time remarks, e.g. bounds that had to be reordered.
  std::vector<std::string> notes;

  std::size_t r() const { return rules.size(); }
  bool has_intervals() const;
};

/// Checks dimensions, expression variables and membership normalisation on
/// 101 premise values spanning z_range. Throws ModelError.
void validate_model(const FuzzyModel& model);

FuzzyModel parse_model_json(const std::string& text);
FuzzyModel load_model(const std::filesystem::path& path);
std::string model_to_json(const FuzzyModel& model);
void save_model(const FuzzyModel& model, const std::filesystem::path& path);

/// Re-serialises JSON text with sorted keys and fixed indentation.
std::string canonical_json(const std::string& text);

double premise_value(const FuzzyModel& model, std::span<const double> x);

/// Normalised membership grades at state x. Raw grades in [-1e-9, 0) are
/// clipped to zero before dividing by their sum.
Vector evaluate_memberships(const FuzzyModel& model, std::span<const double> x);

/// Grades as a function of the premise value only.
Vector memberships_at_premise(const FuzzyModel& model, double z);

Matrix blended_matrices(const FuzzyModel& model, std::span<const double> h, MatrixFamily which);

struct PositivityViolation {
  std::size_t rule = 0;  // 0-based
  std::string family;    // "A", "A_lower", "B", "C", "D"
  std::size_t row = 0;   // 0-based
  std::size_t col = 0;
  double value = 0.0;
};

struct PositivityReport {
  bool positive = true;
  // [rule][family] with families ordered A, B, C, D.
  std::vector<std::array<bool, 4>> per_rule;
  std::vector<PositivityViolation> violations;
};

/// Nonnegativity of A_i (lower bound for interval models), B_i, C_i, D_i.
PositivityReport check_model_positivity(const FuzzyModel& model, double tol = 0.0);

/// Same model with every rule matrix A_i replaced by its transpose.
FuzzyModel transposed_dynamics(const FuzzyModel& model);

}  // namespace pfsyn
