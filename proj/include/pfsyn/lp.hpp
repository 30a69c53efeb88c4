#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pfsyn/linalg.hpp"

namespace pfsyn::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { LessEqual, GreaterEqual, Equal };
enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status status);

struct Constraint {
  Vector row;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string label;
};

/// maximize c'v subject to linear constraints and per-variable bounds.
/// Variables default to the bounds [0, +inf).
class Problem {
 public:
  explicit Problem(std::size_t num_vars);

  std::size_t num_vars() const { return num_vars_; }

  void set_objective(Vector c);
  void set_objective_coefficient(std::size_t var, double value);
  void set_bounds(std::size_t var, double lower, double upper);
  void set_free(std::size_t var) { set_bounds(var, -kInfinity, kInfinity); }
  void add_constraint(Vector row, Relation relation, double rhs, std::string label = {});

  const Vector& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  double lower(std::size_t var) const { return lower_[var]; }
  double upper(std::size_t var) const { return upper_[var]; }

 private:
  std::size_t num_vars_;
  Vector objective_;
  std::vector<Constraint> constraints_;
  Vector lower_;
  Vector upper_;
};

struct Options {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  // 0 selects 10 * (vars + constraints)^2.
  std::size_t iteration_limit = 0;
};

struct Solution {
  Status status = Status::Infeasible;
  Vector values;
  double objective_value = 0.0;
  std::size_t iterations = 0;
};

/// Dense two-phase primal simplex with Bland's rule. Deterministic.
Solution solve(const Problem& problem, const Options& options = {});

struct Residual {
  std::string label;
  // Positive means violated: a'v - b for <=, b - a'v for >=, |a'v - b| for =.
  double value = 0.0;
  bool satisfied = false;
};

struct PointReport {
  bool satisfied = true;
  double max_violation = 0.0;
  std::vector<Residual> constraints;
  std::vector<Residual> bounds;
};

/// Evaluates every constraint and bound at v.
PointReport check_point(const Problem& problem, std::span<const double> v, double tol);

}  // namespace pfsyn::lp
