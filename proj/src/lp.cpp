#include "pfsyn/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <limits>

namespace pfsyn::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

Problem::Problem(std::size_t num_vars)
    : num_vars_(num_vars), objective_(num_vars, 0.0), lower_(num_vars, 0.0), upper_(num_vars, kInfinity) {
  if (num_vars == 0) throw std::invalid_argument("lp::Problem: needs at least one variable");
}

void Problem::set_objective(Vector c) {
  if (c.size() != num_vars_) throw std::invalid_argument("lp::Problem: objective length mismatch");
  for (double v : c)
    if (!std::isfinite(v)) throw std::invalid_argument("lp::Problem: non-finite objective coefficient");
  objective_ = std::move(c);
}

void Problem::set_objective_coefficient(std::size_t var, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("lp::Problem: non-finite objective coefficient");
  objective_.at(var) = value;
}

void Problem::set_bounds(std::size_t var, double lower, double upper) {
  if (var >= num_vars_) throw std::out_of_range("lp::Problem: variable index out of range");
  if (std::isnan(lower) || std::isnan(upper) || lower == kInfinity || upper == -kInfinity)
    throw std::invalid_argument("lp::Problem: invalid bounds");
  lower_[var] = lower;
  upper_[var] = upper;
}

void Problem::add_constraint(Vector row, Relation relation, double rhs, std::string label) {
  if (row.size() != num_vars_) throw std::invalid_argument("lp::Problem: constraint row length mismatch");
  for (double v : row)
    if (!std::isfinite(v)) throw std::invalid_argument("lp::Problem: non-finite constraint coefficient");
  if (!std::isfinite(rhs)) throw std::invalid_argument("lp::Problem: non-finite right-hand side");
  constraints_.push_back({std::move(row), relation, rhs, std::move(label)});
}

namespace {

// Original variable x = offset + sign * y[col] (- y[neg_col] when split).
struct VarMap {
  double offset = 0.0;
  double sign = 1.0;
  std::size_t col = 0;
  bool split = false;
  std::size_t neg_col = 0;
};

struct StdRow {
  Vector coeffs;
  Relation relation;
  double rhs;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double rhs(std::size_t r) const { return at(r, cols_); }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) {
        double v = at(r, c) - f * at(pr, c);
        if (std::abs(v) < 1e-14) v = 0.0;
        at(r, c) = v;
      }
      at(r, pc) = 0.0;
    }
  }

  void erase_row(std::size_t r) {
    data_.erase(data_.begin() + static_cast<std::ptrdiff_t>(r * (cols_ + 1)),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * (cols_ + 1)));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

class Simplex {
 public:
  Simplex(Tableau& t, std::vector<std::size_t>& basis, const Options& options, std::size_t limit,
          std::size_t& iterations)
      : t_(t), basis_(basis), options_(options), limit_(limit), iterations_(iterations) {}

  // Minimises cost'y over columns with allowed[c] set. Stops early once the
  // objective reaches `floor` (a known lower bound).
  PhaseResult run(const Vector& cost, const std::vector<char>& allowed,
                  double floor = -std::numeric_limits<double>::infinity()) {
    std::vector<char> in_basis(t_.cols(), 0);
    for (;;) {
      double value = 0.0;
      for (std::size_t r = 0; r < t_.rows(); ++r) value += cost[basis_[r]] * t_.rhs(r);
      if (value <= floor) return PhaseResult::Optimal;

      std::fill(in_basis.begin(), in_basis.end(), 0);
      for (std::size_t b : basis_) in_basis[b] = 1;

      // Bland: lowest-index improving column.
      std::size_t entering = t_.cols();
      for (std::size_t c = 0; c < t_.cols(); ++c) {
        if (!allowed[c] || in_basis[c]) continue;
        double reduced = cost[c];
        for (std::size_t r = 0; r < t_.rows(); ++r) reduced -= cost[basis_[r]] * t_.at(r, c);
        if (reduced < -options_.feasibility_tolerance) {
          entering = c;
          break;
        }
      }
      if (entering == t_.cols()) return PhaseResult::Optimal;

      std::size_t leaving = t_.rows();
      double best = 0.0;
      for (std::size_t r = 0; r < t_.rows(); ++r) {
        const double a = t_.at(r, entering);
        if (a <= options_.pivot_tolerance) continue;
        const double ratio = std::max(t_.rhs(r), 0.0) / a;
        if (leaving == t_.rows() || ratio < best - 1e-12) {
          best = ratio;
          leaving = r;
        } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leaving]) {
          leaving = r;
        }
      }
      if (leaving == t_.rows()) return PhaseResult::Unbounded;

      if (iterations_ >= limit_) return PhaseResult::IterationLimit;
      ++iterations_;
      t_.pivot(leaving, entering);
      basis_[leaving] = entering;
    }
  }

 private:
  Tableau& t_;
  std::vector<std::size_t>& basis_;
  const Options& options_;
  std::size_t limit_;
  std::size_t& iterations_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) {
  const std::size_t nv = problem.num_vars();

  // Map bounded/free variables onto nonnegative columns.
  std::vector<VarMap> maps(nv);
  std::vector<StdRow> rows;
  std::size_t ncols = 0;
  std::vector<std::pair<std::size_t, double>> range_rows;  // column, width
  for (std::size_t j = 0; j < nv; ++j) {
    const double lo = problem.lower(j);
    const double hi = problem.upper(j);
    VarMap& vm = maps[j];
    vm.col = ncols++;
    if (std::isfinite(lo)) {
      vm.offset = lo;
      if (std::isfinite(hi)) range_rows.emplace_back(vm.col, hi - lo);
    } else if (std::isfinite(hi)) {
      vm.offset = hi;
      vm.sign = -1.0;
    } else {
      vm.split = true;
      vm.neg_col = ncols++;
    }
  }

  for (const Constraint& con : problem.constraints()) {
    StdRow row{Vector(ncols, 0.0), con.relation, con.rhs};
    for (std::size_t j = 0; j < nv; ++j) {
      const double a = con.row[j];
      if (a == 0.0) continue;
      const VarMap& vm = maps[j];
      row.rhs -= a * vm.offset;
      row.coeffs[vm.col] += a * vm.sign;
      if (vm.split) row.coeffs[vm.neg_col] -= a;
    }
    rows.push_back(std::move(row));
  }
  for (const auto& [col, width] : range_rows) {
    StdRow row{Vector(ncols, 0.0), Relation::LessEqual, width};
    row.coeffs[col] = 1.0;
    rows.push_back(std::move(row));
  }

  // Nonnegative right-hand sides.
  for (StdRow& row : rows) {
    if (row.rhs < 0.0) {
      for (double& a : row.coeffs) a = -a;
      row.rhs = -row.rhs;
      if (row.relation == Relation::LessEqual) row.relation = Relation::GreaterEqual;
      else if (row.relation == Relation::GreaterEqual) row.relation = Relation::LessEqual;
    }
  }

  const std::size_t m = rows.size();
  std::size_t num_slack = 0;
  std::size_t num_art = 0;
  for (const StdRow& row : rows) {
    if (row.relation != Relation::Equal) ++num_slack;
    if (row.relation != Relation::LessEqual) ++num_art;
  }
  const std::size_t slack0 = ncols;
  const std::size_t art0 = ncols + num_slack;
  const std::size_t total = art0 + num_art;

  Tableau t(m, total);
  std::vector<std::size_t> basis(m);
  {
    std::size_t s = slack0;
    std::size_t a = art0;
    for (std::size_t r = 0; r < m; ++r) {
      const StdRow& row = rows[r];
      for (std::size_t c = 0; c < ncols; ++c) t.at(r, c) = row.coeffs[c];
      t.rhs(r) = row.rhs;
      switch (row.relation) {
        case Relation::LessEqual:
          t.at(r, s) = 1.0;
          basis[r] = s++;
          break;
        case Relation::GreaterEqual:
          t.at(r, s++) = -1.0;
          t.at(r, a) = 1.0;
          basis[r] = a++;
          break;
        case Relation::Equal:
          t.at(r, a) = 1.0;
          basis[r] = a++;
          break;
      }
    }
  }

  const std::size_t dims = nv + problem.constraints().size();
  const std::size_t limit = options.iteration_limit ? options.iteration_limit : 10 * dims * dims;
  Solution solution;
  Simplex simplex(t, basis, options, limit, solution.iterations);

  if (num_art > 0) {
    Vector cost(total, 0.0);
    for (std::size_t c = art0; c < total; ++c) cost[c] = 1.0;
    const std::vector<char> allowed(total, 1);
    double scale = 1.0;
    for (const StdRow& row : rows) scale = std::max(scale, row.rhs);
    const double zero = options.feasibility_tolerance * scale;
    const PhaseResult phase1 = simplex.run(cost, allowed, zero);
    if (phase1 == PhaseResult::IterationLimit) {
      solution.status = Status::IterationLimit;
      return solution;
    }
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) {
      if (basis[r] >= art0) infeasibility += t.rhs(r);
    }
    if (infeasibility > zero) {
      solution.status = Status::Infeasible;
      return solution;
    }
    // Pivot remaining (zero-valued) artificials out, dropping redundant rows.
    for (std::size_t r = 0; r < t.rows();) {
      if (basis[r] < art0) {
        ++r;
        continue;
      }
      std::size_t col = art0;
      double largest = options.pivot_tolerance;
      for (std::size_t c = 0; c < art0; ++c) {
        if (std::abs(t.at(r, c)) > largest) {
          largest = std::abs(t.at(r, c));
          col = c;
        }
      }
      if (col == art0) {
        t.erase_row(r);
        basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(r));
      } else {
        t.pivot(r, col);
        basis[r] = col;
        ++r;
      }
    }
  }

  Vector cost(total, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const double c = problem.objective()[j];
    cost[maps[j].col] = -c * maps[j].sign;
    if (maps[j].split) cost[maps[j].neg_col] = c;
  }
  std::vector<char> allowed(total, 1);
  for (std::size_t c = art0; c < total; ++c) allowed[c] = 0;
  const PhaseResult phase2 = simplex.run(cost, allowed);
  if (phase2 == PhaseResult::IterationLimit) {
    solution.status = Status::IterationLimit;
    return solution;
  }
  if (phase2 == PhaseResult::Unbounded) {
    solution.status = Status::Unbounded;
    return solution;
  }

  Vector y(total, 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r) y[basis[r]] = std::max(t.rhs(r), 0.0);
  solution.values.resize(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    const VarMap& vm = maps[j];
    double x = vm.offset + vm.sign * y[vm.col];
    if (vm.split) x -= y[vm.neg_col];
    solution.values[j] = x;
  }
  solution.objective_value = dot(problem.objective(), solution.values);
  solution.status = Status::Optimal;
  return solution;
}

PointReport check_point(const Problem& problem, std::span<const double> v, double tol) {
  if (v.size() != problem.num_vars()) throw std::invalid_argument("check_point: point dimension mismatch");
  PointReport report;
  auto record = [&](std::vector<Residual>& out, std::string label, double value) {
    const bool ok = value <= tol;
    out.push_back({std::move(label), value, ok});
    report.satisfied = report.satisfied && ok;
    report.max_violation = std::max(report.max_violation, value);
  };
  for (std::size_t i = 0; i < problem.constraints().size(); ++i) {
    const Constraint& con = problem.constraints()[i];
    const double activity = dot(con.row, v);
    double residual = 0.0;
    switch (con.relation) {
      case Relation::LessEqual: residual = activity - con.rhs; break;
      case Relation::GreaterEqual: residual = con.rhs - activity; break;
      case Relation::Equal: residual = std::abs(activity - con.rhs); break;
    }
    record(report.constraints, con.label.empty() ? "row " + std::to_string(i) : con.label, residual);
  }
  for (std::size_t j = 0; j < problem.num_vars(); ++j) {
    const std::string name = "x" + std::to_string(j);
    if (std::isfinite(problem.lower(j))) record(report.bounds, name + " >= lower", problem.lower(j) - v[j]);
    if (std::isfinite(problem.upper(j))) record(report.bounds, name + " <= upper", v[j] - problem.upper(j));
  }
  return report;
}

}  // namespace pfsyn::lp
