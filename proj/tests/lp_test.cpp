#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle/vertex_enum.hpp"
#include "pfsyn/lp.hpp"
#include "support/random_lp.hpp"

namespace pfsyn::lp {
namespace {

TEST(Solve, SingleBoundedVariable) {
  Problem p(1);
  p.set_objective({1.0});
  p.add_constraint({1.0}, Relation::LessEqual, 1.0);
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.values[0], 1.0, 1e-12);
  EXPECT_NEAR(s.objective_value, 1.0, 1e-12);
}

TEST(Solve, Infeasible) {
  Problem p(1);
  p.add_constraint({1.0}, Relation::LessEqual, -1.0);
  EXPECT_EQ(solve(p).status, Status::Infeasible);
}

TEST(Solve, Unbounded) {
  Problem p(2);
  p.set_objective({1.0, 1.0});
  p.add_constraint({1.0, -1.0}, Relation::LessEqual, 2.0);
  EXPECT_EQ(solve(p).status, Status::Unbounded);
}

TEST(Solve, FreeAndShiftedVariables) {
  // max -|x - 3| style: maximize y s.t. y <= x - 3, y <= 3 - x, x free, y free.
  Problem p(2);
  p.set_free(0);
  p.set_free(1);
  p.set_objective({0.0, 1.0});
  p.add_constraint({-1.0, 1.0}, Relation::LessEqual, -3.0);
  p.add_constraint({1.0, 1.0}, Relation::LessEqual, 3.0);
  Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.values[0], 3.0, 1e-9);
  EXPECT_NEAR(s.values[1], 0.0, 1e-9);

  // Upper-bounded only, and a range with negative lower bound.
  Problem q(2);
  q.set_bounds(0, -lp::kInfinity, -2.0);
  q.set_bounds(1, -4.0, -1.0);
  q.set_objective({1.0, 1.0});
  s = solve(q);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.values[0], -2.0, 1e-12);
  EXPECT_NEAR(s.values[1], -1.0, 1e-12);
  EXPECT_NEAR(s.objective_value, -3.0, 1e-12);
  q.set_objective({-1.0, 0.0});
  EXPECT_EQ(solve(q).status, Status::Unbounded);
}

TEST(Solve, EqualityAndRedundantRows) {
  Problem p(2);
  p.set_objective({1.0, 2.0});
  p.add_constraint({1.0, 1.0}, Relation::Equal, 4.0);
  p.add_constraint({2.0, 2.0}, Relation::Equal, 8.0);
  p.add_constraint({1.0, 0.0}, Relation::GreaterEqual, 1.0);
  const Solution s = solve(p);
  ASSERT_EQ(s.status, Status::Optimal);
  EXPECT_NEAR(s.values[0], 1.0, 1e-12);
  EXPECT_NEAR(s.values[1], 3.0, 1e-12);
}

TEST(Solve, IterationLimitIsReported) {
  Problem p(3);
  p.set_objective({1.0, 1.0, 1.0});
  p.add_constraint({1.0, 2.0, 3.0}, Relation::LessEqual, 6.0);
  p.add_constraint({3.0, 2.0, 1.0}, Relation::LessEqual, 6.0);
  p.add_constraint({1.0, 1.0, 1.0}, Relation::GreaterEqual, 1.0);
  Options options;
  options.iteration_limit = 1;
  EXPECT_EQ(solve(p, options).status, Status::IterationLimit);
}

TEST(Problem, RejectsMalformedInput) {
  EXPECT_THROW(Problem(0), std::invalid_argument);
  Problem p(2);
  EXPECT_THROW(p.add_constraint({1.0}, Relation::LessEqual, 0.0), std::invalid_argument);
  EXPECT_THROW(p.add_constraint({1.0, NAN}, Relation::LessEqual, 0.0), std::invalid_argument);
  EXPECT_THROW(p.set_bounds(0, kInfinity, kInfinity), std::invalid_argument);
  EXPECT_THROW(p.set_bounds(5, 0.0, 1.0), std::out_of_range);
}

TEST(CheckPoint, Residuals) {
  Problem p(1);
  p.set_objective({1.0});
  p.add_constraint({1.0}, Relation::LessEqual, 1.0, "cap");
  PointReport ok = check_point(p, std::vector<double>{1.0}, 0.0);
  EXPECT_TRUE(ok.satisfied);
  EXPECT_EQ(ok.constraints[0].label, "cap");
  EXPECT_EQ(ok.constraints[0].value, 0.0);

  Problem q(1);
  q.add_constraint({1.0}, Relation::GreaterEqual, 1.0);
  const PointReport bad = check_point(q, std::vector<double>{0.0}, 1e-9);
  EXPECT_FALSE(bad.satisfied);
  EXPECT_DOUBLE_EQ(bad.constraints[0].value, 1.0);
  EXPECT_DOUBLE_EQ(bad.max_violation, 1.0);

  const PointReport below = check_point(q, std::vector<double>{-2.0}, 1e-9);
  EXPECT_FALSE(below.bounds[0].satisfied);
  EXPECT_THROW(check_point(q, std::vector<double>{1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST(Oracle, HandComputedCases) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6, x,y >= 0 -> (8/5, 6/5), 14/5
  oracle::IntLp lp{2, {1, 1}, {{{1, 2}, oracle::Rel::Le, 4}, {{3, 1}, oracle::Rel::Le, 6},
                               {{1, 0}, oracle::Rel::Ge, 0}, {{0, 1}, oracle::Rel::Ge, 0}}, true};
  const oracle::Result r = oracle::solve(lp);
  ASSERT_EQ(r.status, oracle::Status::Optimal);
  EXPECT_EQ(static_cast<long long>(r.objective.num * 5), static_cast<long long>(r.objective.den * 14));
  lp.rows[1] = {{3, 1}, oracle::Rel::Ge, 6};
  lp.rows[0] = {{1, 2}, oracle::Rel::Ge, 4};
  EXPECT_EQ(oracle::solve(lp).status, oracle::Status::Unbounded);
  lp.rows.push_back({{1, 1}, oracle::Rel::Le, 1});
  EXPECT_EQ(oracle::solve(lp).status, oracle::Status::Infeasible);
}

TEST(SolveProperty, MatchesVertexEnumerationOracle) {
  std::mt19937 rng(2024);
  int counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 500; ++trial) {
    const fixtures::RandomLp lp = fixtures::random_lp(rng);
    const oracle::Result expected = oracle::solve(lp.exact);
    const Solution got = solve(lp.problem);
    ASSERT_EQ(got.status, fixtures::to_solver_status(expected.status)) << "trial " << trial;
    ++counts[static_cast<int>(expected.status)];
    if (got.status == Status::Optimal) {
      const double obj = expected.objective.value();
      EXPECT_NEAR(got.objective_value, obj, 1e-9 * std::max(1.0, std::abs(obj))) << "trial " << trial;
      EXPECT_TRUE(check_point(lp.problem, got.values, 1e-7).satisfied) << "trial " << trial;
    }
  }
  // The generator must exercise every outcome.
  EXPECT_GT(counts[0], 50);
  EXPECT_GT(counts[1], 50);
  EXPECT_GT(counts[2], 10);
}

TEST(SolveProperty, Deterministic) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const fixtures::RandomLp lp = fixtures::random_lp(rng);
    const Solution a = solve(lp.problem);
    const Solution b = solve(lp.problem);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

}  // namespace
}  // namespace pfsyn::lp
