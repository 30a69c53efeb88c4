#include "pfsyn/analysis.hpp"

namespace pfsyn {

const char* to_string(CertificateVariant variant) {
  return variant == CertificateVariant::LP1 ? "LP1" : "LP2";
}

const char* to_string(IntervalVerdict verdict) {
  switch (verdict) {
    case IntervalVerdict::PositiveAndSchur: return "positive-and-schur";
    case IntervalVerdict::NotPositive: return "not-positive";
    case IntervalVerdict::NotSchur: return "not-schur";
    case IntervalVerdict::Both: return "not-positive-not-schur";
  }
  return "unknown";
}

std::pair<Vector, double> common_margin(std::span<const Matrix> matrices, const lp::Options& options) {
  if (matrices.empty()) throw AnalysisError("common_margin: no matrices");
  const std::size_t n = matrices.front().rows();
  const std::size_t eps = n;
  lp::Problem problem(n + 1);
  for (std::size_t t = 0; t < n; ++t) problem.set_bounds(t, 0.0, 1.0);
  problem.set_bounds(eps, 0.0, 1.0);
  problem.set_objective_coefficient(eps, 1.0);

  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const Matrix& a = matrices[k];
    if (!a.square() || a.rows() != n) throw AnalysisError("common_margin: matrices must be square and equal size");
    for (std::size_t h = 0; h < n; ++h) {
      Vector row(n + 1, 0.0);
      for (std::size_t t = 0; t < n; ++t) row[t] = a(h, t) - (h == t ? 1.0 : 0.0);
      row[eps] = 1.0;
      problem.add_constraint(std::move(row), lp::Relation::LessEqual, 0.0,
                             "decrease k=" + std::to_string(k) + " h=" + std::to_string(h));
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    Vector row(n + 1, 0.0);
    row[t] = 1.0;
    row[eps] = -1.0;
    problem.add_constraint(std::move(row), lp::Relation::GreaterEqual, 0.0, "p" + std::to_string(t) + " >= eps");
  }

  const lp::Solution sol = lp::solve(problem, options);
  // The origin is always feasible, so anything but Optimal is a solver failure.
  if (sol.status != lp::Status::Optimal)
    throw AnalysisError(std::string("stability LP failed: ") + lp::to_string(sol.status));
  Vector p(sol.values.begin(), sol.values.begin() + static_cast<std::ptrdiff_t>(n));
  return {p, sol.values[eps]};
}

StabilityResult certify_stability(const FuzzyModel& model, CertificateVariant variant,
                                  const FeasibilityOptions& options) {
  StabilityResult result;
  if (!check_model_positivity(model).positive)
    result.warnings.push_back("model is not positive; the copositive certificate does not apply");

  std::vector<Matrix> matrices;
  for (const Rule& rule : model.rules)
    matrices.push_back(variant == CertificateVariant::LP1 ? rule.A.upper().transpose() : rule.A.upper());
  auto [p, margin] = common_margin(matrices, options.lp);
  result.margin = margin;
  if (margin > options.threshold) result.certificate = StabilityCertificate{variant, std::move(p), margin};
  return result;
}

bool schur_certificate(const Matrix& a, const FeasibilityOptions& options) {
  if (!a.square()) throw AnalysisError("schur_certificate: matrix must be square");
  if (!is_nonneg(a, 0.0)) throw AnalysisError("schur_certificate: matrix has negative entries");
  const Matrix single[] = {a};
  return common_margin(single, options.lp).second > options.threshold;
}

Matrix clamp_roundoff(const Matrix& a, double tol) {
  Matrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      if (a(r, c) < 0.0 && a(r, c) >= -tol) out(r, c) = 0.0;
  return out;
}

IntervalVerdict interval_check(const IntervalMatrix& m, const FeasibilityOptions& options, double positivity_tol) {
  const bool positive = is_nonneg(m.lower(), positivity_tol);
  if (!is_nonneg(m.upper(), positivity_tol)) return IntervalVerdict::NotPositive;
  const bool schur = schur_certificate(clamp_roundoff(m.upper(), positivity_tol), options);
  if (positive) return schur ? IntervalVerdict::PositiveAndSchur : IntervalVerdict::NotSchur;
  return schur ? IntervalVerdict::NotPositive : IntervalVerdict::Both;
}

bool dual_equivalence_check(const FuzzyModel& model, const FeasibilityOptions& options) {
  const bool lp1 = certify_stability(model, CertificateVariant::LP1, options).feasible();
  const bool lp2_dual = certify_stability(transposed_dynamics(model), CertificateVariant::LP2, options).feasible();
  return lp1 == lp2_dual;
}

}  // namespace pfsyn
