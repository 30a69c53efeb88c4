#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pfsyn/linalg.hpp"
#include "pfsyn/lp.hpp"
#include "pfsyn/model.hpp"

namespace pfsyn {

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultFeasibilityThreshold = 1e-9;

/// A strict LP is declared feasible when its maximised margin exceeds this.
struct FeasibilityOptions {
  double threshold = kDefaultFeasibilityThreshold;
  lp::Options lp;
};

/// LP1 certifies p'(A_i - I) < 0, LP2 certifies (A_i - I)p << 0.
enum class CertificateVariant { LP1, LP2 };

const char* to_string(CertificateVariant variant);

/// Linear copositive Lyapunov function V(x) = p'x for every rule.
struct StabilityCertificate {
  CertificateVariant variant = CertificateVariant::LP2;
  Vector p;
  double margin = 0.0;
};

struct StabilityResult {
  std::optional<StabilityCertificate> certificate;
  double margin = 0.0;  // optimal margin; <= threshold when infeasible
  std::vector<std::string> warnings;

  bool feasible() const { return certificate.has_value(); }
};

/// Solves max eps s.t. (M_k - I)p <= -eps 1, p >= eps 1, p <= 1, 0 <= eps <= 1
/// for the given matrices. Returns (p, eps); throws AnalysisError when the LP
/// solver fails.
std::pair<Vector, double> common_margin(std::span<const Matrix> matrices, const lp::Options& options = {});

/// Open-loop stability of the autonomous fuzzy model (u = 0). Interval models
/// are certified on their upper bounds.
StabilityResult certify_stability(const FuzzyModel& model, CertificateVariant variant,
                                  const FeasibilityOptions& options = {});

/// Single-matrix margin LP; equivalent to rho(a) < 1 for nonnegative a.
/// Throws AnalysisError on negative entries.
bool schur_certificate(const Matrix& a, const FeasibilityOptions& options = {});

enum class IntervalVerdict { PositiveAndSchur, NotPositive, NotSchur, Both };

const char* to_string(IntervalVerdict verdict);

/// Every matrix in [lower, upper] is nonnegative and Schur iff lower >= 0 and
/// upper is Schur. A negative upper bound yields NotPositive without a Schur
/// verdict. Entries in [-positivity_tol, 0) count as zero.
IntervalVerdict interval_check(const IntervalMatrix& m, const FeasibilityOptions& options = {},
                               double positivity_tol = 0.0);

/// Copy of `a` with entries in [-tol, 0) set to zero.
Matrix clamp_roundoff(const Matrix& a, double tol);

/// LP1 on the model and LP2 on its transpose agree on feasibility.
bool dual_equivalence_check(const FuzzyModel& model, const FeasibilityOptions& options = {});

}  // namespace pfsyn
