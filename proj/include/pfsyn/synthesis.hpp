#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfsyn/analysis.hpp"
#include "pfsyn/lp.hpp"
#include "pfsyn/model.hpp"

namespace pfsyn {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Standard: closed-loop positivity rows. PositiveInput: xi >= 0 instead,
/// requires a positive open-loop model. Robust: stabilise the upper bounds and
/// keep the lower bounds positive.
enum class SynthesisMode { Standard, PositiveInput, Robust };

const char* to_string(SynthesisMode mode);
SynthesisMode parse_mode(const std::string& name);

/// xi[j][t] is the m-vector attached to controller rule j and state index t.
using XiTable = std::vector<std::vector<Vector>>;

/// One gain matrix (m x n) per controller rule.
using Gains = std::vector<Matrix>;

struct SynthesisResult {
  SynthesisMode mode = SynthesisMode::Standard;
  Vector p;
  XiTable xi;
  Gains K;
  double margin = 0.0;
};

struct SynthesisOutcome {
  std::optional<SynthesisResult> result;
  double margin = 0.0;
  bool feasible() const { return result.has_value(); }
};

enum class RowKind { Stabilization, Positivity };

/// Constraint set over (p, xi) without the margin variable: stabilisation
/// rows read "<= 0" and must hold strictly, positivity rows read ">= 0".
/// Variable order: p_0..p_{n-1}, then xi(j, t, c) at n + (j*n + t)*m + c.
struct ConstraintSet {
  lp::Problem problem;
  std::vector<RowKind> kinds;
};

ConstraintSet synthesis_constraints(const FuzzyModel& model, SynthesisMode mode);

/// Packs (p, xi) into the variable order of synthesis_constraints.
Vector pack_decision(const Vector& p, const XiTable& xi);

/// K_j column t = xi[j][t] / p_t. Throws SynthesisError when some p_t <= 0.
Gains reconstruct_gains(const Vector& p, const XiTable& xi);

/// Maximum-margin LP over (p, xi, eps). Throws SynthesisError for
/// incompatible mode/model combinations or a solver failure.
SynthesisOutcome synthesize(const FuzzyModel& model, SynthesisMode mode, const FeasibilityOptions& options = {});

struct VertexPair {
  std::size_t plant_rule = 0;
  std::size_t controller_rule = 0;
  IntervalMatrix closed_loop;
};

/// [A_lower_i + B_i K_j, A_upper_i + B_i K_j] for every ordered pair (i, j).
std::vector<VertexPair> closed_loop_vertices(const FuzzyModel& model, const Gains& gains);

struct VertexReport {
  std::size_t plant_rule = 0;
  std::size_t controller_rule = 0;
  IntervalVerdict verdict = IntervalVerdict::Both;
  std::optional<double> radius;  // Perron root of the upper bound when nonnegative
  std::optional<bool> output_nonneg;
};

struct VerificationReport {
  bool pass = false;
  std::vector<VertexReport> vertices;
};

struct VerifyOptions {
  bool check_output = false;
  // Closed-loop entries are sums like a + b * xi / p; LP vertices put many of
  // them exactly on zero, where rounding leaves residue of order 1e-16.
  double positivity_tol = 1e-12;
  FeasibilityOptions feasibility;
};

VerificationReport verify_closed_loop(const FuzzyModel& model, const Gains& gains, const VerifyOptions& options = {});

void check_gain_shapes(const FuzzyModel& model, const Gains& gains);

// Gains file: {"mode", "p", "xi", "K", "margin"}; only "K" is required on read.
std::string gains_to_json(const SynthesisResult& result);
void save_gains(const SynthesisResult& result, const std::filesystem::path& path);
Gains parse_gains_json(const std::string& text);
Gains load_gains(const std::filesystem::path& path);

// Parameter sweeps over single matrix entries, e.g. "rules[0].A[1][0]".
struct EntryPath {
  std::size_t rule = 0;
  std::string family;  // "A", "A_lower" or "A_upper"
  std::size_t row = 0;
  std::size_t col = 0;
};

EntryPath parse_entry_path(const std::string& text);

/// Returns a validated copy of the model with one entry replaced.
FuzzyModel with_entry(const FuzzyModel& model, const EntryPath& path, double value);

struct ParamAxis {
  std::string path_text;
  EntryPath path;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::size_t count() const;
  double value(std::size_t k) const { return start + static_cast<double>(k) * step; }
};

/// Parses "path=start:stop:step".
ParamAxis parse_param_spec(const std::string& text);

struct RegionPoint {
  Vector values;
  bool feasible = false;
};

/// Grid points in row-major order (first axis outermost).
std::vector<RegionPoint> feasibility_region(const FuzzyModel& model, const std::vector<ParamAxis>& axes,
                                            SynthesisMode mode, const FeasibilityOptions& options = {},
                                            std::size_t threads = 0);

}  // namespace pfsyn
