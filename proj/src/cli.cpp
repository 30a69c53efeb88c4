#include "pfsyn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfsyn/analysis.hpp"
#include "pfsyn/model.hpp"
#include "pfsyn/sim.hpp"
#include "pfsyn/synthesis.hpp"

namespace pfsyn::cli {

using ojson = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunReport {
  std::string command;
  ojson verdicts = ojson::object();
  std::vector<std::string> artifacts_written;
  std::vector<std::string> lines;  // human-readable form

  ojson to_json() const {
    ojson j;
    j["command"] = command;
    j["verdicts"] = verdicts;
    j["artifacts_written"] = artifacts_written;
    return j;
  }
};

FeasibilityOptions feasibility_from_env() {
  FeasibilityOptions options;
  if (const char* env = std::getenv("PFSYN_LP_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
      throw UsageError(std::string("PFSYN_LP_TOL must be a positive number, got '") + env + "'");
    options.threshold = v;
  }
  return options;
}

std::string fmt(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fmt_vector(const Vector& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], 8);
  return s + "]";
}

ojson matrix_json(const Matrix& a) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(std::vector<double>(a.row(r).begin(), a.row(r).end()));
  return rows;
}

ojson positivity_json(const PositivityReport& report, RunReport& run) {
  ojson violations = ojson::array();
  for (const PositivityViolation& v : report.violations) {
    violations.push_back({{"rule", v.rule + 1}, {"matrix", v.family}, {"row", v.row + 1}, {"col", v.col + 1},
                          {"value", v.value}});
    run.lines.push_back("  rule " + std::to_string(v.rule + 1) + " " + v.family + "(" + std::to_string(v.row + 1) +
                        "," + std::to_string(v.col + 1) + ") = " + fmt(v.value));
  }
  return {{"positive", report.positive}, {"violations", violations}};
}

int cmd_analyze(const FuzzyModel& model, RunReport& run) {
  const FeasibilityOptions options = feasibility_from_env();
  const PositivityReport positivity = check_model_positivity(model);
  run.lines.push_back(std::string("positive: ") + (positivity.positive ? "yes" : "no"));
  run.verdicts["positivity"] = positivity_json(positivity, run);

  bool any_certificate = false;
  for (CertificateVariant variant : {CertificateVariant::LP1, CertificateVariant::LP2}) {
    const StabilityResult result = certify_stability(model, variant, options);
    ojson v = {{"feasible", result.feasible()}, {"margin", result.margin}};
    std::string line = std::string(to_string(variant)) + ": " + (result.feasible() ? "feasible" : "infeasible");
    if (result.certificate) {
      v["p"] = result.certificate->p;
      line += "  p = " + fmt_vector(result.certificate->p) + "  margin = " + fmt(result.margin);
      any_certificate = true;
    }
    run.verdicts[to_string(variant)] = v;
    run.lines.push_back(line);
  }

  ojson radii = ojson::array();
  for (std::size_t i = 0; i < model.r(); ++i) {
    const Matrix& a = model.rules[i].A.upper();
    std::string label = "rho(A" + std::to_string(i + 1) + (model.has_intervals() ? " upper)" : ")");
    if (is_nonneg(a)) {
      const double rho = perron_radius(a);
      radii.push_back(rho);
      run.lines.push_back(label + " = " + fmt(rho, 8));
    } else {
      radii.push_back(nullptr);
      run.lines.push_back(label + " = n/a (negative entries)");
    }
  }
  run.verdicts["perron_radii"] = radii;
  for (const std::string& note : model.notes) run.lines.push_back("note: " + note);
  run.verdicts["notes"] = model.notes;
  return positivity.positive && any_certificate ? kExitOk : kExitNegative;
}

SynthesisMode resolve_mode(const FuzzyModel& model, const std::string& mode_name, RunReport& run) {
  if (!mode_name.empty()) return parse_mode(mode_name);
  const SynthesisMode mode = model.has_intervals() ? SynthesisMode::Robust : SynthesisMode::Standard;
  run.verdicts["mode_auto_selected"] = true;
  run.lines.push_back(std::string("mode auto-selected: ") + to_string(mode));
  return mode;
}

int cmd_synthesize(const FuzzyModel& model, const std::string& mode_name, const std::string& output,
                   RunReport& run) {
  const FeasibilityOptions options = feasibility_from_env();
  const SynthesisMode mode = resolve_mode(model, mode_name, run);
  const SynthesisOutcome outcome = synthesize(model, mode, options);
  run.verdicts["mode"] = to_string(mode);
  run.verdicts["feasible"] = outcome.feasible();
  run.verdicts["margin"] = outcome.margin;
  if (!outcome.feasible()) {
    run.lines.push_back(std::string("synthesis (") + to_string(mode) + "): infeasible, margin " + fmt(outcome.margin));
    return kExitNegative;
  }
  const SynthesisResult& result = *outcome.result;
  run.lines.push_back(std::string("synthesis (") + to_string(mode) + "): feasible, margin " + fmt(result.margin));
  run.lines.push_back("p = " + fmt_vector(result.p));
  ojson ks = ojson::array();
  for (std::size_t j = 0; j < result.K.size(); ++j) {
    ks.push_back(matrix_json(result.K[j]));
    run.lines.push_back("K" + std::to_string(j + 1) + " = " + to_string(result.K[j], 8));
  }
  run.verdicts["p"] = result.p;
  run.verdicts["K"] = ks;
  if (!output.empty()) {
    save_gains(result, output);
    run.artifacts_written.push_back(output);
  }
  return kExitOk;
}

int cmd_verify(const FuzzyModel& model, const std::string& gains_path, bool check_output, RunReport& run) {
  const Gains gains = load_gains(gains_path);
  try {
    check_gain_shapes(model, gains);
  } catch (const SynthesisError& e) {
    throw UsageError(e.what());
  }
  VerifyOptions options;
  options.check_output = check_output;
  options.feasibility = feasibility_from_env();
  const VerificationReport report = verify_closed_loop(model, gains, options);
  ojson vertices = ojson::array();
  for (const VertexReport& v : report.vertices) {
    ojson jv = {{"i", v.plant_rule + 1}, {"j", v.controller_rule + 1}, {"verdict", to_string(v.verdict)}};
    jv["radius"] = v.radius ? ojson(*v.radius) : ojson(nullptr);
    std::string line = "pair (" + std::to_string(v.plant_rule + 1) + "," + std::to_string(v.controller_rule + 1) +
                       "): " + to_string(v.verdict) + "  rho = " + (v.radius ? fmt(*v.radius, 8) : "n/a");
    if (v.output_nonneg) {
      jv["output_nonneg"] = *v.output_nonneg;
      line += std::string("  C+DK >= 0: ") + (*v.output_nonneg ? "yes" : "no");
    }
    vertices.push_back(jv);
    run.lines.push_back(line);
  }
  run.verdicts["pass"] = report.pass;
  run.verdicts["vertices"] = vertices;
  run.lines.push_back(std::string("verification: ") + (report.pass ? "pass" : "fail"));
  return report.pass ? kExitOk : kExitNegative;
}

Vector parse_x0(const std::string& text) {
  Vector x;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      x.push_back(std::stod(part, &used));
      if (used != part.size() && part.find_first_not_of(' ', used) != std::string::npos)
        throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--x0: bad number '" + part + "'");
    }
  }
  if (x.empty()) throw UsageError("--x0 is empty");
  return x;
}

int cmd_simulate(const FuzzyModel& model, const std::string& gains_path, const std::string& x0_text,
                 std::size_t steps, const std::string& realization, bool allow_negative, const std::string& output,
                 RunReport& run) {
  const Vector x0 = parse_x0(x0_text);
  if (x0.size() != model.n)
    throw UsageError("--x0 has " + std::to_string(x0.size()) + " entries, model has n = " + std::to_string(model.n));
  std::optional<Gains> gains;
  if (!gains_path.empty()) {
    gains = load_gains(gains_path);
    try {
      check_gain_shapes(model, *gains);
    } catch (const SynthesisError& e) {
      throw UsageError(e.what());
    }
  }
  SimulationOptions options;
  try {
    options.realization = parse_realization(realization);
  } catch (const SimulationError& e) {
    throw UsageError(e.what());
  }
  options.strict_initial_state = !allow_negative;
  const Trajectory trajectory = simulate(model, gains, x0, steps, options);
  export_csv(trajectory, output);
  run.artifacts_written.push_back(output);

  double min_state = trajectory[0].x.empty() ? 0.0 : trajectory[0].x[0];
  for (const StepRecord& rec : trajectory.steps())
    for (double v : rec.x) min_state = std::min(min_state, v);
  const double final_norm = norm2(trajectory.back().x);
  run.verdicts["steps"] = steps;
  run.verdicts["realization"] = to_string(options.realization);
  run.verdicts["initial_norm"] = norm2(x0);
  run.verdicts["final_norm"] = final_norm;
  run.verdicts["min_state"] = min_state;
  run.verdicts["warnings"] = trajectory.warnings;
  run.lines.push_back("simulated " + std::to_string(steps) + " steps, |x(0)| = " + fmt(norm2(x0)) +
                      ", |x(" + std::to_string(steps) + ")| = " + fmt(final_norm));
  run.lines.push_back("wrote " + output);
  return kExitOk;
}

int cmd_sweep(const FuzzyModel& model, const std::vector<std::string>& params, const std::string& mode_name,
              const std::string& output, RunReport& run) {
  if (params.empty() || params.size() > 2) throw UsageError("sweep takes one or two --param specifications");
  std::vector<ParamAxis> axes;
  for (const std::string& spec : params) axes.push_back(parse_param_spec(spec));
  const SynthesisMode mode = resolve_mode(model, mode_name, run);
  const auto points = feasibility_region(model, axes, mode, feasibility_from_env());

  std::string csv;
  for (std::size_t a = 0; a < axes.size(); ++a) csv += "param" + std::to_string(a + 1) + ",";
  csv += "feasible\n";
  std::size_t feasible = 0;
  for (const RegionPoint& point : points) {
    for (double v : point.values) csv += fmt(v, 9) + ",";
    csv += point.feasible ? "1\n" : "0\n";
    feasible += point.feasible ? 1 : 0;
  }
  std::ofstream out(output);
  if (!out) throw UsageError("cannot write " + output);
  out << csv;
  run.artifacts_written.push_back(output);

  ojson axes_json = ojson::array();
  for (const ParamAxis& axis : axes)
    axes_json.push_back({{"path", axis.path_text}, {"start", axis.start}, {"stop", axis.stop}, {"step", axis.step},
                         {"count", axis.count()}});
  run.verdicts["mode"] = to_string(mode);
  run.verdicts["axes"] = axes_json;
  run.verdicts["points"] = points.size();
  run.verdicts["feasible_points"] = feasible;
  run.lines.push_back("sweep (" + std::string(to_string(mode)) + "): " + std::to_string(feasible) + " of " +
                      std::to_string(points.size()) + " grid points feasible");
  run.lines.push_back("wrote " + output);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Analysis and state-feedback synthesis for positive discrete-time T-S fuzzy systems", "pfsyn"};
  app.require_subcommand(1);
  bool json_output = false;
  app.add_flag("--json", json_output, "Print the report as JSON");
  app.fallthrough();

  std::string model_path, mode_name, output, gains_path, x0_text, realization = "upper";
  std::size_t steps = 20;
  bool check_output = false;
  bool allow_negative = false;
  std::vector<std::string> params;

  auto* analyze = app.add_subcommand("analyze", "Positivity and open-loop stability certificates");
  analyze->add_option("model", model_path, "Model JSON")->required();

  auto* synth = app.add_subcommand("synthesize", "Synthesize PDC gains");
  synth->add_option("model", model_path, "Model JSON")->required();
  synth->add_option("--mode", mode_name, "standard | positive-input | robust");
  synth->add_option("-o,--output", output, "Gains JSON to write");

  auto* verify = app.add_subcommand("verify", "Check closed-loop positivity and Schur stability");
  verify->add_option("model", model_path, "Model JSON")->required();
  verify->add_option("gains", gains_path, "Gains JSON")->required();
  verify->add_flag("--check-output", check_output, "Also check C_i + D_i K_j >= 0");

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a trajectory to CSV");
  simulate_cmd->add_option("model", model_path, "Model JSON")->required();
  simulate_cmd->add_option("--gains", gains_path, "Gains JSON (open loop when omitted)");
  simulate_cmd->add_option("--x0", x0_text, "Initial state, comma separated")->required();
  simulate_cmd->add_option("--steps", steps, "Number of steps")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--realization", realization, "upper | lower | nominal");
  simulate_cmd->add_flag("--allow-negative-x0", allow_negative, "Warn instead of failing on negative x0");
  simulate_cmd->add_option("-o,--output", output, "Trajectory CSV")->required();

  auto* sweep = app.add_subcommand("sweep", "Synthesis feasibility over a parameter grid");
  sweep->add_option("model", model_path, "Model JSON")->required();
  sweep->add_option("--param", params, "path=start:stop:step (repeatable, at most 2)")->required();
  sweep->add_option("--mode", mode_name, "standard | positive-input | robust");
  sweep->add_option("-o,--output", output, "Region CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  RunReport report;
  int code = kExitError;
  try {
    const FuzzyModel model = load_model(model_path);
    if (analyze->parsed()) {
      report.command = "analyze";
      code = cmd_analyze(model, report);
    } else if (synth->parsed()) {
      report.command = "synthesize";
      code = cmd_synthesize(model, mode_name, output, report);
    } else if (verify->parsed()) {
      report.command = "verify";
      code = cmd_verify(model, gains_path, check_output, report);
    } else if (simulate_cmd->parsed()) {
      report.command = "simulate";
      code = cmd_simulate(model, gains_path, x0_text, steps, realization, allow_negative, output, report);
    } else {
      report.command = "sweep";
      code = cmd_sweep(model, params, mode_name, output, report);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  if (json_output) {
    out << report.to_json().dump(2) << "\n";
  } else {
    for (const std::string& line : report.lines) out << line << "\n";
  }
  return code;
}

}  // namespace pfsyn::cli
