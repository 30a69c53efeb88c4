#include "pfsyn/synthesis.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace pfsyn {

using nlohmann::json;

const char* to_string(SynthesisMode mode) {
  switch (mode) {
    case SynthesisMode::Standard: return "standard";
    case SynthesisMode::PositiveInput: return "positive-input";
    case SynthesisMode::Robust: return "robust";
  }
  return "unknown";
}

SynthesisMode parse_mode(const std::string& name) {
  if (name == "standard") return SynthesisMode::Standard;
  if (name == "positive-input") return SynthesisMode::PositiveInput;
  if (name == "robust") return SynthesisMode::Robust;
  throw SynthesisError("unknown synthesis mode '" + name + "' (expected standard, positive-input or robust)");
}

namespace {

void check_mode(const FuzzyModel& model, SynthesisMode mode) {
  if (mode == SynthesisMode::Robust) {
    if (!model.has_intervals()) throw SynthesisError("robust mode needs A_lower/A_upper bounds in the model");
    return;
  }
  if (model.has_intervals())
    throw SynthesisError(std::string(to_string(mode)) + " mode needs exact rule matrices; use robust mode for "
                                                        "interval models");
  if (mode == SynthesisMode::PositiveInput) {
    for (const Rule& rule : model.rules)
      if (!is_nonneg(rule.A.lower()) || !is_nonneg(rule.B))
        throw SynthesisError("positive-input mode requires nonnegative A_i and B_i");
  }
}

std::size_t xi_index(const FuzzyModel& model, std::size_t j, std::size_t t, std::size_t c) {
  return model.n + (j * model.n + t) * model.m + c;
}

// Appends rows (S) and (P). When eps_col is set, (S) rows carry +eps.
void add_synthesis_rows(const FuzzyModel& model, SynthesisMode mode, lp::Problem& problem,
                        std::vector<RowKind>& kinds, std::optional<std::size_t> eps_col) {
  const std::size_t n = model.n;
  const std::size_t m = model.m;
  const std::size_t r = model.r();
  const std::size_t width = problem.num_vars();

  for (std::size_t i = 0; i < r; ++i) {
    const Rule& rule = model.rules[i];
    const Matrix& a_plus = rule.A.upper();
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t h = 0; h < n; ++h) {
        Vector row(width, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
          row[t] = a_plus(h, t) - (h == t ? 1.0 : 0.0);
          for (std::size_t c = 0; c < m; ++c) row[xi_index(model, j, t, c)] += rule.B(h, c);
        }
        if (eps_col) row[*eps_col] = 1.0;
        std::ostringstream label;
        label << "stabilization i=" << i + 1 << " j=" << j + 1 << " row=" << h + 1;
        problem.add_constraint(std::move(row), lp::Relation::LessEqual, 0.0, label.str());
        kinds.push_back(RowKind::Stabilization);
      }
    }
  }

  if (mode == SynthesisMode::PositiveInput) return;

  // a_minus(h,t) p_t + B_i(h,:) xi_t^j >= 0 is entry (h,t) of (A_i + B_i K_j) scaled by p_t.
  for (std::size_t i = 0; i < r; ++i) {
    const Rule& rule = model.rules[i];
    const Matrix& a_minus = rule.A.lower();
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t h = 0; h < n; ++h)
        for (std::size_t t = 0; t < n; ++t) {
          Vector row(width, 0.0);
          row[t] = a_minus(h, t);
          for (std::size_t c = 0; c < m; ++c) row[xi_index(model, j, t, c)] = rule.B(h, c);
          std::ostringstream label;
          label << "positivity i=" << i + 1 << " j=" << j + 1 << " h=" << h + 1 << " t=" << t + 1;
          problem.add_constraint(std::move(row), lp::Relation::GreaterEqual, 0.0, label.str());
          kinds.push_back(RowKind::Positivity);
        }
  }
}

void set_xi_bounds(const FuzzyModel& model, SynthesisMode mode, lp::Problem& problem) {
  const std::size_t count = model.r() * model.n * model.m;
  for (std::size_t k = 0; k < count; ++k) {
    if (mode == SynthesisMode::PositiveInput) problem.set_bounds(model.n + k, 0.0, lp::kInfinity);
    else problem.set_free(model.n + k);
  }
}

XiTable unpack_xi(const FuzzyModel& model, std::span<const double> values) {
  XiTable xi(model.r(), std::vector<Vector>(model.n, Vector(model.m)));
  for (std::size_t j = 0; j < model.r(); ++j)
    for (std::size_t t = 0; t < model.n; ++t)
      for (std::size_t c = 0; c < model.m; ++c) xi[j][t][c] = values[xi_index(model, j, t, c)];
  return xi;
}

Matrix json_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw SynthesisError("gains file: '" + field + "' must be a matrix");
  std::vector<std::vector<double>> rows;
  for (const json& row : v) {
    if (!row.is_array()) throw SynthesisError("gains file: '" + field + "' rows must be arrays");
    std::vector<double> values;
    for (const json& e : row) {
      if (!e.is_number()) throw SynthesisError("gains file: '" + field + "' entries must be numbers");
      values.push_back(e.get<double>());
    }
    rows.push_back(std::move(values));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const LinalgError& e) {
    throw SynthesisError("gains file: '" + field + "': " + e.what());
  }
}

}  // namespace

ConstraintSet synthesis_constraints(const FuzzyModel& model, SynthesisMode mode) {
  check_mode(model, mode);
  ConstraintSet set{lp::Problem(model.n + model.r() * model.n * model.m), {}};
  set_xi_bounds(model, mode, set.problem);
  add_synthesis_rows(model, mode, set.problem, set.kinds, std::nullopt);
  return set;
}

Vector pack_decision(const Vector& p, const XiTable& xi) {
  Vector v(p);
  for (const auto& per_rule : xi)
    for (const Vector& x : per_rule) v.insert(v.end(), x.begin(), x.end());
  return v;
}

Gains reconstruct_gains(const Vector& p, const XiTable& xi) {
  const std::size_t n = p.size();
  for (std::size_t t = 0; t < n; ++t)
    if (!(p[t] > 0.0)) throw SynthesisError("reconstruct_gains: p must be strictly positive");
  Gains gains;
  for (const auto& per_rule : xi) {
    if (per_rule.size() != n) throw SynthesisError("reconstruct_gains: xi table has the wrong number of states");
    const std::size_t m = per_rule.front().size();
    Matrix k(m, n);
    for (std::size_t t = 0; t < n; ++t) {
      if (per_rule[t].size() != m) throw SynthesisError("reconstruct_gains: ragged xi table");
      for (std::size_t c = 0; c < m; ++c) k(c, t) = per_rule[t][c] / p[t];
    }
    gains.push_back(std::move(k));
  }
  return gains;
}

SynthesisOutcome synthesize(const FuzzyModel& model, SynthesisMode mode, const FeasibilityOptions& options) {
  check_mode(model, mode);
  const std::size_t n = model.n;
  const std::size_t num_xi = model.r() * n * model.m;
  const std::size_t eps = n + num_xi;

  lp::Problem problem(eps + 1);
  std::vector<RowKind> kinds;
  for (std::size_t t = 0; t < n; ++t) problem.set_bounds(t, 0.0, 1.0);
  set_xi_bounds(model, mode, problem);
  problem.set_bounds(eps, 0.0, 1.0);
  problem.set_objective_coefficient(eps, 1.0);
  add_synthesis_rows(model, mode, problem, kinds, eps);
  for (std::size_t t = 0; t < n; ++t) {
    Vector row(eps + 1, 0.0);
    row[t] = 1.0;
    row[eps] = -1.0;
    problem.add_constraint(std::move(row), lp::Relation::GreaterEqual, 0.0, "p" + std::to_string(t + 1) + " >= eps");
  }

  const lp::Solution sol = lp::solve(problem, options.lp);
  // (p, xi, eps) = 0 is feasible, so only solver failures end up here.
  if (sol.status != lp::Status::Optimal)
    throw SynthesisError(std::string("synthesis LP failed: ") + lp::to_string(sol.status));

  SynthesisOutcome outcome;
  outcome.margin = sol.values[eps];
  if (outcome.margin <= options.threshold) return outcome;

  SynthesisResult result;
  result.mode = mode;
  result.p.assign(sol.values.begin(), sol.values.begin() + static_cast<std::ptrdiff_t>(n));
  result.xi = unpack_xi(model, sol.values);
  result.K = reconstruct_gains(result.p, result.xi);
  result.margin = outcome.margin;
  outcome.result = std::move(result);
  return outcome;
}

void check_gain_shapes(const FuzzyModel& model, const Gains& gains) {
  if (gains.size() != model.r())
    throw SynthesisError("expected " + std::to_string(model.r()) + " gain matrices, got " +
                         std::to_string(gains.size()));
  for (const Matrix& k : gains)
    if (k.rows() != model.m || k.cols() != model.n)
      throw SynthesisError("gain matrices must be " + std::to_string(model.m) + "x" + std::to_string(model.n));
}

std::vector<VertexPair> closed_loop_vertices(const FuzzyModel& model, const Gains& gains) {
  check_gain_shapes(model, gains);
  std::vector<VertexPair> pairs;
  for (std::size_t i = 0; i < model.r(); ++i)
    for (std::size_t j = 0; j < model.r(); ++j) {
      const Rule& rule = model.rules[i];
      pairs.push_back({i, j, rule.A.shifted(mat_mul(rule.B, gains[j]))});
    }
  return pairs;
}

VerificationReport verify_closed_loop(const FuzzyModel& model, const Gains& gains, const VerifyOptions& options) {
  VerificationReport report;
  report.pass = true;
  for (const VertexPair& pair : closed_loop_vertices(model, gains)) {
    VertexReport v;
    v.plant_rule = pair.plant_rule;
    v.controller_rule = pair.controller_rule;
    const double tol = options.positivity_tol;
    v.verdict = interval_check(pair.closed_loop, options.feasibility, tol);
    if (is_nonneg(pair.closed_loop.upper(), tol))
      v.radius = perron_radius(clamp_roundoff(pair.closed_loop.upper(), tol));
    if (options.check_output) {
      const Rule& rule = model.rules[pair.plant_rule];
      v.output_nonneg = is_nonneg(mat_add(rule.C, mat_mul(rule.D, gains[pair.controller_rule])), tol);
    }
    report.pass = report.pass && v.verdict == IntervalVerdict::PositiveAndSchur;
    report.vertices.push_back(v);
  }
  return report;
}

std::string gains_to_json(const SynthesisResult& result) {
  auto matrix = [](const Matrix& a) {
    json rows = json::array();
    for (std::size_t r = 0; r < a.rows(); ++r) rows.push_back(std::vector<double>(a.row(r).begin(), a.row(r).end()));
    return rows;
  };
  json root;
  root["mode"] = to_string(result.mode);
  root["p"] = result.p;
  root["xi"] = result.xi;
  json ks = json::array();
  for (const Matrix& k : result.K) ks.push_back(matrix(k));
  root["K"] = std::move(ks);
  root["margin"] = result.margin;
  return root.dump(2) + "\n";
}

void save_gains(const SynthesisResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SynthesisError("cannot write gains file " + path.string());
  out << gains_to_json(result);
}

Gains parse_gains_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SynthesisError(std::string("gains file is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("K") || !root["K"].is_array() || root["K"].empty())
    throw SynthesisError("gains file: 'K' must be a non-empty list of matrices");
  Gains gains;
  for (std::size_t j = 0; j < root["K"].size(); ++j)
    gains.push_back(json_matrix(root["K"][j], "K[" + std::to_string(j) + "]"));
  for (const Matrix& k : gains)
    if (k.rows() != gains[0].rows() || k.cols() != gains[0].cols())
      throw SynthesisError("gains file: all gain matrices in 'K' must have the same shape");
  return gains;
}

Gains load_gains(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SynthesisError("cannot open gains file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_gains_json(buffer.str());
}

EntryPath parse_entry_path(const std::string& text) {
  static const std::regex pattern(R"(^rules\[(\d+)\]\.(A|A_lower|A_upper)\[(\d+)\]\[(\d+)\]$)");
  std::smatch match;
  if (!std::regex_match(text, match, pattern))
    throw SynthesisError("bad parameter path '" + text + "' (expected rules[i].A[r][c], A_lower or A_upper)");
  return {std::stoul(match[1]), match[2], std::stoul(match[3]), std::stoul(match[4])};
}

FuzzyModel with_entry(const FuzzyModel& model, const EntryPath& path, double value) {
  if (path.rule >= model.r()) throw SynthesisError("parameter path: rule index out of range");
  if (path.row >= model.n || path.col >= model.n) throw SynthesisError("parameter path: entry out of range");
  FuzzyModel out = model;
  Rule& rule = out.rules[path.rule];
  try {
    if (path.family == "A") {
      if (rule.declared_bounds) throw SynthesisError("parameter path: rule has bounds; address A_lower or A_upper");
      Matrix a = rule.A.lower();
      a(path.row, path.col) = value;
      rule.A = IntervalMatrix::exact(a);
    } else {
      if (!rule.declared_bounds) throw SynthesisError("parameter path: rule has an exact A; address A");
      auto bounds = *rule.declared_bounds;
      Matrix& target = path.family == "A_lower" ? bounds.first : bounds.second;
      target(path.row, path.col) = value;
      rule.A = IntervalMatrix::hull(bounds.first, bounds.second);
      rule.declared_bounds = std::move(bounds);
    }
  } catch (const LinalgError& e) {
    throw SynthesisError(std::string("parameter value rejected: ") + e.what());
  }
  validate_model(out);
  return out;
}

std::size_t ParamAxis::count() const { return static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1; }

ParamAxis parse_param_spec(const std::string& text) {
  const auto eq = text.rfind('=');
  if (eq == std::string::npos) throw SynthesisError("parameter spec '" + text + "' must look like path=start:stop:step");
  ParamAxis axis;
  axis.path_text = text.substr(0, eq);
  axis.path = parse_entry_path(axis.path_text);
  std::stringstream range(text.substr(eq + 1));
  std::string part;
  std::vector<double> numbers;
  while (std::getline(range, part, ':')) {
    try {
      std::size_t used = 0;
      numbers.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw SynthesisError("parameter spec '" + text + "': bad number '" + part + "'");
    }
  }
  if (numbers.size() != 3) throw SynthesisError("parameter spec '" + text + "' needs start:stop:step");
  axis.start = numbers[0];
  axis.stop = numbers[1];
  axis.step = numbers[2];
  if (!(axis.step > 0.0) || !(axis.stop >= axis.start) || !std::isfinite(axis.stop))
    throw SynthesisError("parameter spec '" + text + "': need step > 0 and stop >= start");
  return axis;
}

std::vector<RegionPoint> feasibility_region(const FuzzyModel& model, const std::vector<ParamAxis>& axes,
                                            SynthesisMode mode, const FeasibilityOptions& options,
                                            std::size_t threads) {
  if (axes.empty()) throw SynthesisError("feasibility_region: no parameters");
  std::size_t total = 1;
  for (const ParamAxis& axis : axes) total *= axis.count();

  std::vector<RegionPoint> points(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    points[idx].values.resize(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      points[idx].values[a] = axes[a].value(rest % axes[a].count());
      rest /= axes[a].count();
    }
  }

  // Bad paths surface before any worker starts.
  for (const ParamAxis& axis : axes) (void)with_entry(model, axis.path, axis.start);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      try {
        FuzzyModel instance = model;
        for (std::size_t a = 0; a < axes.size(); ++a)
          instance = with_entry(instance, axes[a].path, points[idx].values[a]);
        points[idx].feasible = synthesize(instance, mode, options).feasible();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return points;
}

}  // namespace pfsyn
