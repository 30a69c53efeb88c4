#include "pfsyn/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pfsyn {

using nlohmann::json;

namespace {

constexpr double kMembershipTol = 1e-9;
constexpr std::size_t kValidationPoints = 101;

[[noreturn]] void schema_error(const std::string& field, const std::string& reason) {
  throw ModelError("model schema: field '" + field + "': " + reason);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(where + key, "missing");
  return *it;
}

std::size_t read_dim(const json& root, const std::string& key) {
  const json& v = require(root, key, "");
  if (!v.is_number_integer() || v.get<long long>() <= 0) schema_error(key, "must be a positive integer");
  return v.get<std::size_t>();
}

Matrix read_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) schema_error(field, "must be a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (const json& row : v) {
    if (!row.is_array() || row.empty()) schema_error(field, "every row must be a non-empty array");
    std::vector<double> values;
    for (const json& e : row) {
      if (!e.is_number()) schema_error(field, "entries must be numbers");
      values.push_back(e.get<double>());
    }
    if (!rows.empty() && values.size() != rows.front().size()) schema_error(field, "ragged rows");
    rows.push_back(std::move(values));
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const LinalgError& e) {
    schema_error(field, e.what());
  }
}

// Integral doubles are written as JSON integers so that "0" and "0.0" in a
// model file serialise identically.
json number_json(double v) {
  if (std::trunc(v) == v && std::abs(v) < 9.0e15) return static_cast<long long>(v);
  return v;
}

json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (double e : a.row(r)) row.push_back(number_json(e));
    rows.push_back(std::move(row));
  }
  return rows;
}

void normalise_numbers(json& j) {
  if (j.is_number_float()) {
    j = number_json(j.get<double>());
  } else if (j.is_structured()) {
    for (auto& child : j) normalise_numbers(child);
  }
}

void require_shape(const Matrix& a, std::size_t rows, std::size_t cols, const std::string& field) {
  if (a.rows() != rows || a.cols() != cols) {
    std::ostringstream os;
    os << "dimension mismatch in " << field << ": got " << a.rows() << "x" << a.cols() << ", expected "
       << rows << "x" << cols;
    throw ModelError(os.str());
  }
}

Expr parse_field(const std::string& src, const std::string& field) {
  try {
    return Expr::parse(src);
  } catch (const ExprSyntaxError& e) {
    schema_error(field, e.what());
  }
}

}  // namespace

IntervalMatrix::IntervalMatrix(Matrix lower, Matrix upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.rows() != upper_.rows() || lower_.cols() != upper_.cols())
    throw ModelError("interval matrix: bound shapes differ");
  if (!entrywise_le(lower_, upper_)) throw ModelError("interval matrix: lower bound exceeds upper bound");
}

IntervalMatrix IntervalMatrix::hull(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ModelError("interval matrix: bound shapes differ");
  Matrix lo = a;
  Matrix hi = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      lo(r, c) = std::min(a(r, c), b(r, c));
      hi(r, c) = std::max(a(r, c), b(r, c));
    }
  return {lo, hi};
}

Matrix IntervalMatrix::midpoint() const { return mat_scale(mat_add(lower_, upper_), 0.5); }

IntervalMatrix IntervalMatrix::shifted(const Matrix& offset) const {
  return {mat_add(lower_, offset), mat_add(upper_, offset)};
}

bool FuzzyModel::has_intervals() const {
  for (const Rule& rule : rules)
    if (rule.declared_bounds) return true;
  return false;
}

void validate_model(const FuzzyModel& model) {
  if (model.n == 0 || model.m == 0 || model.l == 0) throw ModelError("model dimensions must be positive");
  if (model.rules.empty()) throw ModelError("model needs at least one rule");
  if (!model.premise.valid()) throw ModelError("model premise is missing");
  if (model.premise.uses_premise()) throw ModelError("premise expression may not refer to z");
  if (model.premise.max_state_index() > model.n)
    throw ModelError("premise refers to x" + std::to_string(model.premise.max_state_index()) +
                     " but the state dimension is " + std::to_string(model.n));
  if (!(model.z_range.first <= model.z_range.second)) throw ModelError("z_range must satisfy lo <= hi");

  for (std::size_t i = 0; i < model.r(); ++i) {
    const Rule& rule = model.rules[i];
    const std::string tag = "rules[" + std::to_string(i) + "].";
    require_shape(rule.A.lower(), model.n, model.n, tag + "A");
    require_shape(rule.B, model.n, model.m, tag + "B");
    require_shape(rule.C, model.l, model.n, tag + "C");
    require_shape(rule.D, model.l, model.m, tag + "D");
    if (!rule.membership.valid()) throw ModelError(tag + "membership is missing");
    if (rule.membership.max_state_index() > 0)
      throw ModelError(tag + "membership must be an expression in z only");
  }

  const auto [lo, hi] = model.z_range;
  for (std::size_t k = 0; k < kValidationPoints; ++k) {
    const double z = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(kValidationPoints - 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < model.r(); ++i) {
      double h = 0.0;
      try {
        h = model.rules[i].membership.eval({}, z);
      } catch (const ExprEvalError& e) {
        throw ModelError("membership of rule " + std::to_string(i) + " fails at z=" + std::to_string(z) + ": " +
                         e.what());
      }
      if (h < -kMembershipTol)
        throw ModelError("membership of rule " + std::to_string(i) + " is negative at z=" + std::to_string(z));
      sum += h;
    }
    if (std::abs(sum - 1.0) > kMembershipTol)
      throw ModelError("memberships do not sum to 1 at z=" + std::to_string(z) + " (sum " + std::to_string(sum) + ")");
  }
}

FuzzyModel parse_model_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ModelError("model schema: top level must be an object");

  FuzzyModel model;
  model.n = read_dim(root, "n");
  model.m = read_dim(root, "m");
  model.l = read_dim(root, "l");

  const json& premise = require(root, "premise", "");
  if (!premise.is_string()) schema_error("premise", "must be a string");
  model.premise_src = premise.get<std::string>();
  model.premise = parse_field(model.premise_src, "premise");

  if (auto it = root.find("z_range"); it != root.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
      schema_error("z_range", "must be [lo, hi]");
    model.z_range = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  const json& rules = require(root, "rules", "");
  if (!rules.is_array() || rules.empty()) schema_error("rules", "must be a non-empty array");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const json& jr = rules[i];
    const std::string tag = "rules[" + std::to_string(i) + "].";
    if (!jr.is_object()) schema_error("rules[" + std::to_string(i) + "]", "must be an object");
    Rule rule;
    const json& membership = require(jr, "membership", tag);
    if (!membership.is_string()) schema_error(tag + "membership", "must be a string");
    rule.membership_src = membership.get<std::string>();
    rule.membership = parse_field(rule.membership_src, tag + "membership");

    const bool exact = jr.contains("A");
    const bool has_lower = jr.contains("A_lower");
    const bool has_upper = jr.contains("A_upper");
    if (exact && (has_lower || has_upper)) schema_error(tag + "A", "give either A or A_lower/A_upper, not both");
    if (exact) {
      rule.A = IntervalMatrix::exact(read_matrix(jr["A"], tag + "A"));
    } else if (has_lower && has_upper) {
      Matrix lower = read_matrix(jr["A_lower"], tag + "A_lower");
      Matrix upper = read_matrix(jr["A_upper"], tag + "A_upper");
      if (lower.rows() != upper.rows() || lower.cols() != upper.cols())
        throw ModelError("dimension mismatch between " + tag + "A_lower and " + tag + "A_upper");
      if (!entrywise_le(lower, upper)) {
        for (std::size_t r = 0; r < lower.rows(); ++r)
          for (std::size_t c = 0; c < lower.cols(); ++c)
            if (lower(r, c) > upper(r, c)) {
              std::ostringstream os;
              os << tag << "A_lower(" << r + 1 << "," << c + 1 << ")=" << lower(r, c) << " exceeds A_upper("
                 << r + 1 << "," << c + 1 << ")=" << upper(r, c) << "; using the entrywise hull";
              model.notes.push_back(os.str());
            }
      }
      rule.A = IntervalMatrix::hull(lower, upper);
      rule.declared_bounds = std::make_pair(std::move(lower), std::move(upper));
    } else {
      schema_error(tag + "A", "missing (or only one of A_lower/A_upper given)");
    }
    rule.B = read_matrix(require(jr, "B", tag), tag + "B");
    rule.C = read_matrix(require(jr, "C", tag), tag + "C");
    rule.D = read_matrix(require(jr, "D", tag), tag + "D");
    model.rules.push_back(std::move(rule));
  }

  validate_model(model);
  return model;
}

FuzzyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model_json(buffer.str());
}

std::string model_to_json(const FuzzyModel& model) {
  json root;
  root["n"] = model.n;
  root["m"] = model.m;
  root["l"] = model.l;
  root["premise"] = model.premise_src;
  root["z_range"] = {number_json(model.z_range.first), number_json(model.z_range.second)};
  json rules = json::array();
  for (const Rule& rule : model.rules) {
    json jr;
    jr["membership"] = rule.membership_src;
    if (rule.declared_bounds) {
      jr["A_lower"] = matrix_json(rule.declared_bounds->first);
      jr["A_upper"] = matrix_json(rule.declared_bounds->second);
    } else {
      jr["A"] = matrix_json(rule.A.lower());
    }
    jr["B"] = matrix_json(rule.B);
    jr["C"] = matrix_json(rule.C);
    jr["D"] = matrix_json(rule.D);
    rules.push_back(std::move(jr));
  }
  root["rules"] = std::move(rules);
  return root.dump(2) + "\n";
}

void save_model(const FuzzyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out << model_to_json(model);
  if (!out) throw ModelError("write failed for " + path.string());
}

std::string canonical_json(const std::string& text) {
  json j = json::parse(text);
  normalise_numbers(j);
  return j.dump(2) + "\n";
}

double premise_value(const FuzzyModel& model, std::span<const double> x) {
  if (x.size() != model.n) throw ModelError("state has dimension " + std::to_string(x.size()) + ", model expects " +
                                            std::to_string(model.n));
  return model.premise.eval(x, 0.0);
}

Vector memberships_at_premise(const FuzzyModel& model, double z) {
  Vector h(model.r());
  double sum = 0.0;
  for (std::size_t i = 0; i < model.r(); ++i) {
    double v = model.rules[i].membership.eval({}, z);
    if (v < -kMembershipTol)
      throw ModelError("membership of rule " + std::to_string(i) + " is negative (" + std::to_string(v) + ")");
    v = std::max(v, 0.0);
    h[i] = v;
    sum += v;
  }
  if (sum <= 1e-12) throw ModelError("membership grades sum to zero");
  for (double& v : h) v /= sum;
  return h;
}

Vector evaluate_memberships(const FuzzyModel& model, std::span<const double> x) {
  return memberships_at_premise(model, premise_value(model, x));
}

Matrix blended_matrices(const FuzzyModel& model, std::span<const double> h, MatrixFamily which) {
  if (h.size() != model.r()) throw ModelError("membership vector length does not match rule count");
  auto pick = [which](const Rule& rule) -> const Matrix& {
    switch (which) {
      case MatrixFamily::ALower: return rule.A.lower();
      case MatrixFamily::AUpper: return rule.A.upper();
      case MatrixFamily::B: return rule.B;
      case MatrixFamily::C: return rule.C;
      case MatrixFamily::D: return rule.D;
    }
    throw ModelError("unknown matrix family");
  };
  const Matrix& first = pick(model.rules.front());
  Matrix out(first.rows(), first.cols());
  for (std::size_t i = 0; i < model.r(); ++i) out = mat_add(out, mat_scale(pick(model.rules[i]), h[i]));
  return out;
}

PositivityReport check_model_positivity(const FuzzyModel& model, double tol) {
  PositivityReport report;
  const bool interval = model.has_intervals();
  for (std::size_t i = 0; i < model.r(); ++i) {
    const Rule& rule = model.rules[i];
    const std::array<std::pair<const Matrix*, const char*>, 4> families{{
        {&rule.A.lower(), interval ? "A_lower" : "A"}, {&rule.B, "B"}, {&rule.C, "C"}, {&rule.D, "D"}}};
    std::array<bool, 4> verdicts{};
    for (std::size_t f = 0; f < families.size(); ++f) {
      const Matrix& a = *families[f].first;
      verdicts[f] = is_nonneg(a, tol);
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
          if (a(r, c) < -tol) report.violations.push_back({i, families[f].second, r, c, a(r, c)});
    }
    report.per_rule.push_back(verdicts);
  }
  report.positive = report.violations.empty();
  return report;
}

FuzzyModel transposed_dynamics(const FuzzyModel& model) {
  FuzzyModel t = model;
  for (Rule& rule : t.rules) {
    rule.A = rule.A.transpose();
    if (rule.declared_bounds)
      rule.declared_bounds = std::make_pair(rule.declared_bounds->first.transpose(),
                                            rule.declared_bounds->second.transpose());
  }
  return t;
}

}  // namespace pfsyn
