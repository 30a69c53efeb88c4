#include "pfsyn/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace pfsyn {

Realization parse_realization(const std::string& name) {
  if (name == "upper") return Realization::Upper;
  if (name == "lower") return Realization::Lower;
  if (name == "nominal") return Realization::Nominal;
  throw SimulationError("unknown realization '" + name + "' (expected upper, lower or nominal)");
}

const char* to_string(Realization realization) {
  switch (realization) {
    case Realization::Upper: return "upper";
    case Realization::Lower: return "lower";
    case Realization::Nominal: return "nominal";
  }
  return "unknown";
}

Trajectory::Trajectory(std::vector<StepRecord> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw SimulationError("a trajectory needs at least one record");
}

namespace {

bool all_finite(const Vector& v) {
  for (double e : v)
    if (!std::isfinite(e)) return false;
  return true;
}

Vector combine(const Matrix& a, const Vector& x, const Matrix& b, const Vector& u) {
  Vector out = mat_vec(a, x);
  const Vector bu = mat_vec(b, u);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bu[i];
  return out;
}

}  // namespace

Trajectory simulate(const FuzzyModel& model, const std::optional<Gains>& gains, const Vector& x0, std::size_t steps,
                    const SimulationOptions& options) {
  if (x0.size() != model.n)
    throw SimulationError("x0 has dimension " + std::to_string(x0.size()) + ", model expects " +
                          std::to_string(model.n));
  if (gains) check_gain_shapes(model, *gains);

  std::vector<std::string> warnings;
  bool negative_start = false;
  for (double v : x0) negative_start = negative_start || v < 0.0;
  if (negative_start) {
    if (options.strict_initial_state && check_model_positivity(model).positive)
      throw SimulationError("x0 has negative entries but the model is positive");
    warnings.push_back("x0 has negative entries");
  }

  std::vector<Matrix> plant;
  for (const Rule& rule : model.rules) {
    switch (options.realization) {
      case Realization::Upper: plant.push_back(rule.A.upper()); break;
      case Realization::Lower: plant.push_back(rule.A.lower()); break;
      case Realization::Nominal: plant.push_back(rule.A.midpoint()); break;
    }
  }

  std::vector<StepRecord> records;
  records.reserve(steps + 1);
  Vector x = x0;
  for (std::size_t k = 0;; ++k) {
    StepRecord rec;
    rec.k = k;
    rec.x = x;
    rec.h = evaluate_memberships(model, x);
    rec.u.assign(model.m, 0.0);
    if (gains) {
      for (std::size_t j = 0; j < model.r(); ++j) {
        const Vector kx = mat_vec((*gains)[j], x);
        for (std::size_t c = 0; c < model.m; ++c) rec.u[c] += rec.h[j] * kx[c];
      }
    }
    rec.y.assign(model.l, 0.0);
    Vector next(model.n, 0.0);
    for (std::size_t i = 0; i < model.r(); ++i) {
      const Rule& rule = model.rules[i];
      const Vector yi = combine(rule.C, x, rule.D, rec.u);
      const Vector xi = combine(plant[i], x, rule.B, rec.u);
      for (std::size_t c = 0; c < model.l; ++c) rec.y[c] += rec.h[i] * yi[c];
      for (std::size_t c = 0; c < model.n; ++c) next[c] += rec.h[i] * xi[c];
    }
    if (!all_finite(rec.u) || !all_finite(rec.y))
      throw SimulationError("non-finite input or output at step " + std::to_string(k), k);
    records.push_back(std::move(rec));
    if (k == steps) break;
    if (!all_finite(next)) throw SimulationError("state overflow at step " + std::to_string(k + 1), k + 1);
    x = std::move(next);
  }

  Trajectory trajectory(std::move(records));
  trajectory.warnings = std::move(warnings);
  return trajectory;
}

std::string trajectory_csv(const Trajectory& trajectory) {
  const StepRecord& first = trajectory[0];
  std::string out = "k";
  auto header = [&out](const char* prefix, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i) out += "," + std::string(prefix) + std::to_string(i);
  };
  header("x", first.x.size());
  header("u", first.u.size());
  header("y", first.y.size());
  header("h", first.h.size());
  out += '\n';

  char buf[32];
  for (const StepRecord& rec : trajectory.steps()) {
    out += std::to_string(rec.k);
    for (const Vector* v : {&rec.x, &rec.u, &rec.y, &rec.h})
      for (double e : *v) {
        std::snprintf(buf, sizeof buf, "%.9g", e);
        out += ',';
        out += buf;
      }
    out += '\n';
  }
  return out;
}

void export_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  const std::string text = trajectory_csv(trajectory);
  std::ofstream out(path);
  if (!out) throw SimulationError("cannot write " + path.string());
  out << text;
  if (!out) throw SimulationError("write failed for " + path.string());
}

}  // namespace pfsyn
