#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfsyn/model.hpp"
#include "pfsyn/synthesis.hpp"

namespace pfsyn {

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(what), step_(step) {}
  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Which matrix inside [A_lower, A_upper] drives the plant. Exact models
/// ignore it.
enum class Realization { Upper, Lower, Nominal };

Realization parse_realization(const std::string& name);
const char* to_string(Realization realization);

struct StepRecord {
  std::size_t k = 0;
  Vector x;
  Vector u;
  Vector y;
  Vector h;
};

class Trajectory {
 public:
  explicit Trajectory(std::vector<StepRecord> steps);

  const std::vector<StepRecord>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  const StepRecord& operator[](std::size_t k) const { return steps_[k]; }
  const StepRecord& back() const { return steps_.back(); }

  std::vector<std::string> warnings;

 private:
  std::vector<StepRecord> steps_;
};

struct SimulationOptions {
  Realization realization = Realization::Upper;
  // Reject negative initial states for positive models; otherwise only warn.
  bool strict_initial_state = true;
};

/// Runs x(k+1) = sum_i h_i (A_i x + B_i u) with u = sum_j h_j K_j x (or 0)
/// for `steps` steps; the result holds records k = 0..steps.
Trajectory simulate(const FuzzyModel& model, const std::optional<Gains>& gains, const Vector& x0, std::size_t steps,
                    const SimulationOptions& options = {});

/// Header k,x1..xn,u1..um,y1..yl,h1..hr; 9 significant digits.
std::string trajectory_csv(const Trajectory& trajectory);
void export_csv(const Trajectory& trajectory, const std::filesystem::path& path);

}  // namespace pfsyn
