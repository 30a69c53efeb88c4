#pragma once

#include <cmath>
#include <random>
#include <string>

#include "pfsyn/linalg.hpp"
#include "pfsyn/model.hpp"
#include "pfsyn/synthesis.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) { return std::string(PFSYN_DATA_DIR) + "/" + rel; }

inline pfsyn::FuzzyModel example1() { return pfsyn::load_model(data_path("models/example1.json")); }
inline pfsyn::FuzzyModel pest() { return pfsyn::load_model(data_path("models/pest_population.json")); }

// Reference witness for the first example.
inline const pfsyn::Vector kReferenceP{152.6164, 126.9691};
inline const pfsyn::Vector kReferenceXi{-110.8075, -152.0953};

inline pfsyn::XiTable reference_xi() {
  return {{{kReferenceXi[0]}, {kReferenceXi[1]}}, {{kReferenceXi[0]}, {kReferenceXi[1]}}};
}

inline pfsyn::Gains reference_gains_example1() {
  const pfsyn::Matrix k{{-0.7261, -1.1979}};
  return {k, k};
}

inline pfsyn::Gains reference_gains_pest() {
  const pfsyn::Matrix k{{0.5399, 0.5342, 0.6753}};
  return {k, k};
}

// Larger root of the characteristic polynomial of a 2x2 matrix with real
// eigenvalues (true for nonnegative 2x2: discriminant (a-d)^2 + 4bc >= 0).
inline double quadratic_spectral_radius(const pfsyn::Matrix& a) {
  const double tr = a(0, 0) + a(1, 1);
  const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const double disc = tr * tr - 4.0 * det;
  const double s = std::sqrt(std::max(disc, 0.0));
  return std::max(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0));
}

inline pfsyn::Matrix random_nonneg(std::mt19937& rng, std::size_t n, double sparsity = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  pfsyn::Matrix a(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = u(rng) < sparsity ? 0.0 : u(rng);
  return a;
}

// Single-rule autonomous model with the given dynamics.
inline pfsyn::FuzzyModel autonomous(const std::vector<pfsyn::Matrix>& as) {
  pfsyn::FuzzyModel model;
  model.n = as.front().rows();
  model.m = 1;
  model.l = 1;
  model.premise_src = "x1";
  model.premise = pfsyn::Expr::parse("x1");
  for (std::size_t i = 0; i < as.size(); ++i) {
    pfsyn::Rule rule;
    rule.A = pfsyn::IntervalMatrix::exact(as[i]);
    rule.B = pfsyn::Matrix(model.n, 1);
    rule.C = pfsyn::Matrix(1, model.n);
    rule.D = pfsyn::Matrix(1, 1);
    rule.membership_src = as.size() == 1 ? "1" : (i == 0 ? "(1+z)/2" : "(1-z)/2");
    rule.membership = pfsyn::Expr::parse(rule.membership_src);
    model.rules.push_back(std::move(rule));
  }
  if (as.size() > 2) throw std::invalid_argument("autonomous(): at most two rules");
  pfsyn::validate_model(model);
  return model;
}

}  // namespace fixtures
