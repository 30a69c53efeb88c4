#pragma once

// Exact LP oracle for tests: enumerates every basic solution of a small
// integer LP with fraction-free (Bareiss) elimination in 128-bit integers.
// Independent of pfsyn::lp.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace oracle {

using i128 = __int128;

enum class Rel { Le, Ge, Eq };
enum class Status { Optimal, Infeasible, Unbounded };

struct Row {
  std::vector<std::int64_t> a;
  Rel rel;
  std::int64_t b;
};

/// maximize c'x subject to rows. When nonneg_vars is set the caller has
/// included x >= 0 rows, which makes the recession cone pointed and enables
/// the unboundedness test.
struct IntLp {
  std::size_t n = 0;
  std::vector<std::int64_t> c;
  std::vector<Row> rows;
  bool nonneg_vars = false;
};

struct Fraction {
  i128 num = 0;
  i128 den = 1;  // > 0
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline bool less(const Fraction& x, const Fraction& y) { return x.num * y.den < y.num * x.den; }

struct Result {
  Status status = Status::Infeasible;
  Fraction objective;
  std::vector<Fraction> point;
};

namespace detail {

inline i128 gcd(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// Solves the square system m x = rhs. Returns det and det*x, or nullopt when
// singular.
inline std::optional<std::pair<i128, std::vector<i128>>> solve_square(std::vector<std::vector<i128>> m) {
  const std::size_t n = m.size();
  i128 prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    while (piv < n && m[piv][k] == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != k) {
      std::swap(m[piv], m[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j <= n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  const i128 det = m[n - 1][n - 1];
  // Back substitution: y_i = det * x_i, exact divisions.
  std::vector<i128> y(n);
  for (std::size_t i = n; i-- > 0;) {
    i128 s = m[i][n] * det;
    for (std::size_t j = i + 1; j < n; ++j) s -= m[i][j] * y[j];
    if (s % m[i][i] != 0) throw std::logic_error("oracle: inexact back substitution");
    y[i] = s / m[i][i];
  }
  (void)sign;
  return std::make_pair(det, y);
}

inline bool satisfies(const Row& row, i128 det, const std::vector<i128>& y) {
  i128 lhs = 0;
  for (std::size_t j = 0; j < y.size(); ++j) lhs += static_cast<i128>(row.a[j]) * y[j];
  i128 rhs = static_cast<i128>(row.b) * det;
  if (det < 0) {
    lhs = -lhs;
    rhs = -rhs;
  }
  switch (row.rel) {
    case Rel::Le: return lhs <= rhs;
    case Rel::Ge: return lhs >= rhs;
    case Rel::Eq: return lhs == rhs;
  }
  return false;
}

// Best vertex of {rows}; nullopt when there is none.
inline std::optional<Result> best_vertex(std::size_t n, const std::vector<std::int64_t>& c,
                                         const std::vector<Row>& rows) {
  std::optional<Result> best;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (rows.size() < n) return best;
  for (;;) {
    std::vector<std::vector<i128>> m(n, std::vector<i128>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m[i][j] = rows[pick[i]].a[j];
      m[i][n] = rows[pick[i]].b;
    }
    if (auto sol = solve_square(std::move(m))) {
      const auto& [det, y] = *sol;
      bool ok = true;
      for (const Row& row : rows)
        if (!satisfies(row, det, y)) {
          ok = false;
          break;
        }
      if (ok) {
        i128 num = 0;
        for (std::size_t j = 0; j < n; ++j) num += static_cast<i128>(c[j]) * y[j];
        Fraction f{det < 0 ? -num : num, det < 0 ? -det : det};
        if (!best || less(best->objective, f)) {
          Result r;
          r.status = Status::Optimal;
          r.objective = f;
          for (std::size_t j = 0; j < n; ++j) {
            i128 pn = det < 0 ? -y[j] : y[j];
            i128 pd = det < 0 ? -det : det;
            const i128 g = gcd(pn, pd);
            r.point.push_back({g ? pn / g : pn, g ? pd / g : pd});
          }
          best = std::move(r);
        }
      }
    }
    // Next combination.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == rows.size() - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace detail

inline Result solve(const IntLp& lp) {
  auto best = detail::best_vertex(lp.n, lp.c, lp.rows);
  if (!best) return Result{Status::Infeasible, {}, {}};

  if (lp.nonneg_vars) {
    // Recession directions d >= 0, sum d = 1; any with c'd > 0 means unbounded.
    std::vector<Row> cone;
    for (const Row& row : lp.rows) cone.push_back({row.a, row.rel, 0});
    cone.push_back({std::vector<std::int64_t>(lp.n, 1), Rel::Eq, 1});
    if (auto ray = detail::best_vertex(lp.n, lp.c, cone); ray && ray->objective.num > 0)
      return Result{Status::Unbounded, {}, {}};
  }
  return *best;
}

}  // namespace oracle
