#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfsyn {

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vector = std::vector<double>;

/// Dense row-major real matrix. Entries are always finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  /// n x 1 column built from a vector.
  static Matrix column(std::span<const double> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return entries_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }

  std::span<const double> entries() const { return entries_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(entries_).subspan(r * cols_, cols_);
  }
  Vector col(std::size_t c) const;

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_finite() const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

Matrix mat_add(const Matrix& a, const Matrix& b);
Matrix mat_sub(const Matrix& a, const Matrix& b);
Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix mat_scale(const Matrix& a, double s);
Vector mat_vec(const Matrix& a, std::span<const double> v);

inline Matrix operator+(const Matrix& a, const Matrix& b) { return mat_add(a, b); }
inline Matrix operator-(const Matrix& a, const Matrix& b) { return mat_sub(a, b); }
inline Matrix operator*(const Matrix& a, const Matrix& b) { return mat_mul(a, b); }
inline Matrix operator*(double s, const Matrix& a) { return mat_scale(a, s); }

/// True iff every entry is >= -tol.
bool is_nonneg(const Matrix& a, double tol = 0.0);

/// Entrywise a <= b + tol.
bool entrywise_le(const Matrix& a, const Matrix& b, double tol = 0.0);

double max_abs_diff(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

struct PerronOptions {
  double tolerance = 1e-8;
  std::size_t max_iterations = 100000;
};

/// Outcome of the power iteration, with the final Collatz-Wielandt bracket.
struct PerronResult {
  double radius = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t iterations = 0;
};

/// Spectral radius of a square nonnegative matrix.
///
/// The matrix is split into strongly connected blocks (irreducible diagonal
/// blocks of its Frobenius normal form); the Perron root is the largest of
/// the block roots. Each block is iterated as B + I from the all-ones vector,
/// which makes it primitive, and stops once the Collatz-Wielandt bracket
///   min_i ((B+I)v)_i / v_i <= rho(B) + 1 <= max_i ((B+I)v)_i / v_i
/// is narrower than the tolerance. Throws LinalgError for non-square input,
/// negative entries, or when the bracket does not close within the cap.
PerronResult perron_root(const Matrix& a, const PerronOptions& options = {});

inline double perron_radius(const Matrix& a, const PerronOptions& options = {}) {
  return perron_root(a, options).radius;
}

std::string to_string(const Matrix& a, int precision = 6);

}  // namespace pfsyn
