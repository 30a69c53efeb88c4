#include "pfsyn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pfsyn {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << op << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw LinalgError(os.str());
  }
}

// Groups indices of a square nonnegative matrix into strongly connected
// components of its support graph.
std::vector<std::vector<std::size_t>> strong_components(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<char> reach(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    reach[i * n + i] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (a(i, j) > 0.0) reach[i * n + j] = 1;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k * n + j]) reach[i * n + j] = 1;

  std::vector<std::vector<std::size_t>> blocks;
  std::vector<char> assigned(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    std::vector<std::size_t> block;
    for (std::size_t j = i; j < n; ++j) {
      if (!assigned[j] && reach[i * n + j] && reach[j * n + i]) {
        block.push_back(j);
        assigned[j] = 1;
      }
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

PerronResult irreducible_root(const Matrix& b, const PerronOptions& options) {
  const std::size_t n = b.rows();
  if (n == 1) return {b(0, 0), b(0, 0), b(0, 0), 0};

  // Iterate on B + I.
  Vector v(n, 1.0);
  Vector w(n);
  PerronResult result;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = v[i];
      for (std::size_t j = 0; j < n; ++j) s += b(i, j) * v[j];
      w[i] = s;
      const double ratio = s / v[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    result.lower = lo - 1.0;
    result.upper = hi - 1.0;
    result.iterations = it;
    if (hi - lo <= options.tolerance) {
      result.radius = 0.5 * (result.lower + result.upper);
      return result;
    }
    const double scale = *std::max_element(w.begin(), w.end());
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / scale;
  }
  std::ostringstream os;
  os << "perron_radius: bracket [" << result.lower << ", " << result.upper
     << "] did not close after " << options.max_iterations << " iterations";
  throw LinalgError(os.str());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {
  check_finite();
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) throw LinalgError("Matrix: entry count does not match shape");
  check_finite();
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw LinalgError("Matrix: ragged initializer");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  check_finite();
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw LinalgError("Matrix: empty row list");
  const std::size_t cols = rows.front().size();
  std::vector<double> entries;
  entries.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw LinalgError("Matrix: ragged row list");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(entries));
}

Matrix Matrix::column(std::span<const double> v) {
  return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Vector Matrix::col(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::check_finite() const {
  for (double e : entries_)
    if (!std::isfinite(e)) throw LinalgError("Matrix: non-finite entry");
}

Matrix mat_add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "mat_add");
  Matrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) += b(r, c);
  return out;
}

Matrix mat_sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "mat_sub");
  Matrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) -= b(r, c);
  return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "mat_mul: inner dimensions differ (" << a.cols() << " vs " << b.rows() << ")";
    throw LinalgError(os.str());
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix mat_scale(const Matrix& a, double s) {
  Matrix out = a;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) *= s;
  return out;
}

Vector mat_vec(const Matrix& a, std::span<const double> v) {
  if (a.cols() != v.size()) throw LinalgError("mat_vec: dimension mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

bool is_nonneg(const Matrix& a, double tol) {
  return std::all_of(a.entries().begin(), a.entries().end(), [tol](double e) { return e >= -tol; });
}

bool entrywise_le(const Matrix& a, const Matrix& b, double tol) {
  require_same_shape(a, b, "entrywise_le");
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    if (a.entries()[i] > b.entries()[i] + tol) return false;
  return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double d = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i)
    d = std::max(d, std::abs(a.entries()[i] - b.entries()[i]));
  return d;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw LinalgError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

PerronResult perron_root(const Matrix& a, const PerronOptions& options) {
  if (!a.square() || a.empty()) throw LinalgError("perron_radius: matrix must be square and non-empty");
  if (!is_nonneg(a, 0.0)) throw LinalgError("perron_radius: matrix has a negative entry");

  PerronResult best{-1.0, -1.0, -1.0, 0};
  for (const auto& block : strong_components(a)) {
    Matrix sub(block.size(), block.size());
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = 0; j < block.size(); ++j) sub(i, j) = a(block[i], block[j]);
    const PerronResult r = irreducible_root(sub, options);
    best.lower = std::max(best.lower, r.lower);
    best.upper = std::max(best.upper, r.upper);
    best.iterations += r.iterations;
    best.radius = std::max(best.radius, r.radius);
  }
  return best;
}

std::string to_string(const Matrix& a, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << "[";
  for (std::size_t r = 0; r < a.rows(); ++r) {
    os << (r ? "; " : "");
    for (std::size_t c = 0; c < a.cols(); ++c) os << (c ? ", " : "") << a(r, c);
  }
  os << "]";
  return os.str();
}

}  // namespace pfsyn
