#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "quadctrl/errors.hpp"
#include "quadctrl/rational.hpp"

namespace quadctrl {

using RatVector = std::vector<Rational>;

class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, Rational(0)) {}

  static RatMatrix identity(int n) {
    RatMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
  /// Matrix whose columns are the given vectors (all of length n).
  static RatMatrix from_columns(const std::vector<RatVector>& cols, int n) {
    RatMatrix m(n, static_cast<int>(cols.size()));
    for (int j = 0; j < m.cols_; ++j) {
      if (static_cast<int>(cols[j].size()) != n) throw DimensionMismatch("column of wrong length");
      for (int i = 0; i < n; ++i) m(i, j) = cols[j][i];
    }
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rational& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const Rational& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

  RatVector column(int j) const {
    RatVector v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }
  RatVector row(int i) const {
    RatVector v(cols_);
    for (int j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
    return v;
  }

  RatMatrix transpose() const {
    RatMatrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool is_zero() const {
    for (const auto& x : a_)
      if (x != 0) return false;
    return true;
  }

  friend RatMatrix operator*(const RatMatrix& A, const RatMatrix& B) {
    if (A.cols_ != B.rows_) throw DimensionMismatch("matrix product shapes");
    RatMatrix C(A.rows_, B.cols_);
    for (int i = 0; i < A.rows_; ++i)
      for (int k = 0; k < A.cols_; ++k) {
        const Rational& a = A(i, k);
        if (a == 0) continue;
        for (int j = 0; j < B.cols_; ++j) C(i, j) += a * B(k, j);
      }
    return C;
  }
  friend RatVector operator*(const RatMatrix& A, const RatVector& v) {
    if (A.cols_ != static_cast<int>(v.size())) throw DimensionMismatch("matrix-vector shapes");
    RatVector r(A.rows_, Rational(0));
    for (int i = 0; i < A.rows_; ++i)
      for (int j = 0; j < A.cols_; ++j) r[i] += A(i, j) * v[j];
    return r;
  }
  friend RatMatrix operator+(RatMatrix A, const RatMatrix& B) {
    A.check_shape(B);
    for (std::size_t i = 0; i < A.a_.size(); ++i) A.a_[i] += B.a_[i];
    return A;
  }
  friend RatMatrix operator-(RatMatrix A, const RatMatrix& B) {
    A.check_shape(B);
    for (std::size_t i = 0; i < A.a_.size(); ++i) A.a_[i] -= B.a_[i];
    return A;
  }
  friend RatMatrix operator*(const Rational& s, RatMatrix A) {
    for (auto& x : A.a_) x *= s;
    return A;
  }
  friend bool operator==(const RatMatrix& A, const RatMatrix& B) {
    return A.rows_ == B.rows_ && A.cols_ == B.cols_ && A.a_ == B.a_;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).get_d();
    return m;
  }

 private:
  void check_shape(const RatMatrix& B) const {
    if (rows_ != B.rows_ || cols_ != B.cols_) throw DimensionMismatch("matrix shapes differ");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Rational> a_;
};

inline RatVector zeros(int n) { return RatVector(n, Rational(0)); }
inline RatVector unit_vector(int n, int i) {
  RatVector e = zeros(n);
  e.at(i) = 1;
  return e;
}

inline RatVector operator+(RatVector a, const RatVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector lengths differ");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline RatVector operator-(RatVector a, const RatVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector lengths differ");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline RatVector operator-(RatVector a) {
  for (auto& x : a) x = -x;
  return a;
}
inline RatVector operator*(const Rational& s, RatVector a) {
  for (auto& x : a) x *= s;
  return a;
}
inline Rational dot(const RatVector& a, const RatVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector lengths differ");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline bool is_zero(const RatVector& v) {
  for (const auto& x : v)
    if (x != 0) return false;
  return true;
}
inline Eigen::VectorXd to_eigen(const RatVector& v) {
  Eigen::VectorXd r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[i].get_d();
  return r;
}
inline std::vector<std::string> to_strings(const RatVector& v) {
  std::vector<std::string> s;
  for (const auto& x : v) s.push_back(to_string(x));
  return s;
}
inline std::string format_vector(const RatVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s + ")";
}

/// Reduced row echelon form in place; returns the pivot columns.
inline std::vector<int> rref(RatMatrix& A) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < A.cols() && r < A.rows(); ++c) {
    int p = -1;
    for (int i = r; i < A.rows(); ++i)
      if (A(i, c) != 0) {
        p = i;
        break;
      }
    if (p < 0) continue;
    if (p != r)
      for (int j = 0; j < A.cols(); ++j) std::swap(A(p, j), A(r, j));
    Rational inv = 1 / A(r, c);
    for (int j = c; j < A.cols(); ++j) A(r, j) *= inv;
    for (int i = 0; i < A.rows(); ++i) {
      if (i == r || A(i, c) == 0) continue;
      Rational f = A(i, c);
      for (int j = c; j < A.cols(); ++j) A(i, j) -= f * A(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline int rank(RatMatrix A) { return static_cast<int>(rref(A).size()); }

/// Coefficients c with sum c_j basis[j] = v, or nothing if v is outside the
/// span. The basis vectors must be independent.
inline std::optional<RatVector> span_coordinates(const std::vector<RatVector>& basis, const RatVector& v) {
  int n = static_cast<int>(v.size());
  int m = static_cast<int>(basis.size());
  RatMatrix aug(n, m + 1);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) aug(i, j) = basis[j].at(i);
  for (int i = 0; i < n; ++i) aug(i, m) = v[i];
  auto piv = rref(aug);
  if (!piv.empty() && piv.back() == m) return std::nullopt;
  RatVector c = zeros(m);
  for (std::size_t r = 0; r < piv.size(); ++r) c[piv[r]] = aug(static_cast<int>(r), m);
  return c;
}

inline bool in_span(const std::vector<RatVector>& basis, const RatVector& v) {
  if (is_zero(v)) return true;
  if (basis.empty()) return false;
  return span_coordinates(basis, v).has_value();
}

/// Greedy selection, in order, of vectors independent of the ones before.
/// Returns the indices kept.
inline std::vector<int> independent_subset(const std::vector<RatVector>& vs) {
  std::vector<int> keep;
  std::vector<RatVector> basis;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (in_span(basis, vs[i])) continue;
    basis.push_back(vs[i]);
    keep.push_back(static_cast<int>(i));
  }
  return keep;
}

/// Basis of the span of vs, as the first independent vectors in order.
inline std::vector<RatVector> span_basis(const std::vector<RatVector>& vs) {
  std::vector<RatVector> out;
  for (int i : independent_subset(vs)) out.push_back(vs[i]);
  return out;
}

inline RatMatrix inverse(const RatMatrix& A) {
  int n = A.rows();
  if (A.cols() != n) throw DimensionMismatch("inverse of a non-square matrix");
  RatMatrix aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = A(i, j);
    aug(i, n + i) = 1;
  }
  auto piv = rref(aug);
  if (static_cast<int>(piv.size()) < n || piv[n - 1] != n - 1) throw PreconditionError("matrix is singular");
  RatMatrix inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

/// Orthogonal projector onto span(basis); basis vectors must be independent.
inline RatMatrix orthogonal_projector(const std::vector<RatVector>& basis, int n) {
  if (basis.empty()) return RatMatrix(n, n);
  RatMatrix B = RatMatrix::from_columns(basis, n);
  RatMatrix Bt = B.transpose();
  return B * inverse(Bt * B) * Bt;
}

/// Exact Gram-Schmidt orthogonalization without normalization.
inline std::vector<RatVector> gram_schmidt(const std::vector<RatVector>& vs) {
  std::vector<RatVector> out;
  for (const auto& v : vs) {
    RatVector w = v;
    for (const auto& q : out) w = w - (dot(w, q) / dot(q, q)) * q;
    if (!is_zero(w)) out.push_back(w);
  }
  return out;
}

/// Orthogonal basis of the complement of span(basis): Gram-Schmidt of the
/// standard basis against the span.
inline std::vector<RatVector> orthogonal_complement(const std::vector<RatVector>& basis, int n) {
  std::vector<RatVector> q = gram_schmidt(basis);
  std::size_t start = q.size();
  for (int i = 0; i < n && static_cast<int>(q.size()) < n; ++i) {
    RatVector w = unit_vector(n, i);
    for (const auto& v : q) w = w - (dot(w, v) / dot(v, v)) * v;
    if (!is_zero(w)) q.push_back(w);
  }
  return std::vector<RatVector>(q.begin() + static_cast<std::ptrdiff_t>(start), q.end());
}

inline RatMatrix matrix_power(const RatMatrix& A, int k) {
  RatMatrix r = RatMatrix::identity(A.rows());
  for (int i = 0; i < k; ++i) r = r * A;
  return r;
}

inline std::vector<std::vector<std::string>> to_strings(const RatMatrix& A) {
  std::vector<std::vector<std::string>> s;
  for (int i = 0; i < A.rows(); ++i) s.push_back(to_strings(A.row(i)));
  return s;
}

}  // namespace quadctrl
