#pragma once
// Small dense matrices of expressions, plus the little linear algebra the
// verification routines need: cofactor determinants, adjugate inverses, and
// a numeric Gaussian elimination for per-sample solves.

#include <functional>
#include <optional>
#include <vector>

#include "expr.hpp"

namespace lamsym {

struct SingularMatrixError : Error {
  using Error::Error;
};

class MatrixExpr {
  int r_ = 0, c_ = 0;
  std::vector<Expr> a_;

 public:
  MatrixExpr() = default;
  MatrixExpr(int r, int c) : r_(r), c_(c), a_(static_cast<std::size_t>(r * c), Expr::num(0.0)) {
    if (r < 0 || c < 0) throw DimensionError("negative matrix dimension");
  }

  static MatrixExpr zero(int r, int c) { return MatrixExpr(r, c); }
  static MatrixExpr identity(int n) {
    MatrixExpr m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = Expr::num(1.0);
    return m;
  }
  static MatrixExpr diagonal(const std::vector<Expr>& d) {
    MatrixExpr m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i)
      m.at(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
  }
  static MatrixExpr scalar(const Expr& lambda, int n) {
    MatrixExpr m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = lambda;
    return m;
  }
  static MatrixExpr from_rows(const std::vector<std::vector<Expr>>& rows) {
    if (rows.empty()) return MatrixExpr(0, 0);
    MatrixExpr m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size())
        throw DimensionError("ragged matrix rows");
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        m.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  bool is_square() const { return r_ == c_; }

  Expr& at(int i, int j) { return a_[static_cast<std::size_t>(i * c_ + j)]; }
  const Expr& at(int i, int j) const { return a_[static_cast<std::size_t>(i * c_ + j)]; }

  MatrixExpr map(const std::function<Expr(const Expr&)>& f) const {
    MatrixExpr m(r_, c_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) m.at(i, j) = f(at(i, j));
    return m;
  }

  MatrixExpr simplified() const {
    return map([](const Expr& e) { return simplify(e); });
  }

  MatrixExpr transpose() const {
    MatrixExpr m(c_, r_);
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) m.at(j, i) = at(i, j);
    return m;
  }

  friend MatrixExpr operator+(const MatrixExpr& a, const MatrixExpr& b) {
    if (a.r_ != b.r_ || a.c_ != b.c_) throw DimensionError("matrix shape mismatch in +");
    MatrixExpr m(a.r_, a.c_);
    for (int i = 0; i < a.r_; ++i)
      for (int j = 0; j < a.c_; ++j)
        m.at(i, j) = simplify(Expr::add(a.at(i, j), b.at(i, j)));
    return m;
  }
  friend MatrixExpr operator-(const MatrixExpr& a, const MatrixExpr& b) {
    if (a.r_ != b.r_ || a.c_ != b.c_) throw DimensionError("matrix shape mismatch in -");
    MatrixExpr m(a.r_, a.c_);
    for (int i = 0; i < a.r_; ++i)
      for (int j = 0; j < a.c_; ++j)
        m.at(i, j) = simplify(Expr::sub(a.at(i, j), b.at(i, j)));
    return m;
  }
  friend MatrixExpr operator*(const MatrixExpr& a, const MatrixExpr& b) {
    if (a.c_ != b.r_) throw DimensionError("matrix shape mismatch in *");
    MatrixExpr m(a.r_, b.c_);
    for (int i = 0; i < a.r_; ++i)
      for (int j = 0; j < b.c_; ++j) {
        Expr acc = Expr::num(0.0);
        for (int k = 0; k < a.c_; ++k)
          acc = Expr::add(std::move(acc), Expr::mul(a.at(i, k), b.at(k, j)));
        m.at(i, j) = simplify(acc);
      }
    return m;
  }

  std::vector<Expr> apply(const std::vector<Expr>& v) const {
    if (static_cast<int>(v.size()) != c_)
      throw DimensionError("matrix-vector shape mismatch");
    std::vector<Expr> out;
    out.reserve(static_cast<std::size_t>(r_));
    for (int i = 0; i < r_; ++i) {
      Expr acc = Expr::num(0.0);
      for (int j = 0; j < c_; ++j)
        acc = Expr::add(std::move(acc), Expr::mul(at(i, j), v[static_cast<std::size_t>(j)]));
      out.push_back(simplify(acc));
    }
    return out;
  }

  Expr trace() const {
    if (!is_square()) throw DimensionError("trace of a non-square matrix");
    Expr acc = Expr::num(0.0);
    for (int i = 0; i < r_; ++i) acc = Expr::add(std::move(acc), at(i, i));
    return simplify(acc);
  }

  MatrixExpr minor_matrix(int drop_row, int drop_col) const {
    MatrixExpr m(r_ - 1, c_ - 1);
    int mi = 0;
    for (int i = 0; i < r_; ++i) {
      if (i == drop_row) continue;
      int mj = 0;
      for (int j = 0; j < c_; ++j) {
        if (j == drop_col) continue;
        m.at(mi, mj) = at(i, j);
        ++mj;
      }
      ++mi;
    }
    return m;
  }

  Expr det() const {
    if (!is_square()) throw DimensionError("determinant of a non-square matrix");
    if (r_ == 0) return Expr::num(1.0);
    if (r_ == 1) return at(0, 0);
    Expr acc = Expr::num(0.0);
    for (int j = 0; j < c_; ++j) {
      Expr term = Expr::mul(at(0, j), minor_matrix(0, j).det());
      if (j % 2 == 1) term = Expr::neg(std::move(term));
      acc = Expr::add(std::move(acc), std::move(term));
    }
    return simplify(acc);
  }

  // Adjugate inverse: entries are cofactor/det expressions.  The caller is
  // responsible for checking the determinant is not identically zero.
  MatrixExpr inverse() const {
    if (!is_square()) throw DimensionError("inverse of a non-square matrix");
    Expr d = det();
    if (d.is_num(0.0)) throw SingularMatrixError("matrix determinant is identically zero");
    MatrixExpr inv(r_, c_);
    if (r_ == 1) {
      inv.at(0, 0) = simplify(Expr::div(Expr::num(1.0), at(0, 0)));
      return inv;
    }
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < c_; ++j) {
        Expr cof = minor_matrix(j, i).det();  // transposed cofactor
        if ((i + j) % 2 == 1) cof = Expr::neg(std::move(cof));
        inv.at(i, j) = simplify(Expr::div(std::move(cof), d));
      }
    return inv;
  }
};

// Solve A x = b numerically by Gaussian elimination with partial pivoting.
// Returns nullopt when a pivot falls below the threshold.
inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> A,
                                                       std::vector<double> b,
                                                       double pivot_tol = 1e-12) {
  const std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (std::fabs(A[piv][col]) < pivot_tol) return std::nullopt;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double m = A[r][col] / A[col][col];
      if (m == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= m * A[col][c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= A[i][j] * x[j];
    x[i] = acc / A[i][i];
  }
  return x;
}

// Deformation matrices come in a few declared shapes; keeping the tag around
// lets reports describe what was supplied.
struct LambdaMatrix {
  enum class Shape { Zero, Scalar, Diagonal, Full };
  Shape shape = Shape::Zero;
  MatrixExpr m;

  static LambdaMatrix zero(int n) { return {Shape::Zero, MatrixExpr::zero(n, n)}; }
  static LambdaMatrix scalar(const Expr& lambda, int n) {
    return {Shape::Scalar, MatrixExpr::scalar(lambda, n)};
  }
  static LambdaMatrix diagonal(const std::vector<Expr>& d) {
    return {Shape::Diagonal, MatrixExpr::diagonal(d)};
  }
  static LambdaMatrix full(MatrixExpr m) {
    if (!m.is_square()) throw DimensionError("deformation matrix must be square");
    return {Shape::Full, std::move(m)};
  }

  int n() const { return m.rows(); }
  bool is_zero() const {
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        if (!simplify(m.at(i, j)).is_num(0.0)) return false;
    return true;
  }
};

}  // namespace lamsym
