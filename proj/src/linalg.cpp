#include "spin7/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

extern "C" {
void dgemm_(const char*, const char*, const int*, const int*, const int*,
            const double*, const double*, const int*, const double*, const int*,
            const double*, double*, const int*);
void dgesdd_(const char*, const int*, const int*, double*, const int*, double*,
             double*, const int*, double*, const int*, double*, const int*,
             int*, int*);
void dsyev_(const char*, const char*, const int*, double*, const int*, double*,
            double*, const int*, int*);
void dgesv_(const int*, const int*, double*, const int*, int*, double*,
            const int*, int*);
void dpotrf_(const char*, const int*, double*, const int*, int*);
void dpotrs_(const char*, const int*, const int*, const double*, const int*,
             double*, const int*, int*);
}

namespace spin7 {

Mat matmul(const Mat& A, const Mat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
  Mat C(A.rows, B.cols);
  // Row-major A (m x k), B (k x n): column-major views are A^T, B^T, so
  // compute C^T = B^T A^T via dgemm and read it back row-major.
  const double one = 1.0, zero = 0.0;
  dgemm_("N", "N", &B.cols, &A.rows, &A.cols, &one, B.a.data(), &B.cols,
         A.a.data(), &A.cols, &zero, C.a.data(), &C.cols);
  return C;
}

Mat transpose(const Mat& A) {
  Mat T(A.cols, A.rows);
  for (int r = 0; r < A.rows; ++r)
    for (int c = 0; c < A.cols; ++c) T(c, r) = A(r, c);
  return T;
}

std::vector<double> matvec(const Mat& A, const std::vector<double>& x) {
  if ((int)x.size() != A.cols) throw std::invalid_argument("matvec: shape");
  std::vector<double> y(A.rows, 0.0);
  for (int r = 0; r < A.rows; ++r) {
    const double* row = A.a.data() + (std::size_t)r * A.cols;
    double s = 0;
    for (int c = 0; c < A.cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
  return y;
}

std::vector<double> svdvals(const Mat& A) {
  // Singular values are invariant under transposition, so the row-major
  // buffer can be handed to LAPACK as the column-major transpose.
  Mat work = A;
  int m = A.cols, n = A.rows;  // LAPACK sees an m x n column-major matrix
  int mn = std::min(m, n);
  std::vector<double> s(mn);
  int lwork = -1, info = 0;
  double wq = 0;
  std::vector<int> iwork(8 * (std::size_t)mn);
  dgesdd_("N", &m, &n, work.a.data(), &m, s.data(), nullptr, &m, nullptr, &m,
          &wq, &lwork, iwork.data(), &info);
  lwork = (int)wq;
  std::vector<double> ws(lwork);
  dgesdd_("N", &m, &n, work.a.data(), &m, s.data(), nullptr, &m, nullptr, &m,
          ws.data(), &lwork, iwork.data(), &info);
  if (info != 0) throw std::runtime_error("dgesdd failed, info=" + std::to_string(info));
  return s;
}

void svd_full(const Mat& A, Mat& U, std::vector<double>& s, Mat& V) {
  // LAPACK factors the column-major view A^T = U' S V'^T, which gives
  // A = V' S U'^T; so U = V' and V = U'.
  Mat work = A;
  int m = A.cols, n = A.rows;
  int mn = std::min(m, n);
  s.assign(mn, 0.0);
  std::vector<double> up((std::size_t)m * m), vtp((std::size_t)n * n);
  int lwork = -1, info = 0;
  double wq = 0;
  std::vector<int> iwork(8 * (std::size_t)std::max(m, n));
  dgesdd_("A", &m, &n, work.a.data(), &m, s.data(), up.data(), &m, vtp.data(),
          &n, &wq, &lwork, iwork.data(), &info);
  lwork = (int)wq;
  std::vector<double> ws(lwork);
  dgesdd_("A", &m, &n, work.a.data(), &m, s.data(), up.data(), &m, vtp.data(),
          &n, ws.data(), &lwork, iwork.data(), &info);
  if (info != 0) throw std::runtime_error("dgesdd failed, info=" + std::to_string(info));
  // up is m x m column-major = U'; vtp is n x n column-major = V'^T.
  // U (rows x rows) = V' : row-major V'(i,j) = vtp column-major (j,i) of V'^T -> vtp[i*n+j].
  U = Mat(A.rows, A.rows);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) U(i, j) = vtp[(std::size_t)i * n + j];
  V = Mat(A.cols, A.cols);
  // V = U': row-major V(i,j) = U' (i,j) = up column-major [i + j*m].
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) V(i, j) = up[(std::size_t)j * m + i];
}

void eig_sym(const Mat& A, std::vector<double>& w, Mat* vectors) {
  if (A.rows != A.cols) throw std::invalid_argument("eig_sym: square required");
  int n = A.rows;
  std::vector<double> f((std::size_t)n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f[(std::size_t)j * n + i] = 0.5 * (A(i, j) + A(j, i));
  w.assign(n, 0.0);
  const char* jobz = vectors ? "V" : "N";
  int lwork = -1, info = 0;
  double wq = 0;
  dsyev_(jobz, "L", &n, f.data(), &n, w.data(), &wq, &lwork, &info);
  lwork = (int)wq;
  std::vector<double> ws(lwork);
  dsyev_(jobz, "L", &n, f.data(), &n, w.data(), ws.data(), &lwork, &info);
  if (info != 0) throw std::runtime_error("dsyev failed, info=" + std::to_string(info));
  if (vectors) {
    *vectors = Mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) (*vectors)(i, j) = f[(std::size_t)j * n + i];
  }
}

std::vector<double> lu_solve(const Mat& A, const std::vector<double>& b) {
  if (A.rows != A.cols || (int)b.size() != A.rows)
    throw std::invalid_argument("lu_solve: shape mismatch");
  int n = A.rows, nrhs = 1, info = 0;
  // dgesv on the column-major view solves A^T y = b; to solve A x = b we
  // factor the explicit transpose instead.
  Mat T = transpose(A);
  std::vector<int> ipiv(n);
  std::vector<double> x = b;
  dgesv_(&n, &nrhs, T.a.data(), &n, ipiv.data(), x.data(), &n, &info);
  if (info != 0) throw std::runtime_error("dgesv failed, info=" + std::to_string(info));
  return x;
}

CholeskyFactor::CholeskyFactor(Mat spd) : n_(spd.rows) {
  if (spd.rows != spd.cols) throw std::invalid_argument("cholesky: square required");
  f_ = std::move(spd.a);  // symmetric, so row/column major coincide
  int info = 0;
  dpotrf_("L", &n_, f_.data(), &n_, &info);
  if (info != 0)
    throw std::runtime_error("dpotrf failed, info=" + std::to_string(info));
}

void CholeskyFactor::solve_inplace(std::vector<double>& b) const {
  if ((int)b.size() != n_) throw std::invalid_argument("cholesky solve: shape");
  int nrhs = 1, info = 0;
  dpotrs_("L", &n_, &nrhs, f_.data(), &n_, b.data(), &n_, &info);
  if (info != 0) throw std::runtime_error("dpotrs failed");
}

double cond2(const std::vector<std::complex<double>>& a, int n) {
  // Real embedding [[Re, -Im], [Im, Re]] has the same singular values
  // (each doubled), hence the same 2-norm condition number.
  Mat M(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double re = a[(std::size_t)i * n + j].real();
      double im = a[(std::size_t)i * n + j].imag();
      M(i, j) = re;
      M(i, j + n) = -im;
      M(i + n, j) = im;
      M(i + n, j + n) = re;
    }
  std::vector<double> s = svdvals(M);
  double smin = s.back();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / smin;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = (int)x.size();
  for (int i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace spin7
