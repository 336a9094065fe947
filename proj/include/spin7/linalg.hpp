#pragma once

#include <complex>
#include <vector>

// Thin dense-matrix layer over LAPACK/BLAS, row-major storage.

namespace spin7 {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a((std::size_t)r * c, 0.0) {}
  double& operator()(int r, int c) { return a[(std::size_t)r * cols + c]; }
  double operator()(int r, int c) const { return a[(std::size_t)r * cols + c]; }
};

Mat matmul(const Mat& A, const Mat& B);
Mat transpose(const Mat& A);
std::vector<double> matvec(const Mat& A, const std::vector<double>& x);

// Singular values in descending order (LAPACK dgesdd, values only).
std::vector<double> svdvals(const Mat& A);

// Full SVD: A = U diag(s) V^T. U is rows x rows, V is cols x cols.
void svd_full(const Mat& A, Mat& U, std::vector<double>& s, Mat& V);

// Eigen-decomposition of a symmetric matrix; eigenvalues ascending.
// The input is symmetrized; vectors (if requested) are returned as columns.
void eig_sym(const Mat& A, std::vector<double>& w, Mat* vectors = nullptr);

// Solve A x = b by LU with partial pivoting (square A). Throws on singularity.
std::vector<double> lu_solve(const Mat& A, const std::vector<double>& b);

// In-place Cholesky factorization of an SPD matrix and repeated solves.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Mat spd);  // takes ownership, factors in place
  void solve_inplace(std::vector<double>& b) const;
  int dim() const { return n_; }

 private:
  int n_;
  std::vector<double> f_;  // packed full storage, LAPACK layout
};

// Condition number (2-norm) of a complex square matrix via its real embedding.
double cond2(const std::vector<std::complex<double>>& a, int n);

// Least-squares fit of log(y) = p*log(x) + c; returns the slope p.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spin7
