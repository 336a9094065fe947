#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Exterior algebra on R^n (n <= 8) with the Euclidean metric. Coefficients of
// a k-form are stored over strictly increasing index tuples of {1..n} in
// lexicographic order; the basis monomials e^I are orthonormal, so the inner
// product of two forms is the plain dot product of their coefficient vectors.

namespace spin7 {

using Vec8 = std::array<double, 8>;

double dot(const Vec8& a, const Vec8& b);
double norm(const Vec8& a);
Vec8 operator+(const Vec8& a, const Vec8& b);
Vec8 operator-(const Vec8& a, const Vec8& b);
Vec8 operator*(double s, const Vec8& a);

// Basis vector e_i, 1-based to match the index conventions used throughout.
Vec8 basis_vec(int i);

inline std::size_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Lexicographic tables for the increasing k-tuples of {1..n}.
class IndexTable {
 public:
  static const IndexTable& get(int n, int k);

  std::size_t size() const { return tuples_.size(); }
  const std::vector<int>& tuple(std::size_t r) const { return tuples_[r]; }
  // Rank of an increasing tuple; the tuple must be strictly increasing.
  std::size_t rank(const std::vector<int>& t) const;

 private:
  IndexTable(int n, int k);
  int n_, k_;
  std::vector<std::vector<int>> tuples_;
};

class KForm {
 public:
  KForm() : n_(8), k_(0), c_(1, 0.0) {}
  KForm(int degree, int dim = 8);

  int degree() const { return k_; }
  int dim() const { return n_; }
  std::size_t size() const { return c_.size(); }

  double& operator[](std::size_t r) { return c_[r]; }
  double operator[](std::size_t r) const { return c_[r]; }

  // Coefficient addressed by an increasing index tuple, e.g. {1,2,3,4}.
  double& at(std::initializer_list<int> idx);
  double at(std::initializer_list<int> idx) const;

  KForm& operator+=(const KForm& o);
  KForm& operator-=(const KForm& o);
  KForm& operator*=(double s);

  const std::vector<double>& coeffs() const { return c_; }

 private:
  int n_, k_;
  std::vector<double> c_;
};

KForm operator+(KForm a, const KForm& b);
KForm operator-(KForm a, const KForm& b);
KForm operator*(double s, KForm a);

double inner(const KForm& a, const KForm& b);
double norm(const KForm& a);

// Exterior product; throws if deg(a)+deg(b) exceeds the ambient dimension.
KForm wedge(const KForm& a, const KForm& b);

// Hodge star for the orientation e^1 ^ ... ^ e^n.
KForm hodge_star(const KForm& a);

// Interior product v -| a. For dim < 8 only the first dim entries of v are used.
KForm interior(const Vec8& v, const KForm& a);

// v^flat as a 1-form (identity metric).
KForm flat(const Vec8& v, int dim = 8);

// Evaluate a k-form on k vectors (sum of k x k minors).
double evaluate(const KForm& a, const std::vector<Vec8>& v);

// The model Cayley calibration 4-form Phi_0 on R^8.
const KForm& phi0();

}  // namespace spin7
