#include "spin7/forms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace spin7 {

double dot(const Vec8& a, const Vec8& b) {
  double s = 0;
  for (int i = 0; i < 8; ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec8& a) { return std::sqrt(dot(a, a)); }

Vec8 operator+(const Vec8& a, const Vec8& b) {
  Vec8 r;
  for (int i = 0; i < 8; ++i) r[i] = a[i] + b[i];
  return r;
}

Vec8 operator-(const Vec8& a, const Vec8& b) {
  Vec8 r;
  for (int i = 0; i < 8; ++i) r[i] = a[i] - b[i];
  return r;
}

Vec8 operator*(double s, const Vec8& a) {
  Vec8 r;
  for (int i = 0; i < 8; ++i) r[i] = s * a[i];
  return r;
}

Vec8 basis_vec(int i) {
  if (i < 1 || i > 8) throw std::out_of_range("basis_vec: index out of range");
  Vec8 r{};
  r[i - 1] = 1.0;
  return r;
}

IndexTable::IndexTable(int n, int k) : n_(n), k_(k) {
  std::vector<int> t(k);
  for (int i = 0; i < k; ++i) t[i] = i + 1;
  if (k == 0) {
    tuples_.push_back({});
    return;
  }
  while (true) {
    tuples_.push_back(t);
    int i = k - 1;
    while (i >= 0 && t[i] == n - (k - 1 - i)) --i;
    if (i < 0) break;
    ++t[i];
    for (int j = i + 1; j < k; ++j) t[j] = t[j - 1] + 1;
  }
}

const IndexTable& IndexTable::get(int n, int k) {
  static std::map<std::pair<int, int>, IndexTable> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_pair(n, k);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, IndexTable(n, k)).first;
  return it->second;
}

std::size_t IndexTable::rank(const std::vector<int>& t) const {
  // Combinatorial number system, lexicographic over increasing tuples.
  std::size_t r = 0;
  int prev = 0;
  for (int i = 0; i < k_; ++i) {
    for (int v = prev + 1; v < t[i]; ++v) r += binom(n_ - v, k_ - 1 - i);
    prev = t[i];
  }
  return r;
}

KForm::KForm(int degree, int dim) : n_(dim), k_(degree) {
  if (dim < 1 || dim > 8) throw std::invalid_argument("KForm: dim out of range");
  if (degree < 0 || degree > dim) throw std::invalid_argument("KForm: bad degree");
  c_.assign(binom(dim, degree), 0.0);
}

double& KForm::at(std::initializer_list<int> idx) {
  std::vector<int> t(idx);
  return c_[IndexTable::get(n_, k_).rank(t)];
}

double KForm::at(std::initializer_list<int> idx) const {
  std::vector<int> t(idx);
  return c_[IndexTable::get(n_, k_).rank(t)];
}

KForm& KForm::operator+=(const KForm& o) {
  if (k_ != o.k_ || n_ != o.n_) throw std::invalid_argument("KForm: degree mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

KForm& KForm::operator-=(const KForm& o) {
  if (k_ != o.k_ || n_ != o.n_) throw std::invalid_argument("KForm: degree mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

KForm& KForm::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

KForm operator+(KForm a, const KForm& b) { return a += b; }
KForm operator-(KForm a, const KForm& b) { return a -= b; }
KForm operator*(double s, KForm a) { return a *= s; }

double inner(const KForm& a, const KForm& b) {
  if (a.degree() != b.degree() || a.dim() != b.dim())
    throw std::invalid_argument("inner: degree mismatch");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const KForm& a) { return std::sqrt(inner(a, a)); }

namespace {

// Sign of merging two disjoint increasing tuples into one increasing tuple;
// returns 0 if the tuples share an index.
int merge_sign(const std::vector<int>& a, const std::vector<int>& b,
               std::vector<int>& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  int sign = 1;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return 0;
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else {
      // b[j] jumps over the remaining entries of a.
      if ((a.size() - i) % 2 != 0) sign = -sign;
      out.push_back(b[j++]);
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return sign;
}

}  // namespace

KForm wedge(const KForm& a, const KForm& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dim mismatch");
  const int n = a.dim();
  if (a.degree() + b.degree() > n)
    throw std::invalid_argument("wedge: degree overflow");
  KForm r(a.degree() + b.degree(), n);
  const IndexTable& ta = IndexTable::get(n, a.degree());
  const IndexTable& tb = IndexTable::get(n, b.degree());
  const IndexTable& tr = IndexTable::get(n, r.degree());
  std::vector<int> merged;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < tb.size(); ++j) {
      if (b[j] == 0.0) continue;
      int s = merge_sign(ta.tuple(i), tb.tuple(j), merged);
      if (s != 0) r[tr.rank(merged)] += s * a[i] * b[j];
    }
  }
  return r;
}

KForm hodge_star(const KForm& a) {
  const int n = a.dim(), k = a.degree();
  KForm r(n - k, n);
  const IndexTable& ta = IndexTable::get(n, k);
  const IndexTable& tr = IndexTable::get(n, n - k);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a[i] == 0.0) continue;
    const std::vector<int>& t = ta.tuple(i);
    std::vector<int> comp;
    comp.reserve(n - k);
    std::size_t p = 0;
    for (int v = 1; v <= n; ++v) {
      if (p < t.size() && t[p] == v) {
        ++p;
      } else {
        comp.push_back(v);
      }
    }
    // Parity of the permutation (t, comp) of (1..n): count inversions.
    int inv = 0;
    for (int x : t)
      for (int y : comp)
        if (x > y) ++inv;
    double s = (inv % 2 == 0) ? 1.0 : -1.0;
    r[tr.rank(comp)] += s * a[i];
  }
  return r;
}

KForm interior(const Vec8& v, const KForm& a) {
  const int n = a.dim(), k = a.degree();
  if (k == 0) return KForm(0, n);
  KForm r(k - 1, n);
  const IndexTable& ta = IndexTable::get(n, k);
  const IndexTable& tr = IndexTable::get(n, k - 1);
  std::vector<int> rest(k - 1);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a[i] == 0.0) continue;
    const std::vector<int>& t = ta.tuple(i);
    for (int p = 0; p < k; ++p) {
      double vv = v[t[p] - 1];
      if (vv == 0.0) continue;
      for (int q = 0, w = 0; q < k; ++q)
        if (q != p) rest[w++] = t[q];
      double s = (p % 2 == 0) ? 1.0 : -1.0;
      r[tr.rank(rest)] += s * vv * a[i];
    }
  }
  return r;
}

KForm flat(const Vec8& v, int dim) {
  KForm r(1, dim);
  for (int i = 0; i < dim; ++i) r[i] = v[i];
  return r;
}

double evaluate(const KForm& a, const std::vector<Vec8>& v) {
  const int k = a.degree();
  if ((int)v.size() != k) throw std::invalid_argument("evaluate: wrong arity");
  if (k == 0) return a[0];
  const IndexTable& ta = IndexTable::get(a.dim(), k);
  double total = 0;
  std::vector<double> m(k * k);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (a[i] == 0.0) continue;
    const std::vector<int>& t = ta.tuple(i);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) m[r * k + c] = v[r][t[c] - 1];
    // Determinant by Gaussian elimination with partial pivoting.
    double det = 1.0;
    std::vector<double> g = m;
    for (int col = 0; col < k; ++col) {
      int piv = col;
      for (int r = col + 1; r < k; ++r)
        if (std::abs(g[r * k + col]) > std::abs(g[piv * k + col])) piv = r;
      if (g[piv * k + col] == 0.0) {
        det = 0.0;
        break;
      }
      if (piv != col) {
        for (int c = 0; c < k; ++c) std::swap(g[piv * k + c], g[col * k + c]);
        det = -det;
      }
      det *= g[col * k + col];
      for (int r = col + 1; r < k; ++r) {
        double f = g[r * k + col] / g[col * k + col];
        for (int c = col; c < k; ++c) g[r * k + c] -= f * g[col * k + c];
      }
    }
    total += a[i] * det;
  }
  return total;
}

const KForm& phi0() {
  static const KForm phi = [] {
    KForm p(4, 8);
    p.at({1, 2, 3, 4}) = 1;
    p.at({1, 2, 5, 6}) = 1;
    p.at({1, 2, 7, 8}) = -1;
    p.at({1, 3, 5, 7}) = 1;
    p.at({1, 3, 6, 8}) = 1;
    p.at({1, 4, 5, 8}) = 1;
    p.at({1, 4, 6, 7}) = -1;
    p.at({2, 3, 5, 8}) = -1;
    p.at({2, 3, 6, 7}) = 1;
    p.at({2, 4, 5, 7}) = 1;
    p.at({2, 4, 6, 8}) = 1;
    p.at({3, 4, 5, 6}) = -1;
    p.at({3, 4, 7, 8}) = 1;
    p.at({5, 6, 7, 8}) = 1;
    return p;
  }();
  return phi;
}

}  // namespace spin7
