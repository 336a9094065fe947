#include "spin7/algebra.hpp"

#include <cmath>

namespace spin7 {

namespace {

// cross2 coefficients: C2[i][j] is the 28-vector of e_i x e_j.
struct Cross2Table {
  double c[8][8][28];
  Cross2Table() {
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        Vec8 vi = basis_vec(i + 1), vj = basis_vec(j + 1);
        KForm w = wedge(flat(vi), flat(vj));
        KForm r = 0.5 * (w - hodge_star(wedge(w, phi0())));
        for (int a = 0; a < 28; ++a) c[i][j][a] = r[a];
      }
    }
  }
};

const Cross2Table& cross2_table() {
  static const Cross2Table t;
  return t;
}

// cross3 coefficients: (e_i x e_j x e_k) . e_l = Phi_0(e_k, e_j, e_i, e_l).
struct Cross3Table {
  double c[8][8][8][8];
  Cross3Table() {
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) {
          KForm f = interior(basis_vec(i + 1),
                             interior(basis_vec(j + 1),
                                      interior(basis_vec(k + 1), phi0())));
          for (int l = 0; l < 8; ++l) c[i][j][k][l] = f[l];
        }
  }
};

const Cross3Table& cross3_table() {
  static const Cross3Table t;
  return t;
}

}  // namespace

KForm cross2(const Vec8& v, const Vec8& w) {
  const Cross2Table& t = cross2_table();
  KForm r(2, 8);
  for (int i = 0; i < 8; ++i) {
    if (v[i] == 0.0) continue;
    for (int j = 0; j < 8; ++j) {
      if (w[j] == 0.0) continue;
      double s = v[i] * w[j];
      const double* c = t.c[i][j];
      for (int a = 0; a < 28; ++a) r[a] += s * c[a];
    }
  }
  return r;
}

Vec8 cross3(const Vec8& u, const Vec8& v, const Vec8& w) {
  const Cross3Table& t = cross3_table();
  Vec8 r{};
  for (int i = 0; i < 8; ++i) {
    if (u[i] == 0.0) continue;
    for (int j = 0; j < 8; ++j) {
      if (v[j] == 0.0) continue;
      double uv = u[i] * v[j];
      for (int k = 0; k < 8; ++k) {
        if (w[k] == 0.0) continue;
        double s = uv * w[k];
        const double* c = t.c[i][j][k];
        for (int l = 0; l < 8; ++l) r[l] += s * c[l];
      }
    }
  }
  return r;
}

KForm tau4(const Vec8& a, const Vec8& b, const Vec8& c, const Vec8& d) {
  KForm r = -1.0 * cross2(a, cross3(b, c, d));
  r += dot(a, b) * cross2(c, d);
  r += dot(a, c) * cross2(d, b);
  r += dot(a, d) * cross2(b, c);
  return r;
}

Lambda2Split lambda2_project(const KForm& alpha) {
  if (alpha.degree() != 2 || alpha.dim() != 8)
    throw std::invalid_argument("lambda2_project: expects a 2-form on R^8");
  Lambda2Split s;
  s.part7 = 0.25 * (alpha - hodge_star(wedge(alpha, phi0())));
  s.part21 = alpha - s.part7;
  return s;
}

std::vector<double> lambda2_operator_matrix() {
  std::vector<double> m(28 * 28, 0.0);
  for (int col = 0; col < 28; ++col) {
    KForm e(2, 8);
    e[col] = 1.0;
    KForm t = hodge_star(wedge(e, phi0()));
    for (int row = 0; row < 28; ++row) m[row * 28 + col] = t[row];
  }
  return m;
}

const std::vector<KForm>& lambda4_7_basis() {
  static const std::vector<KForm> basis = [] {
    // Generators w^ ^ (v -| Phi) - v^ ^ (w -| Phi) over basis pairs, then
    // modified Gram-Schmidt; the span has rank 7.
    std::vector<KForm> gen;
    for (int i = 1; i <= 8; ++i)
      for (int j = i + 1; j <= 8; ++j) {
        Vec8 v = basis_vec(i), w = basis_vec(j);
        KForm g = wedge(flat(w), interior(v, phi0())) -
                  wedge(flat(v), interior(w, phi0()));
        gen.push_back(g);
      }
    std::vector<KForm> b;
    for (KForm g : gen) {
      for (const KForm& q : b) g -= inner(g, q) * q;
      double n = norm(g);
      if (n > 1e-8) b.push_back((1.0 / n) * g);
    }
    if (b.size() != 7)
      throw std::logic_error("lambda4_7_basis: unexpected rank");
    return b;
  }();
  return basis;
}

Lambda4Split lambda4_project(const KForm& xi) {
  if (xi.degree() != 4 || xi.dim() != 8)
    throw std::invalid_argument("lambda4_project: expects a 4-form on R^8");
  Lambda4Split s;
  KForm star = hodge_star(xi);
  s.part35 = 0.5 * (xi - star);
  KForm sd = 0.5 * (xi + star);
  s.part1 = (inner(xi, phi0()) / 14.0) * phi0();
  s.part7 = KForm(4, 8);
  for (const KForm& b : lambda4_7_basis()) s.part7 += inner(sd, b) * b;
  s.part27 = sd - s.part1 - s.part7;
  return s;
}

}  // namespace spin7
