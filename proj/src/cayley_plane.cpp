#include "spin7/cayley_plane.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spin7 {

double Spin7Frame::pattern_residual() const {
  const IndexTable& t = IndexTable::get(8, 4);
  double worst = 0.0;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::vector<int>& q = t.tuple(r);
    double val = evaluate(phi0(), {e[q[0] - 1], e[q[1] - 1], e[q[2] - 1], e[q[3] - 1]});
    worst = std::max(worst, std::abs(val - phi0()[r]));
  }
  return worst;
}

double Spin7Frame::orthonormality_residual() const {
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = i; j < 8; ++j)
      worst = std::max(worst, std::abs(dot(e[i], e[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

Spin7Frame CayleyPlane::frame() const {
  Spin7Frame f;
  for (int i = 0; i < 4; ++i) {
    f.e[i] = tangent[i];
    f.e[4 + i] = normal[i];
  }
  return f;
}

std::vector<Vec8> orthonormalize(const std::vector<Vec8>& v, double tol) {
  std::vector<Vec8> q;
  q.reserve(v.size());
  for (Vec8 x : v) {
    for (const Vec8& b : q) x = x - dot(x, b) * b;
    // second pass for numerical orthogonality
    for (const Vec8& b : q) x = x - dot(x, b) * b;
    double n = norm(x);
    if (n < tol) throw std::invalid_argument("orthonormalize: degenerate span");
    q.push_back((1.0 / n) * x);
  }
  return q;
}

double calibration_value(const std::array<Vec8, 4>& span) {
  std::vector<Vec8> f = orthonormalize({span[0], span[1], span[2], span[3]});
  return evaluate(phi0(), {f[0], f[1], f[2], f[3]});
}

bool is_cayley(const std::array<Vec8, 4>& span, double tol) {
  std::vector<Vec8> f = orthonormalize({span[0], span[1], span[2], span[3]});
  return norm(tau4(f[0], f[1], f[2], f[3])) < tol;
}

Spin7Frame complete_spin7_frame(const Vec8& e1, const Vec8& e2, const Vec8& e3,
                                const Vec8& e5, double tol) {
  auto require_unit = [&](const Vec8& v, const char* name) {
    if (std::abs(norm(v) - 1.0) > tol)
      throw std::invalid_argument(std::string("complete_spin7_frame: ") + name +
                                  " is not unit");
  };
  auto require_orth = [&](const Vec8& a, const Vec8& b, const char* what) {
    if (std::abs(dot(a, b)) > tol)
      throw std::invalid_argument(
          std::string("complete_spin7_frame: orthogonality failed: ") + what);
  };
  require_unit(e1, "e1");
  require_unit(e2, "e2");
  require_unit(e3, "e3");
  require_unit(e5, "e5");
  require_orth(e1, e2, "e1.e2");
  require_orth(e1, e3, "e1.e3");
  require_orth(e2, e3, "e2.e3");
  require_orth(e5, e1, "e5.e1");
  require_orth(e5, e2, "e5.e2");
  require_orth(e5, e3, "e5.e3");
  Vec8 c123 = cross3(e1, e2, e3);
  require_orth(e5, c123, "e5.(e1xe2xe3)");

  Spin7Frame f;
  f.e[0] = e1;
  f.e[1] = e2;
  f.e[2] = e3;
  f.e[3] = -1.0 * c123;
  f.e[4] = e5;
  f.e[5] = -1.0 * cross3(e1, e2, e5);
  f.e[6] = -1.0 * cross3(e1, e3, e5);
  f.e[7] = cross3(e2, e3, e5);
  return f;
}

CayleyPlane adapted_plane(const std::array<Vec8, 4>& span,
                          const std::optional<Vec8>& e5_choice) {
  std::vector<Vec8> f = orthonormalize({span[0], span[1], span[2], span[3]});
  double lam = evaluate(phi0(), {f[0], f[1], f[2], f[3]});
  if (lam < 0) {
    std::swap(f[2], f[3]);
    lam = -lam;
  }
  if (std::abs(lam - 1.0) > 1e-8 ||
      norm(tau4(f[0], f[1], f[2], f[3])) > 1e-8)
    throw std::invalid_argument("adapted_plane: span is not Cayley");

  Vec8 e5{};
  if (e5_choice) {
    e5 = *e5_choice;
  } else {
    // First standard basis vector with a large component off the plane.
    for (int i = 1; i <= 8; ++i) {
      Vec8 c = basis_vec(i);
      for (const Vec8& b : f) c = c - dot(c, b) * b;
      if (norm(c) > 0.5) {
        e5 = (1.0 / norm(c)) * c;
        break;
      }
    }
  }
  for (const Vec8& b : f) e5 = e5 - dot(e5, b) * b;
  double n5 = norm(e5);
  if (n5 < 1e-10) throw std::invalid_argument("adapted_plane: e5 degenerate");
  e5 = (1.0 / n5) * e5;

  Spin7Frame fr = complete_spin7_frame(f[0], f[1], f[2], e5);
  CayleyPlane p;
  for (int i = 0; i < 4; ++i) {
    p.tangent[i] = fr.e[i];
    p.normal[i] = fr.e[4 + i];
  }
  for (int a = 0; a < 4; ++a) p.e_basis[a] = cross2(p.tangent[0], p.normal[a]);
  return p;
}

std::array<double, 4> pi_E(const KForm& alpha, const CayleyPlane& p) {
  std::array<double, 4> c;
  for (int a = 0; a < 4; ++a) c[a] = inner(alpha, p.e_basis[a]);
  return c;
}

std::array<double, 4> rho(const Vec8& s, const CayleyPlane& p) {
  return pi_E(cross2(p.tangent[0], s), p);
}

Vec8 rho_inv(const std::array<double, 4>& e_coords, const CayleyPlane& p) {
  // rho is an isometry from the normal bundle onto E, so the inverse is the
  // transpose of its 4 x 4 coordinate matrix.
  double m[4][4];
  for (int a = 0; a < 4; ++a) {
    std::array<double, 4> col = rho(p.normal[a], p);
    for (int b = 0; b < 4; ++b) m[b][a] = col[b];
  }
  Vec8 s{};
  for (int a = 0; a < 4; ++a) {
    double ca = 0;
    for (int b = 0; b < 4; ++b) ca += m[b][a] * e_coords[b];
    s = s + ca * p.normal[a];
  }
  return s;
}

ScaffoldProjections scaffold_projections(const Vec8& x, const CayleyPlane& p,
                                         const ScaffoldFiber& s) {
  ScaffoldProjections r;
  r.pi_K = Vec8{};
  r.pi_nu = Vec8{};
  r.pi_W = Vec8{};
  for (const Vec8& kb : s.k_basis) r.pi_K = r.pi_K + dot(x, kb) * kb;
  for (const Vec8& nb : s.w_tangent_normals) r.pi_nu = r.pi_nu + dot(x, nb) * nb;
  r.pi_W = r.pi_nu;
  for (int i = 1; i <= 3; ++i) r.pi_W = r.pi_W + dot(x, p.tangent[i]) * p.tangent[i];
  return r;
}

namespace {

// Coefficients of Phi_0 restricted to the span of an orthonormal frame,
// as a 4-form in frame coordinates.
KForm restrict_phi0(const std::vector<Vec8>& w) {
  int n = (int)w.size();
  KForm r(4, n);
  const IndexTable& t = IndexTable::get(n, 4);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::vector<int>& q = t.tuple(i);
    r[i] = evaluate(phi0(), {w[q[0] - 1], w[q[1] - 1], w[q[2] - 1], w[q[3] - 1]});
  }
  return r;
}

void check_frame(const std::vector<Vec8>& w, double tol, const char* who) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i; j < w.size(); ++j)
      if (std::abs(dot(w[i], w[j]) - (i == j ? 1.0 : 0.0)) > tol)
        throw std::invalid_argument(std::string(who) + ": frame not orthonormal");
}

void check_boundary_in_w(const CayleyPlane& p, const std::vector<Vec8>& w,
                         double tol, const char* who) {
  for (int i = 1; i <= 3; ++i) {
    Vec8 r = p.tangent[i];
    for (const Vec8& wv : w) r = r - dot(r, wv) * wv;
    if (norm(r) > tol)
      throw std::invalid_argument(std::string(who) +
                                  ": boundary 3-plane not contained in W");
  }
}

}  // namespace

std::pair<bool, bool> orthogonality_char_dim5(const CayleyPlane& p,
                                              const std::array<Vec8, 5>& w_frame,
                                              double tol) {
  std::vector<Vec8> w(w_frame.begin(), w_frame.end());
  check_frame(w, 1e-9, "orthogonality_char_dim5");
  check_boundary_in_w(p, w, 1e-9, "orthogonality_char_dim5");
  const Vec8& u = p.tangent[0];

  bool flag_a = true;
  for (const Vec8& wv : w)
    if (std::abs(dot(u, wv)) > tol) flag_a = false;

  KForm res = restrict_phi0(w);
  KForm n_form = hodge_star(res);  // 1-form on W
  Vec8 n{};
  for (int i = 0; i < 5; ++i) n = n + n_form[i] * w[i];
  Vec8 off = n;
  for (int i = 1; i <= 3; ++i) off = off - dot(off, p.tangent[i]) * p.tangent[i];
  bool flag_b = norm(off) < tol && norm(n) > 0.5;
  return {flag_a, flag_b};
}

std::pair<bool, bool> orthogonality_char_dim6(const CayleyPlane& p,
                                              const std::array<Vec8, 6>& w_frame,
                                              double tol) {
  std::vector<Vec8> w(w_frame.begin(), w_frame.end());
  check_frame(w, 1e-9, "orthogonality_char_dim6");
  check_boundary_in_w(p, w, 1e-9, "orthogonality_char_dim6");
  const Vec8& u = p.tangent[0];

  bool flag_a = true;
  for (const Vec8& wv : w)
    if (std::abs(dot(u, wv)) > tol) flag_a = false;

  KForm omega = -1.0 * hodge_star(restrict_phi0(w));  // 2-form on W
  // Boundary vectors in W coordinates.
  double worst = 0.0;
  const IndexTable& t2 = IndexTable::get(6, 2);
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) {
      double val = 0.0;
      for (std::size_t r = 0; r < t2.size(); ++r) {
        const std::vector<int>& q = t2.tuple(r);
        double bi_a = dot(p.tangent[i], w[q[0] - 1]);
        double bi_b = dot(p.tangent[i], w[q[1] - 1]);
        double bj_a = dot(p.tangent[j], w[q[0] - 1]);
        double bj_b = dot(p.tangent[j], w[q[1] - 1]);
        val += omega[r] * (bi_a * bj_b - bi_b * bj_a);
      }
      worst = std::max(worst, std::abs(val));
    }
  bool flag_b = worst < tol;
  return {flag_a, flag_b};
}

namespace {

double chi_of(const KForm& e7, const Vec8& a, const Vec8& b, const Vec8& c,
              const Vec8& d) {
  return inner(tau4(a, b, c, d), e7);
}

}  // namespace

double structure_variation_identity(const KForm& e_part7, const CayleyPlane& p,
                                    const ScaffoldFiber& s) {
  KForm e7 = lambda2_project(e_part7).part7;
  std::array<double, 4> pe = pi_E(e7, p);

  // F-side: (dF~)(0, chi) = -pi_E(e) through the explicit sum.
  double resid = 0.0;
  for (int a = 0; a < 4; ++a) {
    double lhs = -chi_of(e7, p.normal[a], p.tangent[1], p.tangent[2], p.tangent[3]);
    resid = std::max(resid, std::abs(lhs - (-pe[a])));
  }

  // H-side: (dH~)(0, chi) = pi_nu(rho^-1(pi_E(e))) through the explicit sum.
  Vec8 lhs_h{};
  for (const Vec8& nu : s.w_tangent_normals)
    lhs_h = lhs_h + chi_of(e7, nu, p.tangent[1], p.tangent[2], p.tangent[3]) * nu;
  Vec8 rhs_h = scaffold_projections(rho_inv(pe, p), p, s).pi_nu;
  resid = std::max(resid, norm(lhs_h - rhs_h));
  return resid;
}

double b_tilde_cancellation(const KForm& e_part7, const CayleyPlane& p,
                            const ScaffoldFiber& s) {
  KForm e7 = lambda2_project(e_part7).part7;

  // F~ route, through the explicit chi sums.
  std::array<double, 4> df;
  for (int a = 0; a < 4; ++a)
    df[a] = -chi_of(e7, p.normal[a], p.tangent[1], p.tangent[2], p.tangent[3]);
  Vec8 side_f = scaffold_projections(rho_inv(df, p), p, s).pi_nu;

  // H~ route.
  Vec8 side_h{};
  for (const Vec8& nu : s.w_tangent_normals)
    side_h = side_h + chi_of(e7, nu, p.tangent[1], p.tangent[2], p.tangent[3]) * nu;

  return norm(side_f + side_h);
}

}  // namespace spin7
