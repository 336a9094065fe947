#include "spin7/structures.hpp"

#include <cmath>
#include <stdexcept>

#include "spin7/linalg.hpp"

namespace spin7 {

namespace {

struct ComplexForm {
  KForm re, im;
};

ComplexForm cwedge(const ComplexForm& a, const ComplexForm& b) {
  return {wedge(a.re, b.re) - wedge(a.im, b.im),
          wedge(a.re, b.im) + wedge(a.im, b.re)};
}

void check_orthonormal(const std::vector<Vec8>& w, double tol, const char* who) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i; j < w.size(); ++j)
      if (std::abs(dot(w[i], w[j]) - (i == j ? 1.0 : 0.0)) > tol)
        throw std::invalid_argument(std::string(who) + ": frame not orthonormal");
}

}  // namespace

SU4Data SU4Data::standard() {
  SU4Data d;
  d.omega = KForm(2, 8);
  d.omega.at({1, 2}) = 1;
  d.omega.at({3, 4}) = 1;
  d.omega.at({5, 6}) = 1;
  d.omega.at({7, 8}) = 1;
  // Omega = (e1 + i e2) ^ (e3 + i e4) ^ (e5 + i e6) ^ (e7 + i e8)
  ComplexForm om{KForm(0, 8), KForm(0, 8)};
  om.re[0] = 1.0;
  for (int j = 0; j < 4; ++j) {
    ComplexForm z{KForm(1, 8), KForm(1, 8)};
    z.re[2 * j] = 1.0;
    z.im[2 * j + 1] = 1.0;
    om = cwedge(om, z);
  }
  d.re_omega4 = om.re;
  d.im_omega4 = om.im;
  return d;
}

double SU4Data::normalisation_residual() const {
  KForm lhs = wedge(wedge(omega, omega), wedge(omega, omega));
  KForm rhs = 1.5 * (wedge(re_omega4, re_omega4) + wedge(im_omega4, im_omega4));
  return norm(lhs - rhs);
}

G2Data G2Data::standard() {
  // phi is e_1 -| Phi_0 with the seven indices 2..8 relabeled to 1..7.
  G2Data d;
  d.phi3 = KForm(3, 7);
  KForm c = interior(basis_vec(1), phi0());
  const IndexTable& t8 = IndexTable::get(8, 3);
  const IndexTable& t7 = IndexTable::get(7, 3);
  for (std::size_t r = 0; r < t8.size(); ++r) {
    if (c[r] == 0.0) continue;
    const std::vector<int>& q = t8.tuple(r);
    std::vector<int> shifted = {q[0] - 1, q[1] - 1, q[2] - 1};
    d.phi3[t7.rank(shifted)] = c[r];
  }
  d.psi4 = hodge_star(d.phi3);
  return d;
}

double G2Data::dual_residual() const { return norm(psi4 - hodge_star(phi3)); }

KForm spin7_from_su4(const SU4Data& d) {
  if (d.normalisation_residual() > 1e-10)
    throw std::invalid_argument("spin7_from_su4: data not normalised");
  return -0.5 * wedge(d.omega, d.omega) + d.re_omega4;
}

KForm spin7_from_g2(const G2Data& d) {
  if (d.dual_residual() > 1e-10)
    throw std::invalid_argument("spin7_from_g2: psi is not the dual of phi");
  KForm phi(4, 8);
  const IndexTable& t7_3 = IndexTable::get(7, 3);
  const IndexTable& t7_4 = IndexTable::get(7, 4);
  const IndexTable& t8_4 = IndexTable::get(8, 4);
  // dt ^ phi~ with t the first coordinate
  for (std::size_t r = 0; r < t7_3.size(); ++r) {
    if (d.phi3[r] == 0.0) continue;
    const std::vector<int>& q = t7_3.tuple(r);
    std::vector<int> up = {1, q[0] + 1, q[1] + 1, q[2] + 1};
    phi[t8_4.rank(up)] += d.phi3[r];
  }
  // + psi~
  for (std::size_t r = 0; r < t7_4.size(); ++r) {
    if (d.psi4[r] == 0.0) continue;
    const std::vector<int>& q = t7_4.tuple(r);
    std::vector<int> up = {q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1};
    phi[t8_4.rank(up)] += d.psi4[r];
  }
  return phi;
}

KForm restrict_form(const KForm& phi, const std::vector<Vec8>& frame, double tol) {
  check_orthonormal(frame, tol, "restrict_form");
  int n = (int)frame.size();
  int k = phi.degree();
  KForm r(k, n);
  const IndexTable& t = IndexTable::get(n, k);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::vector<int>& q = t.tuple(i);
    std::vector<Vec8> v;
    v.reserve(k);
    for (int j = 0; j < k; ++j) v.push_back(frame[q[j] - 1]);
    r[i] = evaluate(phi, v);
  }
  return r;
}

KForm restrict_to_7plane(const KForm& phi, const std::array<Vec8, 7>& w) {
  return hodge_star(restrict_form(phi, {w.begin(), w.end()}));
}

KForm restrict_to_6plane(const KForm& phi, const std::array<Vec8, 6>& w) {
  return -1.0 * hodge_star(restrict_form(phi, {w.begin(), w.end()}));
}

std::array<double, 5> restrict_to_5plane(const KForm& phi,
                                         const std::array<Vec8, 5>& w) {
  KForm n = hodge_star(restrict_form(phi, {w.begin(), w.end()}));
  std::array<double, 5> r;
  for (int i = 0; i < 5; ++i) r[i] = n[i];
  return r;
}

Spin7ValidationReport validate_spin7_form(const KForm& phi, double tol) {
  if (phi.degree() != 4 || phi.dim() != 8)
    throw std::invalid_argument("validate_spin7_form: expects a 4-form on R^8");
  Spin7ValidationReport rep;
  rep.self_dual_residual = norm(phi - hodge_star(phi));
  rep.norm_sq = inner(phi, phi);
  rep.pass_self_dual = rep.self_dual_residual < 1e-10;
  rep.pass_norm = std::abs(rep.norm_sq - 14.0) < 1e-10;

  Mat M(28, 28);
  for (int col = 0; col < 28; ++col) {
    KForm e(2, 8);
    e[col] = 1.0;
    KForm t = hodge_star(wedge(e, phi));
    for (int row = 0; row < 28; ++row) M(row, col) = t[row];
  }
  std::vector<double> w;
  eig_sym(M, w);
  rep.eig_deviation = 0;
  for (double x : w) {
    if (x < -1.0) {
      ++rep.n_eig_low;
      rep.eig_deviation = std::max(rep.eig_deviation, std::abs(x + 3.0));
    } else {
      ++rep.n_eig_high;
      rep.eig_deviation = std::max(rep.eig_deviation, std::abs(x - 1.0));
    }
  }
  rep.pass_spectrum =
      rep.n_eig_low == 7 && rep.n_eig_high == 21 && rep.eig_deviation < tol;
  return rep;
}

SpecialLagrangianReport special_lagrangian_test(const std::array<Vec8, 4>& v,
                                                const SU4Data& d, double tol) {
  std::vector<Vec8> f = {v.begin(), v.end()};
  check_orthonormal(f, 1e-9, "special_lagrangian_test");
  SpecialLagrangianReport rep;
  rep.re_omega_value = evaluate(d.re_omega4, f);
  rep.im_omega_value = evaluate(d.im_omega4, f);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      rep.omega_restriction =
          std::max(rep.omega_restriction, std::abs(evaluate(d.omega, {f[i], f[j]})));
  rep.calibrated = std::abs(std::abs(rep.re_omega_value) - 1.0) < tol;
  rep.lagrangian_horizontal =
      rep.omega_restriction < tol && std::abs(rep.im_omega_value) < tol;
  return rep;
}

G2PlaneReport associative_coassociative_test(const std::vector<Vec8>& v,
                                             const G2Data& d, double tol) {
  if (v.size() != 3 && v.size() != 4)
    throw std::invalid_argument(
        "associative_coassociative_test: expects a 3- or 4-plane");
  for (const Vec8& x : v)
    if (x[7] != 0.0)
      throw std::invalid_argument(
          "associative_coassociative_test: vectors live in R^7 (slot 8 unused)");
  check_orthonormal(v, 1e-9, "associative_coassociative_test");
  G2PlaneReport rep;
  rep.plane_dim = (int)v.size();
  if (v.size() == 3) {
    rep.phi_value = evaluate(d.phi3, v);
    rep.calibrated = std::abs(std::abs(rep.phi_value) - 1.0) < tol;
  } else {
    rep.psi_value = evaluate(d.psi4, v);
    rep.calibrated = std::abs(std::abs(rep.psi_value) - 1.0) < tol;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int k = j + 1; k < 4; ++k)
          rep.phi_restriction = std::max(
              rep.phi_restriction, std::abs(evaluate(d.phi3, {v[i], v[j], v[k]})));
    rep.vanishing = rep.phi_restriction < tol;
  }
  return rep;
}

std::pair<double, double> bs_warping(double r, BSBranch branch) {
  if (r < 0) throw std::invalid_argument("bs_warping: r must be nonnegative");
  if (branch == BSBranch::Complete)
    return {5.0 * std::pow(1.0 + r * r, 0.6), 4.0 * std::pow(1.0 + r * r, -0.4)};
  if (r >= 1.0)
    throw std::invalid_argument("bs_warping: incomplete branch requires r < 1");
  return {-5.0 * std::pow(1.0 - r * r, 0.6), 4.0 * std::pow(1.0 - r * r, -0.4)};
}

std::array<std::array<double, 8>, 8> WarpedMetricModel::metric(
    const std::array<double, 4>& fiber) const {
  double r2 = 0;
  for (double x : fiber) r2 += x * x;
  auto [fs, fnu] = bs_warping(std::sqrt(r2), branch);
  // omega_i = A_i . fiber + gauge_i |fiber|^2 fiber
  std::array<std::array<double, 4>, 4> om{};
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 4; ++a) {
      double s = gauge[i] * r2 * fiber[a];
      for (int b = 0; b < 4; ++b) s += A[i][a][b] * fiber[b];
      om[i][a] = s;
    }
  std::array<std::array<double, 8>, 8> g{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0;
      for (int a = 0; a < 4; ++a) s += om[i][a] * om[j][a];
      g[i][j] = fs * (i == j ? 1.0 : 0.0) + fnu * s;
    }
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 4; ++a) {
      g[i][4 + a] = fnu * om[i][a];
      g[4 + a][i] = g[i][4 + a];
    }
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) g[4 + a][4 + b] = fnu * (a == b ? 1.0 : 0.0);
  return g;
}

double WarpedMetricModel::antisymmetry_residual() const {
  double worst = 0;
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        worst = std::max(worst, std::abs(A[i][a][b] + A[i][b][a]));
  return worst;
}

double christoffel_fiber_check(const WarpedMetricModel& m, double h) {
  if (h <= 0) throw std::invalid_argument("christoffel_fiber_check: h > 0");
  {
    auto g0 = m.metric({0, 0, 0, 0});
    Mat g(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) g(i, j) = g0[i][j];
    std::vector<double> w;
    eig_sym(g, w);
    for (double x : w)
      if (std::abs(x) < 1e-10)
        throw std::invalid_argument("christoffel_fiber_check: singular metric");
  }
  // Gamma_{ij}^k = (d_i g_{jk} + d_j g_{ik} - d_k g_{ij}) / 2 with i,j fiber
  // and k base. The base block of the trivialization is frozen, so d_k g = 0
  // and only fiber-direction central differences remain.
  auto dg_fiber = [&](int fiber_dir, int r, int c) {
    std::array<double, 4> xp{}, xm{};
    xp[fiber_dir] = h;
    xm[fiber_dir] = -h;
    auto gp = m.metric(xp);
    auto gm = m.metric(xm);
    return (gp[r][c] - gm[r][c]) / (2.0 * h);
  };
  double worst = 0;
  for (int i = 0; i < 4; ++i)    // fiber index 4+i
    for (int j = 0; j < 4; ++j)  // fiber index 4+j
      for (int k = 0; k < 4; ++k) {
        double gamma = 0.5 * (dg_fiber(i, 4 + j, k) + dg_fiber(j, 4 + i, k));
        worst = std::max(worst, std::abs(gamma));
      }
  return worst;
}

}  // namespace spin7
