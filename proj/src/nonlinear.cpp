#include "spin7/nonlinear.hpp"

#include <cmath>
#include <stdexcept>

#include "spin7/algebra.hpp"
#include "spin7/cayley_plane.hpp"

namespace spin7 {

namespace {

const std::array<KForm, 4>& e_basis_forms() {
  static const std::array<KForm, 4> basis = [] {
    std::array<KForm, 4> b;
    for (int i = 0; i < 4; ++i) b[i] = cross2(basis_vec(1), basis_vec(5 + i));
    return b;
  }();
  return basis;
}

std::array<double, 4> project_E(const KForm& alpha) {
  const auto& basis = e_basis_forms();
  std::array<double, 4> c;
  for (int b = 0; b < 4; ++b) c[b] = inner(alpha, basis[b]);
  return c;
}

// Graph tangent frame t_i = e_i + sum_a J[i][a] e_{4+a}.
std::array<Vec8, 4> graph_frame(const std::array<std::array<double, 4>, 4>& J) {
  std::array<Vec8, 4> t{};
  for (int i = 0; i < 4; ++i) {
    t[i][i] = 1.0;
    for (int a = 0; a < 4; ++a) t[i][4 + a] = J[i][a];
  }
  return t;
}

// Derivative stencil value of component a in direction dir at a node.
double d1_value(const FlatCayleyDomain& dom, const NormalField& s, std::int64_t id,
                int dir, int comp) {
  std::array<int, 4> c = dom.coords(id);
  double h = dom.h(dir);
  if (dir < 3) {
    std::array<int, 4> cp = c, cm = c;
    cp[dir] = (c[dir] + 1) % dom.n[dir];
    cm[dir] = (c[dir] - 1 + dom.n[dir]) % dom.n[dir];
    return (s.at(dom.node(cp[0], cp[1], cp[2], cp[3]), comp) -
            s.at(dom.node(cm[0], cm[1], cm[2], cm[3]), comp)) /
           (2 * h);
  }
  auto at4 = [&](int i4) { return s.at(dom.node(c[0], c[1], c[2], i4), comp); };
  if (dom.periodic4) {
    int p = (c[3] + 1) % dom.n[3], m = (c[3] - 1 + dom.n[3]) % dom.n[3];
    return (at4(p) - at4(m)) / (2 * h);
  }
  if (c[3] == 0) return (-1.5 * at4(0) + 2.0 * at4(1) - 0.5 * at4(2)) / h;
  if (c[3] == dom.n[3])
    return (1.5 * at4(c[3]) - 2.0 * at4(c[3] - 1) + 0.5 * at4(c[3] - 2)) / h;
  return (at4(c[3] + 1) - at4(c[3] - 1)) / (2 * h);
}

// Per-side boundary data: inward-normal sign and the positively ordered
// tangential directions of the boundary frame (u = f2 x f3 x f4).
struct SideFrame {
  double u_sign;
  std::array<int, 3> dirs;  // grid directions (0-based) of (f2, f3, f4)
};

SideFrame side_frame(int i4, int n4) {
  if (i4 == 0) return {1.0, {2, 1, 0}};
  if (i4 == n4) return {-1.0, {1, 2, 0}};
  throw std::logic_error("side_frame: not a boundary plane");
}

void check_slope(const GraphField& g, double limit) {
  double m = g.max_slope();
  if (m >= limit)
    throw std::invalid_argument("slope bound violated: |J| = " + std::to_string(m));
}

}  // namespace

std::array<std::array<double, 4>, 4> GraphField::jacobian(std::int64_t node) const {
  std::array<std::array<double, 4>, 4> J{};
  for (int dir = 0; dir < 4; ++dir)
    for (int a = 0; a < 4; ++a) J[dir][a] = d1_value(dom, s, node, dir, a);
  return J;
}

double GraphField::max_slope() const {
  double worst = 0;
  const std::int64_t n = dom.num_nodes();
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (std::int64_t id = 0; id < n; ++id) {
    auto J = jacobian(id);
    double f = 0;
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 4; ++a) f += J[i][a] * J[i][a];
    worst = std::max(worst, std::sqrt(f));
  }
  return worst;
}

namespace {

void cayley_residual_node(const GraphField& g, EField& out, std::int64_t id) {
  auto t = graph_frame(g.jacobian(id));
  std::array<double, 4> e = project_E(tau4(t[0], t[1], t[2], t[3]));
  for (int b = 0; b < 4; ++b) out.at(id, b) = e[b];
}

}  // namespace

EField cayley_residual(const GraphField& g) {
  check_slope(g, 1.0);
  EField out(g.dom.num_nodes());
  const std::int64_t n = g.dom.num_nodes();
#pragma omp parallel for schedule(static)
  for (std::int64_t id = 0; id < n; ++id) cayley_residual_node(g, out, id);
  return out;
}

EField cayley_residual_serial(const GraphField& g) {
  check_slope(g, 1.0);
  EField out(g.dom.num_nodes());
  for (std::int64_t id = 0; id < g.dom.num_nodes(); ++id)
    cayley_residual_node(g, out, id);
  return out;
}

NormalField second_order_residual(const GraphField& g) {
  NormalField full = apply_Dstar(g.dom, cayley_residual(g));
  // zero out the boundary planes: the second-order rows live at interior nodes
  for (std::int64_t id = 0; id < g.dom.num_nodes(); ++id)
    if (g.dom.on_boundary(g.dom.coords(id)[3]))
      for (int a = 0; a < 4; ++a) full.at(id, a) = 0.0;
  return full;
}

namespace {

// Deformed positive boundary frame (f2', f3', f4') at a boundary node: the
// tangential derivatives only move within the scaffold directions.
std::array<Vec8, 3> boundary_graph_frame(const GraphField& g, const BCSpec& bc,
                                         std::int64_t id, const SideFrame& sf) {
  std::array<Vec8, 3> t{};
  for (int m = 0; m < 3; ++m) {
    int dir = sf.dirs[m];
    t[m][dir] = 1.0;
    // pi_nu of the tangential derivative (motion stays on W)
    std::array<double, 4> ds;
    for (int a = 0; a < 4; ++a) ds[a] = d1_value(g.dom, g.s, id, dir, a);
    for (int r = 0; r < bc.k; ++r) {
      std::array<double, 4> nu = bc.column(r);
      double c = 0;
      for (int a = 0; a < 4; ++a) c += nu[a] * ds[a];
      for (int a = 0; a < 4; ++a) t[m][4 + a] += c * nu[a];
    }
  }
  return t;
}

}  // namespace

NodeField nonlinear_H(const GraphField& g, const BCSpec& bc, double pre_tol) {
  bc.validate();
  check_slope(g, 1.0);
  NodeField out(g.dom.num_nodes());
  const std::int64_t n = g.dom.num_nodes();
  for (std::int64_t id = 0; id < n; ++id) {
    int i4 = g.dom.coords(id)[3];
    if (!g.dom.on_boundary(i4)) continue;
    // precondition: the boundary trace lies on W
    for (int c = bc.k; c < 4; ++c) {
      std::array<double, 4> kc = bc.column(c);
      double acc = 0;
      for (int a = 0; a < 4; ++a) acc += kc[a] * g.s.at(id, a);
      if (std::abs(acc) > pre_tol)
        throw std::invalid_argument("nonlinear_H: boundary trace off the scaffold");
    }
    SideFrame sf = side_frame(i4, g.dom.n[3]);
    std::array<Vec8, 3> t = boundary_graph_frame(g, bc, id, sf);
    Vec8 c3 = cross3(t[0], t[1], t[2]);
    for (int r = 0; r < bc.k; ++r) {
      std::array<double, 4> nu = bc.column(r);
      double acc = 0;
      for (int a = 0; a < 4; ++a) acc += nu[a] * c3[4 + a];
      out.at(id, r) = acc;
    }
  }
  return out;
}

NodeField nonlinear_B(const GraphField& g, const BCSpec& bc, double pre_tol) {
  NodeField h = nonlinear_H(g, bc, pre_tol);
  EField f = cayley_residual(g);
  const auto& A = dirac_coefficients();
  NodeField out(g.dom.num_nodes());
  for (std::int64_t id = 0; id < g.dom.num_nodes(); ++id) {
    int i4 = g.dom.coords(id)[3];
    if (!g.dom.on_boundary(i4)) continue;
    double u_sign = (i4 == 0) ? 1.0 : -1.0;
    // rho^-1(F|_boundary) in normal coordinates
    std::array<double, 4> rinv{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) rinv[a] += u_sign * A[3][b][a] * f.at(id, b);
    for (int r = 0; r < bc.k; ++r) {
      std::array<double, 4> nu = bc.column(r);
      double acc = 0;
      for (int a = 0; a < 4; ++a) acc += nu[a] * rinv[a];
      out.at(id, r) = acc + h.at(id, r);
    }
  }
  return out;
}

LinearSystem assemble_dF(const GraphField& g) {
  check_slope(g, 1.0);
  const std::int64_t n = g.dom.num_nodes();
  std::vector<std::vector<std::pair<std::int64_t, double>>> rowdata(4 * n);
#pragma omp parallel for schedule(static)
  for (std::int64_t id = 0; id < n; ++id) {
    auto t = graph_frame(g.jacobian(id));
    // coefficient matrices at the current frame
    std::array<std::array<std::array<double, 4>, 4>, 4> C{};
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 4; ++a) {
        std::array<Vec8, 4> slots = t;
        slots[i] = basis_vec(5 + a);
        std::array<double, 4> e =
            project_E(tau4(slots[0], slots[1], slots[2], slots[3]));
        for (int b = 0; b < 4; ++b) C[i][b][a] = e[b];
      }
    for (int dir = 0; dir < 4; ++dir) {
      // stencil of d_dir at this node
      std::array<int, 4> c = g.dom.coords(id);
      double h = g.dom.h(dir);
      auto push = [&](std::int64_t nb, double w) {
        for (int b = 0; b < 4; ++b)
          for (int a = 0; a < 4; ++a)
            if (C[dir][b][a] != 0.0)
              rowdata[4 * id + b].push_back({4 * nb + a, w * C[dir][b][a]});
      };
      if (dir < 3) {
        std::array<int, 4> cp = c, cm = c;
        cp[dir] = (c[dir] + 1) % g.dom.n[dir];
        cm[dir] = (c[dir] - 1 + g.dom.n[dir]) % g.dom.n[dir];
        push(g.dom.node(cp[0], cp[1], cp[2], cp[3]), 0.5 / h);
        push(g.dom.node(cm[0], cm[1], cm[2], cm[3]), -0.5 / h);
      } else if (g.dom.periodic4) {
        push(g.dom.node(c[0], c[1], c[2], (c[3] + 1) % g.dom.n[3]), 0.5 / h);
        push(g.dom.node(c[0], c[1], c[2], (c[3] - 1 + g.dom.n[3]) % g.dom.n[3]),
             -0.5 / h);
      } else if (c[3] == 0) {
        push(id, -1.5 / h);
        push(g.dom.node(c[0], c[1], c[2], 1), 2.0 / h);
        push(g.dom.node(c[0], c[1], c[2], 2), -0.5 / h);
      } else if (c[3] == g.dom.n[3]) {
        push(id, 1.5 / h);
        push(g.dom.node(c[0], c[1], c[2], c[3] - 1), -2.0 / h);
        push(g.dom.node(c[0], c[1], c[2], c[3] - 2), 0.5 / h);
      } else {
        push(g.dom.node(c[0], c[1], c[2], c[3] + 1), 0.5 / h);
        push(g.dom.node(c[0], c[1], c[2], c[3] - 1), -0.5 / h);
      }
    }
  }
  // compress
  LinearSystem sys;
  sys.rows = 4 * n;
  sys.cols = 4 * n;
  sys.kind.assign(4 * n, RowKind::Interior);
  sys.row_ptr.assign(4 * n + 1, 0);
  for (std::int64_t r = 0; r < 4 * n; ++r) {
    auto& row = rowdata[r];
    std::sort(row.begin(), row.end());
    std::size_t w = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (w > 0 && row[w - 1].first == row[i].first)
        row[w - 1].second += row[i].second;
      else
        row[w++] = row[i];
    }
    row.resize(w);
    sys.row_ptr[r + 1] = sys.row_ptr[r] + (std::int64_t)w;
  }
  sys.col_idx.resize(sys.row_ptr.back());
  sys.val.resize(sys.row_ptr.back());
  for (std::int64_t r = 0; r < 4 * n; ++r) {
    std::int64_t p = sys.row_ptr[r];
    for (auto& e : rowdata[r]) {
      sys.col_idx[p] = e.first;
      sys.val[p] = e.second;
      ++p;
    }
  }
  return sys;
}

namespace {

// Sparse product C = A B for CSR systems.
LinearSystem sparse_product(const LinearSystem& A, const LinearSystem& B) {
  if (A.cols != B.rows) throw std::invalid_argument("sparse_product: shapes");
  LinearSystem C;
  C.rows = A.rows;
  C.cols = B.cols;
  C.kind.assign(A.rows, RowKind::Interior);
  C.row_ptr.assign(A.rows + 1, 0);
  std::vector<std::vector<std::pair<std::int64_t, double>>> rowdata(A.rows);
#pragma omp parallel for schedule(static)
  for (std::int64_t r = 0; r < A.rows; ++r) {
    auto& out = rowdata[r];
    for (std::int64_t p = A.row_ptr[r]; p < A.row_ptr[r + 1]; ++p) {
      std::int64_t m = A.col_idx[p];
      double av = A.val[p];
      for (std::int64_t q = B.row_ptr[m]; q < B.row_ptr[m + 1]; ++q)
        out.push_back({B.col_idx[q], av * B.val[q]});
    }
    std::sort(out.begin(), out.end());
    std::size_t w = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (w > 0 && out[w - 1].first == out[i].first)
        out[w - 1].second += out[i].second;
      else
        out[w++] = out[i];
    }
    out.resize(w);
  }
  for (std::int64_t r = 0; r < A.rows; ++r)
    C.row_ptr[r + 1] = C.row_ptr[r] + (std::int64_t)rowdata[r].size();
  C.col_idx.resize(C.row_ptr.back());
  C.val.resize(C.row_ptr.back());
  for (std::int64_t r = 0; r < A.rows; ++r) {
    std::int64_t p = C.row_ptr[r];
    for (auto& e : rowdata[r]) {
      C.col_idx[p] = e.first;
      C.val[p] = e.second;
      ++p;
    }
  }
  return C;
}

}  // namespace

LinearSystem assemble_newton_jacobian(const GraphField& g, const BCSpec& bc) {
  bc.validate();
  const std::int64_t n = g.dom.num_nodes();
  LinearSystem dF = assemble_dF(g);
  LinearSystem dG = sparse_product(assemble_Dstar(g.dom), dF);

  LinearSystem sys;
  sys.rows = 4 * n;
  sys.cols = 4 * n;
  sys.kind.assign(4 * n, RowKind::Interior);
  std::vector<std::vector<std::pair<std::int64_t, double>>> rowdata(4 * n);
  const int k = bc.k;

  for (std::int64_t id = 0; id < n; ++id) {
    int i4 = g.dom.coords(id)[3];
    if (!g.dom.on_boundary(i4)) {
      for (int a = 0; a < 4; ++a) {
        std::int64_t r = 4 * id + a;
        for (std::int64_t p = dG.row_ptr[r]; p < dG.row_ptr[r + 1]; ++p)
          rowdata[r].push_back({dG.col_idx[p], dG.val[p]});
      }
      continue;
    }
    double u_sign = (i4 == 0) ? 1.0 : -1.0;
    const auto& A = dirac_coefficients();
    // Dirichlet rows
    for (int slot = 0; slot < 4 - k; ++slot) {
      std::int64_t r = 4 * id + slot;
      sys.kind[r] = RowKind::Dirichlet;
      std::array<double, 4> kc = bc.column(k + slot);
      for (int a = 0; a < 4; ++a)
        if (kc[a] != 0.0) rowdata[r].push_back({4 * id + a, kc[a]});
    }
    // B rows: pi_nu(rho^-1 dF) + dH
    SideFrame sf = side_frame(i4, g.dom.n[3]);
    std::array<Vec8, 3> t = boundary_graph_frame(g, bc, id, sf);
    for (int rr = 0; rr < k; ++rr) {
      std::int64_t r = 4 * id + (4 - k) + rr;
      sys.kind[r] = RowKind::Robin;
      std::array<double, 4> nu = bc.column(rr);
      // weights over the E components of dF rows at this node
      std::array<double, 4> wE{};
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) wE[b] += nu[a] * u_sign * A[3][b][a];
      for (int b = 0; b < 4; ++b) {
        if (wE[b] == 0.0) continue;
        std::int64_t fr = 4 * id + b;
        for (std::int64_t p = dF.row_ptr[fr]; p < dF.row_ptr[fr + 1]; ++p)
          rowdata[r].push_back({dF.col_idx[p], wE[b] * dF.val[p]});
      }
      // dH: differentiate the cross product in each tangential slot; the
      // perturbation moves only in the nu directions.
      for (int m = 0; m < 3; ++m) {
        int dir = sf.dirs[m];
        // coefficient against d_dir(delta) in nu-direction q
        std::array<double, 4> coef{};
        for (int q = 0; q < bc.k; ++q) {
          std::array<Vec8, 3> slots = t;
          Vec8 dirvec{};
          std::array<double, 4> nuq = bc.column(q);
          for (int a = 0; a < 4; ++a) dirvec[4 + a] = nuq[a];
          slots[m] = dirvec;
          Vec8 c3 = cross3(slots[0], slots[1], slots[2]);
          double acc = 0;
          for (int a = 0; a < 4; ++a) acc += nu[a] * c3[4 + a];
          // delta moves in nu_q: contributes acc * d_dir(nu_q . delta)
          for (int a = 0; a < 4; ++a) coef[a] += acc * nuq[a];
        }
        std::array<int, 4> c = g.dom.coords(id);
        double h = g.dom.h(dir);
        std::array<int, 4> cp = c, cm = c;
        cp[dir] = (c[dir] + 1) % g.dom.n[dir];
        cm[dir] = (c[dir] - 1 + g.dom.n[dir]) % g.dom.n[dir];
        std::int64_t idp = g.dom.node(cp[0], cp[1], cp[2], cp[3]);
        std::int64_t idm = g.dom.node(cm[0], cm[1], cm[2], cm[3]);
        for (int a = 0; a < 4; ++a) {
          if (coef[a] == 0.0) continue;
          rowdata[r].push_back({4 * idp + a, 0.5 / h * coef[a]});
          rowdata[r].push_back({4 * idm + a, -0.5 / h * coef[a]});
        }
      }
    }
  }

  sys.row_ptr.assign(4 * n + 1, 0);
  for (std::int64_t r = 0; r < 4 * n; ++r) {
    auto& row = rowdata[r];
    std::sort(row.begin(), row.end());
    std::size_t w = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (w > 0 && row[w - 1].first == row[i].first)
        row[w - 1].second += row[i].second;
      else
        row[w++] = row[i];
    }
    row.resize(w);
    sys.row_ptr[r + 1] = sys.row_ptr[r] + (std::int64_t)w;
  }
  sys.col_idx.resize(sys.row_ptr.back());
  sys.val.resize(sys.row_ptr.back());
  for (std::int64_t r = 0; r < 4 * n; ++r) {
    std::int64_t p = sys.row_ptr[r];
    for (auto& e : rowdata[r]) {
      sys.col_idx[p] = e.first;
      sys.val[p] = e.second;
      ++p;
    }
  }
  return sys;
}

Vec8 PolyVectorField::value(const std::array<double, 4>& base) const {
  Vec8 v = c0;
  for (int j = 0; j < 4; ++j) v = v + base[j] * lin[j];
  v = v + (base[3] * base[3]) * quad4;
  return v;
}

Vec8 PolyVectorField::gradient_column(const std::array<double, 4>& base, int j) const {
  Vec8 g = lin[j];
  if (j == 3) g = g + (2.0 * base[3]) * quad4;
  return g;
}

LieVariationReport lie_variation_check(const FlatCayleyDomain& dom, const BCSpec& bc,
                                       const PolyVectorField& v, double eps) {
  bc.validate();
  LieVariationReport rep;
  const std::int64_t n = dom.num_nodes();

  // v^perp sampled on the grid, pushed through the assembled D.
  NormalField vperp(n);
  for (std::int64_t id = 0; id < n; ++id) {
    Vec8 val = v.value(dom.position(id));
    for (int a = 0; a < 4; ++a) vperp.at(id, a) = val[4 + a];
  }
  EField dv = apply_D(dom, vperp);

  const auto& A = dirac_coefficients();
  for (std::int64_t id = 0; id < n; ++id) {
    std::array<double, 4> x = dom.position(id);
    // J columns of the ambient differential d psi = I + eps grad v restricted
    // to the tangent directions.
    auto pulled_tau = [&](double e) {
      std::array<Vec8, 4> t{};
      for (int i = 0; i < 4; ++i) {
        t[i] = e * v.gradient_column(x, i);
        t[i][i] += 1.0;
      }
      return project_E(tau4(t[0], t[1], t[2], t[3]));
    };
    std::array<double, 4> fp = pulled_tau(eps), fm = pulled_tau(-eps);
    std::array<double, 4> lhs;
    for (int b = 0; b < 4; ++b) lhs[b] = (fp[b] - fm[b]) / (2 * eps);
    for (int b = 0; b < 4; ++b)
      rep.interior_residual =
          std::max(rep.interior_residual, std::abs(lhs[b] - dv.at(id, b)));

    int i4 = dom.coords(id)[3];
    if (!dom.on_boundary(i4)) continue;

    SideFrame sf = side_frame(i4, dom.n[3]);
    // B~ left side: pi_nu(rho^-1(dF~)) + dH~.
    std::array<double, 4> rinv{};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) rinv[a] += sf.u_sign * A[3][b][a] * lhs[b];

    std::array<double, 4> lhs_b{};
    for (int r = 0; r < bc.k; ++r) {
      std::array<double, 4> nu = bc.column(r);
      double t1 = 0;
      for (int a = 0; a < 4; ++a) t1 += nu[a] * rinv[a];
      // dH~ by central differences of Phi(J nu_r, J f2, J f3, J f4).
      auto gamma_eps = [&](double e) {
        auto push = [&](const Vec8& w) {
          Vec8 out = w;
          for (int c = 0; c < 8; ++c)
            if (w[c] != 0.0) out = out + (e * w[c]) * v.gradient_column(x, c);
          return out;
        };
        Vec8 nvec{};
        for (int a = 0; a < 4; ++a) nvec[4 + a] = nu[a];
        std::array<Vec8, 4> args;
        args[0] = push(nvec);
        for (int m = 0; m < 3; ++m) {
          Vec8 f{};
          f[sf.dirs[m]] = 1.0;
          args[m + 1] = push(f);
        }
        return evaluate(phi0(), {args[0], args[1], args[2], args[3]});
      };
      double t2 = (gamma_eps(eps) - gamma_eps(-eps)) / (2 * eps);
      lhs_b[r] = t1 + t2;
    }

    // Right side: pi_nu(grad_u v) + pi_nu((g(grad(v|_W), u))^sharp).
    std::array<double, 4> rhs_b{};
    Vec8 du_v = sf.u_sign * v.gradient_column(x, 3);
    for (int r = 0; r < bc.k; ++r) {
      std::array<double, 4> nu = bc.column(r);
      double acc = 0;
      for (int a = 0; a < 4; ++a) acc += nu[a] * du_v[4 + a];
      // fiber-direction derivative of v paired with u
      Vec8 dnu{};
      for (int a = 0; a < 4; ++a) dnu = dnu + nu[a] * v.gradient_column(x, 4 + a);
      acc += sf.u_sign * dnu[3];
      rhs_b[r] = acc;
    }
    for (int r = 0; r < bc.k; ++r) rep.boundary_residual = std::max(
        rep.boundary_residual, std::abs(lhs_b[r] - rhs_b[r]));
  }
  return rep;
}

Vec8 extend_scaffold_field(const FlatCayleyDomain& dom, const BCSpec& bc,
                           const ScaffoldPerturbation& t, int side,
                           std::array<int, 3> tangential, double dx4,
                           const std::array<double, 4>& y) {
  bc.validate();
  int i4 = (side == 0) ? 0 : dom.n[3];
  std::int64_t id = dom.node(tangential[0], tangential[1], tangential[2], i4);

  // Split the normal offset into fiber (nu) and K parts.
  std::array<double, 4> ynu{}, yk{};
  double ydist2 = 0;
  std::array<double, 4> nu_coords{};
  for (int c = 0; c < 4; ++c) {
    std::array<double, 4> col = bc.column(c);
    double proj = 0;
    for (int a = 0; a < 4; ++a) proj += col[a] * y[a];
    if (c < bc.k) {
      nu_coords[c] = proj;
      for (int a = 0; a < 4; ++a) ynu[a] += proj * col[a];
    } else {
      ydist2 += proj * proj;
      for (int a = 0; a < 4; ++a) yk[a] += proj * col[a];
    }
  }
  double d2 = dx4 * dx4 + ydist2;
  double c2 = t.collar * t.collar;
  double cutoff = 0.0;
  if (d2 < c2) cutoff = std::exp(-d2 / (c2 - d2));

  // K-part from the boundary data, u-part from the fiber profile.
  Vec8 out{};
  for (int a = 0; a < 4; ++a) out[4 + a] = t.k_values.at(id, a);
  double uval = 0;
  for (int a = 0; a < bc.k; ++a) {
    if (t.profile == FiberProfile::Linear) uval += t.u_fiber_coeff[a] * nu_coords[a];
    if (t.profile == FiberProfile::Quadratic)
      uval += t.u_fiber_coeff[a] * nu_coords[a] * nu_coords[a];
  }
  double u_sign = (side == 0) ? 1.0 : -1.0;
  out[3] = u_sign * uval;
  return cutoff * out;
}

double scaffold_variation_linearization(const FlatCayleyDomain& dom, const BCSpec& bc,
                                        const ScaffoldPerturbation& t, double eps) {
  bc.validate();
  const auto& A = dirac_coefficients();
  double worst = 0;
  const std::int64_t n = dom.num_nodes();
  for (std::int64_t id = 0; id < n; ++id) {
    int i4 = dom.coords(id)[3];
    if (!dom.on_boundary(i4)) continue;
    int side = (i4 == 0) ? 0 : 1;
    SideFrame sf = side_frame(i4, dom.n[3]);
    std::array<int, 4> c = dom.coords(id);

    // grad sigma(t) at the boundary node: tangential columns by central
    // differences of the boundary data; u and K columns vanish by the
    // extension properties; nu columns carry the fiber profile derivative.
    std::array<Vec8, 8> grad{};
    for (int j = 0; j < 3; ++j) {
      std::array<int, 3> tp = {c[0], c[1], c[2]}, tm = {c[0], c[1], c[2]};
      tp[j] = (c[j] + 1) % dom.n[j];
      tm[j] = (c[j] - 1 + dom.n[j]) % dom.n[j];
      Vec8 vp = extend_scaffold_field(dom, bc, t, side, tp, 0.0, {0, 0, 0, 0});
      Vec8 vm = extend_scaffold_field(dom, bc, t, side, tm, 0.0, {0, 0, 0, 0});
      grad[j] = (1.0 / (2.0 * dom.h(j))) * (vp - vm);
    }
    // nu-direction columns (ambient normal directions): finite differences in
    // the fiber coordinate.
    for (int a = 0; a < 4; ++a) {
      double step = 1e-6;
      std::array<double, 4> yp{}, ym{};
      yp[a] = step;
      ym[a] = -step;
      Vec8 vp = extend_scaffold_field(dom, bc, t, side, {c[0], c[1], c[2]}, 0.0, yp);
      Vec8 vm = extend_scaffold_field(dom, bc, t, side, {c[0], c[1], c[2]}, 0.0, ym);
      grad[4 + a] = (1.0 / (2.0 * step)) * (vp - vm);
    }

    auto b_hat = [&](double e) {
      // J = I + e grad sigma applied to frame vectors.
      auto push = [&](const Vec8& w) {
        Vec8 out = w;
        for (int cc = 0; cc < 8; ++cc)
          if (w[cc] != 0.0) out = out + (e * w[cc]) * grad[cc];
        return out;
      };
      // F-part
      std::array<Vec8, 4> tX{};
      for (int i = 0; i < 4; ++i) {
        Vec8 ei{};
        ei[i] = 1.0;
        tX[i] = push(ei);
      }
      std::array<double, 4> fE = project_E(tau4(tX[0], tX[1], tX[2], tX[3]));
      std::array<double, 4> rinv{};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) rinv[a] += sf.u_sign * A[3][b][a] * fE[b];
      // H-part: g(v_e, J w) against the nu frame with v_e the pushed cross
      // product of the boundary frame.
      std::array<Vec8, 3> bf{};
      for (int m = 0; m < 3; ++m) {
        Vec8 f{};
        f[sf.dirs[m]] = 1.0;
        bf[m] = push(f);
      }
      Vec8 ve = cross3(bf[0], bf[1], bf[2]);
      std::array<double, 4> out{};
      for (int r = 0; r < bc.k; ++r) {
        std::array<double, 4> nucol = bc.column(r);
        Vec8 nvec{};
        for (int a = 0; a < 4; ++a) nvec[4 + a] = nucol[a];
        Vec8 jn = push(nvec);
        double t1 = 0;
        for (int a = 0; a < 4; ++a) t1 += nucol[a] * rinv[a];
        out[r] = t1 + dot(ve, jn);
      }
      return out;
    };

    std::array<double, 4> bp = b_hat(eps), bm = b_hat(-eps);
    for (int r = 0; r < bc.k; ++r) {
      double lhs = (bp[r] - bm[r]) / (2 * eps);
      // right side: g(grad_{nu_r} sigma, u)
      std::array<double, 4> nucol = bc.column(r);
      Vec8 dnu{};
      for (int a = 0; a < 4; ++a) dnu = dnu + nucol[a] * grad[4 + a];
      double rhs = sf.u_sign * dnu[3];
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

NewtonResult newton_solve(const FlatCayleyDomain& dom, const BCSpec& bc,
                          const NodeField& dirichlet_data,
                          const std::optional<StructureTilt>& tilt,
                          const NewtonOptions& opts) {
  bc.validate();
  if (bc.k > 0) {
    // The flat configuration with k > 0 has a k-dimensional kernel; the local
    // uniqueness statement needs the generic (injective) case.
    KernelReport kr = kernel_dim(assemble_bvp(dom, bc));
    if (kr.dim != 0)
      throw std::invalid_argument("newton_solve: non-generic configuration");
  }

  std::array<double, 4> tilt_source{};
  if (tilt && tilt->strength != 0.0) {
    KForm e7 = lambda2_project(tilt->e_part7).part7;
    std::array<double, 4> pe = project_E(e7);
    for (int b = 0; b < 4; ++b) tilt_source[b] = -tilt->strength * pe[b];
  }
  auto tilt_profile = [&](std::int64_t id) {
    if (!tilt) return 0.0;
    if (!tilt->profile) return 1.0;
    return tilt->profile(dom.position(id));
  };

  const std::int64_t n = dom.num_nodes();
  const int k = bc.k;
  NewtonResult res;
  res.solution = NormalField(n);

  auto residual = [&](const NormalField& s) {
    GraphField g(dom, s);
    check_slope(g, opts.slope_limit);
    EField f = cayley_residual(g);
    if (tilt)
      for (std::int64_t id = 0; id < n; ++id) {
        double pr = tilt_profile(id);
        for (int b = 0; b < 4; ++b) f.at(id, b) += pr * tilt_source[b];
      }
    NormalField gres = apply_Dstar(dom, f);
    const auto& A = dirac_coefficients();

    std::vector<double> r(4 * n, 0.0);
    for (std::int64_t id = 0; id < n; ++id) {
      int i4 = dom.coords(id)[3];
      if (!dom.on_boundary(i4)) {
        for (int a = 0; a < 4; ++a) r[4 * id + a] = gres.at(id, a);
        continue;
      }
      double u_sign = (i4 == 0) ? 1.0 : -1.0;
      for (int slot = 0; slot < 4 - k; ++slot) {
        std::array<double, 4> kc = bc.column(k + slot);
        double acc = 0;
        for (int a = 0; a < 4; ++a)
          acc += kc[a] * (s.at(id, a) - dirichlet_data.at(id, a));
        r[4 * id + slot] = acc;
      }
      if (k > 0) {
        SideFrame sf = side_frame(i4, dom.n[3]);
        std::array<Vec8, 3> bf = boundary_graph_frame(g, bc, id, sf);
        Vec8 c3 = cross3(bf[0], bf[1], bf[2]);
        std::array<double, 4> rinv{};
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) rinv[a] += u_sign * A[3][b][a] * f.at(id, b);
        for (int rr = 0; rr < k; ++rr) {
          std::array<double, 4> nu = bc.column(rr);
          double acc = 0;
          for (int a = 0; a < 4; ++a) acc += nu[a] * (rinv[a] + c3[4 + a]);
          r[4 * id + (4 - k) + rr] = acc;
        }
      }
    }
    return r;
  };

  for (int it = 0; it <= opts.max_iter; ++it) {
    std::vector<double> r = residual(res.solution);
    double rnorm = 0;
    for (double x : r) rnorm = std::max(rnorm, std::abs(x));
    res.residual_trace.push_back(rnorm);
    if (rnorm < opts.tol) {
      res.converged = true;
      return res;
    }
    if (it == opts.max_iter) break;
    if (res.residual_trace.size() >= 3 &&
        rnorm > 4.0 * res.residual_trace[res.residual_trace.size() - 2] &&
        res.residual_trace[res.residual_trace.size() - 2] >
            4.0 * res.residual_trace[res.residual_trace.size() - 3])
      throw std::runtime_error("newton_solve: divergence detected");

    GraphField g(dom, res.solution);
    LinearSystem jac = assemble_newton_jacobian(g, bc);
    for (double& x : r) x = -x;
    std::vector<double> delta = lu_solve(jac.to_dense(), r);
    for (std::int64_t i = 0; i < 4 * n; ++i) res.solution.v[i] += delta[i];
  }
  throw std::runtime_error("newton_solve: no convergence after max_iter");
}

namespace {

void volume_flux_node(const GraphField& g, std::vector<double>& vol,
                      std::vector<double>& flux, std::vector<double>& margin,
                      std::int64_t id) {
  auto t = graph_frame(g.jacobian(id));
  // Gram determinant of the graph frame
  double gram[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) gram[i][j] = dot(t[i], t[j]);
  // 4x4 determinant by elimination
  double det = 1.0;
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(gram[r][col]) > std::abs(gram[piv][col])) piv = r;
    if (piv != col) {
      for (int cc = 0; cc < 4; ++cc) std::swap(gram[piv][cc], gram[col][cc]);
      det = -det;
    }
    det *= gram[col][col];
    for (int r = col + 1; r < 4; ++r) {
      double fct = gram[r][col] / gram[col][col];
      for (int cc = col; cc < 4; ++cc) gram[r][cc] -= fct * gram[col][cc];
    }
  }
  double vol_el = std::sqrt(std::max(det, 0.0));
  double flux_el = evaluate(phi0(), {t[0], t[1], t[2], t[3]});
  int i4 = g.dom.coords(id)[3];
  double w = g.dom.on_boundary(i4) ? 0.5 : 1.0;
  vol[id] = w * vol_el;
  flux[id] = w * flux_el;
  margin[id] = 1.0 - flux_el / vol_el;
}

VolumeFluxReport volume_flux_reduce(const GraphField& g,
                                    const std::vector<double>& vol,
                                    const std::vector<double>& flux,
                                    const std::vector<double>& margin) {
  VolumeFluxReport rep;
  double cell = g.dom.h(0) * g.dom.h(1) * g.dom.h(2) * g.dom.h(3);
  rep.min_margin = margin[0];
  for (std::int64_t id = 0; id < g.dom.num_nodes(); ++id) {
    rep.volume += vol[id];
    rep.flux += flux[id];
    rep.min_margin = std::min(rep.min_margin, margin[id]);
  }
  rep.volume *= cell;
  rep.flux *= cell;
  return rep;
}

}  // namespace

VolumeFluxReport volume_and_flux(const GraphField& g) {
  check_slope(g, 1.0);
  const std::int64_t n = g.dom.num_nodes();
  std::vector<double> vol(n), flux(n), margin(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t id = 0; id < n; ++id) volume_flux_node(g, vol, flux, margin, id);
  return volume_flux_reduce(g, vol, flux, margin);
}

VolumeFluxReport volume_and_flux_serial(const GraphField& g) {
  check_slope(g, 1.0);
  const std::int64_t n = g.dom.num_nodes();
  std::vector<double> vol(n), flux(n), margin(n);
  for (std::int64_t id = 0; id < n; ++id) volume_flux_node(g, vol, flux, margin, id);
  return volume_flux_reduce(g, vol, flux, margin);
}

}  // namespace spin7
