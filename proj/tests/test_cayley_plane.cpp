#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "spin7/cayley_plane.hpp"
#include "spin7/rng.hpp"

#include <cmath>

using namespace spin7;

namespace {

Vec8 ev(int i) { return basis_vec(i); }

std::array<Vec8, 4> standard_plane() {
  return {ev(1), ev(2), ev(3), ev(4)};
}

// Random admissible input for the frame completion.
struct Quad {
  Vec8 e1, e2, e3, e5;
};

Quad random_admissible(Rng& rng) {
  for (;;) {
    std::vector<Vec8> v;
    for (int i = 0; i < 3; ++i) v.push_back(rng.gaussian_vec8());
    std::vector<Vec8> q;
    try {
      q = orthonormalize(v);
    } catch (const std::exception&) {
      continue;
    }
    Vec8 c = cross3(q[0], q[1], q[2]);
    Vec8 cand = rng.gaussian_vec8();
    for (const Vec8& b : {q[0], q[1], q[2], c}) cand = cand - dot(cand, b) * b;
    double n = norm(cand);
    if (n < 1e-6) continue;
    return {q[0], q[1], q[2], (1.0 / n) * cand};
  }
}

CayleyPlane random_cayley_plane(Rng& rng) {
  Quad q = random_admissible(rng);
  Spin7Frame f = complete_spin7_frame(q.e1, q.e2, q.e3, q.e5);
  CayleyPlane p;
  for (int i = 0; i < 4; ++i) {
    p.tangent[i] = f.e[i];
    p.normal[i] = f.e[4 + i];
  }
  for (int a = 0; a < 4; ++a) p.e_basis[a] = cross2(p.tangent[0], p.normal[a]);
  return p;
}

ScaffoldFiber fiber_for(const CayleyPlane& p, int k) {
  ScaffoldFiber s;
  s.k = k;
  for (int a = 0; a < k; ++a) s.w_tangent_normals.push_back(p.normal[a]);
  for (int a = k; a < 4; ++a) s.k_basis.push_back(p.normal[a]);
  return s;
}

}  // namespace

TEST_CASE("calibration value on coordinate planes") {
  CHECK(calibration_value(standard_plane()) == doctest::Approx(1.0));
  CHECK(calibration_value({ev(1), ev(2), ev(7), ev(8)}) == doctest::Approx(-1.0));
  CHECK(calibration_value({ev(2), ev(1), ev(7), ev(8)}) == doctest::Approx(1.0));
  CHECK_THROWS(calibration_value({ev(1), ev(2), ev(3), ev(3)}));
}

TEST_CASE("calibration inequality on random planes") {
  Rng rng(101, "calib");
  for (int t = 0; t < 2000; ++t) {
    std::array<Vec8, 4> v;
    for (auto& x : v) x = rng.gaussian_vec8();
    double lam = calibration_value(v);
    CHECK(std::abs(lam) <= 1.0 + 1e-12);
  }
}

TEST_CASE("cayley iff calibration extremal") {
  Rng rng(103, "iff");
  int cayley_seen = 0;
  for (int t = 0; t < 500; ++t) {
    std::array<Vec8, 4> v;
    if (t % 2 == 0) {
      for (auto& x : v) x = rng.gaussian_vec8();
    } else {
      CayleyPlane p = random_cayley_plane(rng);
      v = p.tangent;
      ++cayley_seen;
    }
    std::vector<Vec8> f = orthonormalize({v[0], v[1], v[2], v[3]});
    double lam = evaluate(phi0(), {f[0], f[1], f[2], f[3]});
    double tau_norm = norm(tau4(f[0], f[1], f[2], f[3]));
    bool extremal = std::abs(std::abs(lam) - 1.0) < 1e-10;
    bool tau_zero = tau_norm < 1e-8;
    CHECK(extremal == tau_zero);
  }
  CHECK(cayley_seen > 0);
}

TEST_CASE("frame completion reproduces the standard frame") {
  Spin7Frame f = complete_spin7_frame(ev(1), ev(2), ev(3), ev(5));
  for (int i = 0; i < 8; ++i) CHECK(norm(f.e[i] - ev(i + 1)) < 1e-14);
  CHECK(f.pattern_residual() < 1e-14);
  CHECK(f.orthonormality_residual() < 1e-14);
}

TEST_CASE("frame completion on random admissible data") {
  Rng rng(107, "complete");
  for (int t = 0; t < 100; ++t) {
    Quad q = random_admissible(rng);
    Spin7Frame f = complete_spin7_frame(q.e1, q.e2, q.e3, q.e5);
    CHECK(f.orthonormality_residual() < 1e-10);
    CHECK(f.pattern_residual() < 1e-10);
  }
}

TEST_CASE("frame completion rejects bad input") {
  CHECK_THROWS(complete_spin7_frame(ev(1), ev(2), ev(3), ev(1)));
  CHECK_THROWS(complete_spin7_frame(ev(1), ev(2), ev(3), ev(4)));  // e5 = e1xe2xe3 dir
  CHECK_THROWS(complete_spin7_frame(ev(1), ev(1), ev(3), ev(5)));
  CHECK_THROWS(complete_spin7_frame(2.0 * ev(1), ev(2), ev(3), ev(5)));
}

TEST_CASE("completion is rigid: perturbing any output vector breaks the pattern") {
  Rng rng(109, "rigid");
  Quad q = random_admissible(rng);
  Spin7Frame f = complete_spin7_frame(q.e1, q.e2, q.e3, q.e5);
  // Any other completion with the same (e1,e2,e3,e5) must differ from the
  // canonical one; rotating e6 against e7 keeps orthonormality but must break
  // the Phi_0 pattern.
  for (double angle : {1e-3, 1e-2, 0.1}) {
    Spin7Frame g = f;
    g.e[5] = std::cos(angle) * f.e[5] + std::sin(angle) * f.e[6];
    g.e[6] = -std::sin(angle) * f.e[5] + std::cos(angle) * f.e[6];
    CHECK(g.orthonormality_residual() < 1e-12);
    CHECK(g.pattern_residual() > angle / 4.0);
  }
}

TEST_CASE("adapted plane: standard and rotated") {
  CayleyPlane p = adapted_plane(standard_plane());
  for (int i = 0; i < 4; ++i) CHECK(norm(p.tangent[i] - ev(i + 1)) < 1e-14);
  CHECK(p.frame().pattern_residual() < 1e-12);

  Rng rng(113, "adapted");
  for (int t = 0; t < 50; ++t) {
    CayleyPlane q = random_cayley_plane(rng);
    // Re-derive from the (shuffled) tangent span only.
    std::array<Vec8, 4> span = {q.tangent[2], q.tangent[0], q.tangent[3], q.tangent[1]};
    CayleyPlane r = adapted_plane(span);
    CHECK(r.frame().pattern_residual() < 1e-9);
    CHECK(r.frame().orthonormality_residual() < 1e-10);
    // e_basis is orthonormal and vanishes on the tangent plane
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        double want = (a == b) ? 1.0 : 0.0;
        CHECK(inner(r.e_basis[a], r.e_basis[b]) == doctest::Approx(want).epsilon(1e-9));
      }
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          CHECK(std::abs(evaluate(r.e_basis[a], {r.tangent[i], r.tangent[j]})) < 1e-9);
    }
  }

  CHECK_THROWS(adapted_plane({ev(1), ev(2), ev(3), ev(5)}));
}

TEST_CASE("pi_E: basis, anti-self-dual kernel, cross2 restriction") {
  Rng rng(127, "piE");
  for (int t = 0; t < 30; ++t) {
    CayleyPlane p = random_cayley_plane(rng);

    std::array<double, 4> c = pi_E(p.e_basis[1], p);
    CHECK(c[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-10));

    // Anti-self-dual tangent 2-forms, embedded by alpha -> 2 pi_7(alpha),
    // are killed by pi_E.
    auto asd = [&](int a, int b, int c2, int d) {
      KForm w = wedge(flat(p.tangent[a]), flat(p.tangent[b])) -
                wedge(flat(p.tangent[c2]), flat(p.tangent[d]));
      return 0.5 * (w - hodge_star(wedge(w, phi0())));
    };
    for (const KForm& alpha : {asd(0, 1, 2, 3), asd(0, 2, 3, 1), asd(0, 3, 1, 2)}) {
      std::array<double, 4> z = pi_E(alpha, p);
      for (double x : z) CHECK(std::abs(x) < 1e-9);
    }

    // cross2(tangent, normal) lies in E: reconstructing from pi_E coordinates
    // loses nothing.
    Vec8 tv{}, nv{};
    for (int i = 0; i < 4; ++i) {
      tv = tv + rng.gaussian() * p.tangent[i];
      nv = nv + rng.gaussian() * p.normal[i];
    }
    KForm x = cross2(tv, nv);
    std::array<double, 4> e = pi_E(x, p);
    KForm back(2, 8);
    for (int a = 0; a < 4; ++a) back += e[a] * p.e_basis[a];
    CHECK(norm(x - back) < 1e-9);

    // cross2(tangent, tangent) has no E part
    Vec8 tv2{};
    for (int i = 0; i < 4; ++i) tv2 = tv2 + rng.gaussian() * p.tangent[i];
    std::array<double, 4> zt = pi_E(cross2(tv, tv2), p);
    for (double v : zt) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("cross3 restriction laws on a Cayley plane") {
  Rng rng(131, "c3restrict");
  for (int t = 0; t < 30; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    auto tan = [&] {
      Vec8 v{};
      for (int i = 0; i < 4; ++i) v = v + rng.gaussian() * p.tangent[i];
      return v;
    };
    auto nor = [&] {
      Vec8 v{};
      for (int i = 0; i < 4; ++i) v = v + rng.gaussian() * p.normal[i];
      return v;
    };
    auto tangential_part = [&](const Vec8& v) {
      Vec8 r{};
      for (int i = 0; i < 4; ++i) r = r + dot(v, p.tangent[i]) * p.tangent[i];
      return r;
    };
    Vec8 a, b, c, r;
    // T x T x T -> T
    a = tan(); b = tan(); c = tan();
    r = cross3(a, b, c);
    CHECK(norm(r - tangential_part(r)) < 1e-9);
    // T x T x N -> N
    c = nor();
    r = cross3(a, b, c);
    CHECK(norm(tangential_part(r)) < 1e-9);
    // T x N x N -> T
    b = nor();
    r = cross3(a, b, c);
    CHECK(norm(r - tangential_part(r)) < 1e-9);
    // N x N x N -> N
    a = nor();
    r = cross3(a, b, c);
    CHECK(norm(tangential_part(r)) < 1e-9);
  }
}

TEST_CASE("normal frames from cross3 are orthonormal") {
  Rng rng(137, "nframe");
  for (int t = 0; t < 20; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    for (auto [k, l] : {std::pair{1, 2}, {2, 3}, {1, 3}}) {
      std::array<Vec8, 4> fr;
      for (int a = 0; a < 4; ++a) fr[a] = cross3(p.normal[a], p.tangent[k], p.tangent[l]);
      for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
          double want = (a == b) ? 1.0 : 0.0;
          CHECK(dot(fr[a], fr[b]) == doctest::Approx(want).epsilon(1e-9));
        }
        // and it is a normal vector
        for (int i = 0; i < 4; ++i) CHECK(std::abs(dot(fr[a], p.tangent[i])) < 1e-9);
      }
    }
  }
}

TEST_CASE("rho is an isometry with inverse rho_inv") {
  Rng rng(139, "rho");
  for (int t = 0; t < 50; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    std::array<double, 4> c = rho(p.normal[0], p);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-10));
    for (int a = 1; a < 4; ++a) CHECK(std::abs(c[a]) < 1e-9);

    Vec8 s{};
    for (int a = 0; a < 4; ++a) s = s + rng.gaussian() * p.normal[a];
    std::array<double, 4> rs = rho(s, p);
    double n2 = 0;
    for (double x : rs) n2 += x * x;
    CHECK(std::sqrt(n2) == doctest::Approx(norm(s)).epsilon(1e-9));
    CHECK(norm(rho_inv(rs, p) - s) < 1e-9);
  }
}

TEST_CASE("scaffold projections") {
  Rng rng(149, "proj");
  CayleyPlane p = random_cayley_plane(rng);
  Vec8 x = rng.gaussian_vec8();

  ScaffoldFiber s0 = fiber_for(p, 0);
  ScaffoldProjections pr0 = scaffold_projections(x, p, s0);
  CHECK(norm(pr0.pi_nu) < 1e-12);
  Vec8 full_normal{};
  for (int a = 0; a < 4; ++a) full_normal = full_normal + dot(x, p.normal[a]) * p.normal[a];
  CHECK(norm(pr0.pi_K - full_normal) < 1e-10);

  ScaffoldFiber s4 = fiber_for(p, 4);
  CHECK(norm(scaffold_projections(x, p, s4).pi_K) < 1e-12);

  for (int k = 0; k <= 4; ++k) {
    ScaffoldFiber s = fiber_for(p, k);
    ScaffoldProjections pr = scaffold_projections(x, p, s);
    CHECK(norm(pr.pi_K + pr.pi_nu - full_normal) < 1e-10);
  }
}

TEST_CASE("orthogonality characterization, dim 5") {
  CayleyPlane p = adapted_plane(standard_plane());
  // Boundary frame (e2,e3,e4), u = e1; W = span(e2..e6) meets X orthogonally.
  std::array<Vec8, 5> w = {ev(2), ev(3), ev(4), ev(5), ev(6)};
  auto [aon, bon] = orthogonality_char_dim5(p, w);
  CHECK(aon == true);
  CHECK(bon == true);

  // Tilt W toward u.
  double th = 0.3;
  std::array<Vec8, 5> wt = {ev(2), ev(3), ev(4),
                            std::cos(th) * ev(5) + std::sin(th) * ev(1), ev(6)};
  auto [atilt, btilt] = orthogonality_char_dim5(p, wt);
  CHECK(atilt == false);
  CHECK(btilt == false);

  CHECK_THROWS(orthogonality_char_dim5(p, {ev(1), ev(3), ev(4), ev(5), ev(6)}));
}

TEST_CASE("orthogonality characterization dim 5: agreement fuzz") {
  Rng rng(151, "dim5fuzz");
  for (int t = 0; t < 100; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    // Extra directions in span(normals) + optionally a u component.
    bool tilt = (t % 2 == 1);
    Vec8 x1{}, x2{};
    for (int a = 0; a < 4; ++a) {
      x1 = x1 + rng.gaussian() * p.normal[a];
      x2 = x2 + rng.gaussian() * p.normal[a];
    }
    if (tilt) x1 = x1 + rng.uniform(0.3, 1.0) * p.tangent[0];
    std::vector<Vec8> ext;
    try {
      ext = orthonormalize({p.tangent[1], p.tangent[2], p.tangent[3], x1, x2});
    } catch (const std::exception&) {
      continue;
    }
    std::array<Vec8, 5> w = {ext[0], ext[1], ext[2], ext[3], ext[4]};
    auto [fa, fb] = orthogonality_char_dim5(p, w, 1e-7);
    CHECK(fa == fb);
    CHECK(fa == !tilt);
  }
}

TEST_CASE("orthogonality characterization, dim 6") {
  CayleyPlane p = adapted_plane(standard_plane());
  // The proof's frame: W = (e2, e6, e3, e7, e4, e8).
  std::array<Vec8, 6> w = {ev(2), ev(6), ev(3), ev(7), ev(4), ev(8)};
  auto [fa, fb] = orthogonality_char_dim6(p, w);
  CHECK(fa == true);
  CHECK(fb == true);

  double th = 0.25;
  std::array<Vec8, 6> wt = {ev(2), std::cos(th) * ev(6) + std::sin(th) * ev(1),
                            ev(3), ev(7), ev(4), ev(8)};
  auto [ta, tb] = orthogonality_char_dim6(p, wt);
  CHECK(ta == false);
  CHECK(tb == false);
}

TEST_CASE("orthogonality characterization dim 6: agreement fuzz") {
  Rng rng(157, "dim6fuzz");
  for (int t = 0; t < 100; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    bool tilt = (t % 2 == 1);
    Vec8 x1{}, x2{}, x3{};
    for (int a = 0; a < 4; ++a) {
      x1 = x1 + rng.gaussian() * p.normal[a];
      x2 = x2 + rng.gaussian() * p.normal[a];
      x3 = x3 + rng.gaussian() * p.normal[a];
    }
    if (tilt) x2 = x2 + rng.uniform(0.3, 1.0) * p.tangent[0];
    std::vector<Vec8> ext;
    try {
      ext = orthonormalize({p.tangent[1], p.tangent[2], p.tangent[3], x1, x2, x3});
    } catch (const std::exception&) {
      continue;
    }
    std::array<Vec8, 6> w = {ext[0], ext[1], ext[2], ext[3], ext[4], ext[5]};
    auto [fa, fb] = orthogonality_char_dim6(p, w, 1e-7);
    CHECK(fa == fb);
    CHECK(fa == !tilt);
  }
}

TEST_CASE("structure variation identities (pointwise 4.2 lemmas)") {
  Rng rng(163, "var");
  for (int t = 0; t < 200; ++t) {
    CayleyPlane p = random_cayley_plane(rng);
    ScaffoldFiber s = fiber_for(p, (int)(rng.next_u64() % 5));
    KForm e(2, 8);
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.gaussian();
    CHECK(structure_variation_identity(e, p, s) < 1e-10);
    CHECK(b_tilde_cancellation(e, p, s) < 1e-12);
  }

  // e = e_basis[a]: F-side equals minus the a-th unit coordinate.
  CayleyPlane p = adapted_plane(standard_plane());
  ScaffoldFiber s = fiber_for(p, 2);
  CHECK(structure_variation_identity(p.e_basis[2], p, s) < 1e-12);

  // embedded tangent anti-self-dual form: both sides vanish
  KForm w = wedge(flat(p.tangent[0]), flat(p.tangent[1])) -
            wedge(flat(p.tangent[2]), flat(p.tangent[3]));
  KForm asd = 0.5 * (w - hodge_star(wedge(w, phi0())));
  std::array<double, 4> z = pi_E(asd, p);
  for (double x : z) CHECK(std::abs(x) < 1e-12);
  CHECK(structure_variation_identity(asd, p, s) < 1e-12);
}
