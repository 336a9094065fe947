#pragma once

#include <array>
#include <optional>
#include <vector>

#include "spin7/algebra.hpp"

// Cayley 4-planes in (R^8, Phi_0): detection, Spin(7)-frame completion, the
// adapted splitting Lambda^2_7 = Lambda^2_- X + E, the boundary projections
// for a scaffold fiber, and the pointwise linearization identities used by
// the deformation theory.

namespace spin7 {

struct Spin7Frame {
  std::array<Vec8, 8> e;  // e[0..7] = e_1..e_8, orthonormal

  // Max deviation of Phi_0 evaluated on the frame from the model coefficient
  // pattern, over all 70 increasing quadruples.
  double pattern_residual() const;
  double orthonormality_residual() const;
};

struct CayleyPlane {
  std::array<Vec8, 4> tangent;  // positive frame, Phi_0(tangent) = 1
  std::array<Vec8, 4> normal;   // completes tangent to a Spin(7)-frame
  std::array<KForm, 4> e_basis; // E-fiber frame, e_basis[a] = tangent[0] x normal[a]

  Spin7Frame frame() const;
};

// Normal directions along the boundary split into nu_W(dX) (tangent to the
// scaffold) and K (normal to the scaffold).
struct ScaffoldFiber {
  int k = 0;                          // dim nu_W(dX), 0..4
  std::vector<Vec8> w_tangent_normals;  // k vectors
  std::vector<Vec8> k_basis;             // 4-k vectors
};

// Modified Gram-Schmidt; throws if the input is numerically degenerate.
std::vector<Vec8> orthonormalize(const std::vector<Vec8>& v, double tol = 1e-12);

// lambda with Phi_0|_V = lambda vol_V for the oriented span of the given
// 4-tuple; always in [-1, 1] up to roundoff.
double calibration_value(const std::array<Vec8, 4>& span);

bool is_cayley(const std::array<Vec8, 4>& span, double tol = 1e-10);

// Frame completion from (e1, e2, e3, e5); see the invariants on Spin7Frame.
Spin7Frame complete_spin7_frame(const Vec8& e1, const Vec8& e2, const Vec8& e3,
                                const Vec8& e5, double tol = 1e-10);

// Adapted frame data for a Cayley plane; e5 is chosen deterministically from
// a fixed candidate list unless supplied.
CayleyPlane adapted_plane(const std::array<Vec8, 4>& span,
                          const std::optional<Vec8>& e5 = std::nullopt);

// Coordinates of the E-component of a 2-form in the e_basis frame.
std::array<double, 4> pi_E(const KForm& alpha, const CayleyPlane& p);

// rho(s) = u x s in E-coordinates where u = p.tangent[0]; the matrix is
// orthogonal, so rho_inv is its transpose.
std::array<double, 4> rho(const Vec8& s, const CayleyPlane& p);
Vec8 rho_inv(const std::array<double, 4>& e_coords, const CayleyPlane& p);

struct ScaffoldProjections {
  Vec8 pi_K;
  Vec8 pi_nu;
  Vec8 pi_W;
};

// Orthogonal projections of an ambient vector onto K, nu_W(dX) and T W for a
// boundary configuration with boundary 3-frame (p.tangent[1..3]).
ScaffoldProjections scaffold_projections(const Vec8& x, const CayleyPlane& p,
                                         const ScaffoldFiber& s);

// dim-5 orthogonality characterization: flagA = (u is orthogonal to W),
// flagB = (n = (*_W Phi|_W)^sharp lies in the boundary 3-plane).
std::pair<bool, bool> orthogonality_char_dim5(const CayleyPlane& p,
                                              const std::array<Vec8, 5>& w_frame,
                                              double tol = 1e-8);

// dim-6 characterization: flagB = (omega = -*_W Phi|_W vanishes on the
// boundary 3-plane).
std::pair<bool, bool> orthogonality_char_dim6(const CayleyPlane& p,
                                              const std::array<Vec8, 6>& w_frame,
                                              double tol = 1e-8);

// Pointwise identity of the structure-variation linearizations for
// chi = h(tau, e): the F-side sum -chi(n_a, t2, t3, t4) against -pi_E(e) and
// the H-side sum against pi_nu(rho^-1(pi_E(e))). Returns the max deviation.
double structure_variation_identity(const KForm& e_part7, const CayleyPlane& p,
                                    const ScaffoldFiber& s);

// The cancellation (dB~)(0, chi) = 0: both sides computed independently.
double b_tilde_cancellation(const KForm& e_part7, const CayleyPlane& p,
                            const ScaffoldFiber& s);

}  // namespace spin7
