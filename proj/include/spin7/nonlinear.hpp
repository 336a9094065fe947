#pragma once

#include <functional>
#include <optional>

#include "spin7/bvp.hpp"

// Nonlinear Cayley deformation maps for graphs over the flat model plane:
// the tau-residual F, the second-order residual G = D*F, the boundary
// orthogonality operator H and the combined operator B, Lie-variation
// identities, scaffold-field extension, Newton continuation and the
// volume/flux quadrature.

namespace spin7 {

// Normal section interpreted as the graph x -> (x, s(x)); the Jacobian uses
// the same stencils as the linear theory. Nonlinear operations require the
// slope bound |J|_F < 1.
struct GraphField {
  FlatCayleyDomain dom;
  NormalField s;

  explicit GraphField(const FlatCayleyDomain& d) : dom(d), s(d.num_nodes()) {}
  GraphField(const FlatCayleyDomain& d, NormalField field)
      : dom(d), s(std::move(field)) {}

  std::array<std::array<double, 4>, 4> jacobian(std::int64_t node) const;
  double max_slope() const;  // max Frobenius norm of J over nodes
};

// F(s): E-coordinates of tau on the graph frame, per node.
EField cayley_residual(const GraphField& g);
EField cayley_residual_serial(const GraphField& g);

// G(s) = D*(F(s)); values at interior nodes (boundary rows zero).
NormalField second_order_residual(const GraphField& g);

// H(s|_boundary): nu_W(dX)-valued boundary field from the cross product of
// the deformed boundary frame; requires pi_K(s|_boundary) = 0.
NodeField nonlinear_H(const GraphField& g, const BCSpec& bc, double pre_tol = 1e-9);

// B(s) = pi_nu(rho^-1(F(s)|_boundary)) + H(s|_boundary).
NodeField nonlinear_B(const GraphField& g, const BCSpec& bc, double pre_tol = 1e-9);

// Linearization of F at the graph s as a sparse operator (4 rows per node);
// at s = 0 it coincides with assemble_D.
LinearSystem assemble_dF(const GraphField& g);

// Exact Jacobian of the discrete boundary problem (G rows interior,
// Dirichlet and B rows at the boundary) at the graph s.
LinearSystem assemble_newton_jacobian(const GraphField& g, const BCSpec& bc);

// Polynomial ambient vector field with analytic gradient: v(x) = c0 +
// sum_j x_j lin[j] + x4^2 quad4.
struct PolyVectorField {
  Vec8 c0{};
  std::array<Vec8, 8> lin{};
  Vec8 quad4{};

  Vec8 value(const std::array<double, 4>& base) const;  // at (x, 0)
  // Column j of the ambient gradient at (x, 0); j runs over all 8 directions.
  Vec8 gradient_column(const std::array<double, 4>& base, int j) const;
};

struct LieVariationReport {
  double interior_residual = 0;  // (dF~)(0, L_v Phi) vs D(v^perp)
  double boundary_residual = 0;  // (dB~)(0, L_v Phi) vs the boundary formula
};

// Finite-differences the pullback of tau (and of the boundary data) along
// x -> x + eps v(x) with the structure fixed, and compares with the assembled
// D and the analytic right sides.
LieVariationReport lie_variation_check(const FlatCayleyDomain& dom, const BCSpec& bc,
                                       const PolyVectorField& v, double eps);

// Scaffold perturbation t in nu_M(W) = span(u) + K: a K-valued section over
// each boundary plane plus a fiber profile for the u-component.
enum class FiberProfile { None, Linear, Quadratic };

struct ScaffoldPerturbation {
  // K-valued values (normal coordinates) on the two boundary planes; only
  // boundary-node entries are read.
  NodeField k_values;
  std::array<double, 4> u_fiber_coeff{};  // alpha_a against nu coordinates
  FiberProfile profile = FiberProfile::None;
  double collar = 0.2;
};

// Ambient extension sigma(t) evaluated at a point offset from the boundary
// node (i1,i2,i3) on the given side: dx4 is the signed interval offset from
// the boundary plane, y the normal-coordinate offset.
Vec8 extend_scaffold_field(const FlatCayleyDomain& dom, const BCSpec& bc,
                           const ScaffoldPerturbation& t, int side,
                           std::array<int, 3> tangential, double dx4,
                           const std::array<double, 4>& y);

// Max deviation of the finite-difference B-hat linearization from
// pi_nu((g(grad t, u))^sharp) over the boundary nodes.
double scaffold_variation_linearization(const FlatCayleyDomain& dom, const BCSpec& bc,
                                        const ScaffoldPerturbation& t, double eps);

// Structure tilt in a Lambda^2_7 direction with a spatial profile: the
// linear-in-chi source of the perturbed residual is
// -strength * profile(x) * pi_E(e). A constant profile is annihilated by D*
// and leaves the flat solution in place.
struct StructureTilt {
  KForm e_part7;
  double strength = 0;
  std::function<double(const std::array<double, 4>&)> profile;
};

struct NewtonOptions {
  int max_iter = 25;
  double tol = 1e-10;
  double slope_limit = 1.0;
};

struct NewtonResult {
  NormalField solution;
  std::vector<double> residual_trace;
  bool converged = false;
};

// Undamped Newton on the square discrete system. dirichlet_data holds the
// scaffold's normal displacement (K-valued) at boundary nodes. Throws on a
// singular linearization ("non-generic configuration"), on slope-bound
// violations and on divergence.
NewtonResult newton_solve(const FlatCayleyDomain& dom, const BCSpec& bc,
                          const NodeField& dirichlet_data,
                          const std::optional<StructureTilt>& tilt = std::nullopt,
                          const NewtonOptions& opts = {});

struct VolumeFluxReport {
  double volume = 0;
  double flux = 0;
  double min_margin = 0;  // min over nodes of 1 - Phi_0(frame)/vol-element
};

VolumeFluxReport volume_and_flux(const GraphField& g);
VolumeFluxReport volume_and_flux_serial(const GraphField& g);

}  // namespace spin7
