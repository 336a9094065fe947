#pragma once

#include <array>
#include <vector>

#include "spin7/algebra.hpp"

// Constructors of Spin(7)-structures from SU(4) and G2 data, restrictions to
// lower-dimensional scaffolds, pointwise calibration detectors and the
// Bryant-Salamon warped-metric local model.

namespace spin7 {

// Calabi-Yau 4-fold data in the flat model C^4 = R^8 with z_j spanning
// coordinates (2j-1, 2j). The normalisation is
// omega^4 = (3/2)(Re O ^ Re O + Im O ^ Im O).
struct SU4Data {
  KForm omega;      // 2-form
  KForm re_omega4;  // 4-form
  KForm im_omega4;  // 4-form

  static SU4Data standard();
  double normalisation_residual() const;
};

// G2 data on R^7; when embedded into R^8 the seven coordinates become 2..8
// and coordinate 1 plays the role of t.
struct G2Data {
  KForm phi3;  // 3-form on R^7
  KForm psi4;  // 4-form on R^7, Hodge dual of phi3

  static G2Data standard();
  double dual_residual() const;
};

KForm spin7_from_su4(const SU4Data& d);
KForm spin7_from_g2(const G2Data& d);

// Restriction of a 4-form to the span of an orthonormal frame, in frame
// coordinates. Throws if the frame is not orthonormal.
KForm restrict_form(const KForm& phi, const std::vector<Vec8>& frame,
                    double tol = 1e-10);

// phi = *_W(Phi|_W) for an oriented orthonormal 7-frame.
KForm restrict_to_7plane(const KForm& phi, const std::array<Vec8, 7>& w);

// omega = -*_W(Phi|_W) for an oriented orthonormal 6-frame.
KForm restrict_to_6plane(const KForm& phi, const std::array<Vec8, 6>& w);

// n = (*_W(Phi|_W))^sharp for an oriented orthonormal 5-frame, in W-coords.
std::array<double, 5> restrict_to_5plane(const KForm& phi,
                                         const std::array<Vec8, 5>& w);

// Necessary-condition battery for membership in the Spin(7) orbit of Phi_0
// at the standard metric: self-duality, |Phi|^2 = 14 and the {-3 x7, +1 x21}
// spectrum of alpha -> *(alpha ^ Phi).
struct Spin7ValidationReport {
  double self_dual_residual = 0;
  double norm_sq = 0;
  int n_eig_low = 0;   // eigenvalues within tol of -3
  int n_eig_high = 0;  // eigenvalues within tol of +1
  double eig_deviation = 0;
  bool pass_self_dual = false;
  bool pass_norm = false;
  bool pass_spectrum = false;
  bool pass() const { return pass_self_dual && pass_norm && pass_spectrum; }
};

Spin7ValidationReport validate_spin7_form(const KForm& phi, double tol = 1e-8);

// Pointwise special-Lagrangian detector for an oriented 4-plane.
struct SpecialLagrangianReport {
  double re_omega_value = 0;      // Re O evaluated on the orthonormal frame
  double omega_restriction = 0;   // max |omega(v_i, v_j)|
  double im_omega_value = 0;      // Im O on the frame
  bool calibrated = false;        // |Re O| = 1
  bool lagrangian_horizontal = false;  // omega|_V = 0 and Im O|_V = 0
  bool agree() const { return calibrated == lagrangian_horizontal; }
};

SpecialLagrangianReport special_lagrangian_test(const std::array<Vec8, 4>& v,
                                                const SU4Data& d,
                                                double tol = 1e-8);

// Associative (3-plane) / coassociative (4-plane) detector on R^7. Vectors
// use the first 7 slots of Vec8.
struct G2PlaneReport {
  int plane_dim = 0;
  double phi_value = 0;       // associative: phi on the frame
  double psi_value = 0;       // coassociative: psi on the frame
  double phi_restriction = 0; // coassociative: max |phi(v_i,v_j,v_k)|
  bool calibrated = false;
  bool vanishing = false;     // coassociative flag via phi|_V = 0
  bool agree() const { return plane_dim == 3 || calibrated == vanishing; }
};

G2PlaneReport associative_coassociative_test(const std::vector<Vec8>& v,
                                             const G2Data& d, double tol = 1e-8);

// Bryant-Salamon warping factors.
enum class BSBranch { Complete, Incomplete };
std::pair<double, double> bs_warping(double r, BSBranch branch);

// Local trivialization of the warped metric over a 4-dimensional base with
// 4-dimensional fibers; A[i] is the connection matrix of base direction i at
// the trivialization point and gauge[i] scales the cubic remainder
// |x|^2 x_j of the mixed block that a generic trivialization carries at
// higher order.
struct WarpedMetricModel {
  std::array<std::array<std::array<double, 4>, 4>, 4> A{};  // A[i][a][b]
  std::array<double, 4> gauge{};                            // cubic remainder
  BSBranch branch = BSBranch::Complete;

  // Metric matrix at base origin and fiber point a (only the fiber part of
  // x is used; the base dependence of A is frozen at the trivialization
  // point).
  std::array<std::array<double, 8>, 8> metric(const std::array<double, 4>& fiber) const;
  double antisymmetry_residual() const;
};

// Max |Gamma_{ij}^k| (lowered Christoffel symbols, i,j fiber, k base) at the
// fiber origin, by central differences with step h. Throws on a singular
// metric.
double christoffel_fiber_check(const WarpedMetricModel& m, double h);

}  // namespace spin7
