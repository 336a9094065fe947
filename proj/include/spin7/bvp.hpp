#pragma once

#include <iosfwd>
#include <optional>

#include "spin7/grid.hpp"
#include "spin7/linalg.hpp"

// Discretization of the linear Cayley deformation theory over the flat model:
// the Dirac-type operator D and its formal adjoint, the second-order operator
// D*D, the tangential boundary operator P, the mixed boundary problem, rank
// detection with an explicit spectral gap, symbol checks and Green's formula.
//
// Normal fields carry components in the frame (e5..e8); E-valued fields carry
// coordinates in the frame (e1 x e5, ..., e1 x e8). All stencils are second
// order: central differences in the periodic directions, one-sided at the
// interval ends.

namespace spin7 {

enum class RowKind { Interior, Dirichlet, Robin };

struct LinearSystem {
  std::int64_t rows = 0, cols = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> val;
  std::vector<RowKind> kind;

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& y) const;
  Mat to_dense() const;
  LinearSystem transposed() const;
  // Plain-text coordinate triplets "row col value".
  void write_triplets(std::ostream& os) const;
};

// Coefficient matrices of D = sum_i A_i d_i in the adapted frame, derived
// from the cross products; A[0] is the identity.
const std::array<std::array<std::array<double, 4>, 4>, 4>& dirac_coefficients();

// Tangential coupling matrices of P at the x4 = 0 boundary: P = sum_j M_j d_j
// over the three periodic directions, (M_j)[b][a] = <u x e_j x n_a, n_b> with
// u = e4. At x4 = L4 the sign of u flips.
const std::array<std::array<std::array<double, 4>, 4>, 3>& p_coefficients();

// D applied at every node (E-valued result).
EField apply_D(const FlatCayleyDomain& dom, const NormalField& s);
EField apply_D_serial(const FlatCayleyDomain& dom, const NormalField& s);

// Formal adjoint D* = -sum_i A_i^T d_i applied at every node.
NormalField apply_Dstar(const FlatCayleyDomain& dom, const EField& t);

// Direct 9-point stencil of D*D = -Laplace per component, interior nodes
// (all nodes on the torus variant).
NormalField apply_DstarD(const FlatCayleyDomain& dom, const NormalField& s);
NormalField apply_DstarD_serial(const FlatCayleyDomain& dom, const NormalField& s);

// Sparse assemblies. assemble_D has 4 rows per node (no boundary conditions);
// assemble_DstarD has rows only at interior nodes.
LinearSystem assemble_D(const FlatCayleyDomain& dom);
LinearSystem assemble_Dstar(const FlatCayleyDomain& dom);
LinearSystem assemble_DstarD(const FlatCayleyDomain& dom);

// The square discrete boundary problem: D*D rows at interior nodes, 4-k
// Dirichlet rows and k Robin rows (pi_nu(grad_u s + P(pi_K s)) = 0) per
// boundary node.
LinearSystem assemble_bvp(const FlatCayleyDomain& dom, const BCSpec& bc);

struct KernelReport {
  int dim = -1;
  bool indeterminate = true;
  double gap = 0;                    // first retained / last discarded sigma
  double sigma_max = 0;
  std::vector<double> sigma_bottom;  // ascending Ritz values of the low block
  std::vector<std::vector<double>> basis;  // kernel vectors (unit 2-norm)
};

struct KernelOptions {
  double rel_tol = 1e-9;   // sigma < sigma_max * rel_tol counts as kernel
  double gap_min = 1e6;    // required spectral gap ratio
  int block = 8;           // inverse-iteration block size
  int iterations = 3;
  std::uint64_t seed = 12345;
  bool transpose = false;  // probe the kernel of the transpose instead
};

// Rank detection by Cholesky shift-invert subspace iteration on A^T A
// (or A A^T): returns the bottom singular block with an explicit gap; refuses
// to guess when the gap is below gap_min.
KernelReport kernel_dim(const LinearSystem& sys, const KernelOptions& opts = {});

// Interior symbol xi x s of D as a 4x4 matrix acting on normal coordinates.
std::array<std::array<double, 4>, 4> interior_symbol(const std::array<double, 4>& xi);

// Condition number of the boundary symbol matrix of the second-order problem
// for a nonzero tangential covector xi (3 components) and scaffold dimension
// parameter k. Throws on xi = 0.
double boundary_symbol_check(const std::array<double, 3>& xi, int k);

// |<Ds,t> - <s,D*t> + <u x s, t>_boundary| with trapezoidal quadrature.
double greens_residual(const FlatCayleyDomain& dom, const NormalField& s,
                       const EField& t);

struct AdjointKernelReport {
  int dim = -1;
  int primal_dim = -1;
  bool indeterminate = true;
  double gap = 0;
  // Normalized defect of the transpose-kernel vectors against the adjoint
  // conditions in weak form: each equation row is re-evaluated with exact
  // derivatives of analytic test fields, so the pairing no longer vanishes
  // identically and its size measures how well the recovered functional
  // satisfies the continuum conditions. Decays like h.
  double weak_residual = 0;
};

AdjointKernelReport adjoint_kernel_characterization(const FlatCayleyDomain& dom,
                                                    const BCSpec& bc,
                                                    const KernelOptions& opts = {});

}  // namespace spin7
