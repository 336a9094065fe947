#pragma once

#include "spin7/forms.hpp"

// Pointwise Spin(7) algebra for the model structure Phi_0: the 2-, 3- and
// 4-fold cross products and the irreducible splittings of 2- and 4-forms.
// All operations are pure; the coefficient tensors are derived once from
// Phi_0 at first use.

namespace spin7 {

// v x w = (1/2)(v^ ^ w^ - *(v^ ^ w^ ^ Phi_0)), a 2-form in Lambda^2_7.
KForm cross2(const Vec8& v, const Vec8& w);

// u x v x w = (u -| (v -| (w -| Phi_0)))^sharp.
Vec8 cross3(const Vec8& u, const Vec8& v, const Vec8& w);

// tau(a,b,c,d) = -a x (b x c x d) + g(a,b)(c x d) + g(a,c)(d x b)
//              + g(a,d)(b x c); alternating, Lambda^2_7-valued.
KForm tau4(const Vec8& a, const Vec8& b, const Vec8& c, const Vec8& d);

struct Lambda2Split {
  KForm part7;   // -3 eigenspace of a |-> *(a ^ Phi_0), dimension 7
  KForm part21;  // +1 eigenspace, dimension 21
};

struct Lambda4Split {
  KForm part1;   // multiples of Phi_0
  KForm part7;   // span of w^ ^ (v -| Phi_0) - v^ ^ (w -| Phi_0)
  KForm part27;  // remaining self-dual part
  KForm part35;  // anti-self-dual part
};

Lambda2Split lambda2_project(const KForm& alpha);
Lambda4Split lambda4_project(const KForm& xi);

// The operator alpha |-> *(alpha ^ Phi_0) as a symmetric 28 x 28 matrix
// (row-major), used for the spectral checks.
std::vector<double> lambda2_operator_matrix();

// Orthonormal basis of the 7-dimensional Lambda^4_7 (70-component columns).
const std::vector<KForm>& lambda4_7_basis();

}  // namespace spin7
