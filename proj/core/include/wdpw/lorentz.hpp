#pragma once

// Minkowski linear algebra for SO+(1,n+3) and its symmetric-space data:
// the metric I_{1,n+3}, the involution sigma = Ad(S) with S = diag(-I4, I_n),
// and the Cartan decomposition g = k + p.

#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace wdpw {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RealMat = Eigen::MatrixXd;

// Algebra and group values are plain dense complex matrices; predicates below
// implement the membership tests. Determinant sign and time orientation are
// derived quantities, see determinant_sign() and is_orthochronous().
using LieAlgebraElement = Mat;
using GroupElement = Mat;

struct MinkowskiSignature {
  int n = 2;  // codimension parameter; matrices are (n+4) x (n+4)

  int dim() const { return n + 4; }
};

// diag(-1, 1, ..., 1) of size dim
RealMat metric_matrix(int dim);

// twist matrix S = diag(-I4, I_{dim-4})
RealMat twist_matrix(int dim);

// sigma(X) = S X S^{-1}
Mat sigma_involution(const Mat& X);

// || X^T I + I X ||_inf ; zero iff X in so(1,dim-1;C)
double algebra_membership_residual(const LieAlgebraElement& X);

// || g^T I g - I ||_inf ; zero iff g in O(1,dim-1;C)
double group_membership_residual(const GroupElement& g);

// sign of det(g) for numerically real group elements (+1 or -1)
int determinant_sign(const GroupElement& g);

// real Lorentz elements preserve time orientation iff entry (0,0) > 0
bool is_orthochronous(const GroupElement& g);

// block-diagonal membership in K^C = SO(1,3;C) x SO(n;C): off-block mass
double k_block_residual(const Mat& g);

// Cartan projections: k = (X + sigma X)/2 on block diagonals,
// p = (X - sigma X)/2 on off-blocks.
// Throws std::invalid_argument when X fails the algebra residual beyond tol.
std::pair<LieAlgebraElement, LieAlgebraElement> cartan_split(
    const LieAlgebraElement& X, double tol = 1e-9);

// exp(tX) by scaling and squaring (Pade); throws std::overflow_error when
// ||tX|| is too large to exponentiate in double precision.
GroupElement matrix_exponential(const LieAlgebraElement& X, double t = 1.0);

// P~ = diag(1,1,1,1,-1,1,...,1): the det = -1 coset representative
RealMat det_minus_representative(int dim);

}  // namespace wdpw
