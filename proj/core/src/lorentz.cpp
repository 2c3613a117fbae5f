#include "wdpw/lorentz.hpp"

#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace wdpw {

RealMat metric_matrix(int dim) {
  RealMat I = RealMat::Identity(dim, dim);
  I(0, 0) = -1.0;
  return I;
}

RealMat twist_matrix(int dim) {
  RealMat S = RealMat::Identity(dim, dim);
  for (int i = 0; i < 4 && i < dim; ++i) S(i, i) = -1.0;
  return S;
}

Mat sigma_involution(const Mat& X) {
  // S X S^{-1} flips the sign of the off-diagonal 4 x (dim-4) blocks
  Mat Y = X;
  const int dim = static_cast<int>(X.rows());
  Y.topRightCorner(4, dim - 4) *= -1.0;
  Y.bottomLeftCorner(dim - 4, 4) *= -1.0;
  return Y;
}

double algebra_membership_residual(const LieAlgebraElement& X) {
  const int dim = static_cast<int>(X.rows());
  const RealMat I = metric_matrix(dim);
  return (X.transpose() * I + I * X).cwiseAbs().maxCoeff();
}

double group_membership_residual(const GroupElement& g) {
  const int dim = static_cast<int>(g.rows());
  const RealMat I = metric_matrix(dim);
  return (g.transpose() * I * g - I.cast<Complex>()).cwiseAbs().maxCoeff();
}

int determinant_sign(const GroupElement& g) {
  return g.determinant().real() >= 0.0 ? 1 : -1;
}

bool is_orthochronous(const GroupElement& g) { return g(0, 0).real() > 0.0; }

double k_block_residual(const Mat& g) {
  const int dim = static_cast<int>(g.rows());
  double r = g.topRightCorner(4, dim - 4).cwiseAbs().maxCoeff();
  return std::max(r, g.bottomLeftCorner(dim - 4, 4).cwiseAbs().maxCoeff());
}

std::pair<LieAlgebraElement, LieAlgebraElement> cartan_split(
    const LieAlgebraElement& X, double tol) {
  if (algebra_membership_residual(X) > tol)
    throw std::invalid_argument("cartan_split: not in so(1,n+3;C)");
  const Mat sX = sigma_involution(X);
  return {0.5 * (X + sX), 0.5 * (X - sX)};
}

GroupElement matrix_exponential(const LieAlgebraElement& X, double t) {
  if (!X.allFinite() || !std::isfinite(t))
    throw std::overflow_error("matrix_exponential: non-finite input");
  Mat tX = t * X;
  // e^700 is the double overflow edge; the entrywise norm bounds the spectrum
  if (tX.cwiseAbs().maxCoeff() * tX.rows() > 700.0)
    throw std::overflow_error("matrix_exponential: ||tX|| too large");
  return tX.exp();
}

RealMat det_minus_representative(int dim) {
  RealMat P = RealMat::Identity(dim, dim);
  P(4, 4) = -1.0;
  return P;
}

}  // namespace wdpw
