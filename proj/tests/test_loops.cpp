#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wdpw/loops.hpp"

using namespace wdpw;

namespace {

Mat random_complex_algebra(int dim, std::mt19937& rng, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Mat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = Complex(d(rng), d(rng));
  const RealMat I = metric_matrix(dim);
  return A - I * A.transpose() * I;
}

Mat random_real_algebra(int dim, std::mt19937& rng, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Mat A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = Complex(d(rng), 0.0);
  const RealMat I = metric_matrix(dim);
  return A - I * A.transpose() * I;
}

// random real twisted algebra-valued loop of band [-deg, deg]
LaurentMatrixLoop random_twisted_algebra_loop(int dim, int deg,
                                              std::mt19937& rng,
                                              double scale) {
  LaurentMatrixLoop X = zero_loop(dim, -deg, deg);
  for (int j = 0; j <= deg; ++j) {
    Mat C = (j == 0) ? random_real_algebra(dim, rng, scale)
                     : random_complex_algebra(dim, rng, scale);
    // enforce the twist parity on the block structure
    if (j % 2 == 0) {
      C.topRightCorner(4, dim - 4).setZero();
      C.bottomLeftCorner(dim - 4, 4).setZero();
    } else {
      C.topLeftCorner(4, 4).setZero();
      C.bottomRightCorner(dim - 4, dim - 4).setZero();
    }
    X.coeff(j) = C;
    X.coeff(-j) = C.conjugate();
  }
  return X;
}

}  // namespace

TEST_CASE("identity and monomial algebra") {
  TruncationPolicy pol;
  const LaurentMatrixLoop e = identity_loop(6);
  LaurentMatrixLoop b = monomial_loop(Mat::Random(6, 6), -1);
  CHECK(loop_distance(loop_multiply(e, b, pol), b) < 1e-15);
  CHECK(loop_distance(loop_multiply(b, e, pol), b) < 1e-15);

  // exponent addition: (lambda^{-1} M) (lambda M') = M M'
  Mat M = Mat::Random(6, 6), Mp = Mat::Random(6, 6);
  LaurentMatrixLoop prod =
      loop_multiply(monomial_loop(M, -1), monomial_loop(Mp, 1), pol);
  CHECK(prod.lo == 0);
  CHECK(prod.hi == 0);
  CHECK((prod.coeff(0) - M * Mp).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("nilpotent cancellation and inverse") {
  TruncationPolicy pol;
  // p-block [[0, B], [-B^T I_{1,3}, 0]] with isotropic B is square-zero
  Mat B = Mat::Zero(4, 2);
  B(0, 0) = Complex(0.0, -0.5);
  B(0, 1) = Complex(0.5, 0.0);
  B(1, 0) = Complex(0.0, 0.5);
  B(1, 1) = Complex(-0.5, 0.0);
  Mat N = Mat::Zero(6, 6);
  N.topRightCorner(4, 2) = B;
  N.bottomLeftCorner(2, 4) = -B.transpose() * metric_matrix(4).cast<Complex>();
  REQUIRE(algebra_membership_residual(N) < 1e-15);
  REQUIRE((N * N).cwiseAbs().maxCoeff() < 1e-15);

  LaurentMatrixLoop a = loop_add(identity_loop(6), monomial_loop(N, -1));
  LaurentMatrixLoop b = loop_add(identity_loop(6), monomial_loop(-N, -1));
  CHECK(loop_distance(loop_multiply(a, b, pol), identity_loop(6)) < 1e-14);

  LaurentMatrixLoop inv = loop_inverse(a, pol);
  CHECK(loop_distance(inv, b) < 1e-12);
}

TEST_CASE("evaluate: lambda rotation block") {
  // the associated-family rotation acting on the last two coordinates:
  // diag(I4, [[ (lambda+1/lambda)/2, -(lambda-1/lambda)/(2i) ],
  //           [ (lambda-1/lambda)/(2i), (lambda+1/lambda)/2 ]])
  LaurentMatrixLoop rot = zero_loop(6, -1, 1);
  Mat c0 = Mat::Identity(6, 6);
  c0(4, 4) = 0.0;
  c0(5, 5) = 0.0;
  Mat cp = Mat::Zero(6, 6), cm = Mat::Zero(6, 6);
  const Complex half(0.5, 0.0), ihalf(0.0, 0.5);
  cp(4, 4) = half;
  cp(5, 5) = half;
  cp(4, 5) = ihalf;
  cp(5, 4) = -ihalf;
  cm(4, 4) = half;
  cm(5, 5) = half;
  cm(4, 5) = -ihalf;
  cm(5, 4) = ihalf;
  rot.coeff(0) = c0;
  rot.coeff(1) = cp;
  rot.coeff(-1) = cm;

  CHECK((loop_evaluate(rot, Complex(1.0, 0.0)) - Mat::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  Mat at_i = loop_evaluate(rot, Complex(0.0, 1.0));
  CHECK(std::abs(at_i(4, 4)) < 1e-15);
  CHECK(std::abs(at_i(4, 5) - Complex(-1.0, 0.0)) < 1e-15);
  CHECK(std::abs(at_i(5, 4) - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(at_i(5, 5)) < 1e-15);

  // the family rotates inside the n-block at odd degree, so it is real and
  // group valued but deliberately not twisted
  CHECK(reality_residual(rot) == doctest::Approx(0.0));
  CHECK(group_valued_residual(rot) < 1e-14);
  CHECK(twist_residual(rot) > 0.5);
}

TEST_CASE("twist and reality residuals, predicate preservation") {
  std::mt19937 rng(5);
  TruncationPolicy pol;
  pol.max_degree = 16;
  // generator scale keeps exp coefficient tails beyond degree 16 under the
  // asserted bounds
  for (int dim : {6, 8}) {
    LaurentMatrixLoop X = random_twisted_algebra_loop(dim, 2, rng, 0.05);
    CHECK(twist_residual(X) < 1e-15);
    CHECK(reality_residual(X) < 1e-15);

    LaurentMatrixLoop g = loop_exp(X, pol);
    CHECK(twist_residual(g) < 1e-12);
    CHECK(reality_residual(g) < 1e-12);
    CHECK(group_valued_residual(g) < 1e-10);

    LaurentMatrixLoop h = loop_exp(random_twisted_algebra_loop(dim, 1, rng, 0.08), pol);
    LaurentMatrixLoop gh = loop_multiply(g, h, pol);
    CHECK(twist_residual(gh) < 1e-11);
    CHECK(reality_residual(gh) < 1e-11);

    LaurentMatrixLoop ginv = loop_inverse(g, pol);
    CHECK(twist_residual(ginv) < 1e-11);
    CHECK(reality_residual(ginv) < 1e-11);
    CHECK(loop_distance(loop_multiply(g, ginv, pol), identity_loop(dim)) <
          1e-9);
  }
}

TEST_CASE("multiply: associativity and evaluation homomorphism") {
  std::mt19937 rng(13);
  TruncationPolicy pol;
  pol.max_degree = 24;
  LaurentMatrixLoop a = random_twisted_algebra_loop(6, 3, rng, 0.3);
  LaurentMatrixLoop b = random_twisted_algebra_loop(6, 2, rng, 0.3);
  LaurentMatrixLoop c = random_twisted_algebra_loop(6, 3, rng, 0.3);

  LaurentMatrixLoop ab_c = loop_multiply(loop_multiply(a, b, pol), c, pol);
  LaurentMatrixLoop a_bc = loop_multiply(a, loop_multiply(b, c, pol), pol);
  CHECK(loop_distance(ab_c, a_bc) < 1e-12);

  const Complex lam(0.36, 0.93);
  Mat lhs = loop_evaluate(loop_multiply(a, b, pol), lam);
  Mat rhs = loop_evaluate(a, lam) * loop_evaluate(b, lam);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("truncation policy reports dropped mass") {
  TruncationPolicy pol;
  pol.max_degree = 2;
  LaurentMatrixLoop a = zero_loop(6, -3, 3);
  for (int j = -3; j <= 3; ++j)
    a.coeff(j) = Mat::Identity(6, 6) * (1.0 + std::abs(j));
  double dropped = 0.0;
  LaurentMatrixLoop t = truncate_loop(a, pol, &dropped);
  CHECK(t.lo == -2);
  CHECK(t.hi == 2);
  CHECK(dropped == doctest::Approx(4.0));
}

TEST_CASE("exp inverse round trip on a monodromy-style loop") {
  std::mt19937 rng(23);
  TruncationPolicy pol;
  pol.max_degree = 16;
  LaurentMatrixLoop D = random_twisted_algebra_loop(6, 1, rng, 0.1);
  LaurentMatrixLoop chi = loop_exp(D, pol);
  LaurentMatrixLoop chi_inv = loop_inverse(chi, pol);
  CHECK(loop_distance(loop_multiply(chi, chi_inv, pol), identity_loop(6)) <
        1e-9);
}
