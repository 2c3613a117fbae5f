#pragma once

#include "wdpw/rational.hpp"

namespace wdpw {

// fractional linear transformation z -> (az+b)/(cz+d), kept normalized to
// ad - bc = 1 so that composition and order tests are stable
struct MoebiusTransform {
  Complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  MoebiusTransform() = default;
  MoebiusTransform(Complex a_, Complex b_, Complex c_, Complex d_);

  static MoebiusTransform identity();
  static MoebiusTransform translation(Complex t);
  // z -> w z (rotation for |w| = 1, scaling otherwise)
  static MoebiusTransform scaling(Complex w);
};

Complex moebius_apply(const MoebiusTransform& g, Complex z);
Complex moebius_derivative(const MoebiusTransform& g, Complex z);
// (g1 o g2)(z) = g1(g2(z))
MoebiusTransform moebius_compose(const MoebiusTransform& g1,
                                 const MoebiusTransform& g2);
MoebiusTransform moebius_inverse(const MoebiusTransform& g);
// identity as an action (projective: both signs of the matrix)
bool moebius_is_identity(const MoebiusTransform& g, double tol = 1e-10);
// smallest k <= max_order with g^k = id, or 0 when there is none
int moebius_order(const MoebiusTransform& g, int max_order = 24,
                  double tol = 1e-10);

RationalFunction moebius_rational(const MoebiusTransform& g);
RationalFunction moebius_derivative_rational(const MoebiusTransform& g);

}  // namespace wdpw
