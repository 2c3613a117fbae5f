#include "wdpw/moebius.hpp"

#include <cmath>
#include <stdexcept>

namespace wdpw {

MoebiusTransform::MoebiusTransform(Complex a_, Complex b_, Complex c_,
                                   Complex d_)
    : a(a_), b(b_), c(c_), d(d_) {
  const Complex det = a * d - b * c;
  if (std::abs(det) < 1e-14)
    throw std::invalid_argument("MoebiusTransform: singular coefficients");
  const Complex s = std::sqrt(det);
  a /= s;
  b /= s;
  c /= s;
  d /= s;
}

MoebiusTransform MoebiusTransform::identity() { return {}; }

MoebiusTransform MoebiusTransform::translation(Complex t) {
  return MoebiusTransform(1.0, t, 0.0, 1.0);
}

MoebiusTransform MoebiusTransform::scaling(Complex w) {
  return MoebiusTransform(w, 0.0, 0.0, 1.0);
}

Complex moebius_apply(const MoebiusTransform& g, Complex z) {
  return (g.a * z + g.b) / (g.c * z + g.d);
}

Complex moebius_derivative(const MoebiusTransform& g, Complex z) {
  const Complex q = g.c * z + g.d;
  return (g.a * g.d - g.b * g.c) / (q * q);
}

MoebiusTransform moebius_compose(const MoebiusTransform& g1,
                                 const MoebiusTransform& g2) {
  return MoebiusTransform(g1.a * g2.a + g1.b * g2.c,
                          g1.a * g2.b + g1.b * g2.d,
                          g1.c * g2.a + g1.d * g2.c,
                          g1.c * g2.b + g1.d * g2.d);
}

MoebiusTransform moebius_inverse(const MoebiusTransform& g) {
  return MoebiusTransform(g.d, -g.b, -g.c, g.a);
}

bool moebius_is_identity(const MoebiusTransform& g, double tol) {
  return std::abs(g.b) <= tol && std::abs(g.c) <= tol &&
         std::abs(g.a - g.d) <= tol;
}

int moebius_order(const MoebiusTransform& g, int max_order, double tol) {
  MoebiusTransform p = g;
  for (int k = 1; k <= max_order; ++k) {
    if (moebius_is_identity(p, tol)) return k;
    p = moebius_compose(p, g);
  }
  return 0;
}

RationalFunction moebius_rational(const MoebiusTransform& g) {
  return RationalFunction(Poly{g.b, g.a}, Poly{g.d, g.c});
}

RationalFunction moebius_derivative_rational(const MoebiusTransform& g) {
  const Complex det = g.a * g.d - g.b * g.c;
  const Poly q{g.d, g.c};
  return RationalFunction(Poly{det}, poly_multiply(q, q));
}

}  // namespace wdpw
