#pragma once

// Rational functions of one complex variable with coefficient-level
// arithmetic. Deliberately GCD-free: polynomial gcd over inexact complex
// coefficients is ill-posed, so sums and products keep the cross-multiplied
// form and equality is decided by cross-multiplied coefficient comparison.

#include <stdexcept>
#include <utility>
#include <vector>

#include "wdpw/lorentz.hpp"

namespace wdpw {

// coefficient list in ascending powers of z; empty = zero polynomial
using Poly = std::vector<Complex>;

Poly poly_trim(Poly p);
int poly_degree(const Poly& p);  // -1 for the zero polynomial
double poly_max_abs(const Poly& p);
bool poly_is_zero(const Poly& p, double tol = 0.0);
Complex poly_evaluate(const Poly& p, Complex z);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, Complex c);
Poly poly_multiply(const Poly& a, const Poly& b);
Poly poly_derivative(const Poly& p);
Poly poly_antiderivative(const Poly& p);  // constant term 0
// long division a = q * b + r with deg r < deg b; throws on zero divisor
std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b);
// (z - root)^power
Poly poly_from_root(Complex root, int power);
Poly poly_pow(const Poly& p, int k);

struct RationalFunction {
  Poly num{};
  Poly den{Complex(1.0, 0.0)};

  RationalFunction() = default;
  RationalFunction(Poly n, Poly d);  // throws on zero denominator

  static RationalFunction constant(Complex c);
  // c * z^k, k >= 0
  static RationalFunction monomial(int k, Complex c = Complex(1.0, 0.0));

  bool is_polynomial() const { return poly_degree(den) == 0; }
};

RationalFunction rational_add(const RationalFunction& a,
                              const RationalFunction& b);
RationalFunction rational_subtract(const RationalFunction& a,
                                   const RationalFunction& b);
RationalFunction rational_multiply(const RationalFunction& a,
                                   const RationalFunction& b);
// throws std::domain_error when b is the zero function
RationalFunction rational_divide(const RationalFunction& a,
                                 const RationalFunction& b);
RationalFunction rational_scale(const RationalFunction& a, Complex c);
RationalFunction rational_derivative(const RationalFunction& a);
// substitution f(g(z)), exact in coefficient arithmetic
RationalFunction rational_compose(const RationalFunction& f,
                                  const RationalFunction& g);

// throws std::domain_error at (non-removable) zeros of the denominator
Complex rational_evaluate(const RationalFunction& a, Complex z);

// cross-multiplied coefficient comparison: a.num*b.den == b.num*a.den within
// tol relative to the larger coefficient mass
bool rational_equal(const RationalFunction& a, const RationalFunction& b,
                    double tol = 1e-12);
bool rational_is_zero(const RationalFunction& a, double tol = 1e-12);

inline RationalFunction operator+(const RationalFunction& a,
                                  const RationalFunction& b) {
  return rational_add(a, b);
}
inline RationalFunction operator-(const RationalFunction& a,
                                  const RationalFunction& b) {
  return rational_subtract(a, b);
}
inline RationalFunction operator*(const RationalFunction& a,
                                  const RationalFunction& b) {
  return rational_multiply(a, b);
}
inline RationalFunction operator/(const RationalFunction& a,
                                  const RationalFunction& b) {
  return rational_divide(a, b);
}
inline RationalFunction operator-(const RationalFunction& a) {
  return rational_scale(a, Complex(-1.0, 0.0));
}

struct PoleInfo {
  Complex location;
  int multiplicity = 0;   // order of the principal part actually present
  Complex residue{};      // coefficient of 1/(z - location)
};

// poles from denominator roots (companion-matrix eigenvalues), clustered
// within cluster_tol to decide multiplicity; principal parts are extracted
// by contour sampling, so removable singularities drop out on their own
std::vector<PoleInfo> rational_poles(const RationalFunction& a,
                                     double cluster_tol = 1e-8);

struct NonIntegrableError : std::runtime_error {
  Complex pole;
  Complex residue;

  NonIntegrableError(const std::string& what, Complex pole_, Complex residue_)
      : std::runtime_error(what), pole(pole_), residue(residue_) {}
};

// antiderivative with zero integration constant on the polynomial part;
// throws NonIntegrableError naming the offending pole when any residue is
// nonzero (a logarithmic term would leave the rational class)
RationalFunction rational_antiderivative(const RationalFunction& a,
                                         double cluster_tol = 1e-8);

}  // namespace wdpw
