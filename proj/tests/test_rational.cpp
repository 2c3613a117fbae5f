#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wdpw/rational.hpp"

using namespace wdpw;

namespace {

Poly random_poly(int degree, std::mt19937& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Poly p(degree + 1);
  for (Complex& c : p) c = Complex(dist(rng), dist(rng));
  return p;
}

RationalFunction random_rational(int nd, int dd, std::mt19937& rng) {
  Poly den = random_poly(dd, rng);
  den.back() += Complex(2.0, 0.0);  // keep the degree honest
  return RationalFunction(random_poly(nd, rng), std::move(den));
}

}  // namespace

TEST_CASE("polynomial division round trip") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Poly a = random_poly(7, rng);
    Poly b = random_poly(3, rng);
    auto [q, r] = poly_divmod(a, b);
    CHECK(poly_degree(r) < poly_degree(b));
    Poly back = poly_add(poly_multiply(q, b), r);
    CHECK(poly_max_abs(poly_add(back, poly_scale(a, Complex(-1.0, 0.0)))) <
          1e-11 * std::max(1.0, poly_max_abs(a)));
  }
  CHECK_THROWS_AS(poly_divmod(Poly{Complex(1.0, 0.0)}, Poly{}),
                  std::domain_error);
}

TEST_CASE("polynomial derivative and antiderivative invert") {
  std::mt19937 rng(4);
  Poly p = random_poly(9, rng);
  Poly back = poly_derivative(poly_antiderivative(p));
  CHECK(poly_max_abs(poly_add(back, poly_scale(p, Complex(-1.0, 0.0)))) <
        1e-14 * poly_max_abs(p));
  CHECK(poly_antiderivative(Poly{}).empty());
}

TEST_CASE("coefficient arithmetic is exact on simple data") {
  // (z^3/3)' = z^2 with unit denominator, coefficientwise
  RationalFunction cube =
      RationalFunction::monomial(3, Complex(1.0 / 3.0, 0.0));
  RationalFunction d = rational_derivative(cube);
  CHECK(rational_equal(d, RationalFunction::monomial(2)));
  CHECK(d.is_polynomial());

  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction s = z * z - RationalFunction::constant(Complex(1.0, 0.0));
  CHECK(std::abs(rational_evaluate(s, Complex(3.0, 0.0)) -
                 Complex(8.0, 0.0)) == 0.0);
}

TEST_CASE("arithmetic agrees with pointwise evaluation") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 25; ++trial) {
    RationalFunction a = random_rational(4, 2, rng);
    RationalFunction b = random_rational(3, 3, rng);
    const Complex z(u(rng), u(rng));
    const Complex va = rational_evaluate(a, z);
    const Complex vb = rational_evaluate(b, z);
    const double scale = std::max({1.0, std::abs(va), std::abs(vb)});
    CHECK(std::abs(rational_evaluate(a + b, z) - (va + vb)) < 1e-11 * scale);
    CHECK(std::abs(rational_evaluate(a * b, z) - va * vb) <
          1e-11 * scale * scale);
    CHECK(std::abs(rational_evaluate(a - b, z) - (va - vb)) < 1e-11 * scale);
    if (std::abs(vb) > 1e-3)
      CHECK(std::abs(rational_evaluate(a / b, z) - va / vb) <
            1e-10 * std::max(1.0, std::abs(va / vb)));
  }
}

TEST_CASE("derivative satisfies the product rule") {
  std::mt19937 rng(19);
  RationalFunction f = random_rational(3, 2, rng);
  RationalFunction g = random_rational(2, 2, rng);
  RationalFunction lhs = rational_derivative(f * g);
  RationalFunction rhs = rational_derivative(f) * g + f * rational_derivative(g);
  CHECK(rational_equal(lhs, rhs, 1e-11));
}

TEST_CASE("cross-multiplied equality identifies cancelling factors") {
  // (z^2 - 1)/(z - 1) equals z + 1 without any gcd step
  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction one = RationalFunction::constant(Complex(1.0, 0.0));
  RationalFunction lhs = (z * z - one) / (z - one);
  RationalFunction rhs = z + one;
  CHECK(rational_equal(lhs, rhs));
  CHECK_FALSE(rational_equal(lhs, z));

  // evaluation at the removable point falls back on derivative ratios
  CHECK(std::abs(rational_evaluate(lhs, Complex(1.0, 0.0)) -
                 Complex(2.0, 0.0)) < 1e-10);
  // a genuine pole still throws
  RationalFunction pole = one / (z - one);
  CHECK_THROWS_AS(rational_evaluate(pole, Complex(1.0, 0.0)),
                  std::domain_error);
}

TEST_CASE("zero test is stable under cancellation noise") {
  std::mt19937 rng(7);
  RationalFunction f = random_rational(4, 3, rng);
  RationalFunction diff = f - f;
  CHECK(rational_is_zero(diff));
  CHECK_FALSE(rational_is_zero(f));
}

TEST_CASE("pole analysis: locations, multiplicities, residues") {
  // f = 1/((z-1)(z+2)^2): residue 1/9 at 1, residue -1/9 at -2 (order 2)
  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction one = RationalFunction::constant(Complex(1.0, 0.0));
  RationalFunction two = RationalFunction::constant(Complex(2.0, 0.0));
  RationalFunction f = one / ((z - one) * (z + two) * (z + two));
  std::vector<PoleInfo> poles = rational_poles(f);
  REQUIRE(poles.size() == 2);
  std::sort(poles.begin(), poles.end(), [](const PoleInfo& a,
                                           const PoleInfo& b) {
    return a.location.real() < b.location.real();
  });
  CHECK(std::abs(poles[0].location - Complex(-2.0, 0.0)) < 1e-9);
  CHECK(poles[0].multiplicity == 2);
  CHECK(std::abs(poles[0].residue - Complex(-1.0 / 9.0, 0.0)) < 1e-9);
  CHECK(std::abs(poles[1].location - Complex(1.0, 0.0)) < 1e-9);
  CHECK(poles[1].multiplicity == 1);
  CHECK(std::abs(poles[1].residue - Complex(1.0 / 9.0, 0.0)) < 1e-9);

  // removable factor contributes no pole
  RationalFunction g = (z * z - one) / (z - one);
  CHECK(rational_poles(g).empty());
}

TEST_CASE("antiderivative: polynomial part") {
  Poly p{Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(3.0, 0.0)};
  RationalFunction f(p, Poly{Complex(1.0, 0.0)});
  RationalFunction F = rational_antiderivative(f);
  CHECK(rational_equal(rational_derivative(F), f));
  // zero integration constant
  CHECK(std::abs(rational_evaluate(F, Complex(0.0, 0.0))) == 0.0);
}

TEST_CASE("antiderivative: higher-order poles integrate rationally") {
  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction one = RationalFunction::constant(Complex(1.0, 0.0));
  RationalFunction two = RationalFunction::constant(Complex(2.0, 0.0));

  // 1/(z-2)^3 -> -1/(2(z-2)^2)
  RationalFunction f = one / ((z - two) * (z - two) * (z - two));
  RationalFunction F = rational_antiderivative(f);
  CHECK(rational_equal(rational_derivative(F), f, 1e-8));

  // repeated root given in expanded coefficient form: the root cluster is
  // only recovered after the tolerance escalation pass
  RationalFunction g(Poly{Complex(1.0, 0.0)},
                     Poly{Complex(-1.0, 0.0), Complex(3.0, 0.0),
                          Complex(-3.0, 0.0), Complex(1.0, 0.0)});
  RationalFunction G = rational_antiderivative(g);
  CHECK(rational_equal(rational_derivative(G), g, 1e-7));

  // mixed polynomial plus double pole
  RationalFunction three = RationalFunction::constant(Complex(3.0, 0.0));
  RationalFunction h = z + three / ((z + one) * (z + one));
  RationalFunction H = rational_antiderivative(h);
  CHECK(rational_equal(rational_derivative(H), h, 1e-9));
}

TEST_CASE("antiderivative rejects nonzero residues") {
  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction one = RationalFunction::constant(Complex(1.0, 0.0));
  try {
    rational_antiderivative(one / z);
    FAIL("expected NonIntegrableError");
  } catch (const NonIntegrableError& e) {
    CHECK(std::abs(e.pole) < 1e-9);
    CHECK(std::abs(e.residue - Complex(1.0, 0.0)) < 1e-9);
    CHECK(std::string(e.what()).find("residue") != std::string::npos);
  }

  // residue hidden behind an expanded numerator: (2z-1)/(z^2-z) has
  // residues 1 at both 0 and 1
  RationalFunction f((z + z - one) / (z * z - z));
  CHECK_THROWS_AS(rational_antiderivative(f), NonIntegrableError);
}

TEST_CASE("powers and composition stay pointwise consistent") {
  RationalFunction z = RationalFunction::monomial(1);
  RationalFunction one = RationalFunction::constant(Complex(1.0, 0.0));

  Poly p{Complex(1.0, 0.0), Complex(-2.0, 0.5), Complex(0.0, 1.0)};
  Poly cube = poly_pow(p, 3);
  CHECK(poly_degree(cube) == 6);
  const Complex w(0.4, -0.7);
  CHECK(std::abs(poly_evaluate(cube, w) - std::pow(poly_evaluate(p, w), 3)) <
        1e-12);
  CHECK(poly_degree(poly_pow(p, 0)) == 0);

  // f(z) = (z^2+1)/(z-2) composed with g(z) = 1/(z+1)
  RationalFunction two = RationalFunction::constant(Complex(2.0, 0.0));
  RationalFunction f = (z * z + one) / (z - two);
  RationalFunction g = one / (z + one);
  RationalFunction fg = rational_compose(f, g);
  for (Complex s : {Complex(0.3, 0.2), Complex(-0.5, 1.1), Complex(2.0, -0.4)}) {
    CHECK(std::abs(rational_evaluate(fg, s) -
                   rational_evaluate(f, rational_evaluate(g, s))) < 1e-12);
  }
  // composing with the identity is the identity
  CHECK(rational_equal(rational_compose(f, z), f));
}
