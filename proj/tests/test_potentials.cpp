#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "wdpw/potentials.hpp"

using namespace wdpw;

namespace {

RationalFunction rf(std::initializer_list<Complex> num,
                    std::initializer_list<Complex> den = {Complex(1.0, 0.0)}) {
  return RationalFunction(Poly(num), Poly(den));
}

const Complex I(0.0, 1.0);

// f1 = z^2/2, f2 = z, f3 = f4 = 0
IsotropicS4Data gloss_data() {
  IsotropicS4Data d;
  d.f1 = rf({0.0, 0.0, 0.5});
  d.f2 = rf({0.0, 1.0});
  return d;
}

// f1 = -z^3/3, f2 = z^4(1+z^3), f3 = z(1+z^3), f4 = 2z^2+23z^5/5+7z^8/2
IsotropicS4Data threefold_data() {
  IsotropicS4Data d;
  d.f1 = rf({0.0, 0.0, 0.0, -1.0 / 3.0});
  d.f2 = rf({0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0});
  d.f3 = rf({0.0, 1.0, 0.0, 0.0, 1.0});
  d.f4 = rf({0.0, 0.0, 2.0, 0.0, 0.0, 23.0 / 5.0, 0.0, 0.0, 3.5});
  return d;
}

Mat rotation_pair_matrix(double th) {
  Mat T = Mat::Identity(6, 6);
  for (int b = 2; b < 6; b += 2) {
    T(b, b) = std::cos(th);
    T(b, b + 1) = std::sin(th);
    T(b + 1, b) = -std::sin(th);
    T(b + 1, b + 1) = std::cos(th);
  }
  return T;
}

// entries share one denominator per exponent and have numerators of a fixed
// degree, so conjugation sums and pullbacks keep the degrees bounded
PotentialSpec random_rational_potential(std::mt19937& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  PotentialSpec eta;
  eta.kind = PotentialKind::holomorphic;
  eta.dim = 6;
  for (const int j : {-1, 0, 2}) {
    const Poly q{Complex(1.0, 0.0), Complex(0.1 * (j + 2), -0.15)};
    RationalMatrix A(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c)
        A.at(r, c) = RationalFunction(
            Poly{Complex(d(rng), d(rng)), Complex(d(rng), d(rng)),
                 Complex(1.0 + 0.25 * d(rng), 0.25 * d(rng))},
            q);
    eta.graded.emplace(j, A);
  }
  return eta;
}

}  // namespace

TEST_CASE("derivative-combination matrix matches the quadratic example") {
  const RationalMatrix B = s4_b1_matrix(gloss_data());
  // columns of (1/2)[[-i,1],[i,-1],[-z,-iz],[iz,-z]]
  CHECK(rational_equal(B.at(0, 0), rf({-0.5 * I})));
  CHECK(rational_equal(B.at(0, 1), rf({0.5})));
  CHECK(rational_equal(B.at(1, 0), rf({0.5 * I})));
  CHECK(rational_equal(B.at(1, 1), rf({-0.5})));
  CHECK(rational_equal(B.at(2, 0), rf({0.0, -0.5})));
  CHECK(rational_equal(B.at(2, 1), rf({0.0, -0.5 * I})));
  CHECK(rational_equal(B.at(3, 0), rf({0.0, 0.5 * I})));
  CHECK(rational_equal(B.at(3, 1), rf({0.0, -0.5})));

  const PotentialSpec eta = build_s4_potential(gloss_data());
  CHECK(eta.kind == PotentialKind::normalized);
  CHECK(eta.dim == 6);
  CHECK(potential_membership_residual(eta) < 1e-14);
  // block structure forces the twist grading exactly
  CHECK(twist_residual(evaluate_potential(eta, Complex(0.7, 0.3))) == 0.0);
}

TEST_CASE("zero data builds the zero potential") {
  const PotentialSpec eta = build_s4_potential(IsotropicS4Data{});
  REQUIRE(eta.graded.count(-1) == 1);
  CHECK(rm_is_zero(eta.graded.at(-1)));
}

TEST_CASE("threefold example satisfies the constraint exactly") {
  const IsotropicS4Data d = threefold_data();
  // -z^2 (4z + 23 z^4 + 28 z^7) + (4z^3 + 7z^6)(1 + 4z^3) cancels monomial
  // by monomial
  CHECK(s4_constraint_holds(d));
  CHECK(poly_max_abs(s4_constraint_residual(d)) < 1e-13);
  CHECK_NOTHROW(build_s4_potential(d));
}

TEST_CASE("constraint checker rejects inconsistent data") {
  IsotropicS4Data bad;
  bad.f1 = rf({0.0, 1.0});
  bad.f2 = rf({0.0, -1.0});
  bad.f3 = rf({0.0, -1.0});
  bad.f4 = rf({0.0, I});
  CHECK(!s4_constraint_holds(bad));
  CHECK_THROWS_AS(build_s4_potential(bad), ConstraintError);
  try {
    build_s4_potential(bad);
  } catch (const ConstraintError& e) {
    // residual is the constant polynomial 1 + i
    REQUIRE(poly_degree(e.residual) == 0);
    CHECK(std::abs(e.residual[0] - Complex(1.0, 1.0)) < 1e-14);
  }
}

TEST_CASE("meromorphic data integrates the three forms") {
  const IsotropicS4Data d =
      build_meromorphic_data(rf({0.0, 1.0}), rf({0.0, 1.0}));
  CHECK(rational_equal(d.f1, rf({0.0, 1.0})));
  CHECK(rational_equal(d.f2, rf({0.0, 0.0, 0.0, 1.0 / 3.0})));
  CHECK(rational_equal(d.f3, rf({0.0, 0.0, 0.0, -1.0 / 3.0})));
  CHECK(rational_equal(d.f4, rf({0.0, 0.0, 0.0, 0.0, 0.0, 0.2})));
  CHECK(s4_constraint_holds(d));
  CHECK_NOTHROW(build_s4_potential(d));

  // vanishing h freezes f2, f3, f4
  const IsotropicS4Data flat =
      build_meromorphic_data(rf({0.0, 1.0}), rf({0.0}));
  CHECK(rational_is_zero(flat.f2));
  CHECK(rational_is_zero(flat.f3));
  CHECK(rational_is_zero(flat.f4));

  // purely imaginary h still satisfies the constraint by the sign pairing
  const IsotropicS4Data imag = build_meromorphic_data(rf({0.0, 1.0}), rf({I}));
  CHECK(rational_equal(imag.f2, rf({0.0, -1.0})));
  CHECK(rational_equal(imag.f3, rf({0.0, 1.0})));
  CHECK(rational_equal(imag.f4, rf({0.0, 1.0})));
  CHECK(s4_constraint_holds(imag));
}

TEST_CASE("meromorphic data rejects residues") {
  // h^2 df = 2/z dz has residue 2 at the origin
  const RationalFunction f = rf({0.0, 0.0, 1.0});
  const RationalFunction h = RationalFunction(Poly{Complex(1.0, 0.0)},
                                              Poly{Complex(0.0, 0.0),
                                                   Complex(1.0, 0.0)});
  CHECK_THROWS_AS(build_meromorphic_data(f, h), NonIntegrableError);
  try {
    build_meromorphic_data(f, h);
  } catch (const NonIntegrableError& e) {
    CHECK(std::abs(e.pole) < 1e-8);
    CHECK(std::abs(e.residue - Complex(2.0, 0.0)) < 1e-8);
  }
}

TEST_CASE("twistor deformation coefficients") {
  const IsotropicS4Data base =
      build_meromorphic_data(rf({0.0, 1.0}), rf({0.0, 1.0}));
  const RationalFunction zero = rf({0.0});

  const TwistorDeformation t1 = twistor_deform(base, 1.0, zero);
  CHECK(std::abs(t1.c2 - Complex(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(t1.c3) < 1e-15);
  CHECK(!t1.coefficients_independent);
  CHECK(rational_equal(t1.data.f2, base.f2));
  CHECK(rational_is_zero(t1.data.f3));
  CHECK(rational_is_zero(t1.data.f4));

  const TwistorDeformation ti = twistor_deform(base, I, zero);
  CHECK(std::abs(ti.c2) < 1e-15);
  CHECK(std::abs(ti.c3 - Complex(1.0, 0.0)) < 1e-15);
  CHECK(!ti.coefficients_independent);

  // t0 = 2: coefficients (5/4, -3i/4); constraint pins g = -c2 c3 h^4
  const RationalFunction g2 = rf({0.0, 0.0, 0.0, 0.0, Complex(0.0, 15.0 / 16.0)});
  const TwistorDeformation t2 = twistor_deform(base, 2.0, g2);
  CHECK(std::abs(t2.c2 - Complex(1.25, 0.0)) < 1e-15);
  CHECK(std::abs(t2.c3 - Complex(0.0, -0.75)) < 1e-15);
  CHECK(t2.coefficients_independent);
  CHECK(s4_constraint_holds(t2.data));
  CHECK(rational_equal(t2.data.f4,
                       rf({0.0, 0.0, 0.0, 0.0, 0.0, Complex(0.0, 3.0 / 16.0)})));

  // a wrong g cannot satisfy the isotropy constraint
  CHECK_THROWS_AS(twistor_deform(base, 2.0, rf({1.0})), ConstraintError);
  CHECK_THROWS_AS(twistor_deform(base, 0.0, zero), std::invalid_argument);
}

TEST_CASE("equivariant builder validates grading and reality") {
  const Mat Z = Mat::Zero(6, 6);
  const PotentialSpec zero = build_equivariant_potential(Z, Z, Z);
  CHECK(zero.kind == PotentialKind::constant);
  CHECK(!zero.immersion_condition);

  Mat D0 = Mat::Zero(6, 6);
  D0(0, 2) = 0.5;
  D0(2, 0) = 0.5;
  D0(1, 2) = 0.5;
  D0(2, 1) = -0.5;
  const PotentialSpec eta = build_equivariant_potential(Z, D0, Z);
  CHECK(eta.immersion_condition);

  // a frame-frozen odd block needs its conjugate partner at lambda^{+1}
  const PotentialSpec s4 = build_s4_potential(gloss_data());
  const Mat Dm1 = rm_evaluate(s4.graded.at(-1), Complex(1.0, 0.0));
  CHECK_THROWS_AS(build_equivariant_potential(Dm1, Z, Z),
                  std::invalid_argument);
  const PotentialSpec paired =
      build_equivariant_potential(Dm1, Z, Dm1.conjugate());
  CHECK(paired.kind == PotentialKind::constant);
  CHECK(!paired.immersion_condition);

  // off-block constant term violates the twist grading
  Mat bad0 = Mat::Zero(6, 6);
  bad0(0, 4) = 1.0;
  bad0(4, 0) = 1.0;
  CHECK_THROWS_AS(build_equivariant_potential(Z, bad0, Z),
                  std::invalid_argument);
}

TEST_CASE("pullback matches conjugation for the symmetric examples") {
  // z -> -z with the sign involution
  const PotentialSpec e41 = build_s4_potential(gloss_data());
  const MoebiusTransform neg = MoebiusTransform::scaling(-1.0);
  Mat T41 = Mat::Identity(6, 6);
  for (int i = 2; i < 6; ++i) T41(i, i) = -1.0;
  CHECK(potential_equal(transform_potential(e41, neg, T41), e41));

  // z -> e^{2 pi i/3} z with the paired block rotation
  const PotentialSpec e43 = build_s4_potential(threefold_data());
  const double th = 2.0 * 3.14159265358979323846 / 3.0;
  const MoebiusTransform rot =
      MoebiusTransform::scaling(Complex(std::cos(th), std::sin(th)));
  const Mat Tth = rotation_pair_matrix(th);
  CHECK(potential_equal(
      transform_potential(e43, rot, Tth.transpose()), e43, 1e-10));

  // identity transform
  CHECK(potential_equal(
      transform_potential(e43, MoebiusTransform::identity(),
                          Mat::Identity(6, 6)),
      e43));
}

TEST_CASE("potential transforms compose functorially") {
  std::mt19937 rng(73);
  const PotentialSpec eta = random_rational_potential(rng);
  const MoebiusTransform g1(2.0, 1.0, 1.0, 1.0);
  const MoebiusTransform g2(1.0, -I, Complex(0.5, 0.0), 1.0);
  std::normal_distribution<double> d(0.0, 1.0);
  Mat T1(6, 6), T2(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      T1(i, j) = Complex(d(rng), d(rng));
      T2(i, j) = Complex(d(rng), d(rng));
    }
  T1 += 3.0 * Mat::Identity(6, 6);
  T2 += 3.0 * Mat::Identity(6, 6);

  const PotentialSpec lhs =
      transform_potential(transform_potential(eta, g1, T1), g2, T2);
  const PotentialSpec rhs =
      transform_potential(eta, moebius_compose(g1, g2), T2 * T1);
  CHECK(potential_equal(lhs, rhs, 1e-9));
}

TEST_CASE("potential validation flags structural violations") {
  PotentialSpec eta = build_s4_potential(gloss_data());
  CHECK_NOTHROW(validate_potential(eta));
  eta.graded.emplace(0, RationalMatrix(6, 6));
  CHECK_THROWS_AS(validate_potential(eta), std::invalid_argument);

  PotentialSpec deep;
  deep.kind = PotentialKind::holomorphic;
  deep.dim = 6;
  deep.graded.emplace(-2, RationalMatrix(6, 6));
  CHECK_THROWS_AS(validate_potential(deep), std::invalid_argument);
}

TEST_CASE("moebius transforms act and compose consistently") {
  const MoebiusTransform g(2.0, 1.0, 1.0, 1.0);
  const Complex z(0.3, 0.2);
  CHECK(std::abs(moebius_apply(moebius_compose(g, moebius_inverse(g)), z) -
                 z) < 1e-14);
  CHECK(moebius_is_identity(moebius_compose(g, moebius_inverse(g))));

  const double th = 2.0 * 3.14159265358979323846 / 3.0;
  const MoebiusTransform rot =
      MoebiusTransform::scaling(Complex(std::cos(th), std::sin(th)));
  CHECK(moebius_order(rot) == 3);
  CHECK(moebius_order(MoebiusTransform::translation(1.0)) == 0);

  // rational form agrees with pointwise action
  const RationalFunction gr = moebius_rational(g);
  CHECK(std::abs(rational_evaluate(gr, z) - moebius_apply(g, z)) < 1e-14);
  const RationalFunction dg = moebius_derivative_rational(g);
  CHECK(std::abs(rational_evaluate(dg, z) - moebius_derivative(g, z)) <
        1e-14);
}
