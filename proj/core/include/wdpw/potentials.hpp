#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "wdpw/loops.hpp"
#include "wdpw/moebius.hpp"
#include "wdpw/rational.hpp"

namespace wdpw {

// dense matrix of rational functions of z, row major
struct RationalMatrix {
  int rows = 0, cols = 0;
  std::vector<RationalFunction> entries;

  RationalMatrix() = default;
  RationalMatrix(int r, int c) : rows(r), cols(c), entries(r * c) {}

  RationalFunction& at(int i, int j) { return entries[i * cols + j]; }
  const RationalFunction& at(int i, int j) const {
    return entries[i * cols + j];
  }

  static RationalMatrix from_constant(const Mat& m);
};

RationalMatrix rm_add(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix rm_scale(const RationalMatrix& a, Complex c);
RationalMatrix rm_scale_by(const RationalMatrix& a, const RationalFunction& r);
RationalMatrix rm_multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix rm_transpose(const RationalMatrix& a);
RationalMatrix rm_derivative(const RationalMatrix& a);
// entrywise substitution z -> g(z)
RationalMatrix rm_compose(const RationalMatrix& a, const RationalFunction& g);
// T * a * S with constant matrices
RationalMatrix rm_conjugate(const Mat& T, const RationalMatrix& a,
                            const Mat& S);
Mat rm_evaluate(const RationalMatrix& a, Complex z);
bool rm_equal(const RationalMatrix& a, const RationalMatrix& b,
              double tol = 1e-12);
bool rm_is_zero(const RationalMatrix& a, double tol = 1e-12);

enum class PotentialKind { normalized, holomorphic, constant };

// Laurent-graded matrix 1-form eta = sum_j lambda^j A_j(z) dz with j >= -1.
// kind = normalized keeps only j = -1 with block off-diagonal values;
// kind = constant has z-independent coefficients (equivariant case).
struct PotentialSpec {
  PotentialKind kind = PotentialKind::holomorphic;
  int dim = 0;
  std::map<int, RationalMatrix> graded;
  // set by build_equivariant_potential: whether the d-bar associated map
  // is an immersion at the base point
  bool immersion_condition = false;
};

// coefficientwise evaluation at z; throws std::domain_error at poles
LaurentMatrixLoop evaluate_potential(const PotentialSpec& eta, Complex z);
// max over deterministic z samples and exponents of the algebra-membership
// and twist-grading defects
double potential_membership_residual(const PotentialSpec& eta,
                                     int nsamples = 20);
bool potential_equal(const PotentialSpec& a, const PotentialSpec& b,
                     double tol = 1e-12);
// structural invariants for the declared kind; throws on violation
void validate_potential(const PotentialSpec& eta);

// quadruple of rational functions subject to f1'f4' + f2'f3' = 0
struct IsotropicS4Data {
  RationalFunction f1, f2, f3, f4;
};

struct ConstraintError : std::runtime_error {
  explicit ConstraintError(Poly res);
  Poly residual;
};

// f1'f4' + f2'f3' as a rational function
RationalFunction s4_constraint(const IsotropicS4Data& data);
// numerator of the constraint after clearing denominators
Poly s4_constraint_residual(const IsotropicS4Data& data);
bool s4_constraint_holds(const IsotropicS4Data& data, double tol = 1e-12);

// the 4x2 matrix of derivative combinations entering the normalized
// potential, and the potential itself; throws ConstraintError when the
// isotropy constraint fails
RationalMatrix s4_b1_matrix(const IsotropicS4Data& data);
PotentialSpec build_s4_potential(const IsotropicS4Data& data);

// integrate df1 = df, df2 = h^2 df, df3 = -h^2 df, df4 = h^4 df; throws
// NonIntegrableError when a pole of the integrand carries a residue
IsotropicS4Data build_meromorphic_data(const RationalFunction& f,
                                       const RationalFunction& h);

struct TwistorDeformation {
  IsotropicS4Data data;
  Complex c2, c3;
  // whether c2 and c3 are linearly independent over the reals
  bool coefficients_independent = false;
};

// df2 = c2 h^2 df, df3 = c3 h^2 df, df4 = g df with c2 = (1+t0^2)/(2 t0),
// c3 = i(1-t0^2)/(2 t0); the isotropy constraint pins g = -c2 c3 h^4 and is
// re-checked on the result
TwistorDeformation twistor_deform(const IsotropicS4Data& base, Complex t0,
                                  const RationalFunction& g);

// constant potential lambda^{-1} D_{-1} + D_0 + lambda D_1; validates the
// algebra, grading, and reality pairing (D_1 = conj D_{-1}, D_0 real) and
// records the immersion condition D0(0,2) + D0(1,2) != 0
PotentialSpec build_equivariant_potential(const Mat& Dm1, const Mat& D0,
                                          const Mat& D1);

// T (gamma^* eta) T^{-1}: substitute z -> gamma(z), multiply by dgamma/dz,
// conjugate; pure coefficient arithmetic
PotentialSpec transform_potential(const PotentialSpec& eta,
                                  const MoebiusTransform& gamma, const Mat& T);

}  // namespace wdpw
