#include "wdpw/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace wdpw {

namespace {

void require_same_shape(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw std::invalid_argument("rational matrix shape mismatch");
}

}  // namespace

RationalMatrix RationalMatrix::from_constant(const Mat& m) {
  RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j)
      out.at(i, j) = RationalFunction::constant(m(i, j));
  return out;
}

RationalMatrix rm_add(const RationalMatrix& a, const RationalMatrix& b) {
  require_same_shape(a, b);
  RationalMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < out.entries.size(); ++k)
    out.entries[k] = rational_add(a.entries[k], b.entries[k]);
  return out;
}

RationalMatrix rm_scale(const RationalMatrix& a, Complex c) {
  RationalMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < out.entries.size(); ++k)
    out.entries[k] = rational_scale(a.entries[k], c);
  return out;
}

RationalMatrix rm_scale_by(const RationalMatrix& a,
                           const RationalFunction& r) {
  RationalMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < out.entries.size(); ++k)
    out.entries[k] = rational_multiply(a.entries[k], r);
  return out;
}

RationalMatrix rm_multiply(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("rational matrix product shape mismatch");
  RationalMatrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j) {
      RationalFunction acc;
      for (int p = 0; p < a.cols; ++p) {
        if (rational_is_zero(a.at(i, p), 0.0) ||
            rational_is_zero(b.at(p, j), 0.0))
          continue;
        acc = rational_add(acc, rational_multiply(a.at(i, p), b.at(p, j)));
      }
      out.at(i, j) = acc;
    }
  return out;
}

RationalMatrix rm_transpose(const RationalMatrix& a) {
  RationalMatrix out(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

RationalMatrix rm_derivative(const RationalMatrix& a) {
  RationalMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < out.entries.size(); ++k)
    out.entries[k] = rational_derivative(a.entries[k]);
  return out;
}

RationalMatrix rm_compose(const RationalMatrix& a, const RationalFunction& g) {
  RationalMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < out.entries.size(); ++k)
    out.entries[k] = rational_compose(a.entries[k], g);
  return out;
}

RationalMatrix rm_conjugate(const Mat& T, const RationalMatrix& a,
                            const Mat& S) {
  RationalMatrix mid(static_cast<int>(T.rows()), a.cols);
  for (int i = 0; i < mid.rows; ++i)
    for (int j = 0; j < mid.cols; ++j) {
      RationalFunction acc;
      for (int p = 0; p < a.rows; ++p) {
        if (T(i, p) == Complex(0.0, 0.0)) continue;
        acc = rational_add(acc, rational_scale(a.at(p, j), T(i, p)));
      }
      mid.at(i, j) = acc;
    }
  RationalMatrix out(mid.rows, static_cast<int>(S.cols()));
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) {
      RationalFunction acc;
      for (int p = 0; p < mid.cols; ++p) {
        if (S(p, j) == Complex(0.0, 0.0)) continue;
        acc = rational_add(acc, rational_scale(mid.at(i, p), S(p, j)));
      }
      out.at(i, j) = acc;
    }
  return out;
}

Mat rm_evaluate(const RationalMatrix& a, Complex z) {
  Mat out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      out(i, j) = rational_evaluate(a.at(i, j), z);
  return out;
}

bool rm_equal(const RationalMatrix& a, const RationalMatrix& b, double tol) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  for (size_t k = 0; k < a.entries.size(); ++k)
    if (!rational_equal(a.entries[k], b.entries[k], tol)) return false;
  return true;
}

bool rm_is_zero(const RationalMatrix& a, double tol) {
  for (const RationalFunction& e : a.entries)
    if (!rational_is_zero(e, tol)) return false;
  return true;
}

LaurentMatrixLoop evaluate_potential(const PotentialSpec& eta, Complex z) {
  if (eta.graded.empty()) return zero_loop(eta.dim, 0, 0);
  const int lo = eta.graded.begin()->first;
  const int hi = eta.graded.rbegin()->first;
  LaurentMatrixLoop out = zero_loop(eta.dim, lo, hi);
  for (const auto& [j, A] : eta.graded) out.coeff(j) = rm_evaluate(A, z);
  return out;
}

double potential_membership_residual(const PotentialSpec& eta, int nsamples) {
  std::mt19937 rng(938231u);
  std::uniform_real_distribution<double> rad(0.2, 1.2);
  std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
  const RealMat S = twist_matrix(eta.dim);
  double res = 0.0;
  for (int s = 0; s < nsamples; ++s) {
    const double r = rad(rng), th = ang(rng);
    const Complex z(r * std::cos(th), r * std::sin(th));
    for (const auto& [j, A] : eta.graded) {
      const Mat M = rm_evaluate(A, z);
      res = std::max(res, algebra_membership_residual(M));
      const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      const Mat twist_defect = S.cast<Complex>() * M * S.cast<Complex>() -
                               sgn * M;
      res = std::max(res, twist_defect.cwiseAbs().maxCoeff());
    }
  }
  return res;
}

bool potential_equal(const PotentialSpec& a, const PotentialSpec& b,
                     double tol) {
  if (a.dim != b.dim) return false;
  std::map<int, const RationalMatrix*> keys;
  for (const auto& [j, A] : a.graded) keys[j] = &A;
  for (const auto& [j, B] : b.graded) {
    const auto it = a.graded.find(j);
    if (it == a.graded.end()) {
      if (!rm_is_zero(B, tol)) return false;
    } else if (!rm_equal(it->second, B, tol)) {
      return false;
    }
    keys.erase(j);
  }
  for (const auto& [j, A] : keys)
    if (!rm_is_zero(*A, tol)) return false;
  return true;
}

void validate_potential(const PotentialSpec& eta) {
  if (eta.dim < 5)
    throw std::invalid_argument("potential dimension must be at least 5");
  for (const auto& [j, A] : eta.graded) {
    if (j < -1)
      throw std::invalid_argument(
          "potential has a lambda power below -1; lambda*eta must be "
          "holomorphic in lambda");
    if (A.rows != eta.dim || A.cols != eta.dim)
      throw std::invalid_argument("potential coefficient shape mismatch");
    if (eta.kind == PotentialKind::normalized && j != -1)
      throw std::invalid_argument(
          "normalized potential may only carry the lambda^{-1} coefficient");
    if (eta.kind == PotentialKind::constant)
      for (const RationalFunction& e : A.entries)
        if (poly_degree(e.num) > 0 || poly_degree(e.den) > 0)
          throw std::invalid_argument(
              "constant potential has a z-dependent entry");
  }
  const double res = potential_membership_residual(eta);
  if (res > 1e-8)
    throw std::invalid_argument(
        "potential violates the algebra or grading invariants; residual " +
        std::to_string(res));
}

ConstraintError::ConstraintError(Poly res)
    : std::runtime_error(
          "isotropy constraint f1'f4' + f2'f3' = 0 violated; residual "
          "polynomial mass " +
          std::to_string(poly_max_abs(res))),
      residual(std::move(res)) {}

RationalFunction s4_constraint(const IsotropicS4Data& data) {
  const RationalFunction d1 = rational_derivative(data.f1);
  const RationalFunction d2 = rational_derivative(data.f2);
  const RationalFunction d3 = rational_derivative(data.f3);
  const RationalFunction d4 = rational_derivative(data.f4);
  return rational_add(rational_multiply(d1, d4), rational_multiply(d2, d3));
}

Poly s4_constraint_residual(const IsotropicS4Data& data) {
  return s4_constraint(data).num;
}

bool s4_constraint_holds(const IsotropicS4Data& data, double tol) {
  return rational_is_zero(s4_constraint(data), tol);
}

RationalMatrix s4_b1_matrix(const IsotropicS4Data& data) {
  const RationalFunction d1 = rational_derivative(data.f1);
  const RationalFunction d2 = rational_derivative(data.f2);
  const RationalFunction d3 = rational_derivative(data.f3);
  const RationalFunction d4 = rational_derivative(data.f4);
  const Complex half(0.5, 0.0);
  const Complex ihalf(0.0, 0.5);
  const RationalFunction m32 = rational_subtract(d3, d2);
  const RationalFunction p32 = rational_add(d3, d2);
  const RationalFunction m41 = rational_subtract(d4, d1);
  const RationalFunction p41 = rational_add(d4, d1);

  RationalMatrix B(4, 2);
  B.at(0, 0) = rational_scale(m32, ihalf);
  B.at(0, 1) = rational_scale(m32, -half);
  B.at(1, 0) = rational_scale(p32, ihalf);
  B.at(1, 1) = rational_scale(p32, -half);
  B.at(2, 0) = rational_scale(m41, half);
  B.at(2, 1) = rational_scale(m41, ihalf);
  B.at(3, 0) = rational_scale(p41, ihalf);
  B.at(3, 1) = rational_scale(p41, -half);
  return B;
}

PotentialSpec build_s4_potential(const IsotropicS4Data& data) {
  if (!s4_constraint_holds(data)) throw ConstraintError(s4_constraint_residual(data));
  const RationalMatrix B = s4_b1_matrix(data);
  // lower-left block -B^T I_{1,3}
  const RationalMatrix lower = rm_scale(
      rm_conjugate(Mat::Identity(2, 2), rm_transpose(B),
                   metric_matrix(4).cast<Complex>()),
      Complex(-1.0, 0.0));

  PotentialSpec eta;
  eta.kind = PotentialKind::normalized;
  eta.dim = 6;
  RationalMatrix A(6, 6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) A.at(i, 4 + j) = B.at(i, j);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) A.at(4 + i, j) = lower.at(i, j);
  eta.graded.emplace(-1, std::move(A));
  validate_potential(eta);
  return eta;
}

IsotropicS4Data build_meromorphic_data(const RationalFunction& f,
                                       const RationalFunction& h) {
  const RationalFunction df = rational_derivative(f);
  const RationalFunction h2 = rational_multiply(h, h);
  const RationalFunction h4 = rational_multiply(h2, h2);
  IsotropicS4Data data;
  data.f1 = f;
  data.f2 = rational_antiderivative(rational_multiply(h2, df));
  data.f3 = rational_scale(data.f2, Complex(-1.0, 0.0));
  data.f4 = rational_antiderivative(rational_multiply(h4, df));
  if (!s4_constraint_holds(data))
    throw ConstraintError(s4_constraint_residual(data));
  return data;
}

TwistorDeformation twistor_deform(const IsotropicS4Data& base, Complex t0,
                                  const RationalFunction& g) {
  if (t0 == Complex(0.0, 0.0))
    throw std::invalid_argument("twistor_deform: t0 must be nonzero");
  TwistorDeformation out;
  out.c2 = (Complex(1.0, 0.0) + t0 * t0) / (2.0 * t0);
  out.c3 = Complex(0.0, 1.0) * (Complex(1.0, 0.0) - t0 * t0) / (2.0 * t0);
  const double det = out.c2.real() * out.c3.imag() -
                     out.c2.imag() * out.c3.real();
  out.coefficients_independent =
      std::abs(det) >
      1e-12 * std::max(1.0, std::norm(out.c2) + std::norm(out.c3));

  out.data.f1 = base.f1;
  out.data.f2 = rational_scale(base.f2, out.c2);
  out.data.f3 = rational_scale(base.f2, out.c3);
  out.data.f4 = rational_antiderivative(
      rational_multiply(g, rational_derivative(base.f1)));
  if (!s4_constraint_holds(out.data))
    throw ConstraintError(s4_constraint_residual(out.data));
  return out;
}

PotentialSpec build_equivariant_potential(const Mat& Dm1, const Mat& D0,
                                          const Mat& D1) {
  const int dim = static_cast<int>(D0.rows());
  if (Dm1.rows() != dim || Dm1.cols() != dim || D0.cols() != dim ||
      D1.rows() != dim || D1.cols() != dim)
    throw std::invalid_argument("equivariant potential blocks must be square "
                                "matrices of one dimension");
  const RealMat S = twist_matrix(dim);
  const Mat Sc = S.cast<Complex>();
  const Mat blocks[3] = {Dm1, D0, D1};
  for (int k = 0; k < 3; ++k) {
    const int j = k - 1;
    if (algebra_membership_residual(blocks[k]) > 1e-10)
      throw std::invalid_argument("equivariant coefficient is not in the "
                                  "orthogonal algebra");
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    if ((Sc * blocks[k] * Sc - sgn * blocks[k]).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("equivariant coefficient violates the "
                                  "twist grading");
  }
  if ((D1 - Dm1.conjugate()).cwiseAbs().maxCoeff() > 1e-10 ||
      D0.imag().cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("equivariant potential fails the reality "
                                "pairing D_1 = conj(D_{-1}), D_0 real");

  PotentialSpec eta;
  eta.kind = PotentialKind::constant;
  eta.dim = dim;
  eta.graded.emplace(-1, RationalMatrix::from_constant(Dm1));
  eta.graded.emplace(0, RationalMatrix::from_constant(D0));
  eta.graded.emplace(1, RationalMatrix::from_constant(D1));
  eta.immersion_condition = std::abs(D0(0, 2) + D0(1, 2)) > 1e-12;
  validate_potential(eta);
  return eta;
}

PotentialSpec transform_potential(const PotentialSpec& eta,
                                  const MoebiusTransform& gamma,
                                  const Mat& T) {
  const RationalFunction gz = moebius_rational(gamma);
  const RationalFunction dg = moebius_derivative_rational(gamma);
  const Mat Tinv = T.inverse();
  PotentialSpec out;
  out.kind = eta.kind;
  out.dim = eta.dim;
  out.immersion_condition = eta.immersion_condition;
  const bool affine_unit =
      std::abs(gamma.c) == 0.0;  // dgamma/dz constant iff c = 0
  if (eta.kind == PotentialKind::constant && !affine_unit)
    out.kind = PotentialKind::holomorphic;
  for (const auto& [j, A] : eta.graded) {
    RationalMatrix pulled = rm_scale_by(rm_compose(A, gz), dg);
    out.graded.emplace(j, rm_conjugate(T, pulled, Tinv));
  }
  return out;
}

}  // namespace wdpw
