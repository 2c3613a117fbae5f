#include "wdpw/loops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace wdpw {

namespace {

constexpr double kPi = 3.14159265358979323846;

double coeff_mass(const LaurentMatrixLoop& a, int j) {
  if (j < a.lo || j > a.hi) return 0.0;
  return a.coeff(j).cwiseAbs().maxCoeff();
}

// smallest power of two >= m
int next_pow2(int m) {
  int s = 1;
  while (s < m) s *= 2;
  return s;
}

// re-expand S^1 samples into the coefficient band [-N, N] and trim
LaurentMatrixLoop samples_to_loop(const std::vector<Mat>& samples, int dim,
                                  const TruncationPolicy& policy) {
  const int S = static_cast<int>(samples.size());
  const int N = std::min(policy.max_degree, S / 2 - 1);
  LaurentMatrixLoop out = zero_loop(dim, -N, N);
  for (int j = -N; j <= N; ++j) {
    Mat c = Mat::Zero(dim, dim);
    for (int s = 0; s < S; ++s) {
      const double ang = -2.0 * kPi * j * s / S;
      c += samples[static_cast<size_t>(s)] * std::polar(1.0, ang);
    }
    out.coeff(j) = c / static_cast<double>(S);
  }
  return truncate_loop(out, policy);
}

}  // namespace

LaurentMatrixLoop zero_loop(int dim, int lo, int hi) {
  LaurentMatrixLoop a;
  a.dim = dim;
  a.lo = lo;
  a.hi = hi;
  if (hi >= lo)
    a.coeffs.assign(static_cast<size_t>(hi - lo + 1), Mat::Zero(dim, dim));
  return a;
}

LaurentMatrixLoop identity_loop(int dim) {
  LaurentMatrixLoop a = zero_loop(dim, 0, 0);
  a.coeff(0) = Mat::Identity(dim, dim);
  return a;
}

LaurentMatrixLoop monomial_loop(const Mat& M, int j) {
  LaurentMatrixLoop a = zero_loop(static_cast<int>(M.rows()), j, j);
  a.coeff(j) = M;
  return a;
}

LaurentMatrixLoop truncate_loop(const LaurentMatrixLoop& a,
                                const TruncationPolicy& policy,
                                double* dropped) {
  const int N = policy.max_degree;
  double lost = 0.0;
  int lo = std::max(a.lo, -N);
  int hi = std::min(a.hi, N);
  for (int j = a.lo; j < lo; ++j) lost = std::max(lost, coeff_mass(a, j));
  for (int j = hi + 1; j <= a.hi; ++j) lost = std::max(lost, coeff_mass(a, j));
  // shrink further past negligible outer coefficients
  while (lo < hi && coeff_mass(a, lo) <= policy.drop_tolerance) ++lo;
  while (hi > lo && coeff_mass(a, hi) <= policy.drop_tolerance) --hi;
  LaurentMatrixLoop out = zero_loop(a.dim, lo, hi);
  for (int j = lo; j <= hi; ++j) out.coeff(j) = a.coeff_or_zero(j);
  if (dropped) *dropped = std::max(*dropped, lost);
  return out;
}

LaurentMatrixLoop loop_add(const LaurentMatrixLoop& a,
                           const LaurentMatrixLoop& b) {
  LaurentMatrixLoop out =
      zero_loop(a.dim, std::min(a.lo, b.lo), std::max(a.hi, b.hi));
  for (int j = out.lo; j <= out.hi; ++j)
    out.coeff(j) = a.coeff_or_zero(j) + b.coeff_or_zero(j);
  return out;
}

LaurentMatrixLoop loop_scale(const LaurentMatrixLoop& a, Complex s) {
  LaurentMatrixLoop out = a;
  for (auto& c : out.coeffs) c *= s;
  return out;
}

LaurentMatrixLoop loop_multiply(const LaurentMatrixLoop& a,
                                const LaurentMatrixLoop& b,
                                const TruncationPolicy& policy,
                                double* dropped) {
  if (a.dim != b.dim)
    throw std::invalid_argument("loop_multiply: dimension mismatch");
  LaurentMatrixLoop out = zero_loop(a.dim, a.lo + b.lo, a.hi + b.hi);
  for (int j = a.lo; j <= a.hi; ++j)
    for (int k = b.lo; k <= b.hi; ++k)
      out.coeff(j + k) += a.coeff(j) * b.coeff(k);
  return truncate_loop(out, policy, dropped);
}

LaurentMatrixLoop loop_inverse(const LaurentMatrixLoop& a,
                               const TruncationPolicy& policy) {
  const int band = std::max(std::abs(a.lo), std::abs(a.hi));
  const int S =
      next_pow2(std::max(4 * (policy.max_degree + 1), 8 * (band + 1)));
  std::vector<Mat> inv(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    const Complex lam = std::polar(1.0, 2.0 * kPi * s / S);
    Mat g = loop_evaluate(a, lam);
    Eigen::FullPivLU<Mat> lu(g);
    if (!lu.isInvertible())
      throw std::runtime_error("loop_inverse: singular at sample " +
                               std::to_string(s) + " of " + std::to_string(S));
    inv[static_cast<size_t>(s)] = lu.inverse();
  }
  return samples_to_loop(inv, a.dim, policy);
}

LaurentMatrixLoop loop_exp(const LaurentMatrixLoop& X,
                           const TruncationPolicy& policy) {
  const int band = std::max(std::abs(X.lo), std::abs(X.hi));
  const int S =
      next_pow2(std::max(4 * (policy.max_degree + 1), 8 * (band + 1)));
  std::vector<Mat> ex(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    const Complex lam = std::polar(1.0, 2.0 * kPi * s / S);
    ex[static_cast<size_t>(s)] = loop_evaluate(X, lam).exp();
  }
  return samples_to_loop(ex, X.dim, policy);
}

Mat loop_evaluate(const LaurentMatrixLoop& a, Complex lambda) {
  if (lambda == Complex(0.0, 0.0))
    throw std::invalid_argument("loop_evaluate: lambda = 0");
  // Horner in lambda for j >= 0 and in 1/lambda for j < 0, meeting at j = 0
  Mat plus = Mat::Zero(a.dim, a.dim);
  for (int j = a.hi; j >= 0; --j) plus = plus * lambda + a.coeff_or_zero(j);
  Mat minus = Mat::Zero(a.dim, a.dim);
  const Complex mu = 1.0 / lambda;
  for (int j = a.lo; j <= -1; ++j) minus = minus * mu + a.coeff_or_zero(j);
  return plus + minus * mu;
}

LaurentMatrixLoop loop_reality_conjugate(const LaurentMatrixLoop& a) {
  LaurentMatrixLoop out = zero_loop(a.dim, -a.hi, -a.lo);
  for (int j = a.lo; j <= a.hi; ++j) out.coeff(-j) = a.coeff(j).conjugate();
  return out;
}

double twist_residual(const LaurentMatrixLoop& a) {
  const RealMat S = twist_matrix(a.dim);
  double r = 0.0;
  for (int j = a.lo; j <= a.hi; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    Mat d = S * a.coeff(j) * S - sgn * a.coeff(j);
    r = std::max(r, d.cwiseAbs().maxCoeff());
  }
  return r;
}

double reality_residual(const LaurentMatrixLoop& a) {
  double r = 0.0;
  const int m = std::max(std::abs(a.lo), std::abs(a.hi));
  for (int j = 0; j <= m; ++j) {
    Mat d = a.coeff_or_zero(-j) - a.coeff_or_zero(j).conjugate();
    r = std::max(r, d.cwiseAbs().maxCoeff());
  }
  return r;
}

double group_valued_residual(const LaurentMatrixLoop& a, int nsamples) {
  double r = 0.0;
  for (int s = 0; s < nsamples; ++s) {
    const Complex lam = std::polar(1.0, 2.0 * kPi * s / nsamples);
    r = std::max(r, group_membership_residual(loop_evaluate(a, lam)));
  }
  return r;
}

double loop_distance(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b) {
  double r = 0.0;
  const int lo = std::min(a.lo, b.lo);
  const int hi = std::max(a.hi, b.hi);
  for (int j = lo; j <= hi; ++j) {
    Mat d = a.coeff_or_zero(j) - b.coeff_or_zero(j);
    r = std::max(r, d.cwiseAbs().maxCoeff());
  }
  return r;
}

double loop_norm(const LaurentMatrixLoop& a) {
  double r = 0.0;
  for (const auto& c : a.coeffs) r = std::max(r, c.cwiseAbs().maxCoeff());
  return r;
}

bool is_plus_loop(const LaurentMatrixLoop& a, double tol) {
  for (int j = a.lo; j < 0; ++j)
    if (coeff_mass(a, j) > tol) return false;
  return true;
}

bool is_minus_star_loop(const LaurentMatrixLoop& a, double tol) {
  for (int j = 1; j <= a.hi; ++j)
    if (coeff_mass(a, j) > tol) return false;
  Mat d = a.coeff_or_zero(0) - Mat::Identity(a.dim, a.dim);
  return d.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace wdpw
