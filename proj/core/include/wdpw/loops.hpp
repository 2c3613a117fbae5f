#pragma once

// Twisted matrix Laurent loops: gamma(lambda) = sum_j A_j lambda^j with the
// twist sigma(gamma(lambda)) = gamma(-lambda) and reality A_{-j} = conj(A_j).
// Loops are stored as coefficient bands [lo, hi], never as sample vectors;
// pointwise sampling is used internally for inversion and exponentials.

#include <vector>

#include "wdpw/lorentz.hpp"

namespace wdpw {

struct TruncationPolicy {
  int max_degree = 16;         // band limit N: coefficients kept for |j| <= N
  double drop_tolerance = 1e-14;
};

struct LaurentMatrixLoop {
  int dim = 0;
  int lo = 0;
  int hi = -1;  // empty band when hi < lo
  std::vector<Mat> coeffs;  // coeffs[j - lo] is the lambda^j coefficient

  bool empty() const { return hi < lo; }

  const Mat& coeff(int j) const { return coeffs[static_cast<size_t>(j - lo)]; }
  Mat& coeff(int j) { return coeffs[static_cast<size_t>(j - lo)]; }

  Mat coeff_or_zero(int j) const {
    if (j < lo || j > hi) return Mat::Zero(dim, dim);
    return coeffs[static_cast<size_t>(j - lo)];
  }
};

LaurentMatrixLoop zero_loop(int dim, int lo, int hi);
LaurentMatrixLoop identity_loop(int dim);
// single term M * lambda^j
LaurentMatrixLoop monomial_loop(const Mat& M, int j);

// drop negligible outer coefficients and clip the band to the policy limit;
// accumulates the infinity-norm of clipped coefficients into *dropped if given
LaurentMatrixLoop truncate_loop(const LaurentMatrixLoop& a,
                                const TruncationPolicy& policy,
                                double* dropped = nullptr);

LaurentMatrixLoop loop_add(const LaurentMatrixLoop& a,
                           const LaurentMatrixLoop& b);
LaurentMatrixLoop loop_scale(const LaurentMatrixLoop& a, Complex s);

// Cauchy product truncated per policy
LaurentMatrixLoop loop_multiply(const LaurentMatrixLoop& a,
                                const LaurentMatrixLoop& b,
                                const TruncationPolicy& policy,
                                double* dropped = nullptr);

// pointwise inversion on S^1 samples, re-expanded by discrete Fourier
// transform and truncated per policy; throws when some sample is singular
LaurentMatrixLoop loop_inverse(const LaurentMatrixLoop& a,
                               const TruncationPolicy& policy);

// exp of an algebra-valued loop, sampled on S^1 and re-expanded
LaurentMatrixLoop loop_exp(const LaurentMatrixLoop& X,
                           const TruncationPolicy& policy);

Mat loop_evaluate(const LaurentMatrixLoop& a, Complex lambda);

// b_j = conj(a_{-j}); a is real on S^1 iff b == a
LaurentMatrixLoop loop_reality_conjugate(const LaurentMatrixLoop& a);

// max_j || S A_j S^{-1} - (-1)^j A_j ||_inf
double twist_residual(const LaurentMatrixLoop& a);
// max_j || A_{-j} - conj(A_j) ||_inf
double reality_residual(const LaurentMatrixLoop& a);
// max over nsamples of group_membership_residual(a(lambda_s)), lambda_s on S^1
double group_valued_residual(const LaurentMatrixLoop& a, int nsamples = 17);

// coefficient-wise infinity-norm distance
double loop_distance(const LaurentMatrixLoop& a, const LaurentMatrixLoop& b);
double loop_norm(const LaurentMatrixLoop& a);

bool is_plus_loop(const LaurentMatrixLoop& a, double tol = 1e-12);
bool is_minus_star_loop(const LaurentMatrixLoop& a, double tol = 1e-12);

}  // namespace wdpw
