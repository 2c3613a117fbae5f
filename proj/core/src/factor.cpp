#include "wdpw/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wdpw {

namespace {

constexpr int kMaxPolish = 50;
constexpr double kPolishTol = 1e-11;
constexpr double kPolishCeiling = 1e-7;
constexpr double kCondThreshold = 1e12;
constexpr double kPi = 3.14159265358979323846;

double product_residual(const LaurentMatrixLoop& g,
                        const LaurentMatrixLoop& left,
                        const LaurentMatrixLoop& right, int nsamples = 17) {
  double r = 0.0;
  for (int s = 0; s < nsamples; ++s) {
    const double th = 2.0 * kPi * s / nsamples;
    const Complex lam(std::cos(th), std::sin(th));
    const Mat diff = loop_evaluate(g, lam) -
                     loop_evaluate(left, lam) * loop_evaluate(right, lam);
    r = std::max(r, diff.cwiseAbs().maxCoeff());
  }
  return r;
}

LaurentMatrixLoop transpose_loop(const LaurentMatrixLoop& a) {
  LaurentMatrixLoop out = a;
  for (Mat& c : out.coeffs) c = c.transpose().eval();
  return out;
}

// coefficientwise I a_j^T I; inverts a when a is group valued on S^1
LaurentMatrixLoop metric_inverse_loop(const LaurentMatrixLoop& a) {
  const RealMat I = metric_matrix(a.dim);
  LaurentMatrixLoop out = a;
  for (Mat& c : out.coeffs) c = (I * c.transpose() * I).eval();
  return out;
}

LaurentMatrixLoop left_mult_const(const Mat& M, const LaurentMatrixLoop& a) {
  LaurentMatrixLoop out = a;
  for (Mat& c : out.coeffs) c = (M * c).eval();
  return out;
}

LaurentMatrixLoop right_mult_const(const LaurentMatrixLoop& a, const Mat& M) {
  LaurentMatrixLoop out = a;
  for (Mat& c : out.coeffs) c = (c * M).eval();
  return out;
}

LaurentMatrixLoop nonnegative_part(const LaurentMatrixLoop& a) {
  LaurentMatrixLoop out = zero_loop(a.dim, 0, std::max(0, a.hi));
  for (int j = 0; j <= a.hi; ++j) out.coeff(j) = a.coeff_or_zero(j);
  return out;
}

double minus_tail_mass(const LaurentMatrixLoop& a) {
  double m = 0.0;
  for (int j = a.lo; j < 0; ++j)
    m = std::max(m, a.coeff(j).cwiseAbs().maxCoeff());
  return m;
}

// inverse of M = I + sum_{j<0} M_j lambda^j within Lambda^-_*, band >= -N
LaurentMatrixLoop minus_star_inverse(const LaurentMatrixLoop& M, int N) {
  const int dim = M.dim;
  LaurentMatrixLoop X = zero_loop(dim, -N, 0);
  X.coeff(0) = Mat::Identity(dim, dim);
  for (int k = -1; k >= -N; --k) {
    Mat acc = Mat::Zero(dim, dim);
    for (int a = std::max(M.lo, k); a <= -1; ++a) {
      const int b = k - a;
      if (b <= 0 && b >= -N) acc += M.coeff_or_zero(a) * X.coeff(b);
    }
    X.coeff(k) = -acc;
  }
  return X;
}

}  // namespace

const char* cell_name(FactorizationCell cell) {
  switch (cell) {
    case FactorizationCell::big_cell:
      return "big_cell";
    case FactorizationCell::off_cell:
      return "off_cell";
    case FactorizationCell::boundary_suspected:
      return "boundary_suspected";
  }
  return "unknown";
}

FactorizationReport birkhoff_split(const LaurentMatrixLoop& g,
                                   const TruncationPolicy& policy) {
  if (g.empty() || g.dim <= 0)
    throw std::invalid_argument("birkhoff_split: empty loop");
  const int dim = g.dim;
  const int N = policy.max_degree;
  FactorizationReport rep;

  if (g.lo >= 0) {
    // already a plus loop
    rep.left = identity_loop(dim);
    rep.right = g;
    rep.residual = 0.0;
    rep.condition = 1.0;
    return rep;
  }

  // unknown M in Lambda^-_*, blocks M_{-1}..M_{-N}; conditions (M g)_k = 0
  // for lo - N <= k <= -1, with M_0 = I. Row r of M decouples:
  //   sum_jm M_jm[r,:] g_{k-jm} = -g_k[r,:],
  // assembled transposed as one complex least-squares solve for all rows.
  std::vector<int> ks;
  for (int k = g.lo - N; k <= -1; ++k) ks.push_back(k);
  const int nk = static_cast<int>(ks.size());
  Mat A = Mat::Zero(nk * dim, N * dim);
  Mat rhs = Mat::Zero(nk * dim, dim);
  for (int ei = 0; ei < nk; ++ei) {
    const int k = ks[ei];
    rhs.block(ei * dim, 0, dim, dim) = -g.coeff_or_zero(k).transpose();
    for (int ci = 0; ci < N; ++ci) {
      const int jm = -1 - ci;
      const int src = k - jm;
      if (src >= g.lo && src <= g.hi)
        A.block(ei * dim, ci * dim, dim, dim) = g.coeff(src).transpose();
    }
  }
  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  rep.condition = smin > 0.0 ? sv(0) / smin
                             : std::numeric_limits<double>::infinity();
  const Mat X = svd.solve(rhs);

  LaurentMatrixLoop M = zero_loop(dim, -N, 0);
  M.coeff(0) = Mat::Identity(dim, dim);
  for (int ci = 0; ci < N; ++ci)
    M.coeff(-1 - ci) = X.block(ci * dim, 0, dim, dim).transpose();

  TruncationPolicy wide = policy;
  wide.max_degree = N + std::max(g.hi, -g.lo) + 2;
  rep.right = nonnegative_part(loop_multiply(M, g, wide));
  rep.left = minus_star_inverse(M, N);
  rep.residual = product_residual(g, rep.left, rep.right);
  if (!(rep.condition < kCondThreshold)) {
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "block-Toeplitz system condition " +
               std::to_string(rep.condition) +
               " exceeds threshold; loop may lie off the big cell";
  } else if (rep.residual > 1e-6 * std::max(1.0, loop_norm(g))) {
    // a winding loop gives an inconsistent (yet well conditioned) system
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "factorization residual " + std::to_string(rep.residual) +
               " too large; loop does not lie in the big cell";
  }
  return rep;
}

namespace {

// ---- Iwasawa internals ----

// entries (i,j) allowed for a twisted coefficient of the given parity:
// even coefficients are block diagonal, odd ones block off-diagonal
std::vector<std::pair<int, int>> parity_entries(int dim, int parity) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const bool diag = (i < 4) == (j < 4);
      if ((parity == 0) == diag) out.emplace_back(i, j);
    }
  return out;
}

// adapted basis for the solvable slice: 4-block isotropic flag ordering
// a1 = (e2+ie3)/s2, a2 = (e0+e1)/s2, a3 = (e1-e0)/s2, a4 = (e2-ie3)/s2;
// n-block null pairs u_{2p+1}, u_{2p+2} in Borel ordering
Mat adapted_basis(int dim) {
  const double s2i = 1.0 / std::sqrt(2.0);
  Mat W = Mat::Zero(dim, dim);
  W(2, 0) = s2i;
  W(3, 0) = Complex(0.0, s2i);
  W(0, 1) = s2i;
  W(1, 1) = s2i;
  W(0, 2) = -s2i;
  W(1, 2) = s2i;
  W(2, 3) = s2i;
  W(3, 3) = Complex(0.0, -s2i);
  const int n = dim - 4;
  const int npairs = n / 2;
  for (int p = 0; p < npairs; ++p) {
    const int i4 = 4 + 2 * p, i5 = 5 + 2 * p;
    W(i4, 4 + p) = s2i;
    W(i5, 4 + p) = Complex(0.0, -s2i);
    W(i4, dim - 1 - p) = s2i;
    W(i5, dim - 1 - p) = Complex(0.0, s2i);
  }
  if (n % 2 == 1) W(dim - 1, 4 + npairs) = 1.0;
  return W;
}

Eigen::Matrix4d rot23(double s) {
  Eigen::Matrix4d k = Eigen::Matrix4d::Identity();
  k(2, 2) = std::cos(s);
  k(2, 3) = -std::sin(s);
  k(3, 2) = std::sin(s);
  k(3, 3) = std::cos(s);
  return k;
}

Eigen::Matrix4d boost01(double s) {
  Eigen::Matrix4d k = Eigen::Matrix4d::Identity();
  k(0, 0) = std::cosh(s);
  k(0, 1) = std::sinh(s);
  k(1, 0) = std::sinh(s);
  k(1, 1) = std::cosh(s);
  return k;
}

// closed-form k in SO+(1,3) x SO(n) with k^{-1} B0 in the solvable slice
// (upper triangular with positive real diagonal in the adapted basis).
// The 4-block matches the Lorentz flag spanned by B0 a1 by Gram-Schmidt plus
// a phase rotation and a boost; the n-block is a QR in the null basis.
// Returns the lower-triangular defect, infinity when the flag degenerates.
std::pair<RealMat, double> solvable_slice_normalizer(const Mat& B0, int dim) {
  const Eigen::Matrix4d I4 =
      Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  const Mat B4 = B0.topLeftCorner(4, 4);
  Eigen::Vector4cd a1;
  a1 << 0.0, 0.0, Complex(1.0, 0.0), Complex(0.0, 1.0);
  a1 /= std::sqrt(2.0);
  const Eigen::Vector4cd v = B4 * a1;
  const Eigen::Vector4d p = v.real(), q = v.imag();
  const double c = p.dot(I4 * p);
  const double inf = std::numeric_limits<double>::infinity();
  if (c < 1e-13) return {RealMat::Identity(dim, dim), inf};
  const Eigen::Vector4d ph = p / std::sqrt(c), qh = q / std::sqrt(c);

  Eigen::Vector4d t0(1.0, 0.0, 0.0, 0.0);
  t0 -= t0.dot(I4 * ph) * ph + t0.dot(I4 * qh) * qh;
  // tn = 1 + (projections)^2 >= 1: a spacelike plane never absorbs e0
  const double tn = -t0.dot(I4 * t0);
  if (tn <= 1e-13) return {RealMat::Identity(dim, dim), inf};
  t0 /= std::sqrt(tn);
  if (t0(0) < 0.0) t0 = -t0;
  // the complement of span{t0, ph, qh} is spanned by the metric dual of
  // their Levi-Civita contraction; unlike a fixed Gram-Schmidt seed this
  // never degenerates while the flag itself is nondegenerate
  Eigen::Vector4d s0;
  {
    Eigen::Matrix3d m;
    for (int alpha = 0; alpha < 4; ++alpha) {
      int col = 0;
      for (int beta = 0; beta < 4; ++beta) {
        if (beta == alpha) continue;
        m(0, col) = t0(beta);
        m(1, col) = ph(beta);
        m(2, col) = qh(beta);
        ++col;
      }
      s0(alpha) = ((alpha % 2 == 0) ? 1.0 : -1.0) * m.determinant();
    }
    s0 = I4 * s0;
  }
  const double sn = s0.dot(I4 * s0);
  if (sn <= 1e-13) return {RealMat::Identity(dim, dim), inf};
  s0 /= std::sqrt(sn);

  Eigen::Matrix4d k1;
  k1.col(0) = t0;
  k1.col(1) = s0;
  k1.col(2) = ph;
  k1.col(3) = qh;
  if (k1.determinant() < 0.0) k1.col(1) = -k1.col(1);

  auto inv_lorentz = [&I4](const Eigen::Matrix4d& k) -> Eigen::Matrix4d {
    return I4 * k.transpose() * I4;
  };
  const Mat b4 = inv_lorentz(k1).cast<Complex>() * B4;
  const Complex d1 = (b4 * a1)(2) * std::sqrt(2.0);
  const double th = std::arg(d1);
  Eigen::Matrix4d k2 = rot23(th);
  {
    double best = std::numeric_limits<double>::max();
    for (const double cand : {th, -th}) {
      const Eigen::Matrix4d kc = rot23(cand);
      const Complex d =
          (inv_lorentz(kc).cast<Complex>() * b4 * a1)(2) * std::sqrt(2.0);
      const double score = std::abs(d - std::abs(d1));
      if (score < best) {
        best = score;
        k2 = kc;
      }
    }
  }
  const Mat b4b = inv_lorentz(k2).cast<Complex>() * b4;
  Eigen::Vector4cd a2;
  a2 << Complex(1.0, 0.0), Complex(1.0, 0.0), 0.0, 0.0;
  a2 /= std::sqrt(2.0);
  const Eigen::Vector4cd w2 = b4b * a2;
  const Complex d2 = (w2(0) + w2(1)) / std::sqrt(2.0);
  if (std::abs(d2) < 1e-13) return {RealMat::Identity(dim, dim), inf};
  const double t = std::log(std::abs(d2));
  Eigen::Matrix4d k3 = boost01(t);
  {
    double best = std::numeric_limits<double>::max();
    for (const double cand : {t, -t}) {
      const Eigen::Matrix4d kc = boost01(cand);
      const Eigen::Vector4cd w3 = inv_lorentz(kc).cast<Complex>() * b4b * a2;
      const double score =
          std::abs(std::abs((w3(0) + w3(1)) / std::sqrt(2.0)) - 1.0);
      if (score < best) {
        best = score;
        k3 = kc;
      }
    }
  }
  const Eigen::Matrix4d k4 = k1 * k2 * k3;

  const int n = dim - 4;
  const Mat W = adapted_basis(dim);
  RealMat kn = RealMat::Identity(n, n);
  if (n > 0) {
    const Mat Un = W.block(4, 4, n, n);
    const Mat Bt = Un.adjoint() * B0.block(4, 4, n, n) * Un;
    Eigen::HouseholderQR<Mat> qr(Bt);
    Mat Qt = qr.householderQ();
    const Mat Rt = qr.matrixQR().triangularView<Eigen::Upper>();
    Mat phase = Mat::Identity(n, n);
    for (int i = 0; i < n; ++i) {
      const Complex r = Rt(i, i);
      if (std::abs(r) < 1e-13) return {RealMat::Identity(dim, dim), inf};
      phase(i, i) = r / std::abs(r);
    }
    Qt = Qt * phase;
    const Mat knc = Un * Qt * Un.adjoint();
    if (knc.imag().cwiseAbs().maxCoeff() > 0.1)
      return {RealMat::Identity(dim, dim), inf};
    Eigen::JacobiSVD<RealMat> svd(knc.real(),
                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
    kn = svd.matrixU() * svd.matrixV().transpose();
  }

  RealMat k = RealMat::Identity(dim, dim);
  k.topLeftCorner(4, 4) = k4;
  k.block(4, 4, n, n) = kn;

  const Mat Winv = W.inverse();
  const RealMat I = metric_matrix(dim);
  const Mat kinv = (I * k.transpose() * I).cast<Complex>();
  const Mat b = Winv * kinv * B0 * W;
  double low = 0.0;
  for (int i = 1; i < dim; ++i)
    for (int j = 0; j < i; ++j) low = std::max(low, std::abs(b(i, j)));
  return {k, low};
}

}  // namespace

FactorizationReport iwasawa_split(const LaurentMatrixLoop& g,
                                  const TruncationPolicy& policy) {
  if (g.empty() || g.dim <= 0)
    throw std::invalid_argument("iwasawa_split: empty loop");
  const int dim = g.dim;
  const int n = dim - 4;
  const int N = policy.max_degree;
  const RealMat Imet = metric_matrix(dim);
  FactorizationReport rep;

  // ---- stage 1: real-linear solve for the plus loop R with F = g R real
  // on S^1 and F_0 = I. Twist parity is enforced structurally: only the
  // block-diagonal (even) or block-off-diagonal (odd) entries of each R_b
  // are unknowns.
  const std::vector<std::pair<int, int>> even_entries = parity_entries(dim, 0);
  const std::vector<std::pair<int, int>> odd_entries = parity_entries(dim, 1);
  auto entries_for = [&](int parity) -> const std::vector<std::pair<int, int>>& {
    return parity == 0 ? even_entries : odd_entries;
  };

  // unknown index tables per coefficient degree b
  std::vector<Eigen::MatrixXi> index_of(N + 1);
  int nun = 0;
  for (int b = 0; b <= N; ++b) {
    index_of[b] = Eigen::MatrixXi::Constant(dim, dim, -1);
    for (const auto& [i, j] : entries_for(b % 2)) index_of[b](i, j) = nun++;
  }

  const int K = std::max({N, g.hi, -g.lo});
  int rows = 0;
  for (int k = 1; k <= K; ++k)
    rows += 2 * static_cast<int>(entries_for(k % 2).size());
  rows += 2 * static_cast<int>(even_entries.size());

  RealMat A = RealMat::Zero(rows, 2 * nun);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  int at = 0;
  auto add_coeff = [&](int row_re, int row_im, int t, Complex c, bool conj) {
    // c acting on unknown u_t, or on conj(u_t) when conj is set
    if (!conj) {
      A(row_re, t) += c.real();
      A(row_re, nun + t) -= c.imag();
      A(row_im, t) += c.imag();
      A(row_im, nun + t) += c.real();
    } else {
      A(row_re, t) += c.real();
      A(row_re, nun + t) += c.imag();
      A(row_im, t) += c.imag();
      A(row_im, nun + t) -= c.real();
    }
  };
  // reality: (gR)_{-k} - conj((gR)_k) = 0 entrywise for k = 1..K
  for (int k = 1; k <= K; ++k) {
    for (const auto& [i, j] : entries_for(k % 2)) {
      const int row_re = at++;
      const int row_im = at++;
      for (int b = 0; b <= N; ++b) {
        const Mat gm = g.coeff_or_zero(-k - b);
        const Mat gp = g.coeff_or_zero(k - b);
        const bool have_m = (-k - b) >= g.lo && (-k - b) <= g.hi;
        const bool have_p = (k - b) >= g.lo && (k - b) <= g.hi;
        if (!have_m && !have_p) continue;
        for (int l = 0; l < dim; ++l) {
          const int t = index_of[b](l, j);
          if (t < 0) continue;
          if (have_m && gm(i, l) != Complex(0.0, 0.0))
            add_coeff(row_re, row_im, t, gm(i, l), false);
          if (have_p && gp(i, l) != Complex(0.0, 0.0))
            add_coeff(row_re, row_im, t, -std::conj(gp(i, l)), true);
        }
      }
    }
  }
  // normalization: (gR)_0 = I on the even entries
  for (const auto& [i, j] : even_entries) {
    const int row_re = at++;
    const int row_im = at++;
    rhs(row_re) = (i == j) ? 1.0 : 0.0;
    for (int b = 0; b <= N; ++b) {
      if (-b < g.lo || -b > g.hi) continue;
      const Mat gm = g.coeff(-b);
      for (int l = 0; l < dim; ++l) {
        const int t = index_of[b](l, j);
        if (t < 0) continue;
        if (gm(i, l) != Complex(0.0, 0.0))
          add_coeff(row_re, row_im, t, gm(i, l), false);
      }
    }
  }

  Eigen::ColPivHouseholderQR<RealMat> qr(A);
  const Eigen::VectorXd x = qr.solve(rhs);
  {
    const RealMat& qrm = qr.matrixQR();
    const int m = std::min<int>(qrm.rows(), qrm.cols());
    const double d0 = std::abs(qrm(0, 0));
    const double dk = std::abs(qrm(m - 1, m - 1));
    rep.condition =
        dk > 0.0 ? d0 / dk : std::numeric_limits<double>::infinity();
  }

  LaurentMatrixLoop R = zero_loop(dim, 0, N);
  for (int b = 0; b <= N; ++b)
    for (const auto& [i, j] : entries_for(b % 2)) {
      const int t = index_of[b](i, j);
      R.coeff(b)(i, j) = Complex(x(t), x(nun + t));
    }

  TruncationPolicy wide = policy;
  wide.max_degree = K + N + 2;
  LaurentMatrixLoop F = loop_multiply(g, R, wide);

  // ---- stage 2: congruence renormalization. For exact data
  // Q = F^T I F = R^T I R is a constant real symmetric matrix; a real
  // block-diagonal C with C^T Q_0 C = I restores group-valuedness.
  const LaurentMatrixLoop Q = loop_multiply(
      transpose_loop(F), left_mult_const(Imet.cast<Complex>(), F), wide);
  const RealMat Q0 = Q.coeff_or_zero(0).real();
  const RealMat q4 = Q0.topLeftCorner(4, 4);
  const RealMat qn = Q0.block(4, 4, n, n);
  Eigen::SelfAdjointEigenSolver<RealMat> es4(q4);
  Eigen::SelfAdjointEigenSolver<RealMat> esn(qn);
  // eigenvalues ascending: the 4-block needs signature (-,+,+,+), the
  // n-block positive definite; anything else means the linear stage broke
  const bool n_ok = n == 0 || esn.eigenvalues()(0) > 0.0;
  if (!(es4.eigenvalues()(0) < 0.0) || !(es4.eigenvalues()(1) > 0.0) ||
      !n_ok) {
    rep.left = F;
    rep.right = R;
    rep.residual = product_residual(g, rep.left, rep.right);
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "congruence form lost Lorentz signature; loop appears to "
               "leave the Iwasawa cell";
    return rep;
  }
  RealMat C = RealMat::Zero(dim, dim);
  C.topLeftCorner(4, 4) =
      es4.eigenvectors() *
      es4.eigenvalues().cwiseAbs().cwiseSqrt().cwiseInverse().asDiagonal();
  if (n > 0)
    C.block(4, 4, n, n) =
        esn.eigenvectors() *
        esn.eigenvalues().cwiseAbs().cwiseSqrt().cwiseInverse().asDiagonal();
  F = right_mult_const(F, C.cast<Complex>());

  // ---- stage 3: component fixes at lambda = 1 (real K-elements)
  {
    const RealMat F1 = loop_evaluate(F, Complex(1.0, 0.0)).real();
    RealMat s = RealMat::Identity(dim, dim);
    if (F1.determinant() < 0.0) s(dim - 1, dim - 1) = -1.0;
    if (F1(0, 0) < 0.0) {
      s(0, 0) = -1.0;
      s(1, 1) = -1.0;
    }
    if ((s - RealMat::Identity(dim, dim)).cwiseAbs().maxCoeff() > 0.0)
      F = right_mult_const(F, s.cast<Complex>());
  }

  // ---- stage 4: Newton polish. F stays exactly real: each update is the
  // real-completed, algebra- and parity-projected error loop.
  double err = std::numeric_limits<double>::max();
  int it = 0;
  double prev = std::numeric_limits<double>::max();
  const Mat Imetc = Imet.cast<Complex>();
  const Mat Stw = twist_matrix(dim).cast<Complex>();
  for (; it < kMaxPolish; ++it) {
    const LaurentMatrixLoop Bfull =
        loop_multiply(metric_inverse_loop(F), g, wide);
    const LaurentMatrixLoop Bplus = nonnegative_part(Bfull);
    LaurentMatrixLoop E = loop_multiply(Bfull, loop_inverse(Bplus, wide), wide);
    E.coeff(0) -= Mat::Identity(dim, dim);
    err = loop_norm(E);
    if (err < kPolishTol) break;
    if (err > 0.9 * prev) break;  // stagnated at the truncation floor
    prev = err;
    const int band = std::max(-E.lo, 1);
    LaurentMatrixLoop X = zero_loop(dim, -band, band);
    for (int j = 1; j <= band; ++j) {
      X.coeff(-j) = E.coeff_or_zero(-j);
      X.coeff(j) = E.coeff_or_zero(-j).conjugate();
    }
    X.coeff(0) = 0.5 * (E.coeff_or_zero(0) + E.coeff_or_zero(0).conjugate());
    for (int j = -band; j <= band; ++j) {
      Mat& c = X.coeff(j);
      c = 0.5 * (c - Imetc * c.transpose() * Imetc);  // so(1,dim-1)
      const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      c = 0.5 * (c + sgn * Stw * c * Stw);
    }
    F = loop_multiply(F, loop_exp(X, wide), wide);
  }

  // ---- stage 5: land right(0) in the solvable slice
  LaurentMatrixLoop B = loop_multiply(metric_inverse_loop(F), g, wide);
  {
    const Mat B0 = B.coeff_or_zero(0);
    if (n > 0 && B0.block(4, 4, n, n).determinant().real() < 0.0) {
      RealMat s = RealMat::Identity(dim, dim);
      s(3, 3) = -1.0;
      s(dim - 1, dim - 1) = -1.0;
      F = right_mult_const(F, s.cast<Complex>());
      B = left_mult_const(s.cast<Complex>(), B);
    }
  }
  const auto [kfix, slice_defect] =
      solvable_slice_normalizer(B.coeff_or_zero(0), dim);
  if (std::isinf(slice_defect)) {
    rep.left = truncate_loop(F, policy);
    rep.right = truncate_loop(nonnegative_part(B), policy);
    rep.residual = product_residual(g, rep.left, rep.right);
    rep.cell = FactorizationCell::off_cell;
    rep.note = "solvable-slice flag data degenerate at right(0); loop lies "
               "off the open Iwasawa cell";
    rep.iterations = it;
    return rep;
  }
  F = right_mult_const(F, kfix.cast<Complex>());
  const RealMat kinv = Imet * kfix.transpose() * Imet;
  B = left_mult_const(kinv.cast<Complex>(), B);

  rep.iterations = it;
  rep.left = truncate_loop(F, policy);
  rep.right = truncate_loop(nonnegative_part(B), policy);
  rep.residual = product_residual(g, rep.left, rep.right);
  const double tail = minus_tail_mass(B);
  if (err > kPolishCeiling && tail > kPolishCeiling) {
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "Newton polish stalled at error " + std::to_string(err) +
               "; loop may approach the Iwasawa cell boundary";
  } else if (!(rep.condition < kCondThreshold)) {
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "reality system condition " + std::to_string(rep.condition) +
               " exceeds threshold";
  } else if (rep.residual > 1e-5 * std::max(1.0, loop_norm(g))) {
    rep.cell = FactorizationCell::boundary_suspected;
    rep.note = "factorization residual " + std::to_string(rep.residual) +
               " too large after normalization";
  }
  return rep;
}

}  // namespace wdpw
