#include "wdpw/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wdpw {

namespace {

const Complex kI(0.0, 1.0);
constexpr double kPi = 3.14159265358979323846;

// family rotation: lambda = e^{i t} acts on the last two coordinates by the
// rotation with cos t = (lambda + 1/lambda)/2, sin t = (lambda - 1/lambda)/2i
void check_unit_lambda(Complex lambda) {
  if (std::abs(std::abs(lambda) - 1.0) > 1e-12)
    throw std::invalid_argument("lambda must lie on the unit circle");
}

void family_rotation(Complex lambda, double& c, double& s) {
  c = ((lambda + 1.0 / lambda) / 2.0).real();
  s = ((lambda - 1.0 / lambda) / (2.0 * kI)).real();
}

// the three quadratic brackets of the closed form; the lift of the family
// member is a rotation of this in the last two coordinates
Eigen::VectorXcd isotropic_bracket_lift(Complex f1, Complex f2, Complex f3,
                                        Complex f4, Complex d1, Complex d2) {
  auto cj = [](Complex w) { return std::conj(w); };
  Eigen::VectorXcd b1(6), b2(6), b3(6);
  b1 << 1.0 + std::norm(f2) + std::norm(f4),
      1.0 - std::norm(f2) + std::norm(f4),
      -kI * (-cj(f2) * f4 + f2 * cj(f4)), -(cj(f2) * f4 + f2 * cj(f4)),
      kI * (cj(f2) - f2), cj(f2) + f2;
  b2 << 1.0 + std::norm(f1) + std::norm(f3),
      -(1.0 + std::norm(f1) - std::norm(f3)),
      kI * (-cj(f1) * f3 + f1 * cj(f3)), cj(f1) * f3 + f1 * cj(f3),
      kI * (f3 - cj(f3)), -(f3 + cj(f3));
  b3 << -cj(f1) * f2 + cj(f3) * f4, cj(f1) * f2 + cj(f3) * f4,
      -kI * (1.0 + cj(f1) * f4 + f2 * cj(f3)),
      -(1.0 - cj(f1) * f4 + f2 * cj(f3)), kI * (-cj(f1) + f4),
      -(cj(f1) + f4);
  return std::norm(d1) * b1 + std::norm(d2) * b2 + (d1 * cj(d2)) * b3 +
         (cj(d1) * d2) * b3.conjugate();
}

SurfaceSample finish_sample(Complex z, Complex lambda, Eigen::VectorXcd lift,
                            double scale_floor) {
  SurfaceSample s;
  s.z = z;
  s.lambda = lambda;
  const double scale = lift.cwiseAbs().maxCoeff();
  if (!(scale > scale_floor)) {
    s.note = "branch point: the lift vanishes";
    return s;
  }
  if (lift.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    s.note = "lift failed the realness check";
    return s;
  }
  Eigen::VectorXd Y = lift.real();
  if (std::abs(Y(0)) < 1e-12 * scale) {
    s.note = "lift not normalizable: vanishing cone coordinate";
    return s;
  }
  Y /= Y(0);
  const int m = static_cast<int>(Y.size());
  const double cone = std::abs(-1.0 + Y.tail(m - 1).squaredNorm());
  if (cone > 1e-8) {
    s.note = "lift failed the lightlike check";
    return s;
  }
  s.lift = Y;
  s.point = Y.tail(m - 1);
  s.valid = true;
  return s;
}

}  // namespace

std::vector<SurfaceSample> s4_closed_form(
    const IsotropicS4Data& data, const std::vector<Complex>& zs,
    const std::vector<Complex>& lambdas) {
  for (Complex l : lambdas) check_unit_lambda(l);
  const RationalFunction g1 = rational_derivative(data.f1);
  const RationalFunction g2 = rational_derivative(data.f2);
  std::vector<SurfaceSample> out;
  out.reserve(zs.size() * lambdas.size());
  for (Complex z : zs) {
    bool ok = true;
    Eigen::VectorXcd base;
    std::string note;
    try {
      base = isotropic_bracket_lift(
          rational_evaluate(data.f1, z), rational_evaluate(data.f2, z),
          rational_evaluate(data.f3, z), rational_evaluate(data.f4, z),
          rational_evaluate(g1, z), rational_evaluate(g2, z));
    } catch (const std::domain_error& e) {
      ok = false;
      note = std::string("data pole: ") + e.what();
    }
    for (Complex lambda : lambdas) {
      if (!ok) {
        SurfaceSample s;
        s.z = z;
        s.lambda = lambda;
        s.note = note;
        out.push_back(s);
        continue;
      }
      double c, s;
      family_rotation(lambda, c, s);
      Eigen::VectorXcd lift = base;
      lift(4) = c * base(4) - s * base(5);
      lift(5) = s * base(4) + c * base(5);
      out.push_back(finish_sample(z, lambda, lift, 1e-13));
    }
  }
  return out;
}

SurfaceSample s4_graph_sphere(Complex z, Complex lambda) {
  check_unit_lambda(lambda);
  SurfaceSample s;
  s.z = z;
  s.lambda = lambda;
  const double r2 = std::norm(z);
  if (r2 == 0.0) {
    s.note = "parametrization puncture at z = 0";
    return s;
  }
  // clear denominators: 2 r^2 times the projective representative
  Eigen::VectorXcd lift(6);
  lift << 2.0 * r2 + 0.5 + 0.5 * r2 * r2, 2.0 * r2 - 0.5 - 0.5 * r2 * r2,
      kI * (z - std::conj(z)), z + std::conj(z),
      -kI * r2 * (z / lambda - lambda * std::conj(z)),
      r2 * (z / lambda + lambda * std::conj(z));
  return finish_sample(z, lambda, lift, 1e-13);
}

SurfaceSample s6_isotropic_sphere(Complex z, Complex lambda) {
  check_unit_lambda(lambda);
  SurfaceSample s;
  s.z = z;
  s.lambda = lambda;
  const Complex zb = std::conj(z);
  const double r2 = std::norm(z);
  const double r4 = r2 * r2, r6 = r4 * r2, r8 = r4 * r4;
  const Complex u = z / lambda - lambda * zb;   // 2i Im(z / lambda)
  const Complex v = z / lambda + lambda * zb;   // 2 Re(z / lambda)
  const Complex u2 = z * z / lambda - lambda * zb * zb;
  const Complex v2 = z * z / lambda + lambda * zb * zb;
  Eigen::VectorXcd lift(8);
  lift << 1.0 + r2 + 1.25 * r4 + 4.0 * r6 / 9.0 + r8 / 36.0,
      1.0 - r2 - 0.75 * r4 + 4.0 * r6 / 9.0 - r8 / 36.0,
      -kI * (z - zb) * (1.0 + r6 / 9.0), (z + zb) * (1.0 + r6 / 9.0),
      -kI * u2 * (1.0 - r4 / 12.0), v2 * (1.0 - r4 / 12.0),
      -kI * (r2 / 2.0) * u * (1.0 + 4.0 * r2 / 3.0),
      (r2 / 2.0) * v * (1.0 + 4.0 * r2 / 3.0);
  return finish_sample(z, lambda, lift, 1e-13);
}

namespace {

struct RayPair {
  Eigen::Vector4d a = Eigen::Vector4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  bool ok = false;
  std::string note;
};

// the two null rays admissible at one point; unit vectors with positive
// cone coordinate
RayPair envelope_rays(const Eigen::MatrixXcd& top_block,
                      const Eigen::Matrix4cd& A4) {
  static const Eigen::Matrix4d I4 =
      Eigen::Vector4d(-1.0, 1.0, 1.0, 1.0).asDiagonal();
  RayPair out;
  const int ncols = static_cast<int>(top_block.cols());
  Eigen::MatrixXd N(2 * ncols, 4);
  for (int j = 0; j < ncols; ++j) {
    const Eigen::Vector4cd m = A4 * top_block.col(j);
    N.row(2 * j) = (I4 * m.real()).transpose();
    N.row(2 * j + 1) = (I4 * m.imag()).transpose();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
  lu.setThreshold(1e-7);
  const Eigen::MatrixXd ker = lu.kernel();
  if (lu.rank() == 0 || ker.cols() > 2) {
    out.note = "degenerate envelope: ray collision";
    return out;
  }
  if (ker.cols() == 1) {
    Eigen::Vector4d q = ker.col(0);
    if (std::abs(q.transpose() * I4 * q) > 1e-8 * q.squaredNorm()) {
      out.note = "single envelope direction is not null";
      return out;
    }
    if (q(0) < 0.0) q = -q;
    out.a = q.normalized();
    out.b = out.a;
    out.ok = true;
    return out;
  }
  const Eigen::Matrix2d G = ker.transpose() * I4 * ker;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
  const double mu0 = es.eigenvalues()(0), mu1 = es.eigenvalues()(1);
  if (!(mu0 < 0.0 && mu1 > 0.0)) {
    out.note = "envelope plane is not of signature (1,1)";
    return out;
  }
  const double t = std::sqrt(mu1 / -mu0);
  Eigen::Vector4d qa =
      ker * (es.eigenvectors().col(1) + t * es.eigenvectors().col(0));
  Eigen::Vector4d qb =
      ker * (es.eigenvectors().col(1) - t * es.eigenvectors().col(0));
  if (qa(0) < 0.0) qa = -qa;
  if (qb(0) < 0.0) qb = -qb;
  out.a = qa.normalized();
  out.b = qb.normalized();
  out.ok = true;
  return out;
}

}  // namespace

std::vector<SurfaceSample> extract_surface(const PotentialSpec& eta,
                                           const DomainGrid& grid,
                                           const ExtendedFrameField& frames,
                                           SurfaceBranch branch) {
  if (eta.graded.find(-1) == eta.graded.end())
    throw std::invalid_argument("potential has no lambda^{-1} coefficient");
  if (frames.frames.size() != grid.points.size())
    throw std::invalid_argument("frame field does not match the grid");
  const int dim = eta.dim;
  const size_t n = grid.points.size();
  const size_t nl = grid.lambda_samples.size();

  std::vector<RayPair> rays(n);
  for (size_t k = 0; k < n; ++k) {
    if (frames.singular[k]) {
      rays[k].note = frames.notes[k];
      continue;
    }
    const Mat em1 = rm_evaluate(eta.graded.at(-1), grid.points[k]);
    const Eigen::Matrix4cd A4 =
        frames.plus[k].coeff_or_zero(0).topLeftCorner(4, 4);
    rays[k] = envelope_rays(em1.topRightCorner(4, dim - 4), A4);
  }

  // branch labels by projective continuity, walking outward from the anchor;
  // the primary branch is the one with the larger total variation
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return std::abs(grid.points[i] - grid.base_point) <
           std::abs(grid.points[j] - grid.base_point);
  });
  std::vector<size_t> placed;
  double var_a = 0.0, var_b = 0.0;
  for (size_t k : order) {
    if (!rays[k].ok) continue;
    size_t parent = n;
    double best = std::numeric_limits<double>::infinity();
    for (size_t p : placed) {
      const double d = std::abs(grid.points[p] - grid.points[k]);
      if (d < best) {
        best = d;
        parent = p;
      }
    }
    if (parent < n) {
      const RayPair& pr = rays[parent];
      RayPair& cr = rays[k];
      const double keep = (cr.a - pr.a).norm() + (cr.b - pr.b).norm();
      const double swap = (cr.b - pr.a).norm() + (cr.a - pr.b).norm();
      if (swap < keep) std::swap(cr.a, cr.b);
      var_a += (cr.a - pr.a).norm();
      var_b += (cr.b - pr.b).norm();
    }
    placed.push_back(k);
  }
  const bool swap_all = var_b > var_a;

  std::vector<SurfaceSample> out(n * nl);
  for (size_t k = 0; k < n; ++k) {
    for (size_t l = 0; l < nl; ++l) {
      SurfaceSample& s = out[k * nl + l];
      s.z = grid.points[k];
      s.lambda = grid.lambda_samples[l];
      if (!rays[k].ok) {
        s.note = rays[k].note;
        continue;
      }
      Eigen::Vector4d q = rays[k].a;
      if ((branch == SurfaceBranch::secondary) != swap_all) q = rays[k].b;
      const Mat F = loop_evaluate(frames.frames[k], s.lambda);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
      v.head<4>() = q.cast<Complex>();
      s = finish_sample(s.z, s.lambda, F * v, 1e-13);
    }
  }
  return out;
}

namespace {

// fourth-order central differences on five samples
template <typename T>
T fd1(const T u[5], double h) {
  return (u[0] - 8.0 * u[1] + 8.0 * u[3] - u[4]) / (12.0 * h);
}
template <typename T>
T fd2(const T u[5], double h) {
  return (-u[0] + 16.0 * u[1] - 30.0 * u[2] + 16.0 * u[3] - u[4]) /
         (12.0 * h * h);
}

}  // namespace

EnergyReport willmore_energy(
    const std::function<Eigen::VectorXd(Complex)>& y,
    const EnergyOptions& opt) {
  if (!(opt.eps0 > 0.0 && opt.eps0 < 1.0 && opt.ratio > 0.0 &&
        opt.ratio < 1.0 && opt.levels >= 1))
    throw std::invalid_argument("energy options out of range");
  EnergyReport rep;
  for (int lev = 0; lev < opt.levels; ++lev) {
    const double eps = opt.eps0 * std::pow(opt.ratio, lev);
    const double rho1 = -std::log(eps);  // annulus is |log r| <= rho1
    const int nt = opt.angular_nodes;
    const int nr = std::max(
        9, 2 * static_cast<int>(std::ceil(opt.radial_density * rho1)) + 1);
    const double dr = 2.0 * rho1 / (nr - 1);
    const double dt = 2.0 * kPi / nt;

    // lattice with two ghost rings on each radial side
    const int R = nr + 4;
    std::vector<Eigen::VectorXd> p(static_cast<size_t>(R) * nt);
    for (int i = 0; i < R; ++i) {
      const double rho = -rho1 + (i - 2) * dr;
      for (int j = 0; j < nt; ++j)
        p[static_cast<size_t>(i) * nt + j] =
            y(std::exp(Complex(rho, j * dt)));
    }
    const int m = static_cast<int>(p[0].size());
    auto at = [&](int i, int j) -> const Eigen::VectorXd& {
      return p[static_cast<size_t>(i) * nt + ((j % nt) + nt) % nt];
    };

    double sum = 0.0;
    int excluded = 0;
    for (int i = 2; i < R - 2; ++i) {
      const double wr = (i == 2 || i == R - 3) ? 0.5 : 1.0;  // trapezoid
      for (int j = 0; j < nt; ++j) {
        Eigen::VectorXd su[5], sv[5], duv[5];
        for (int q = -2; q <= 2; ++q) {
          su[q + 2] = at(i + q, j);
          sv[q + 2] = at(i, j + q);
        }
        const Eigen::VectorXd pu = fd1(su, dr), pv = fd1(sv, dt);
        const Eigen::VectorXd puu = fd2(su, dr), pvv = fd2(sv, dt);
        for (int q = -2; q <= 2; ++q) {
          Eigen::VectorXd row[5];
          for (int w = -2; w <= 2; ++w) row[w + 2] = at(i + q, j + w);
          duv[q + 2] = fd1(row, dt);
        }
        const Eigen::VectorXd puv = fd1(duv, dr);

        const double E = pu.squaredNorm(), G = pv.squaredNorm(),
                     F = pu.dot(pv);
        const double det = E * G - F * F;
        if (!(det > 1e-14 * (E + G) * (E + G))) {
          ++excluded;
          continue;
        }
        // normal projector within the sphere: complement of {p, pu, pv}
        Eigen::MatrixXd T(m, 3);
        T.col(0) = at(i, j);
        T.col(1) = pu;
        T.col(2) = pv;
        const Eigen::MatrixXd P =
            Eigen::MatrixXd::Identity(m, m) -
            T * (T.transpose() * T).ldlt().solve(T.transpose());
        const Eigen::VectorXd h11 = P * puu, h12 = P * puv, h22 = P * pvv;
        const Eigen::VectorXd Hvec =
            (G * h11 - 2.0 * F * h12 + E * h22) / (2.0 * det);
        const double kext = (h11.dot(h22) - h12.squaredNorm()) / det;
        sum += wr * (Hvec.squaredNorm() - kext) * std::sqrt(det) * dr * dt;
      }
    }
    rep.epsilons.push_back(eps);
    rep.annulus_values.push_back(sum);
    rep.excluded_nodes += excluded;
  }

  const int L = static_cast<int>(rep.annulus_values.size());
  rep.value = rep.annulus_values.back();
  if (L >= 3) {
    // Aitken on the last three exhaustion levels
    const double w1 = rep.annulus_values[L - 3],
                 w2 = rep.annulus_values[L - 2],
                 w3 = rep.annulus_values[L - 1];
    const double den = w1 + w3 - 2.0 * w2;
    if (std::abs(den) > 1e-14 * std::abs(w3)) {
      rep.value = (w1 * w3 - w2 * w2) / den;
      rep.converged =
          std::abs(rep.value - w3) < 5e-3 * std::max(1.0, std::abs(w3));
    } else {
      rep.value = w3;
      rep.converged = std::abs(w3 - w2) < 1e-9 * std::max(1.0, std::abs(w3));
    }
  }
  if (!rep.converged) rep.note = "exhaustion tail not yet geometric";
  return rep;
}

GaussSubspace conformal_gauss_subspace(
    const std::function<Eigen::VectorXd(Complex)>& lift, Complex z,
    double fd_step) {
  GaussSubspace out;
  const double h = fd_step;
  auto norm_lift = [&](Complex w) {
    Eigen::VectorXd Y = lift(w);
    if (std::abs(Y(0)) < 1e-300) throw std::domain_error("vanishing lift");
    return (Y / Y(0)).eval();
  };
  Eigen::VectorXd su[5], sv[5];
  for (int q = -2; q <= 2; ++q) {
    su[q + 2] = norm_lift(z + Complex(q * h, 0.0));
    sv[q + 2] = norm_lift(z + Complex(0.0, q * h));
  }
  const int m = static_cast<int>(su[2].size());
  Eigen::MatrixXd V(m, 4);
  V.col(0) = su[2];
  V.col(1) = fd1(su, h);
  V.col(2) = fd1(sv, h);
  V.col(3) = (fd2(su, h) + fd2(sv, h)) / 4.0;

  const Eigen::MatrixXd I = metric_matrix(m);
  const Eigen::Matrix4d G = V.transpose() * I * V;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(G);
  const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
  int negatives = 0, small = 0;
  for (int i = 0; i < 4; ++i) {
    if (es.eigenvalues()(i) < -1e-9 * scale) ++negatives;
    if (std::abs(es.eigenvalues()(i)) <= 1e-9 * scale) ++small;
  }
  if (small > 0 || negatives != 1) {
    out.degenerate = true;
    out.note = small > 0 ? "subspace rank below four"
                         : "subspace signature is not (1,3)";
    return out;
  }
  // columns ordered timelike first, then spacelike; eigenvalues ascending
  // already put the negative one first
  out.basis.resize(m, 4);
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd b =
        V * es.eigenvectors().col(i) / std::sqrt(std::abs(es.eigenvalues()(i)));
    int lead;
    b.cwiseAbs().maxCoeff(&lead);
    if (b(lead) < 0.0) b = -b;
    out.basis.col(i) = b;
  }
  const Eigen::Matrix4d gram = out.basis.transpose() * I * out.basis;
  Eigen::Vector4d target(-1.0, 1.0, 1.0, 1.0);
  out.gram_residual =
      (gram - Eigen::Matrix4d(target.asDiagonal())).cwiseAbs().maxCoeff();
  return out;
}

namespace {

Eigen::VectorXd project_point(const Eigen::MatrixXd& L,
                              const Eigen::VectorXd& a) {
  Eigen::VectorXd X(a.size() + 1);
  X(0) = 1.0;
  X.tail(a.size()) = a;
  const Eigen::VectorXd Y = L * X;
  return Y.tail(a.size()) / Y(0);
}

double alignment_residual(const Eigen::MatrixXd& L,
                          const std::vector<Eigen::VectorXd>& a,
                          const std::vector<Eigen::VectorXd>& b) {
  double worst = 0.0;
  for (size_t k = 0; k < a.size(); ++k)
    worst = std::max(worst,
                     (project_point(L, a[k]) - b[k]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

AlignmentReport lorentz_procrustes(const std::vector<Eigen::VectorXd>& a,
                                   const std::vector<Eigen::VectorXd>& b) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("alignment needs matching nonempty samples");
  const int m = static_cast<int>(a[0].size());
  const int dim = m + 1;
  const Eigen::MatrixXd I = metric_matrix(dim);

  // algebra basis: boosts J_{0i} (symmetric pairs) and rotations J_{ij}
  std::vector<Eigen::MatrixXd> gen;
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      Eigen::MatrixXd X = Eigen::MatrixXd::Zero(dim, dim);
      if (i == 0) {
        X(0, j) = 1.0;
        X(j, 0) = 1.0;
      } else {
        X(i, j) = 1.0;
        X(j, i) = -1.0;
      }
      gen.push_back(X);
    }
  const int ng = static_cast<int>(gen.size());

  AlignmentReport best;
  best.residual = std::numeric_limits<double>::infinity();

  // reflection seeds: identity and single-axis spatial flips (det kept +1
  // by flipping a companion axis)
  std::vector<Eigen::MatrixXd> seeds;
  seeds.push_back(Eigen::MatrixXd::Identity(dim, dim));
  for (int i = 1; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      Eigen::MatrixXd S = Eigen::MatrixXd::Identity(dim, dim);
      S(i, i) = -1.0;
      S(j, j) = -1.0;
      seeds.push_back(S);
    }

  for (const Eigen::MatrixXd& seed : seeds) {
    Eigen::MatrixXd L = seed;
    int it = 0;
    for (; it < 60; ++it) {
      Eigen::MatrixXd J(static_cast<int>(a.size()) * m, ng);
      Eigen::VectorXd r(static_cast<int>(a.size()) * m);
      for (size_t k = 0; k < a.size(); ++k) {
        Eigen::VectorXd X(dim);
        X(0) = 1.0;
        X.tail(m) = a[k];
        const Eigen::VectorXd Y = L * X;
        const Eigen::VectorXd p = Y.tail(m) / Y(0);
        r.segment(static_cast<int>(k) * m, m) = p - b[k];
        for (int g = 0; g < ng; ++g) {
          const Eigen::VectorXd dY = gen[g] * Y;
          J.block(static_cast<int>(k) * m, g, m, 1) =
              (dY.tail(m) - p * dY(0)) / Y(0);
        }
      }
      const Eigen::VectorXd xi =
          (J.transpose() * J +
           1e-12 * Eigen::MatrixXd::Identity(ng, ng))
              .ldlt()
              .solve(-J.transpose() * r);
      Eigen::MatrixXd step = Eigen::MatrixXd::Zero(dim, dim);
      for (int g = 0; g < ng; ++g) step += xi(g) * gen[g];
      L = matrix_exponential(step.cast<Complex>()).real() * L;
      if (xi.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    const double res = alignment_residual(L, a, b);
    if (res < best.residual) {
      best.residual = res;
      best.transform = L;
      best.iterations = it;
      best.converged = true;
    }
    if (best.residual < 1e-12) break;
  }
  return best;
}

}  // namespace wdpw
