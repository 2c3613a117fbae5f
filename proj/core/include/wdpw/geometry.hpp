#pragma once

// From frames to geometry: closed-form model surfaces, the enveloped-sphere
// extraction of the surface family from an extended frame field, Willmore
// energy by annulus exhaustion, conformal Gauss subspaces, and alignment in
// the Lorentz group.

#include <functional>
#include <string>
#include <vector>

#include "wdpw/pipeline.hpp"

namespace wdpw {

// One surface point of the family. The lift is a lightlike vector in
// R^{1,n+3} scaled so lift(0) = 1; point is its spatial part, a unit vector
// in R^{n+3} representing the point of S^{n+2}.
struct SurfaceSample {
  Complex z{0.0, 0.0};
  Complex lambda{1.0, 0.0};
  Eigen::VectorXd lift;
  Eigen::VectorXd point;
  bool valid = false;
  std::string note;
};

// Closed form for the family attached to constrained isotropic data on S^4,
// evaluated at every (z, lambda) pair; invalid samples carry a diagnosis
// (data pole, branch point of the induced map). lambda samples must lie on
// the unit circle. Output is ordered z-major: sample k * |lambdas| + l.
std::vector<SurfaceSample> s4_closed_form(const IsotropicS4Data& data,
                                          const std::vector<Complex>& zs,
                                          const std::vector<Complex>& lambdas);

// Reference spheres, evaluated directly from their printed parametrizations
// and independent of s4_closed_form. The first is the conformal closure of
// an antiholomorphic graph, Willmore energy 4 pi; the second is a full,
// totally isotropic, non-dual-degenerate sphere in S^6.
SurfaceSample s4_graph_sphere(Complex z, Complex lambda);
SurfaceSample s6_isotropic_sphere(Complex z, Complex lambda);

// The two enveloping branches of the sphere congruence; primary is the one
// with the larger total variation over the grid (for the model data the
// secondary branch is the constant dual point).
enum class SurfaceBranch { primary, secondary };

// Gauge-correct surface extraction. At each nonsingular grid point the
// admissible directions q solve
//
//   q real lightlike in R^{1,3},  q^T I4 (A4 c_j(z)) = 0,
//
// where A4 is the top-left block of the plus factor's constant term and
// c_j are the potential's lambda^{-1} block columns; the kernel is the null
// cone of a signature-(1,1) plane and carries two rays. Branch labels are
// assigned by projective continuity walking outward from the anchor. The
// frame-times-fixed-vector recipe F (e0 +- e1) is deliberately absent: the
// Iwasawa slice is not the adapted gauge, and that recipe differs from the
// enveloped surface by a global Lorentz transform.
//
// Lifts are F(z, lambda) (q; 0) per lambda sample, ordered z-major as in
// s4_closed_form. Degenerate kernels (ray collisions, e.g. where the data
// vanish) and frame failures yield invalid samples, never throws.
std::vector<SurfaceSample> extract_surface(
    const PotentialSpec& eta, const DomainGrid& grid,
    const ExtendedFrameField& frames,
    SurfaceBranch branch = SurfaceBranch::primary);

struct EnergyOptions {
  double eps0 = 0.2;      // outermost exhaustion parameter
  double ratio = 0.5;     // epsilon shrink per level
  int levels = 3;
  int radial_density = 16;  // nodes per unit log-radius
  int angular_nodes = 128;
};

struct EnergyReport {
  double value = 0.0;  // extrapolated
  std::vector<double> epsilons;
  std::vector<double> annulus_values;
  int excluded_nodes = 0;  // non-immersed lattice nodes skipped
  bool converged = false;
  std::string note;
};

// Willmore functional int (|H|^2 + 1 - K) dA of a conformally parametrized
// surface y: C* -> S^m (unit vectors in R^{m+1}), by fourth-order finite
// differences on log-polar lattices over eps <= |z| <= 1/eps and Aitken
// extrapolation across the exhaustion levels. Fixed summation order, so
// equal inputs give bitwise equal reports.
EnergyReport willmore_energy(
    const std::function<Eigen::VectorXd(Complex)>& y,
    const EnergyOptions& opt = {});

struct GaussSubspace {
  Eigen::MatrixXd basis;       // (n+4) x 4, Gram diag(-1,1,1,1)
  double gram_residual = 0.0;  // achieved deviation from that Gram matrix
  bool degenerate = false;     // rank < 4: not an immersion point
  std::string note;
};

// Orthonormalized span{Y, Y_u, Y_v, Lap Y} of a lightcone lift at z, by
// fourth-order central differences; the subspace does not depend on the
// scaling of the lift. Signature failures are flagged, not fatal.
GaussSubspace conformal_gauss_subspace(
    const std::function<Eigen::VectorXd(Complex)>& lift, Complex z,
    double fd_step = 1e-3);

struct AlignmentReport {
  Eigen::MatrixXd transform;  // in O+(1, m)
  double residual = 0.0;      // max unit-sphere deviation after alignment
  bool converged = false;
  int iterations = 0;
};

// Least-squares L in O+(1, m) with proj(L (1; a_k)) ~ b_k over unit-sphere
// point pairs, by Gauss-Newton on the Lorentz algebra from a set of
// reflection seeds. The fit is reported; inputs are never modified.
AlignmentReport lorentz_procrustes(const std::vector<Eigen::VectorXd>& a,
                                   const std::vector<Eigen::VectorXd>& b);

}  // namespace wdpw
