#pragma once

// The DPW machine: integrate dC = C eta from a base point along polygonal
// paths, Iwasawa-split pointwise into the extended frame field, and measure
// the discrete Maurer-Cartan (flatness) defect of the result.

#include <string>
#include <vector>

#include "wdpw/factor.hpp"
#include "wdpw/loops.hpp"
#include "wdpw/potentials.hpp"

namespace wdpw {

enum class GridChart { rectangle, log_polar, point_set };

// Finite z-sample set with a designated base point and, per sample, a
// polygonal integration path from the base avoiding declared poles.
// Structured charts (rectangle, log_polar) carry row/column indexing for
// finite-difference stencils; log_polar wraps in the angular direction.
struct DomainGrid {
  GridChart chart = GridChart::point_set;
  int rows = 0;
  int cols = 0;
  double du = 0.0;  // chart spacing along columns (u direction)
  double dv = 0.0;  // chart spacing along rows (v direction)
  bool wrap_u = false;

  Complex base_point{0.0, 0.0};
  int base_index = -1;  // index of the base among the samples, -1 if absent
  std::vector<Complex> points;
  // polyline from base_point to the sample, both endpoints included;
  // consecutive paths share prefixes so edge integrations are reused
  std::vector<std::vector<Complex>> paths;
  std::vector<Complex> lambda_samples;
  std::vector<Complex> poles;
  double path_clearance = 1e-3;

  int index(int i, int j) const { return i * cols + j; }
  bool structured() const { return rows >= 2 && cols >= 2; }
};

// nx x ny nodes on [corner, corner + width + i height], base at the corner
DomainGrid rectangle_grid(Complex corner, double width, double height, int nx,
                          int ny, std::vector<Complex> lambda_samples);
// nr x ntheta nodes r_i e^{i theta_j} with log-spaced radii, base at rmin;
// paths run along the base circle, then radially outward
DomainGrid annulus_grid(double rmin, double rmax, int nr, int ntheta,
                        std::vector<Complex> lambda_samples);
// unstructured samples with straight-segment paths; the base is not added
// to the samples unless already present
DomainGrid point_set_grid(std::vector<Complex> points, Complex base,
                          std::vector<Complex> lambda_samples);

// Re-root every path at the anchor by prepending the single shared edge
// anchor -> old base. The base point of the integration matters: starting
// anywhere else multiplies the whole field by a constant loop that need not
// be real, and such a dressing moves the resulting surface. Use this to pin
// the integration at the potential's reference point even when that point
// is not a grid sample.
void set_anchor(DomainGrid& grid, Complex anchor);

// replace every path by the single straight segment base -> point (used to
// exercise path independence)
void use_straight_paths(DomainGrid& grid);

// lambda samples on S^1 and containing 1; paths start at the base, end at
// their sample, and keep path_clearance away from every declared pole
void validate_grid(const DomainGrid& grid);

struct LoopField {
  std::vector<LaurentMatrixLoop> loops;
  std::vector<char> singular;
  std::vector<std::string> notes;  // diagnosis for singular points
};

// Solves dC = C eta, C(base) = I, along each grid path with an adaptive
// embedded Runge-Kutta pair on the loop coefficients (local error <=
// ode_tol per unit step). Constant potentials integrate exactly through the
// loop exponential of (z - z0) D. Points whose path hits a pole of eta or
// forces a step-size underflow are marked singular, never fatal.
LoopField integrate_potential(const PotentialSpec& eta, const DomainGrid& grid,
                              const TruncationPolicy& policy,
                              double ode_tol = 1e-10);

struct ExtendedFrameField {
  std::vector<LaurentMatrixLoop> frames;  // F: real twisted loops
  std::vector<LaurentMatrixLoop> plus;    // W+: plus loops
  std::vector<char> singular;
  std::vector<std::string> notes;
  // left multiplier applied to the whole field so that F(base) = I; a
  // lambda-dependent real loop, i.e. an isometry family on the surface side
  LaurentMatrixLoop normalizer;
};

// Pointwise Iwasawa split of the C-field. When the base point is a sample,
// one global left renormalization makes the frame the identity there; for a
// field integrated from an off-sample base this is already implicit
// (C(base) = I splits trivially) and the normalizer stays the identity.
// Off-cell and boundary-suspected points propagate as singular flags, as do
// frames failing the reality/twist residual bound 1e-8.
ExtendedFrameField frame_field(const LoopField& cfield, const DomainGrid& grid,
                               const TruncationPolicy& policy);

// Discrete Maurer-Cartan defect: alpha = F^{-1} dF by central differences
// in the chart coordinates, then max over interior nodes and lambda samples
// of || d(alpha) + [alpha_u, alpha_v] ||. O(h^2) for a coherent smooth
// frame field; jumps to O(1) when the pointwise gauge slice is inconsistent
// or a frame entry is corrupted. Requires a structured grid with at least
// five nodes per non-periodic direction.
double flatness_residual(const ExtendedFrameField& frames,
                         const DomainGrid& grid);

}  // namespace wdpw
