#pragma once

// Birkhoff and Iwasawa factorization of twisted matrix loops.
//
// birkhoff: g = left * right, left in Lambda^-_* (value I at infinity),
// right a plus loop; valid on the big cell.
// iwasawa: g = left * right, left twisted and real on S^1 with values in
// SO+(1,3) x SO(n), right a plus loop with right(0) normalized into a fixed
// solvable slice (block upper triangular, positive real diagonal, in a basis
// adapted to K^C); valid on the open Iwasawa cell.

#include <string>

#include "wdpw/loops.hpp"

namespace wdpw {

enum class FactorizationCell { big_cell, off_cell, boundary_suspected };

const char* cell_name(FactorizationCell cell);

struct FactorizationReport {
  LaurentMatrixLoop left;
  LaurentMatrixLoop right;
  // || g - left*right ||_inf over S^1 samples; reported, never hidden
  double residual = 0.0;
  FactorizationCell cell = FactorizationCell::big_cell;
  double condition = 0.0;  // condition estimate of the linear stage
  int iterations = 0;      // polish iterations used (iwasawa)
  std::string note;        // human-readable diagnosis when not big_cell
};

// Linear block-Toeplitz solve for M in Lambda^-_* killing the negative
// Fourier modes of M*g; left = M^{-1}, right = M*g. Ill-conditioned systems
// are flagged boundary_suspected, never silently accepted.
FactorizationReport birkhoff_split(const LaurentMatrixLoop& g,
                                   const TruncationPolicy& policy);

// Real-linear solve for a plus loop R making F = g*R real on S^1 with
// F_0 = I, followed by a congruence renormalization of F^T I F, a
// closed-form reduction of right(0) into the solvable slice, and a few
// Newton polish sweeps. Degenerate flag data is reported as off_cell,
// non-convergence as boundary_suspected.
FactorizationReport iwasawa_split(const LaurentMatrixLoop& g,
                                  const TruncationPolicy& policy);

}  // namespace wdpw
