#include "wdpw/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace wdpw {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_point(Complex z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag())
     << "i";
  return os.str();
}

double segment_distance(Complex a, Complex b, Complex p) {
  const Complex d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a) * std::conj(d)).real() / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

}  // namespace

DomainGrid rectangle_grid(Complex corner, double width, double height, int nx,
                          int ny, std::vector<Complex> lambda_samples) {
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("rectangle_grid needs at least 2x2 nodes");
  DomainGrid g;
  g.chart = GridChart::rectangle;
  g.rows = ny;
  g.cols = nx;
  g.du = width / (nx - 1);
  g.dv = height / (ny - 1);
  g.base_point = corner;
  g.base_index = 0;
  g.lambda_samples = std::move(lambda_samples);
  g.points.resize(static_cast<size_t>(nx) * ny);
  g.paths.resize(g.points.size());
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j)
      g.points[g.index(i, j)] = corner + Complex(g.du * j, g.dv * i);
  // along the bottom row, then up the column; consecutive paths share edges
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nx; ++j) {
      std::vector<Complex>& path = g.paths[g.index(i, j)];
      for (int k = 0; k <= j; ++k) path.push_back(g.points[g.index(0, k)]);
      for (int k = 1; k <= i; ++k) path.push_back(g.points[g.index(k, j)]);
    }
  return g;
}

DomainGrid annulus_grid(double rmin, double rmax, int nr, int ntheta,
                        std::vector<Complex> lambda_samples) {
  if (!(0.0 < rmin && rmin < rmax))
    throw std::invalid_argument("annulus_grid needs 0 < rmin < rmax");
  if (nr < 2 || ntheta < 3)
    throw std::invalid_argument("annulus_grid needs nr >= 2, ntheta >= 3");
  DomainGrid g;
  g.chart = GridChart::log_polar;
  g.rows = nr;
  g.cols = ntheta;
  g.du = 2.0 * kPi / ntheta;
  g.dv = std::log(rmax / rmin) / (nr - 1);
  g.wrap_u = true;
  g.base_point = Complex(rmin, 0.0);
  g.base_index = 0;
  g.lambda_samples = std::move(lambda_samples);
  g.points.resize(static_cast<size_t>(nr) * ntheta);
  g.paths.resize(g.points.size());
  for (int i = 0; i < nr; ++i) {
    const double r = rmin * std::exp(g.dv * i);
    for (int j = 0; j < ntheta; ++j)
      g.points[g.index(i, j)] =
          r * Complex(std::cos(g.du * j), std::sin(g.du * j));
  }
  // chords along the base circle to theta_j, then radially outward through
  // the intermediate radii, so every edge is shared between paths
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < ntheta; ++j) {
      std::vector<Complex>& path = g.paths[g.index(i, j)];
      for (int k = 0; k <= j; ++k) path.push_back(g.points[g.index(0, k)]);
      for (int k = 1; k <= i; ++k) path.push_back(g.points[g.index(k, j)]);
    }
  return g;
}

DomainGrid point_set_grid(std::vector<Complex> points, Complex base,
                          std::vector<Complex> lambda_samples) {
  DomainGrid g;
  g.chart = GridChart::point_set;
  g.base_point = base;
  g.lambda_samples = std::move(lambda_samples);
  g.points = std::move(points);
  g.base_index = -1;
  for (size_t k = 0; k < g.points.size(); ++k)
    if (g.points[k] == base) g.base_index = static_cast<int>(k);
  g.paths.resize(g.points.size());
  for (size_t k = 0; k < g.points.size(); ++k)
    g.paths[k] = {base, g.points[k]};
  return g;
}

void set_anchor(DomainGrid& grid, Complex anchor) {
  if (anchor == grid.base_point) return;
  for (std::vector<Complex>& path : grid.paths)
    path.insert(path.begin(), anchor);
  grid.base_point = anchor;
  grid.base_index = -1;
  for (size_t k = 0; k < grid.points.size(); ++k)
    if (grid.points[k] == anchor) grid.base_index = static_cast<int>(k);
}

void use_straight_paths(DomainGrid& grid) {
  for (size_t k = 0; k < grid.points.size(); ++k)
    grid.paths[k] = {grid.base_point, grid.points[k]};
}

void validate_grid(const DomainGrid& grid) {
  if (grid.points.empty())
    throw std::invalid_argument("grid has no sample points");
  if (grid.paths.size() != grid.points.size())
    throw std::invalid_argument("grid paths and points disagree in size");
  bool has_one = false;
  for (Complex l : grid.lambda_samples) {
    if (std::abs(std::abs(l) - 1.0) > 1e-12)
      throw std::invalid_argument("lambda sample off the unit circle");
    if (std::abs(l - Complex(1.0, 0.0)) <= 1e-12) has_one = true;
  }
  if (!has_one)
    throw std::invalid_argument("lambda samples must contain lambda = 1");
  if (grid.base_index < -1 ||
      grid.base_index >= static_cast<int>(grid.points.size()))
    throw std::invalid_argument("base index out of range");
  if (grid.base_index >= 0 &&
      grid.points[grid.base_index] != grid.base_point)
    throw std::invalid_argument("base index disagrees with the base point");
  for (size_t k = 0; k < grid.points.size(); ++k) {
    const std::vector<Complex>& path = grid.paths[k];
    if (path.size() < 1 || path.front() != grid.base_point ||
        path.back() != grid.points[k])
      throw std::invalid_argument("path endpoints disagree with the grid");
    for (size_t s = 0; s + 1 < path.size(); ++s)
      for (Complex p : grid.poles)
        if (segment_distance(path[s], path[s + 1], p) < grid.path_clearance)
          throw std::invalid_argument("integration path passes within " +
                                      std::to_string(grid.path_clearance) +
                                      " of the declared pole " +
                                      format_point(p));
  }
}

namespace {

struct EdgeFailure {
  std::string note;
};

LaurentMatrixLoop ode_rhs(const LaurentMatrixLoop& Y, const PotentialSpec& eta,
                          Complex z, Complex dz,
                          const TruncationPolicy& policy) {
  return loop_scale(loop_multiply(Y, evaluate_potential(eta, z), policy), dz);
}

// Dormand-Prince 5(4) on the loop coefficients along z(t) = a + t (b - a)
LaurentMatrixLoop integrate_edge(const PotentialSpec& eta, Complex a,
                                 Complex b, const TruncationPolicy& policy,
                                 double ode_tol) {
  static const double c[7] = {0.0,       0.2, 0.3, 0.8,
                              8.0 / 9.0, 1.0, 1.0};
  static const double A[7][6] = {
      {},
      {0.2},
      {3.0 / 40.0, 9.0 / 40.0},
      {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
      {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
      {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
       -5103.0 / 18656.0},
      {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
       11.0 / 84.0}};
  static const double b5[7] = {35.0 / 384.0,    0.0,  500.0 / 1113.0,
                               125.0 / 192.0,   -2187.0 / 6784.0,
                               11.0 / 84.0,     0.0};
  static const double b4[7] = {5179.0 / 57600.0,    0.0,
                               7571.0 / 16695.0,    393.0 / 640.0,
                               -92097.0 / 339200.0, 187.0 / 2100.0,
                               1.0 / 40.0};

  const Complex dz = b - a;
  LaurentMatrixLoop Y = identity_loop(eta.dim);
  if (std::abs(dz) == 0.0) return Y;
  double t = 0.0;
  double h = 1.0;
  int guard = 0;
  while (t < 1.0) {
    if (++guard > 20000)
      throw EdgeFailure{"step budget exhausted near " +
                        format_point(a + t * dz) +
                        "; undeclared pole suspected"};
    h = std::min(h, 1.0 - t);
    if (h < 1e-13)
      throw EdgeFailure{"step size underflow near " +
                        format_point(a + t * dz) +
                        "; undeclared pole suspected"};
    LaurentMatrixLoop k[7];
    bool pole_hit = false;
    std::string pole_note;
    try {
      for (int s = 0; s < 7; ++s) {
        LaurentMatrixLoop Ys = Y;
        for (int q = 0; q < s; ++q)
          if (A[s][q] != 0.0)
            Ys = loop_add(Ys, loop_scale(k[q], Complex(h * A[s][q], 0.0)));
        k[s] = ode_rhs(Ys, eta, a + (t + c[s] * h) * dz, dz, policy);
      }
    } catch (const std::domain_error& e) {
      // a stage landed on a pole: shrink toward it; the underflow guard
      // turns persistent failure into a singular-point diagnosis
      pole_hit = true;
      pole_note = e.what();
    }
    if (pole_hit) {
      h *= 0.25;
      continue;
    }
    LaurentMatrixLoop Y5 = Y;
    LaurentMatrixLoop err = zero_loop(eta.dim, 0, 0);
    for (int s = 0; s < 7; ++s) {
      if (b5[s] != 0.0)
        Y5 = loop_add(Y5, loop_scale(k[s], Complex(h * b5[s], 0.0)));
      const double w = b5[s] - b4[s];
      if (w != 0.0) err = loop_add(err, loop_scale(k[s], Complex(h * w, 0.0)));
    }
    const double scale = std::max(1.0, loop_norm(Y5));
    const double e = loop_norm(err) / scale;
    if (e <= ode_tol) {
      t += h;
      Y = truncate_loop(Y5, policy);
    }
    const double grow =
        (e > 0.0) ? 0.9 * std::pow(ode_tol / e, 0.2) : 5.0;
    h *= std::clamp(grow, 0.2, 5.0);
  }
  return Y;
}

LaurentMatrixLoop constant_coefficient_loop(const PotentialSpec& eta) {
  LaurentMatrixLoop D = zero_loop(eta.dim, -1, 1);
  for (const auto& [j, Aj] : eta.graded)
    D.coeff(j) = rm_evaluate(Aj, Complex(0.0, 0.0));
  return D;
}

}  // namespace

LoopField integrate_potential(const PotentialSpec& eta, const DomainGrid& grid,
                              const TruncationPolicy& policy, double ode_tol) {
  validate_potential(eta);
  validate_grid(grid);
  const size_t n = grid.points.size();
  LoopField out;
  out.loops.assign(n, identity_loop(eta.dim));
  out.singular.assign(n, 0);
  out.notes.assign(n, std::string());

  if (eta.kind == PotentialKind::constant) {
    const LaurentMatrixLoop D = constant_coefficient_loop(eta);
    for (size_t k = 0; k < n; ++k) {
      const Complex z = grid.points[k] - grid.base_point;
      out.loops[k] = loop_exp(loop_scale(D, z), policy);
    }
    return out;
  }

  // memoized prefix products: paths are polylines sharing long prefixes, so
  // each distinct edge is integrated exactly once
  struct Entry {
    LaurentMatrixLoop value;
    bool failed = false;
    std::string note;
  };
  std::map<std::vector<double>, Entry> memo;
  auto key_of = [](const std::vector<Complex>& path, size_t upto) {
    std::vector<double> key;
    key.reserve(2 * upto);
    for (size_t s = 0; s < upto; ++s) {
      key.push_back(path[s].real());
      key.push_back(path[s].imag());
    }
    return key;
  };

  for (size_t k = 0; k < n; ++k) {
    const std::vector<Complex>& path = grid.paths[k];
    // longest memoized prefix, then extend edge by edge
    size_t have = 1;
    Entry cur{identity_loop(eta.dim), false, ""};
    for (size_t upto = path.size(); upto > 1; --upto) {
      auto it = memo.find(key_of(path, upto));
      if (it != memo.end()) {
        cur = it->second;
        have = upto;
        break;
      }
    }
    while (!cur.failed && have < path.size()) {
      try {
        const LaurentMatrixLoop T = integrate_edge(
            eta, path[have - 1], path[have], policy, ode_tol);
        cur.value = loop_multiply(cur.value, T, policy);
      } catch (const EdgeFailure& f) {
        cur.failed = true;
        cur.note = f.note;
      }
      ++have;
      memo.emplace(key_of(path, have), cur);
    }
    if (cur.failed) {
      out.singular[k] = 1;
      out.notes[k] = cur.note;
    } else {
      out.loops[k] = cur.value;
    }
  }
  return out;
}

ExtendedFrameField frame_field(const LoopField& cfield, const DomainGrid& grid,
                               const TruncationPolicy& policy) {
  const size_t n = cfield.loops.size();
  if (n != grid.points.size())
    throw std::invalid_argument("loop field does not match the grid");
  ExtendedFrameField out;
  out.frames.assign(n, LaurentMatrixLoop{});
  out.plus.assign(n, LaurentMatrixLoop{});
  out.singular.assign(n, 0);
  out.notes.assign(n, std::string());

  for (size_t k = 0; k < n; ++k) {
    if (cfield.singular[k]) {
      out.singular[k] = 1;
      out.notes[k] = cfield.notes[k];
      continue;
    }
    const FactorizationReport rep = iwasawa_split(cfield.loops[k], policy);
    if (rep.cell != FactorizationCell::big_cell) {
      out.singular[k] = 1;
      out.notes[k] = std::string(cell_name(rep.cell)) +
                     (rep.note.empty() ? "" : ": " + rep.note);
      continue;
    }
    if (reality_residual(rep.left) > 1e-8 || twist_residual(rep.left) > 1e-8) {
      out.singular[k] = 1;
      out.notes[k] = "frame fails the reality/twist residual bound";
      continue;
    }
    out.frames[k] = rep.left;
    out.plus[k] = rep.right;
  }

  int dim = 0;
  for (size_t k = 0; k < n; ++k)
    if (!out.singular[k]) {
      dim = out.frames[k].dim;
      break;
    }
  if (dim == 0)
    throw std::runtime_error("every point of the frame field is singular");
  out.normalizer = identity_loop(dim);
  if (grid.base_index >= 0) {
    const int base = grid.base_index;
    if (out.singular[base])
      throw std::runtime_error("base point is singular: " + out.notes[base]);
    if (loop_distance(out.frames[base], identity_loop(dim)) > 1e-14) {
      out.normalizer = loop_inverse(out.frames[base], policy);
      for (size_t k = 0; k < n; ++k) {
        if (out.singular[k]) continue;
        out.frames[k] = loop_multiply(out.normalizer, out.frames[k], policy);
      }
    }
  }
  return out;
}

double flatness_residual(const ExtendedFrameField& frames,
                         const DomainGrid& grid) {
  if (!grid.structured())
    throw std::invalid_argument("flatness needs a structured grid");
  const int R = grid.rows, C = grid.cols;
  if (R < 3 || C < 3)
    throw std::invalid_argument(
        "grid too coarse for the flatness stencil (3 nodes per direction)");

  auto wrap = [&](int j) { return (j % C + C) % C; };
  auto ok = [&](int i, int j) {
    return !frames.singular[grid.index(i, wrap(j))];
  };

  double worst = 0.0;
  const int jlo = grid.wrap_u ? 0 : 1;
  const int jhi = grid.wrap_u ? C - 1 : C - 2;
  for (Complex lambda : grid.lambda_samples) {
    std::vector<Mat> F(grid.points.size());
    for (size_t k = 0; k < grid.points.size(); ++k)
      if (!frames.singular[k]) F[k] = loop_evaluate(frames.frames[k], lambda);
    // alpha = F^{-1} dF by central differences in the chart coordinates;
    // au needs the j neighbours, av the i neighbours
    std::vector<Mat> au(grid.points.size()), av(grid.points.size());
    std::vector<char> has_u(grid.points.size(), 0),
        has_v(grid.points.size(), 0);
    for (int i = 0; i < R; ++i)
      for (int j = 0; j < C; ++j) {
        if (!ok(i, j)) continue;
        const int k = grid.index(i, j);
        const auto lu = F[k].partialPivLu();
        const bool ju = (grid.wrap_u || (j >= 1 && j <= C - 2)) &&
                        ok(i, j - 1) && ok(i, j + 1);
        if (ju) {
          au[k] = lu.solve((F[grid.index(i, wrap(j + 1))] -
                            F[grid.index(i, wrap(j - 1))]) /
                           (2.0 * grid.du));
          has_u[k] = 1;
        }
        if (i >= 1 && i <= R - 2 && ok(i - 1, j) && ok(i + 1, j)) {
          av[k] = lu.solve(
              (F[grid.index(i + 1, j)] - F[grid.index(i - 1, j)]) /
              (2.0 * grid.dv));
          has_v[k] = 1;
        }
      }
    for (int i = 1; i <= R - 2; ++i)
      for (int j = jlo; j <= jhi; ++j) {
        const int k = grid.index(i, j);
        const int ku0 = grid.index(i - 1, j), ku1 = grid.index(i + 1, j);
        const int kv0 = grid.index(i, wrap(j - 1)),
                  kv1 = grid.index(i, wrap(j + 1));
        if (!(has_u[k] && has_v[k] && has_u[ku0] && has_u[ku1] &&
              has_v[kv0] && has_v[kv1]))
          continue;
        const Mat curl = (av[kv1] - av[kv0]) / (2.0 * grid.du) -
                         (au[ku1] - au[ku0]) / (2.0 * grid.dv);
        const Mat mc = curl + au[k] * av[k] - av[k] * au[k];
        worst = std::max(worst, mc.cwiseAbs().maxCoeff());
      }
  }
  return worst;
}

}  // namespace wdpw
