#include "wdpw/rational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wdpw {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_complex(Complex z) {
  std::ostringstream os;
  os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag())
     << "i";
  return os.str();
}

}  // namespace

Poly poly_trim(Poly p) {
  while (!p.empty() && p.back() == Complex(0.0, 0.0)) p.pop_back();
  return p;
}

int poly_degree(const Poly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != Complex(0.0, 0.0)) return i;
  return -1;
}

double poly_max_abs(const Poly& p) {
  double m = 0.0;
  for (const Complex& c : p) m = std::max(m, std::abs(c));
  return m;
}

bool poly_is_zero(const Poly& p, double tol) { return poly_max_abs(p) <= tol; }

Complex poly_evaluate(const Poly& p, Complex z) {
  Complex acc(0.0, 0.0);
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    acc = acc * z + p[i];
  return acc;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()), Complex(0.0, 0.0));
  for (size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return poly_trim(std::move(out));
}

Poly poly_scale(const Poly& a, Complex c) {
  Poly out = a;
  for (Complex& x : out) x *= c;
  return poly_trim(std::move(out));
}

Poly poly_multiply(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, Complex(0.0, 0.0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return poly_trim(std::move(out));
}

Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) return {};
  Poly out(p.size() - 1);
  for (size_t i = 1; i < p.size(); ++i)
    out[i - 1] = p[i] * Complex(static_cast<double>(i), 0.0);
  return poly_trim(std::move(out));
}

Poly poly_antiderivative(const Poly& p) {
  if (p.empty()) return {};
  Poly out(p.size() + 1, Complex(0.0, 0.0));
  for (size_t i = 0; i < p.size(); ++i)
    out[i + 1] = p[i] / Complex(static_cast<double>(i + 1), 0.0);
  return poly_trim(std::move(out));
}

std::pair<Poly, Poly> poly_divmod(const Poly& a, const Poly& b) {
  Poly den = poly_trim(b);
  if (den.empty()) throw std::domain_error("polynomial division by zero");
  Poly rem = poly_trim(a);
  const int db = static_cast<int>(den.size()) - 1;
  int dr = static_cast<int>(rem.size()) - 1;
  if (dr < db) return {Poly{}, rem};
  Poly quot(dr - db + 1, Complex(0.0, 0.0));
  while (dr >= db) {
    const Complex c = rem[dr] / den[db];
    quot[dr - db] = c;
    for (int i = 0; i <= db; ++i) rem[dr - db + i] -= c * den[i];
    rem[dr] = Complex(0.0, 0.0);  // cancel exactly
    rem = poly_trim(std::move(rem));
    dr = static_cast<int>(rem.size()) - 1;
  }
  return {poly_trim(std::move(quot)), std::move(rem)};
}

Poly poly_from_root(Complex root, int power) {
  Poly out{Complex(1.0, 0.0)};
  const Poly factor{-root, Complex(1.0, 0.0)};
  for (int i = 0; i < power; ++i) out = poly_multiply(out, factor);
  return out;
}

Poly poly_pow(const Poly& p, int k) {
  Poly out{Complex(1.0, 0.0)};
  for (int i = 0; i < k; ++i) out = poly_multiply(out, p);
  return out;
}

RationalFunction::RationalFunction(Poly n, Poly d)
    : num(poly_trim(std::move(n))), den(poly_trim(std::move(d))) {
  if (den.empty())
    throw std::domain_error("rational function with zero denominator");
  // keep denominator mass near 1 by an exact power-of-two rescale
  const double m = poly_max_abs(den);
  if (m > 256.0 || m < 1.0 / 256.0) {
    int e = 0;
    std::frexp(m, &e);
    const double s = std::ldexp(1.0, -e);
    for (Complex& c : num) c *= s;
    for (Complex& c : den) c *= s;
  }
}

RationalFunction RationalFunction::constant(Complex c) {
  if (c == Complex(0.0, 0.0)) return RationalFunction();
  return RationalFunction(Poly{c}, Poly{Complex(1.0, 0.0)});
}

RationalFunction RationalFunction::monomial(int k, Complex c) {
  if (k < 0) throw std::domain_error("monomial with negative exponent");
  Poly n(k + 1, Complex(0.0, 0.0));
  n[k] = c;
  return RationalFunction(std::move(n), Poly{Complex(1.0, 0.0)});
}

RationalFunction rational_add(const RationalFunction& a,
                              const RationalFunction& b) {
  // identical denominators add without squaring them; this keeps degrees
  // bounded when many entries share a common pole set
  if (a.den.size() == b.den.size() &&
      std::equal(a.den.begin(), a.den.end(), b.den.begin()))
    return RationalFunction(poly_add(a.num, b.num), a.den);
  return RationalFunction(
      poly_add(poly_multiply(a.num, b.den), poly_multiply(b.num, a.den)),
      poly_multiply(a.den, b.den));
}

RationalFunction rational_subtract(const RationalFunction& a,
                                   const RationalFunction& b) {
  return rational_add(a, rational_scale(b, Complex(-1.0, 0.0)));
}

RationalFunction rational_multiply(const RationalFunction& a,
                                   const RationalFunction& b) {
  return RationalFunction(poly_multiply(a.num, b.num),
                          poly_multiply(a.den, b.den));
}

RationalFunction rational_divide(const RationalFunction& a,
                                 const RationalFunction& b) {
  if (poly_degree(b.num) < 0)
    throw std::domain_error("division by the zero rational function");
  return RationalFunction(poly_multiply(a.num, b.den),
                          poly_multiply(a.den, b.num));
}

RationalFunction rational_scale(const RationalFunction& a, Complex c) {
  return RationalFunction(poly_scale(a.num, c), a.den);
}

RationalFunction rational_derivative(const RationalFunction& a) {
  // (n'd - nd')/d^2, gcd-free
  return RationalFunction(
      poly_add(poly_multiply(poly_derivative(a.num), a.den),
               poly_scale(poly_multiply(a.num, poly_derivative(a.den)),
                          Complex(-1.0, 0.0))),
      poly_multiply(a.den, a.den));
}

namespace {

// p(P/Q) cleared to a polynomial: sum_k p_k P^k Q^(deg p - k)
Poly poly_compose_homogeneous(const Poly& p, const Poly& P, const Poly& Q) {
  const int dp = std::max(0, poly_degree(p));
  Poly acc;
  for (int k = 0; k <= dp; ++k) {
    if (k >= static_cast<int>(p.size())) break;
    if (p[k] == Complex(0.0, 0.0)) continue;
    const Poly term = poly_scale(
        poly_multiply(poly_pow(P, k), poly_pow(Q, dp - k)), p[k]);
    acc = poly_add(acc, term);
  }
  if (acc.empty()) acc = Poly{Complex(0.0, 0.0)};
  return acc;
}

}  // namespace

RationalFunction rational_compose(const RationalFunction& f,
                                  const RationalFunction& g) {
  const int dn = std::max(0, poly_degree(f.num));
  const int dd = std::max(0, poly_degree(f.den));
  const Poly A = poly_compose_homogeneous(f.num, g.num, g.den);
  const Poly B = poly_compose_homogeneous(f.den, g.num, g.den);
  // f o g = (A / Q^dn) / (B / Q^dd); clear the smaller power of Q
  Poly num = A, den = B;
  if (dd > dn)
    num = poly_multiply(num, poly_pow(g.den, dd - dn));
  else if (dn > dd)
    den = poly_multiply(den, poly_pow(g.den, dn - dd));
  return RationalFunction(std::move(num), std::move(den));
}

Complex rational_evaluate(const RationalFunction& a, Complex z) {
  Poly n = a.num;
  Poly d = a.den;
  const double zpow =
      std::pow(std::max(1.0, std::abs(z)), std::max(0, poly_degree(a.den)));
  // removable factors are common in gcd-free form; fall back on
  // derivative ratios when numerator and denominator vanish together
  for (int round = 0; round < 8; ++round) {
    const Complex dv = poly_evaluate(d, z);
    if (std::abs(dv) > 1e-13 * std::max(1.0, poly_max_abs(d)) * zpow)
      return poly_evaluate(n, z) / dv;
    const Complex nv = poly_evaluate(n, z);
    if (std::abs(nv) > 1e-10 * std::max(1.0, poly_max_abs(n)) * zpow)
      throw std::domain_error("rational function evaluated at a pole: z = " +
                              format_complex(z));
    n = poly_derivative(n);
    d = poly_derivative(d);
    if (d.empty())
      throw std::domain_error("rational function evaluated at a pole: z = " +
                              format_complex(z));
  }
  throw std::domain_error("rational function evaluated at a pole: z = " +
                          format_complex(z));
}

bool rational_equal(const RationalFunction& a, const RationalFunction& b,
                    double tol) {
  const Poly p = poly_multiply(a.num, b.den);
  const Poly q = poly_multiply(b.num, a.den);
  const double scale = std::max(poly_max_abs(p), poly_max_abs(q));
  if (scale == 0.0) return true;
  return poly_max_abs(poly_add(p, poly_scale(q, Complex(-1.0, 0.0)))) <=
         tol * scale;
}

bool rational_is_zero(const RationalFunction& a, double tol) {
  return poly_max_abs(a.num) <= tol * std::max(1.0, poly_max_abs(a.den));
}

namespace {

std::vector<Complex> polynomial_roots(const Poly& p) {
  const Poly q = poly_trim(p);
  const int d = poly_degree(q);
  if (d <= 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = Complex(1.0, 0.0);
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -q[i] / q[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver;
  solver.compute(companion, false);
  // raw eigenvalues: a multiple root splits into a nearly symmetric cloud
  // whose centroid is far more accurate than any single member, so per-root
  // polishing would only spoil the later cluster averages
  std::vector<Complex> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = solver.eigenvalues()(i);
  return roots;
}

struct PrincipalPart {
  Complex center;
  std::vector<Complex> coeffs;  // coeffs[k-1] multiplies 1/(z-center)^k
  int root_count = 0;
};

std::vector<PrincipalPart> cluster_roots(const std::vector<Complex>& roots,
                                         double tol) {
  std::vector<PrincipalPart> clusters;
  std::vector<std::vector<Complex>> members;
  for (const Complex& r : roots) {
    bool placed = false;
    for (size_t i = 0; i < clusters.size(); ++i) {
      if (std::abs(r - clusters[i].center) <=
          tol * std::max(1.0, std::abs(r))) {
        members[i].push_back(r);
        Complex mean(0.0, 0.0);
        for (const Complex& m : members[i]) mean += m;
        clusters[i].center = mean / static_cast<double>(members[i].size());
        placed = true;
        break;
      }
    }
    if (!placed) {
      clusters.push_back({r, {}, 0});
      members.push_back({r});
    }
  }
  for (size_t i = 0; i < clusters.size(); ++i)
    clusters[i].root_count = static_cast<int>(members[i].size());
  return clusters;
}

// a root of multiplicity m is a simple root of den^(m-1); Newton there
// sharpens the cluster center to machine precision
void refine_cluster_centers(std::vector<PrincipalPart>& clusters,
                            const Poly& den) {
  for (PrincipalPart& cl : clusters) {
    Poly p = den;
    for (int i = 1; i < cl.root_count; ++i) p = poly_derivative(p);
    const Poly dp = poly_derivative(p);
    Complex c = cl.center;
    bool ok = true;
    for (int it = 0; it < 6 && ok; ++it) {
      const Complex fp = poly_evaluate(dp, c);
      if (std::abs(fp) < 1e-30) {
        ok = false;
        break;
      }
      const Complex step = poly_evaluate(p, c) / fp;
      if (!std::isfinite(std::abs(step)) || std::abs(step) > 0.05) {
        ok = false;
        break;
      }
      c -= step;
    }
    if (ok) cl.center = c;  // else keep the centroid
  }
}

// Laurent coefficients of num/den about each cluster center by contour
// sampling; exact for the cluster total even when the underlying roots
// have drifted apart numerically, as long as the circle separates clusters.
void extract_principal_parts(const Poly& num, const Poly& den,
                             std::vector<PrincipalPart>& clusters) {
  constexpr int kSamples = 256;
  for (size_t i = 0; i < clusters.size(); ++i) {
    PrincipalPart& cl = clusters[i];
    double min_other = 2.0;
    for (size_t j = 0; j < clusters.size(); ++j)
      if (j != i)
        min_other =
            std::min(min_other, std::abs(cl.center - clusters[j].center));
    const double radius = std::max(1e-6, 0.45 * min_other);
    std::vector<Complex> samples(kSamples);
    double fscale = 0.0;
    for (int s = 0; s < kSamples; ++s) {
      const double th = 2.0 * kPi * s / kSamples;
      const Complex z = cl.center + radius * Complex(std::cos(th), std::sin(th));
      samples[s] = poly_evaluate(num, z) / poly_evaluate(den, z);
      fscale = std::max(fscale, std::abs(samples[s]));
    }
    cl.coeffs.assign(cl.root_count, Complex(0.0, 0.0));
    for (int k = 1; k <= cl.root_count; ++k) {
      Complex acc(0.0, 0.0);
      for (int s = 0; s < kSamples; ++s) {
        const double th = 2.0 * kPi * s / kSamples;
        acc += samples[s] * std::pow(radius, k) *
               Complex(std::cos(k * th), std::sin(k * th));
      }
      acc /= static_cast<double>(kSamples);
      // suppress numerically absent orders (removable factors)
      if (std::abs(acc) <= 1e-12 * std::max(1.0, fscale * std::pow(radius, k)))
        acc = Complex(0.0, 0.0);
      cl.coeffs[k - 1] = acc;
    }
    while (!cl.coeffs.empty() && cl.coeffs.back() == Complex(0.0, 0.0))
      cl.coeffs.pop_back();
  }
}

// quotient + sum of principal parts must reproduce the function on a circle
// enclosing every pole; failure means the clustering split a multiple root
double reconstruction_error(const Poly& num, const Poly& den,
                            const Poly& quotient,
                            const std::vector<PrincipalPart>& clusters) {
  double rad = 1.0;
  for (const PrincipalPart& cl : clusters)
    rad = std::max(rad, std::abs(cl.center));
  rad = 2.0 * rad + 1.0;
  double err = 0.0, scale = 1.0;
  for (int s = 0; s < 24; ++s) {
    const double th = 2.0 * kPi * (s + 0.3) / 24.0;
    const Complex z = rad * Complex(std::cos(th), std::sin(th));
    const Complex f = poly_evaluate(num, z) / poly_evaluate(den, z);
    Complex rec = poly_evaluate(quotient, z);
    for (const PrincipalPart& cl : clusters) {
      Complex w(1.0, 0.0);
      for (size_t k = 0; k < cl.coeffs.size(); ++k) {
        w /= (z - cl.center);
        rec += cl.coeffs[k] * w;
      }
    }
    err = std::max(err, std::abs(f - rec));
    scale = std::max(scale, std::abs(f));
  }
  return err / scale;
}

struct PartialFractions {
  Poly quotient;
  std::vector<PrincipalPart> clusters;
};

PartialFractions compute_partial_fractions(const RationalFunction& a,
                                           double cluster_tol) {
  PartialFractions out;
  Poly rem;
  std::tie(out.quotient, rem) = poly_divmod(a.num, a.den);
  if (poly_degree(a.den) <= 0 || poly_degree(rem) < 0) {
    return out;
  }
  const std::vector<Complex> roots = polynomial_roots(a.den);
  double tol = cluster_tol;
  for (int attempt = 0; attempt < 5; ++attempt) {
    out.clusters = cluster_roots(roots, tol);
    refine_cluster_centers(out.clusters, a.den);
    extract_principal_parts(rem, a.den, out.clusters);
    if (reconstruction_error(rem, a.den, Poly{}, out.clusters) < 1e-8)
      return out;
    tol *= 100.0;
  }
  throw std::runtime_error(
      "partial fraction decomposition failed to validate; denominator roots "
      "could not be clustered consistently");
}

}  // namespace

std::vector<PoleInfo> rational_poles(const RationalFunction& a,
                                     double cluster_tol) {
  const PartialFractions pf = compute_partial_fractions(a, cluster_tol);
  std::vector<PoleInfo> out;
  for (const PrincipalPart& cl : pf.clusters) {
    if (cl.coeffs.empty()) continue;  // removable
    PoleInfo info;
    info.location = cl.center;
    info.multiplicity = static_cast<int>(cl.coeffs.size());
    info.residue = cl.coeffs[0];
    out.push_back(info);
  }
  return out;
}

RationalFunction rational_antiderivative(const RationalFunction& a,
                                         double cluster_tol) {
  const PartialFractions pf = compute_partial_fractions(a, cluster_tol);
  RationalFunction result(poly_antiderivative(pf.quotient),
                          Poly{Complex(1.0, 0.0)});
  for (const PrincipalPart& cl : pf.clusters) {
    if (cl.coeffs.empty()) continue;
    double scale = 1.0;
    for (const Complex& c : cl.coeffs) scale = std::max(scale, std::abs(c));
    if (std::abs(cl.coeffs[0]) > 1e-9 * scale) {
      throw NonIntegrableError(
          "antiderivative is not rational: nonzero residue " +
              format_complex(cl.coeffs[0]) + " at pole z = " +
              format_complex(cl.center),
          cl.center, cl.coeffs[0]);
    }
    const int m = static_cast<int>(cl.coeffs.size());
    if (m < 2) continue;
    // sum_k c_k (z-p)^{1-k}/(1-k) over a single (z-p)^{m-1} denominator
    Poly num_p;
    for (int k = 2; k <= m; ++k) {
      const Complex c = cl.coeffs[k - 1] / Complex(1.0 - k, 0.0);
      num_p = poly_add(num_p, poly_scale(poly_from_root(cl.center, m - k), c));
    }
    result = result + RationalFunction(std::move(num_p),
                                       poly_from_root(cl.center, m - 1));
  }
  return result;
}

}  // namespace wdpw
