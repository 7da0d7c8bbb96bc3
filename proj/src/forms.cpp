#include "dualext/forms.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace dualext {

const char* to_string(VFamily f) {
  switch (f) {
    case VFamily::dirichlet_laplacian_halfline: return "dirichlet_laplacian_halfline";
    case VFamily::dirichlet_laplacian_interval: return "dirichlet_laplacian_interval";
    case VFamily::multiplication: return "multiplication";
    case VFamily::rank_one: return "rank_one";
    case VFamily::bounded_matrix: return "bounded_matrix";
  }
  return "unknown";
}

bool ImaginaryPartSpec::friedrichs_equals_krein() const {
  return family == VFamily::multiplication || family == VFamily::rank_one ||
         family == VFamily::bounded_matrix;
}

ImaginaryPartSpec ImaginaryPartSpec::laplacian(GridPtr grid) {
  ImaginaryPartSpec s;
  s.family = grid->kind == DomainKind::halfline ? VFamily::dirichlet_laplacian_halfline
                                                : VFamily::dirichlet_laplacian_interval;
  if (grid->kind == DomainKind::interval) {
    const double len = grid->right() - grid->left();
    s.strict_lower_bound = std::numbers::pi * std::numbers::pi / (len * len);
  }
  s.grid = std::move(grid);
  return s;
}

ImaginaryPartSpec ImaginaryPartSpec::multiplication_by(GridPtr grid, std::function<double(double)> w,
                                                       std::optional<double> lower_bound) {
  ImaginaryPartSpec s;
  s.family = VFamily::multiplication;
  for (double x : grid->nodes)
    if (!(w(x) >= 0.0)) throw Error(ErrorCode::invalid_argument, "multiplication weight must be non-negative");
  s.grid = std::move(grid);
  s.weight = std::move(w);
  s.strict_lower_bound = lower_bound;
  return s;
}

ImaginaryPartSpec ImaginaryPartSpec::rank_one_of(GridPtr grid, double alpha, const GridFunction& phi) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "rank-one coefficient must be positive");
  if (std::abs(norm_sq(phi) - 1.0) > 1e-10)
    throw Error(ErrorCode::invalid_argument, "rank-one vector must have unit norm");
  ImaginaryPartSpec s;
  s.family = VFamily::rank_one;
  s.grid = std::move(grid);
  s.alpha = alpha;
  s.phi = phi;
  return s;
}

ImaginaryPartSpec ImaginaryPartSpec::bounded(GridPtr grid, CMatrix m) {
  if (m.rows() != grid->n || m.cols() != grid->n)
    throw Error(ErrorCode::invalid_argument, "matrix size does not match the grid");
  Eigen::VectorXd sw(grid->n);
  for (int i = 0; i < grid->n; ++i) sw(i) = std::sqrt(grid->weights[i]);
  const CMatrix sym = sw.asDiagonal() * m * sw.cwiseInverse().asDiagonal();
  if ((sym - sym.adjoint()).norm() > 1e-10 * (1.0 + sym.norm()))
    throw Error(ErrorCode::invalid_argument, "matrix is not self-adjoint for the grid inner product");
  if (hermitian_eigen(sym, false).values(0) < -1e-10 * (1.0 + sym.norm()))
    throw Error(ErrorCode::not_dissipative_input, "matrix is not non-negative");
  ImaginaryPartSpec s;
  s.family = VFamily::bounded_matrix;
  s.grid = std::move(grid);
  s.matrix = std::move(m);
  return s;
}

namespace {

bool is_laplacian(const ImaginaryPartSpec& s) {
  return s.family == VFamily::dirichlet_laplacian_halfline ||
         s.family == VFamily::dirichlet_laplacian_interval;
}

double covered_length(const Grid& g) { return g.right() - g.left(); }

GridFunction apply_matrix(const ImaginaryPartSpec& spec, const GridFunction& f) {
  CVector x(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) x(i) = f[i];
  const CVector y = spec.matrix * x;
  return GridFunction(f.grid_ptr(), std::vector<Complex>(y.data(), y.data() + y.size()));
}

GridFunction weighted(const ImaginaryPartSpec& spec, const GridFunction& f) {
  std::vector<Complex> out(f.size());
  const auto& nodes = f.grid().nodes;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.weight(nodes[i]) * f[i];
  return GridFunction(f.grid_ptr(), std::move(out));
}

void require_dirichlet(const ImaginaryPartSpec& spec, const GridFunction& f, const char* what) {
  const Traces t = boundary_data(f);
  const double tol = 1e-8 * (1.0 + f.max_abs());
  bool ok = std::abs(t.f0) <= tol;
  if (spec.family == VFamily::dirichlet_laplacian_interval) ok = ok && std::abs(t.fb) <= tol;
  if (!ok)
    throw Error(ErrorCode::out_of_form_domain,
                std::string(what) + " violates the Dirichlet condition of the Friedrichs extension");
}

/// Probes integrability of |f'|^2 (Laplacian) at the left end when the
/// derivative is known in closed form.
void require_finite_energy(const GridFunction& f) {
  const auto& formula = f.formula();
  if (!formula || !formula->has_first()) return;
  const auto d = formula->first;
  const Grid& g = f.grid();
  if (!integrable_near_left([&](double x) { return std::norm(d(x)); }, g.left(), g.right()))
    throw Error(ErrorCode::out_of_form_domain, "derivative is not square integrable");
}

void require_finite_weighted(const ImaginaryPartSpec& spec, const GridFunction& f) {
  const auto& formula = f.formula();
  if (!formula) return;
  const auto v = formula->value;
  const Grid& g = f.grid();
  if (!integrable_near_left([&](double x) { return spec.weight(x) * std::norm(v(x)); }, g.left(),
                            g.right()))
    throw Error(ErrorCode::out_of_form_domain, "weighted integral diverges");
}

double checked(double value, ErrorCode code, const char* what) {
  if (!std::isfinite(value) || value > kDivergenceThreshold) throw Error(code, what);
  return value;
}

}  // namespace

Complex friedrichs_form(const ImaginaryPartSpec& spec, const GridFunction& f, const GridFunction& g) {
  switch (spec.family) {
    case VFamily::dirichlet_laplacian_halfline:
    case VFamily::dirichlet_laplacian_interval:
      return integrate(differentiate(f), differentiate(g));
    case VFamily::multiplication:
      return integrate(f, weighted(spec, g));
    case VFamily::rank_one:
      return spec.alpha * std::conj(integrate(*spec.phi, f)) * integrate(*spec.phi, g);
    case VFamily::bounded_matrix:
      return integrate(f, apply_matrix(spec, g));
  }
  return {};
}

Complex krein_form(const ImaginaryPartSpec& spec, const GridFunction& f, const GridFunction& g) {
  if (spec.family != VFamily::dirichlet_laplacian_interval) return friedrichs_form(spec, f, g);
  const Traces tf = boundary_data(f), tg = boundary_data(g);
  const double len = covered_length(f.grid());
  return integrate(differentiate(f), differentiate(g)) - std::conj(tf.fb - tf.f0) * (tg.fb - tg.f0) / len;
}

double friedrichs_form_sq(const ImaginaryPartSpec& spec, const GridFunction& f) {
  if (is_laplacian(spec)) {
    require_dirichlet(spec, f, "function");
    require_finite_energy(f);
  } else if (spec.family == VFamily::multiplication) {
    require_finite_weighted(spec, f);
  }
  return checked(friedrichs_form(spec, f, f).real(), ErrorCode::out_of_form_domain,
                 "form value diverges");
}

double krein_form_sq(const ImaginaryPartSpec& spec, const GridFunction& f) {
  if (is_laplacian(spec)) {
    require_finite_energy(f);
    if (spec.family == VFamily::dirichlet_laplacian_halfline && !decay_certified(f))
      throw Error(ErrorCode::out_of_form_domain, "function does not decay on the half-line");
  } else if (spec.family == VFamily::multiplication) {
    require_finite_weighted(spec, f);
  }
  return checked(krein_form(spec, f, f).real(), ErrorCode::out_of_form_domain, "form value diverges");
}

namespace {

struct PolyValues {
  std::vector<double> p, d1, d2;
};

/// Legendre polynomials P_0..P_{m-1} and their first two derivatives at t.
PolyValues legendre(int m, double t) {
  PolyValues r{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
  r.p[0] = 1.0;
  if (m > 1) {
    r.p[1] = t;
    r.d1[1] = 1.0;
  }
  for (int j = 1; j + 1 < m; ++j) {
    r.p[j + 1] = ((2.0 * j + 1.0) * t * r.p[j] - j * r.p[j - 1]) / (j + 1.0);
    r.d1[j + 1] = r.d1[j - 1] + (2.0 * j + 1.0) * r.p[j];
    r.d2[j + 1] = r.d2[j - 1] + (2.0 * j + 1.0) * r.d1[j];
  }
  return r;
}

/// Laguerre polynomials L_0..L_{m-1} and their first two derivatives at y.
PolyValues laguerre(int m, double y) {
  PolyValues r{std::vector<double>(m), std::vector<double>(m), std::vector<double>(m)};
  r.p[0] = 1.0;
  if (m > 1) {
    r.p[1] = 1.0 - y;
    r.d1[1] = -1.0;
  }
  for (int j = 1; j + 1 < m; ++j) {
    const double a = 2.0 * j + 1.0 - y;
    r.p[j + 1] = (a * r.p[j] - j * r.p[j - 1]) / (j + 1.0);
    r.d1[j + 1] = (a * r.d1[j] - r.p[j] - j * r.d1[j - 1]) / (j + 1.0);
    r.d2[j + 1] = (a * r.d2[j] - 2.0 * r.d1[j] - j * r.d2[j - 1]) / (j + 1.0);
  }
  return r;
}

/// g(x) * P_j(t(x)) with t affine in x, slope dt, including two derivatives.
struct Envelope {
  std::function<double(double)> g, dg, d2g;
};

Formula polynomial_member(int j, Envelope env, std::function<double(double)> t, double dt, bool laguerre_kind) {
  auto eval = [=](double x, int order) -> Complex {
    const PolyValues pv = laguerre_kind ? laguerre(j + 1, t(x)) : legendre(j + 1, t(x));
    const double p = pv.p[j], p1 = pv.d1[j] * dt, p2 = pv.d2[j] * dt * dt;
    const double g = env.g(x), g1 = env.dg(x), g2 = env.d2g(x);
    if (order == 0) return g * p;
    if (order == 1) return g1 * p + g * p1;
    return g2 * p + 2.0 * g1 * p1 + g * p2;
  };
  Formula f;
  f.value = [eval](double x) { return eval(x, 0); };
  f.first = [eval](double x) { return eval(x, 1); };
  f.second = [eval](double x) { return eval(x, 2); };
  return f;
}

/// Decay rate for Laguerre-type families so that the oscillatory region of
/// the highest member stays well inside the truncated half-line.
double laguerre_rate(const Grid& g, int m) { return std::max(1.0, 4.0 * m / g.right()); }

/// s^k (L - s)^k with s = x - left, for k = 0, 1, 2 (k = 0 on the right means
/// no right factor is applied).
Envelope interval_envelope(double left, double len, int k_left, int k_right) {
  auto g = [=](double x) {
    const double s = x - left;
    return std::pow(s, k_left) * std::pow(len - s, k_right);
  };
  auto dg = [=](double x) {
    const double s = x - left, r = len - s;
    double a = 0.0;
    if (k_left > 0) a += k_left * std::pow(s, k_left - 1) * std::pow(r, k_right);
    if (k_right > 0) a -= k_right * std::pow(s, k_left) * std::pow(r, k_right - 1);
    return a;
  };
  auto d2g = [=](double x) {
    const double s = x - left, r = len - s;
    double a = 0.0;
    if (k_left > 1) a += k_left * (k_left - 1) * std::pow(s, k_left - 2) * std::pow(r, k_right);
    if (k_left > 0 && k_right > 0)
      a -= 2.0 * k_left * k_right * std::pow(s, k_left - 1) * std::pow(r, k_right - 1);
    if (k_right > 1) a += k_right * (k_right - 1) * std::pow(s, k_left) * std::pow(r, k_right - 2);
    return a;
  };
  return {g, dg, d2g};
}

/// x^k e^{-c x}.
Envelope halfline_envelope(int k, double c) {
  auto g = [=](double x) { return std::pow(x, k) * std::exp(-c * x); };
  auto dg = [=](double x) {
    double a = -c * std::pow(x, k);
    if (k > 0) a += k * std::pow(x, k - 1);
    return a * std::exp(-c * x);
  };
  auto d2g = [=](double x) {
    double a = c * c * std::pow(x, k);
    if (k > 0) a -= 2.0 * c * k * std::pow(x, k - 1);
    if (k > 1) a += k * (k - 1) * std::pow(x, k - 2);
    return a * std::exp(-c * x);
  };
  return {g, dg, d2g};
}

std::vector<GridFunction> polynomial_family(const GridPtr& grid, int m, int k_left, int k_right) {
  std::vector<GridFunction> out;
  out.reserve(m);
  if (grid->kind == DomainKind::interval) {
    const double left = grid->left(), len = covered_length(*grid);
    const Envelope env = interval_envelope(left, len, k_left, k_right);
    auto t = [=](double x) { return 2.0 * (x - left) / len - 1.0; };
    for (int j = 0; j < m; ++j)
      out.push_back(GridFunction::sample(grid, polynomial_member(j, env, t, 2.0 / len, false)));
  } else {
    const double c = laguerre_rate(*grid, m);
    const Envelope env = halfline_envelope(k_left, c);
    auto y = [=](double x) { return 2.0 * c * x; };
    for (int j = 0; j < m; ++j)
      out.push_back(GridFunction::sample(grid, polynomial_member(j, env, y, 2.0 * c, true)));
  }
  return out;
}

}  // namespace

TestFamily ando_nishio_family(const ImaginaryPartSpec& spec, int test_dim) {
  if (test_dim < 2) throw Error(ErrorCode::invalid_argument, "test dimension must be at least 2");
  if (spec.family == VFamily::rank_one || spec.family == VFamily::bounded_matrix)
    throw Error(ErrorCode::unsupported_family, "no test family for this imaginary part");
  TestFamily fam;
  fam.f = polynomial_family(spec.grid, test_dim, 2, 2);
  for (const auto& f : fam.f) {
    if (is_laplacian(spec)) {
      Formula second;
      second.value = f.formula()->second;
      fam.vf.push_back(GridFunction::sample(spec.grid, Complex(-1.0) * second));
    } else {
      fam.vf.push_back(weighted(spec, f));
    }
  }
  return fam;
}

double krein_form_ando_nishio(const ImaginaryPartSpec& spec, const GridFunction& h, int test_dim) {
  const TestFamily fam = ando_nishio_family(spec, test_dim);
  const int m = test_dim;
  CVector a(m);
  CMatrix b(m, m);
  for (int j = 0; j < m; ++j) {
    a(j) = std::conj(integrate(h, fam.vf[j]));
    for (int k = 0; k < m; ++k) b(j, k) = integrate(fam.f[j], fam.vf[k]);
  }
  b = 0.5 * (b + b.adjoint());
  return pseudo_quadratic(a, b);
}

VfSolution vf_solve(const ImaginaryPartSpec& spec, const GridFunction& l) {
  const GridPtr& grid = l.grid_ptr();
  const auto& nodes = grid->nodes;
  const int n = grid->n;
  switch (spec.family) {
    case VFamily::dirichlet_laplacian_interval: {
      const double left = grid->left(), len = covered_length(*grid);
      std::vector<Complex> yl(n), ryl(n);
      for (int i = 0; i < n; ++i) {
        const double s = nodes[i] - left;
        yl[i] = s * l[i];
        ryl[i] = (len - s) * l[i];
      }
      const GridFunction a = cumulative_integral(GridFunction(grid, yl));
      const GridFunction b = cumulative_integral(GridFunction(grid, ryl));
      const Complex a_total = integrate(GridFunction::sample(grid, Formula::constant(1.0)), GridFunction(grid, yl));
      const Complex b_total = integrate(GridFunction::sample(grid, Formula::constant(1.0)), GridFunction(grid, ryl));
      std::vector<Complex> u(n);
      for (int i = 0; i < n; ++i) {
        const double s = nodes[i] - left;
        u[i] = ((len - s) / len) * a[i] + (s / len) * (b_total - b[i]);
      }
      Traces t{0.0, b_total / len, 0.0, -a_total / len};
      GridFunction sol(grid, std::move(u), t);
      return {sol, integrate(l, sol).real()};
    }
    case VFamily::dirichlet_laplacian_halfline: {
      if (!decay_certified(l)) throw Error(ErrorCode::not_in_range, "right-hand side does not decay");
      std::vector<Complex> yl(n);
      for (int i = 0; i < n; ++i) yl[i] = nodes[i] * l[i];
      const GridFunction a = cumulative_integral(GridFunction(grid, yl));
      const GridFunction c = cumulative_integral(l);
      const GridFunction one = GridFunction::sample(grid, Formula::constant(1.0));
      const Complex c_total = integrate(one, l);
      const Complex moment = integrate(one, GridFunction(grid, yl));
      double scale = 0.0;
      for (int i = 0; i < n; ++i) scale += grid->weights[i] * std::abs(yl[i]);
      if (std::abs(moment) > 1e-8 * std::max(scale, 1e-300))
        throw Error(ErrorCode::not_in_range, "solution does not decay: first moment of the right-hand side is nonzero");
      std::vector<Complex> u(n);
      for (int i = 0; i < n; ++i) u[i] = a[i] + nodes[i] * (c_total - c[i]);
      Traces t{0.0, c_total, 0.0, 0.0};
      GridFunction sol(grid, std::move(u), t);
      return {sol, integrate(l, sol).real()};
    }
    case VFamily::multiplication: {
      const double lmax = l.max_abs();
      std::vector<Complex> u(n);
      for (int i = 0; i < n; ++i) {
        const double w = spec.weight(nodes[i]);
        if (w > 0.0) {
          u[i] = l[i] / w;
        } else if (std::abs(l[i]) > 1e-14 * std::max(lmax, 1e-300)) {
          throw Error(ErrorCode::support_violation, "right-hand side is supported where the weight vanishes");
        }
      }
      if (l.formula()) {
        const auto v = l.formula()->value;
        const auto w = spec.weight;
        if (!integrable_near_left([&](double x) { return std::norm(v(x)) / (w(x) * w(x)); }, grid->left(),
                                  grid->right()))
          throw Error(ErrorCode::not_in_range, "right-hand side is not in the range of the weight");
      }
      GridFunction sol(grid, std::move(u));
      return {sol, integrate(l, sol).real()};
    }
    case VFamily::rank_one: {
      const Complex c = integrate(*spec.phi, l);
      const GridFunction rest = l - c * (*spec.phi);
      if (std::sqrt(norm_sq(rest)) > 1e-8 * (std::sqrt(norm_sq(l)) + 1e-300))
        throw Error(ErrorCode::support_violation, "right-hand side is not a multiple of the rank-one vector");
      GridFunction sol = (c / spec.alpha) * (*spec.phi);
      return {sol, std::norm(c) / spec.alpha};
    }
    case VFamily::bounded_matrix: {
      Eigen::VectorXd sw(n);
      for (int i = 0; i < n; ++i) sw(i) = std::sqrt(grid->weights[i]);
      const CMatrix sym = sw.asDiagonal() * spec.matrix * sw.cwiseInverse().asDiagonal();
      CVector lh(n);
      for (int i = 0; i < n; ++i) lh(i) = sw(i) * l[i];
      const CVector uh = pseudo_inverse_hermitian(0.5 * (sym + sym.adjoint())) * lh;
      if ((sym * uh - lh).norm() > 1e-8 * (lh.norm() + 1e-300))
        throw Error(ErrorCode::not_in_range, "right-hand side is not in the range of the matrix");
      std::vector<Complex> u(n);
      for (int i = 0; i < n; ++i) u[i] = uh(i) / sw(i);
      GridFunction sol(grid, std::move(u));
      return {sol, lh.dot(uh).real()};
    }
  }
  throw Error(ErrorCode::unsupported_family, "unknown family");
}

double inverse_sqrt_form_sq(const ImaginaryPartSpec& spec, const GridFunction& l) {
  const GridPtr& grid = l.grid_ptr();
  switch (spec.family) {
    case VFamily::dirichlet_laplacian_halfline: {
      // ||V_F^{-1/2} l||^2 = integral of |int_x^inf l|^2, finite even when
      // l is not in the range of V_F itself.
      if (!decay_certified(l)) throw Error(ErrorCode::not_in_range, "right-hand side does not decay");
      const GridFunction c = cumulative_integral(l);
      const Complex total = integrate(GridFunction::sample(grid, Formula::constant(1.0)), l);
      std::vector<Complex> tail(grid->n);
      for (int i = 0; i < grid->n; ++i) tail[i] = total - c[i];
      return checked(norm_sq(GridFunction(grid, std::move(tail))), ErrorCode::not_in_range,
                     "right-hand side is not in the range of the square root");
    }
    case VFamily::multiplication: {
      const double lmax = l.max_abs();
      double sum = 0.0;
      for (int i = 0; i < grid->n; ++i) {
        const double w = spec.weight(grid->nodes[i]);
        if (w > 0.0) {
          sum += grid->weights[i] * std::norm(l[i]) / w;
        } else if (std::abs(l[i]) > 1e-14 * std::max(lmax, 1e-300)) {
          throw Error(ErrorCode::support_violation, "right-hand side is supported where the weight vanishes");
        }
      }
      if (l.formula()) {
        const auto v = l.formula()->value;
        const auto w = spec.weight;
        if (!integrable_near_left([&](double x) { return std::norm(v(x)) / w(x); }, grid->left(),
                                  grid->right()))
          throw Error(ErrorCode::not_in_range, "right-hand side is not in the range of the square root");
      }
      return checked(sum, ErrorCode::not_in_range, "right-hand side is not in the range of the square root");
    }
    default:
      return checked(vf_solve(spec, l).inv_form, ErrorCode::not_in_range,
                     "right-hand side is not in the range of the square root");
  }
}

GridFunction apply_vf(const ImaginaryPartSpec& spec, const GridFunction& phi) {
  switch (spec.family) {
    case VFamily::dirichlet_laplacian_halfline:
    case VFamily::dirichlet_laplacian_interval:
      return Complex(-1.0) * differentiate(differentiate(phi));
    case VFamily::multiplication:
      return weighted(spec, phi);
    case VFamily::rank_one:
      return (spec.alpha * integrate(*spec.phi, phi)) * (*spec.phi);
    case VFamily::bounded_matrix:
      return apply_matrix(spec, phi);
  }
  throw Error(ErrorCode::unsupported_family, "unknown family");
}

Complex pairing_with_vf(const ImaginaryPartSpec& spec, const GridFunction& v, const GridFunction& phi) {
  if (!is_laplacian(spec)) return integrate(v, apply_vf(spec, phi));
  require_dirichlet(spec, phi, "phi");
  const Traces tv = boundary_data(v), tp = boundary_data(phi);
  Complex out = integrate(differentiate(v), differentiate(phi)) + std::conj(tv.f0) * tp.df0;
  if (spec.family == VFamily::dirichlet_laplacian_interval) out -= std::conj(tv.fb) * tp.dfb;
  return out;
}

GridFunction projection_P(const ImaginaryPartSpec& spec, const GridFunction& v) {
  if (!spec.strict_lower_bound || !(*spec.strict_lower_bound > 0.0))
    throw Error(ErrorCode::invalid_argument, "projection requires a strictly positive imaginary part");
  if (spec.family != VFamily::dirichlet_laplacian_interval)
    throw Error(ErrorCode::unsupported_family, "no closed-form kernel basis for this family");
  const Traces t = boundary_data(v);
  const double left = v.grid().left(), len = covered_length(v.grid());
  const Complex a = t.f0, b = t.fb;
  const Complex slope = (b - a) / len;
  Formula f;
  f.value = [=](double x) { return a + slope * (x - left); };
  f.first = [=](double) { return slope; };
  f.second = [](double) { return Complex{}; };
  return GridFunction::sample(v.grid_ptr(), std::move(f), Traces{a, slope, b, slope});
}

CVector DiscreteSqrtPair::inverse_sqrt_coordinates(const GridFunction& l) const {
  CVector b(dim());
  for (int j = 0; j < dim(); ++j) b(j) = integrate(basis[j], l);
  return solve_upper_adjoint_psd(rf, b);
}

CVector DiscreteSqrtPair::extra_coordinates() const {
  if (!extra) throw Error(ErrorCode::invalid_argument, "square-root pair has no extra vector");
  return rk.col(dim());
}

double DiscreteSqrtPair::u_norm() const {
  const HermitianEigen e = hermitian_eigen(u.adjoint() * u, false);
  return std::sqrt(std::max(0.0, e.values(e.values.size() - 1)));
}

DiscreteSqrtPair discrete_sqrt_pair(const ImaginaryPartSpec& spec, std::vector<GridFunction> basis,
                                    std::optional<GridFunction> extra) {
  const int m = static_cast<int>(basis.size());
  if (m == 0) throw Error(ErrorCode::invalid_argument, "empty basis");
  std::vector<GridFunction> all = basis;
  if (extra) all.push_back(*extra);
  const int total = static_cast<int>(all.size());

  CMatrix gram(total, total);
  for (int j = 0; j < total; ++j)
    for (int k = 0; k < total; ++k) gram(j, k) = integrate(all[j], all[k]);
  Eigen::VectorXd scale = gram.diagonal().real().cwiseSqrt().cwiseInverse();
  const CMatrix normalized = scale.asDiagonal() * gram * scale.asDiagonal();
  if (hermitian_condition(0.5 * (normalized + normalized.adjoint())) > 1e14)
    throw Error(ErrorCode::degenerate_gram, "basis Gram matrix is rank deficient");

  DiscreteSqrtPair out;
  out.friedrichs_gram.resize(m, m);
  out.krein_gram.resize(total, total);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) out.friedrichs_gram(j, k) = friedrichs_form(spec, basis[j], basis[k]);
  for (int j = 0; j < total; ++j)
    for (int k = 0; k < total; ++k) out.krein_gram(j, k) = krein_form(spec, all[j], all[k]);
  out.friedrichs_gram = 0.5 * (out.friedrichs_gram + out.friedrichs_gram.adjoint());
  out.krein_gram = 0.5 * (out.krein_gram + out.krein_gram.adjoint());
  out.rf = cholesky_upper_psd(out.friedrichs_gram);
  out.rk = cholesky_upper_psd(out.krein_gram);
  const CMatrix rf_pinv = Eigen::CompleteOrthogonalDecomposition<CMatrix>(out.rf).pseudoInverse();
  out.u = out.rk.leftCols(m) * rf_pinv;
  out.basis = std::move(basis);
  out.extra = std::move(extra);
  return out;
}

std::vector<GridFunction> default_basis(const ImaginaryPartSpec& spec, int size) {
  if (size < 1) throw Error(ErrorCode::invalid_argument, "basis size must be positive");
  const GridPtr& grid = spec.grid;
  switch (spec.family) {
    case VFamily::dirichlet_laplacian_interval: {
      std::vector<GridFunction> out;
      const double left = grid->left(), len = covered_length(*grid);
      for (int k = 1; k <= size; ++k) {
        const double w = k * std::numbers::pi / len;
        Formula f;
        f.value = [=](double x) { return Complex(std::sin(w * (x - left))); };
        f.first = [=](double x) { return Complex(w * std::cos(w * (x - left))); };
        f.second = [=](double x) { return Complex(-w * w * std::sin(w * (x - left))); };
        const double end_slope = (k % 2 == 0) ? w : -w;
        out.push_back(GridFunction::sample(grid, std::move(f), Traces{0.0, w, 0.0, end_slope}));
      }
      return out;
    }
    case VFamily::dirichlet_laplacian_halfline:
      return polynomial_family(grid, size, 1, 0);
    case VFamily::multiplication:
      return polynomial_family(grid, size, grid->kind == DomainKind::interval ? 1 : 0, 0);
    case VFamily::rank_one:
      // The form only sees the phi direction; further members would make the
      // Gram matrix degenerate whenever phi lies close to their span.
      return {*spec.phi};
    case VFamily::bounded_matrix:
      break;
  }
  throw Error(ErrorCode::unsupported_family, "no default basis for this family");
}

}  // namespace dualext
