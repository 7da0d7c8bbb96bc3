#include "dualext/catalog.hpp"

#include <cmath>
#include <limits>

namespace dualext {

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::halfline_laplacian: return "halfline_laplacian";
    case Scenario::inverse_square_interval: return "inverse_square_interval";
    case Scenario::first_order_interval: return "first_order_interval";
    case Scenario::halfline_schrodinger: return "halfline_schrodinger";
  }
  return "unknown";
}

std::optional<Scenario> scenario_from_string(const std::string& name) {
  if (name == "halfline_laplacian" || name == "potsdam") return Scenario::halfline_laplacian;
  if (name == "inverse_square_interval" || name == "shirley") return Scenario::inverse_square_interval;
  if (name == "first_order_interval" || name == "konzert") return Scenario::first_order_interval;
  if (name == "halfline_schrodinger") return Scenario::halfline_schrodinger;
  return std::nullopt;
}

namespace {

const Complex kKappaPlus = Complex(1.0, 1.0) / std::sqrt(2.0);
const Complex kKappaMinus = Complex(1.0, -1.0) / std::sqrt(2.0);

Complex cpow(double x, Complex s) {
  if (x <= 0.0) return {};
  return std::exp(s * std::log(x));
}

void require_halfline(const GridPtr& g) {
  if (!g || g->kind != DomainKind::halfline)
    throw Error(ErrorCode::invalid_argument, "scenario lives on the half-line");
}

void require_unit_interval(const GridPtr& g) {
  if (!g || g->kind != DomainKind::interval || g->right() != 1.0)
    throw Error(ErrorCode::invalid_argument, "scenario lives on the unit interval");
}

Traces traces_of(const Formula& f, const Grid& g) {
  Traces t;
  t.f0 = f.value(g.left());
  t.df0 = f.first(g.left());
  if (g.kind == DomainKind::interval) {
    t.fb = f.value(g.right());
    t.dfb = f.first(g.right());
  }
  return t;
}

Formula negated_second(const Formula& f) {
  if (!f.has_second()) throw Error(ErrorCode::invalid_argument, "phi needs a second derivative");
  Formula out;
  const auto second = f.second;
  out.value = [second](double x) { return -second(x); };
  return out;
}

/// Samples phi with its closed-form traces and checks the Dirichlet
/// conditions of the Friedrichs extension.
GridFunction sample_dirichlet(const GridPtr& grid, const Formula& phi) {
  if (!phi.has_first()) throw Error(ErrorCode::invalid_argument, "phi needs a first derivative");
  const Traces t = traces_of(phi, *grid);
  const bool right = grid->kind == DomainKind::interval;
  if (std::abs(t.f0) > 1e-8 || (right && std::abs(t.fb) > 1e-8))
    throw Error(ErrorCode::out_of_form_domain, "phi violates the Dirichlet condition");
  GridFunction out = GridFunction::sample(grid, phi, t);
  if (!right && !decay_certified(out))
    throw Error(ErrorCode::out_of_form_domain, "phi does not decay on the half-line");
  return out;
}

ReferenceMargin make_reference(double lhs, double rhs) { return {lhs, rhs, lhs - rhs}; }

}  // namespace

Formula halfline_boundary_vector(ExtendedComplex p) {
  const Complex det = kKappaPlus - kKappaMinus;  // of [[1, 1], [-k+, -k-]]
  if (std::abs(det) < 1e-12) throw Error(ErrorCode::invalid_argument, "degenerate boundary system");
  const Complex f0 = p.is_infinite() ? Complex{} : Complex{1.0};
  const Complex d0 = p.is_infinite() ? Complex{1.0} : p.value();
  const Complex a = (-kKappaMinus * f0 - d0) / det;
  const Complex b = (d0 + kKappaPlus * f0) / det;
  const Complex kp = kKappaPlus, km = kKappaMinus;
  Formula f;
  f.value = [=](double x) { return a * std::exp(-kp * x) + b * std::exp(-km * x); };
  f.first = [=](double x) { return -kp * a * std::exp(-kp * x) - km * b * std::exp(-km * x); };
  f.second = [=](double x) { return kp * kp * a * std::exp(-kp * x) + km * km * b * std::exp(-km * x); };
  return f;
}

Complex inverse_square_exponent(double gamma) {
  return 0.5 * (1.0 + std::sqrt(Complex(1.0, 4.0 * gamma)));
}

Formula inverse_square_vector(double gamma, ExtendedComplex rho) {
  const Complex w = inverse_square_exponent(gamma);
  const Complex wb = std::conj(w);
  const Complex d = 2.0 + wb - w;
  Complex cp, cq;
  if (rho.is_infinite()) {
    cp = (2.0 + wb) / d;
    cq = -w / d;
  } else {
    const Complex r = rho.value();
    cp = (r * (2.0 + wb) - 1.0) / d;
    cq = (1.0 - r * w) / d;
  }
  const Complex s = wb + 2.0;
  Formula f;
  f.value = [=](double x) { return cp * cpow(x, w) + cq * cpow(x, s); };
  f.first = [=](double x) { return cp * w * cpow(x, w - 1.0) + cq * s * cpow(x, s - 1.0); };
  f.second = [=](double x) {
    return cp * w * (w - 1.0) * cpow(x, w - 2.0) + cq * s * (s - 1.0) * cpow(x, s - 2.0);
  };
  return f;
}

ExtensionProblem build_halfline_laplacian(GridPtr grid, ExtendedComplex rho, std::optional<Formula> phi,
                                          std::optional<std::function<double(double)>> potential) {
  require_halfline(grid);
  ExtensionProblem p;
  p.scenario = Scenario::halfline_laplacian;
  p.grid = grid;
  p.spec = ImaginaryPartSpec::laplacian(grid);
  p.rho = rho;

  const auto w = potential.value_or([](double) { return 0.0; });
  const Formula zeta = halfline_boundary_vector(rho);
  const Traces tv = traces_of(zeta, *grid);
  p.v = GridFunction::sample(grid, zeta, tv);
  if (!decay_certified(p.v)) throw Error(ErrorCode::invalid_argument, "truncation radius too small");
  Formula adj;
  adj.value = [zeta, w](double x) { return Complex(0.0, -1.0) * zeta.second(x) + w(x) * zeta.value(x); };
  p.adjoint_v = GridFunction::sample(grid, adj);

  const Formula ph = phi.value_or(Formula::zero());
  p.phi = sample_dirichlet(grid, ph);
  p.lv = GridFunction::sample(grid, negated_second(ph));

  const double energy = norm_sq(differentiate(p.v));
  p.im_adjoint = (std::conj(tv.f0) * tv.df0).real() + energy;

  const Traces tp = *p.phi->traces();
  const double lhs = (std::conj(tv.f0) * tv.df0).real() + (std::conj(tv.f0) * tp.df0).imag();
  p.reference = make_reference(lhs, 0.25 * norm_sq(differentiate(*p.phi)));

  p.model.kind = DomainKind::halfline;
  p.model.length = grid->right();
  p.model.c2 = Complex(0.0, -1.0);
  p.model.q_symmetric = [w](double x) { return Complex(w(x)); };
  p.model.drop_left = 2;
  p.model.drop_right = 2;
  return p;
}

ExtensionProblem build_inverse_square_interval(GridPtr grid, double gamma, ExtendedComplex rho,
                                               std::optional<Formula> phi) {
  require_unit_interval(grid);
  if (!(gamma >= std::sqrt(3.0)))
    throw Error(ErrorCode::invalid_argument, "gamma must satisfy gamma >= sqrt(3)");
  ExtensionProblem p;
  p.scenario = Scenario::inverse_square_interval;
  p.grid = grid;
  p.spec = ImaginaryPartSpec::laplacian(grid);
  p.rho = rho;
  p.gamma = gamma;

  const Formula xi = inverse_square_vector(gamma, rho);
  const Traces tv = rho.is_infinite() ? Traces{0.0, 0.0, 1.0, 0.0} : Traces{0.0, 0.0, rho.value(), 1.0};
  p.v = GridFunction::sample(grid, xi, tv);

  // x^omega is annihilated by the adjoint; x^{conj(omega)+2} is mapped to
  // c x^{conj(omega)}.
  const Complex w = inverse_square_exponent(gamma);
  const Complex wb = std::conj(w);
  const Complex c = Complex(0.0, -1.0) * (wb + 2.0) * (wb + 1.0) - gamma;
  const Complex d = 2.0 + wb - w;
  const Complex cq = rho.is_infinite() ? -w / d : (1.0 - rho.value() * w) / d;
  Formula adj;
  adj.value = [=](double x) { return cq * c * cpow(x, wb); };
  p.adjoint_v = GridFunction::sample(grid, adj);

  const Formula ph = phi.value_or(Formula::zero());
  p.phi = sample_dirichlet(grid, ph);
  p.lv = GridFunction::sample(grid, negated_second(ph));

  const double energy = norm_sq(differentiate(p.v));
  p.im_adjoint = energy - (std::conj(tv.fb) * tv.dfb).real() + (std::conj(tv.f0) * tv.df0).real();

  const Traces tp = *p.phi->traces();
  const double lhs = std::norm(tv.fb) - (std::conj(tv.fb) * tv.dfb).real() - (std::conj(tv.fb) * tp.dfb).imag();
  p.reference = make_reference(lhs, 0.25 * norm_sq(differentiate(*p.phi)));

  p.model.kind = DomainKind::interval;
  p.model.length = 1.0;
  p.model.c2 = Complex(0.0, -1.0);
  p.model.q_symmetric = [gamma](double x) { return Complex(-gamma / (x * x)); };
  p.model.drop_left = 2;
  p.model.drop_right = 2;
  return p;
}

ExtensionProblem build_first_order_interval(GridPtr grid, double gamma, std::optional<Formula> l,
                                            FirstOrderVector which) {
  require_unit_interval(grid);
  if (!(gamma > 0.0 && gamma < 0.5))
    throw Error(ErrorCode::invalid_argument, "gamma must satisfy 0 < gamma < 1/2");
  ExtensionProblem p;
  p.scenario = Scenario::first_order_interval;
  p.grid = grid;
  p.spec = ImaginaryPartSpec::multiplication_by(grid, [gamma](double x) { return gamma / x; }, gamma);
  p.gamma = gamma;

  const double e = which == FirstOrderVector::regular ? gamma + 1.0 : -gamma;
  Formula v;
  v.value = [e](double x) { return Complex(std::pow(x, e)); };
  v.first = [e](double x) { return Complex(e * std::pow(x, e - 1.0)); };
  v.second = [e](double x) { return Complex(e * (e - 1.0) * std::pow(x, e - 2.0)); };
  Formula adj;
  if (which == FirstOrderVector::regular) {
    p.v = GridFunction::sample(grid, v, Traces{0.0, 0.0, 1.0, e});
    adj.value = [gamma](double x) { return Complex(0.0, 2.0 * gamma + 1.0) * std::pow(x, gamma); };
  } else {
    p.v = GridFunction::sample(grid, v);
    adj = Formula::zero();
  }
  p.adjoint_v = GridFunction::sample(grid, adj);
  p.lv = GridFunction::sample(grid, l.value_or(Formula::zero()));

  // x^{-gamma} is annihilated by the adjoint; only its form is infinite.
  p.im_adjoint = which == FirstOrderVector::regular ? 0.5 + friedrichs_form(p.spec, p.v, p.v).real() : 0.0;

  std::vector<double> xl(grid->n);
  for (int i = 0; i < grid->n; ++i) xl[i] = grid->nodes[i] * std::norm(p.lv[i]);
  const double rhs = which == FirstOrderVector::regular
                         ? integrate_density(*grid, xl) / (4.0 * gamma)
                         : std::numeric_limits<double>::infinity();
  p.reference = make_reference(which == FirstOrderVector::regular ? 0.5 : -std::numeric_limits<double>::infinity(), rhs);

  p.model.kind = DomainKind::interval;
  p.model.length = 1.0;
  p.model.c1 = Complex(0.0, 1.0);
  p.model.q_dissipative = [gamma](double x) { return Complex(0.0, gamma / x); };
  p.model.drop_left = 1;
  p.model.drop_right = 1;
  return p;
}

ExtensionProblem build_halfline_schrodinger(GridPtr grid, ExtendedComplex h, const SchrodingerPerturbation& pert) {
  if (h.imag() < 0.0)
    throw Error(ErrorCode::not_dissipative_input,
                "Im h < 0 is not a dissipative boundary condition and no bounded V can compensate");
  return build_halfline_schrodinger_unchecked(std::move(grid), h, pert);
}

ExtensionProblem build_halfline_schrodinger_unchecked(GridPtr grid, ExtendedComplex h,
                                                      const SchrodingerPerturbation& pert) {
  require_halfline(grid);
  ExtensionProblem p;
  p.scenario = Scenario::halfline_schrodinger;
  p.grid = grid;
  p.rho = h;

  const Formula eta = halfline_boundary_vector(h);
  const Traces tv = traces_of(eta, *grid);
  p.v = GridFunction::sample(grid, eta, tv);
  if (!decay_certified(p.v)) throw Error(ErrorCode::invalid_argument, "truncation radius too small");
  Formula sym;
  sym.value = [eta](double x) { return -eta.second(x); };
  p.symmetric_adjoint_v = GridFunction::sample(grid, sym);
  p.im_symmetric = (std::conj(tv.f0) * tv.df0).imag();

  p.model.kind = DomainKind::halfline;
  p.model.length = grid->right();
  p.model.c2 = Complex(-1.0);
  p.model.drop_left = 2;
  p.model.drop_right = 2;

  double rhs = 0.0;
  if (const auto* r1 = std::get_if<RankOnePerturbation>(&pert)) {
    if (!(r1->alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be positive");
    const double nrm = std::sqrt(norm_sq(GridFunction::sample(grid, r1->phi)));
    if (!(nrm > 0.0)) throw Error(ErrorCode::invalid_argument, "phi must not vanish");
    const Formula phin = Complex(1.0 / nrm) * r1->phi;
    const GridFunction ph = GridFunction::sample(grid, phin);
    p.spec = ImaginaryPartSpec::rank_one_of(grid, r1->alpha, ph);
    p.alpha = r1->alpha;
    p.lambda = r1->lambda;
    p.lv = r1->lambda * ph;
    const Complex overlap = integrate(ph, p.v);
    p.adjoint_v = *p.symmetric_adjoint_v + (Complex(0.0, r1->alpha) * overlap) * ph;
    p.model.rank_one_alpha = r1->alpha;
    p.model.rank_one_phi = phin;
    rhs = std::norm(r1->lambda) / (4.0 * r1->alpha);
  } else {
    const auto& mp = std::get<MultiplicationPerturbation>(pert);
    p.spec = ImaginaryPartSpec::multiplication_by(grid, mp.potential);
    p.lv = GridFunction::sample(grid, mp.k);
    const auto pot = mp.potential;
    Formula adj;
    adj.value = [eta, pot](double x) { return -eta.second(x) + Complex(0.0, pot(x)) * eta.value(x); };
    p.adjoint_v = GridFunction::sample(grid, adj);
    p.model.q_dissipative = [pot](double x) { return Complex(0.0, pot(x)); };
    try {
      rhs = 0.25 * inverse_sqrt_form_sq(p.spec, p.lv);
    } catch (const Error&) {
      rhs = std::numeric_limits<double>::infinity();
    }
  }
  p.im_adjoint = *p.im_symmetric + friedrichs_form(p.spec, p.v, p.v).real();
  p.reference = make_reference(*p.im_symmetric, rhs);
  return p;
}

SplitPair split_dual_pair(const DiscretePair& pair, double tol) {
  const auto n = pair.m.rows();
  if (pair.m.cols() != n || pair.m_tilde.rows() != n || pair.gram.rows() != n)
    throw Error(ErrorCode::invalid_argument, "dual pair matrices have mismatched shapes");
  const double scale = 1.0 + pair.m.norm();
  if ((pair.m_tilde - pair.m.adjoint()).norm() > tol * scale)
    throw Error(ErrorCode::invalid_argument, "matrices do not form a dual pair on the basis");
  SplitPair out;
  out.s = 0.5 * (pair.m + pair.m_tilde);
  out.v = (pair.m - pair.m_tilde) / Complex(0.0, 2.0);
  out.s = 0.5 * (out.s + out.s.adjoint());
  out.v = 0.5 * (out.v + out.v.adjoint());
  const double lo = solve_pencil(out.v, pair.gram, false).min_eig;
  if (lo < -tol * scale)
    throw Error(ErrorCode::not_dissipative_input, "imaginary part is not non-negative");
  return out;
}

}  // namespace dualext
