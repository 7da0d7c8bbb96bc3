// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <json.hpp>

#include "dualext/commands.hpp"
#include "dualext/expression.hpp"
#include "dualext/forms.hpp"
#include "formulas.hpp"

using namespace dualext;
using namespace testing_formulas;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Rational {
  long long p = 0, q = 1;
  Rational(long long num = 0, long long den = 1) : p(num), q(den) {
    const long long g = std::gcd(p, q);
    if (g != 0) p /= g, q /= g;
    if (q < 0) p = -p, q = -q;
  }
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  bool operator==(const Rational&) const = default;
};
Rational operator+(Rational a, Rational b) { return {a.p * b.q + b.p * a.q, a.q * b.q}; }
Rational operator-(Rational a, Rational b) { return {a.p * b.q - b.p * a.q, a.q * b.q}; }
Rational operator*(Rational a, Rational b) { return {a.p * b.p, a.q * b.q}; }

GridPtr unit(int n = 256) { return make_grid(DomainKind::interval, 1.0, n); }
GridPtr half() { return make_grid(DomainKind::halfline, 40.0, 640); }

double unit_indicator(double x) { return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0; }

// ---------------------------------------------------------------------------

Outcome inverse_square_instance() {
  // phi = x^2 - x, rho = 1/2 + 3i/8, in exact arithmetic:
  //   1/4 int |phi'|^2 = 1/4 (4/3 - 2 + 1),  |rho|^2 - Re rho,  margin
  const Rational quarter_energy = Rational(1, 4) * (Rational(4, 3) - Rational(2) + Rational(1));
  const Rational re(1, 2), im(3, 8);
  const Rational disk = re * re + im * im - re;
  const Rational margin = disk - (quarter_energy - im);
  const bool exact = quarter_energy == Rational(1, 12) && disk == Rational(-7, 64) && margin == Rational(35, 192);

  const auto with_phi = run_check(parse_config("[scenario]\nname = shirley\ngamma = 2\nrho = 1/2+3i/8\nphi = x^2 - x\n"));
  const auto without = run_check(parse_config("[scenario]\nname = shirley\ngamma = 2\nrho = 1/2+3i/8\n"));
  const auto j = nlohmann::json::parse(with_phi.text);
  const auto k = nlohmann::json::parse(without.text);
  const double m1 = j["verdict"]["margin"].get<double>();
  const double m0 = k["verdict"]["margin"].get<double>();
  const bool pass = exact && with_phi.exit_code == 0 && without.exit_code == 1 &&
                    std::abs(m1 - margin.value()) < 1e-10 && std::abs(m0 - disk.value()) < 1e-10;
  return {pass, fmt("margin %.12f vs 35/192, phi=0 margin %.12f vs -7/64", m1, m0)};
}

Outcome halfline_region() {
  const auto cfg = parse_config(
      "[scenario]\nname = potsdam\nrho = 0\n"
      "[sweep]\nre_min = -1\nre_max = 1\nre_step = 0.05\nim_min = -1\nim_max = 1\nim_step = 0.05\n");
  const auto out = run_sweep(cfg);
  if (out.exit_code != 0) return {false, "sweep failed: " + out.text};
  const auto j = nlohmann::json::parse(out.text);
  int wrong = 0, count = 0;
  for (const auto& pt : j["points"]) {
    ++count;
    if (pt["dissipative"].get<bool>() != (pt["re"].get<double>() >= 0.0)) ++wrong;
  }
  const bool inf_zero = evaluate(build_halfline_laplacian(half(), ExtendedComplex::infinity())).dissipative == true;
  int accepted = 0;
  const std::vector<Formula> phis{x_exp(1.0), x_exp(kI, 1.5), x_exp(Complex(0.01, 0.0), 2.0), x_exp(-3.0, 1.25)};
  for (const auto& phi : phis)
    if (evaluate(build_halfline_laplacian(half(), ExtendedComplex::infinity(), phi)).dissipative != false) ++accepted;
  const bool pass = count == 41 * 41 && wrong == 0 && inf_zero && accepted == 0;
  return {pass, fmt("%.0f points, %.0f misclassified, %.0f of 4 phi accepted at rho=inf", count, wrong, accepted)};
}

Outcome first_order_boundary() {
  const auto g = unit();
  const double edge = evaluate(build_first_order_interval(g, 0.25, Formula::constant(1.0))).margin;
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const Complex a(u(rng), u(rng)), b(u(rng), u(rng));
    double t1 = 1.5 * (1.0 + u(rng)), t2 = 1.5 * (1.0 + u(rng));
    if (t1 > t2) std::swap(t1, t2);
    const double m1 = evaluate(build_first_order_interval(g, 0.25, cubic(t1 * a, t1 * b, 0.0))).margin;
    const double m2 = evaluate(build_first_order_interval(g, 0.25, cubic(t2 * a, t2 * b, 0.0))).margin;
    if (m2 > m1 + 1e-12) ++violations;
  }
  return {std::abs(edge) < 1e-10 && violations == 0,
          fmt("margin at l=1: %.3e; %.0f of 100 scaling pairs not monotone", edge, violations)};
}

Outcome schrodinger_examples() {
  const auto gh = half();
  const double edge =
      evaluate(build_halfline_schrodinger(gh, kI, RankOnePerturbation{1.0, x_exp(1.0), 2.0})).margin;
  const Complex h(1.0, 1.0);
  bool flip = true;
  for (double c : {2.0 - 1e-8, 2.0 + 1e-8}) {
    const auto v = evaluate(build_halfline_schrodinger(gh, h, MultiplicationPerturbation{unit_indicator, indicator(c, 0.0, 1.0)}));
    flip = flip && v.dissipative == (c < 2.0);
  }
  const auto outside =
      evaluate(build_halfline_schrodinger(gh, h, MultiplicationPerturbation{unit_indicator, indicator(0.5, 0.0, 2.0)}));
  const bool rejected = outside.dissipative == false && !outside.failures.empty();
  return {std::abs(edge) < 1e-10 && flip && rejected,
          fmt("rank-one margin %.3e; ", edge) + "flip at c = 2 +- 1e-8 " + (flip ? "seen" : "missed") +
              "; support violation " + (rejected ? "rejected" : "accepted")};
}

ExtensionProblem random_instance(int scenario, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  switch (scenario) {
    case 0: {
      const ExtendedComplex rho =
          u(rng) > 0.8 ? ExtendedComplex::infinity() : ExtendedComplex(Complex(u(rng), u(rng)));
      if (u(rng) > 0.5) return build_halfline_laplacian(half(), rho);
      return build_halfline_laplacian(half(), rho, x_exp(Complex(u(rng), u(rng)), 1.25 + 0.25 * u(rng)));
    }
    case 1: {
      const ExtendedComplex rho =
          u(rng) > 0.8 ? ExtendedComplex::infinity() : ExtendedComplex(Complex(u(rng), u(rng)));
      const Complex b(u(rng), u(rng)), c(u(rng), u(rng));
      return build_inverse_square_interval(unit(), 2.5 + 0.7 * u(rng), rho, cubic(0.0, b, c, -b - c));
    }
    case 2:
      return build_first_order_interval(unit(), 0.25 + 0.2 * u(rng),
                                        cubic(Complex(u(rng), u(rng)), 1.5 * u(rng), 1.5 * u(rng)));
    default: {
      const Complex h(u(rng), 1.0 + u(rng));
      if (u(rng) > 0.0)
        return build_halfline_schrodinger(half(), h,
                                          RankOnePerturbation{1.5 + u(rng), x_exp(1.0), Complex(2 * u(rng), 2 * u(rng))});
      // Support ends on an element edge of every oracle mesh.
      const double a = 0.5 * (1 + static_cast<int>(2.0 + 2.0 * u(rng)));
      const auto v = [a](double x) { return (x >= 0.0 && x < a) ? 1.0 : 0.0; };
      return build_halfline_schrodinger(half(), h, MultiplicationPerturbation{v, indicator(Complex(2 * u(rng), 2 * u(rng)), 0.0, a)});
    }
  }
}

Outcome oracle_agreement() {
  std::mt19937 rng(5);
  int dissipative = 0, not_dissipative = 0, bad_d = 0, bad_n = 0;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    ExtensionProblem p;
    Verdict v;
    do {
      p = random_instance(k % 4, rng);
      v = evaluate(p);
    } while (!v.dissipative || !std::isfinite(v.margin) || std::abs(v.margin) <= 0.05);
    const OracleReport r = cross_validate(p, v, kDefaultMeshes);
    if (*v.dissipative) {
      ++dissipative;
      worst = std::min(worst, r.extrapolated);
      if (!(r.extrapolated >= -1e-5)) ++bad_d;
    } else {
      ++not_dissipative;
      if (r.agrees != true) ++bad_n;
    }
  }
  return {bad_d == 0 && bad_n == 0,
          fmt("%.0f dissipative (lowest extrapolated infimum %.2e), ", dissipative, worst) +
              fmt("%.0f not dissipative; disagreements %.0f + %.0f", not_dissipative, bad_d, bad_n)};
}

/// Cin(z) = int_0^z (1 - cos t) / t dt from its power series.
double cin(double z) {
  double term = 1.0, sum = 0.0;
  for (int k = 1; k < 60; ++k) {
    term *= -z * z / ((2.0 * k - 1) * (2.0 * k));
    sum -= term / (2.0 * k);
  }
  return sum;
}

Outcome ando_nishio() {
  const auto g = unit(512);
  const double gamma = 0.25, pi = std::numbers::pi;
  const std::vector<std::string> names{"x", "x^2", "x^1.25", "sin(pi*x)"};
  const auto lap = ImaginaryPartSpec::laplacian(g);
  const auto mult = ImaginaryPartSpec::multiplication_by(g, [gamma](double x) { return gamma / x; }, gamma);
  // Krein form of the Laplacian: ||f'||^2 - |f(1) - f(0)|^2; of gamma/x: int gamma |f|^2 / x.
  const std::vector<double> lap_exact{0.0, 1.0 / 3.0, (gamma + 1) * (gamma + 1) / (2 * gamma + 1) - 1.0, pi * pi / 2};
  const std::vector<double> mult_exact{gamma / 2, gamma / 4, gamma / (2 * gamma + 2), gamma * cin(2 * pi) / 2};
  double worst = 0.0;
  bool monotone = true;
  for (int s = 0; s < 2; ++s) {
    const auto& spec = s == 0 ? lap : mult;
    const auto& exact = s == 0 ? lap_exact : mult_exact;
    for (std::size_t k = 0; k < names.size(); ++k) {
      const auto h = GridFunction::sample(g, Expression::parse(names[k]).formula());
      double prev = -1.0;
      for (int m : {4, 8, 16, 32}) {
        const double val = krein_form_ando_nishio(spec, h, m);
        if (val < prev - 1e-10) monotone = false;
        prev = val;
      }
      const double err = exact[k] == 0.0 ? (std::abs(prev) < 1e-8 ? 0.0 : 1.0) : std::abs(prev / exact[k] - 1.0);
      worst = std::max(worst, err);
    }
  }
  return {worst <= 0.02 && monotone,
          fmt("largest relative error %.2e at test_dim 32; ", worst) + (monotone ? "monotone" : "not monotone")};
}

Outcome form_equality() {
  const auto g = unit(512);
  const auto lap = ImaginaryPartSpec::laplacian(g);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    char expr[256];
    std::snprintf(expr, sizeof expr, "x^2*(1-x)^2*((%.17g+%.17gi) + (%.17g)*x + (%.17gi)*x^2 + sin(%.17g*x))", u(rng),
                  u(rng), u(rng), u(rng), 3.0 * u(rng));
    const auto f = GridFunction::sample(g, Expression::parse(expr).formula());
    const double ff = friedrichs_form_sq(lap, f);
    const double kf = krein_form_sq(lap, f);
    worst = std::max(worst, std::abs(kf - ff) / (1.0 + ff));
  }
  return {worst <= 1e-8, fmt("largest |k - f| / (1 + f) = %.2e over 50 functions", worst)};
}

Outcome schrodinger_properties() {
  const auto gh = half();
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  int symmetric_accepted = 0;
  for (int k = 0; k < 20; ++k) {
    const double h = u(rng);
    const Complex lambda(u(rng), u(rng));
    if (evaluate(build_halfline_schrodinger(gh, h, RankOnePerturbation{1.0 + 0.5 * u(rng), x_exp(1.0), lambda}))
            .dissipative != false)
      ++symmetric_accepted;
    const auto mp = MultiplicationPerturbation{unit_indicator, indicator(Complex(u(rng), u(rng)), 0.0, 1.0)};
    if (evaluate(build_halfline_schrodinger(gh, h, mp)).dissipative != false) ++symmetric_accepted;
  }
  const bool zero_ok =
      evaluate(build_halfline_schrodinger(gh, 0.5, RankOnePerturbation{1.0, x_exp(1.0), 0.0})).dissipative == true;

  int negative_accepted = 0;
  for (int k = 0; k < 20; ++k) {
    const Complex h(u(rng), -0.05 - std::abs(u(rng)));
    const bool rank_one = k % 2 == 0;
    const Complex lambda = k < 4 ? Complex{} : Complex(u(rng), u(rng));
    const RankOnePerturbation r1{1.0 + 0.5 * u(rng), x_exp(1.0), lambda};
    const MultiplicationPerturbation mp{unit_indicator, indicator(lambda, 0.0, 1.0)};
    try {
      if (rank_one) {
        build_halfline_schrodinger(gh, h, r1);
      } else {
        build_halfline_schrodinger(gh, h, mp);
      }
      ++negative_accepted;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_dissipative_input) ++negative_accepted;
    }
    const auto v = rank_one ? evaluate(build_halfline_schrodinger_unchecked(gh, h, r1))
                            : evaluate(build_halfline_schrodinger_unchecked(gh, h, mp));
    if (v.dissipative != false) ++negative_accepted;
  }

  double worst = std::numeric_limits<double>::infinity();
  OracleOptions opt;
  opt.symmetric_only = true;
  for (int k = 0; k < 20; ++k) {
    const Complex h(u(rng), 0.6 + 0.5 * u(rng));
    const Complex lambda(1.5 * u(rng), 1.5 * u(rng));
    const auto p = k % 2 == 0
                       ? build_halfline_schrodinger(gh, h, RankOnePerturbation{1.0 + 0.5 * u(rng), x_exp(1.0), lambda})
                       : build_halfline_schrodinger(gh, h, MultiplicationPerturbation{unit_indicator, indicator(lambda, 0.0, 1.0)});
    const double eps = h.imag() / norm_sq(p.v);
    const double l_norm = std::sqrt(norm_sq(p.lv) / norm_sq(p.v));
    worst = std::min(worst, discrete_infimum(p, 128, opt) - semibound_estimate(eps, l_norm));
  }
  return {symmetric_accepted == 0 && zero_ok && negative_accepted == 0 && worst >= -1e-5,
          fmt("real h: %.0f of 40 nonzero L accepted; Im h < 0: %.0f of 40 accepted; "
              "min(infimum - bound) = %.3e",
              symmetric_accepted, negative_accepted, worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "inverse-square interval instance", 1.0, inverse_square_instance},
      {2, "half-line Laplacian dissipative region", 5.0, halfline_region},
      {3, "first-order admissibility boundary", 1.0, first_order_boundary},
      {4, "half-line Schrodinger perturbations", 1.0, schrodinger_examples},
      {5, "oracle agreement on 200 random instances", 300.0, oracle_agreement},
      {6, "Ando-Nishio Krein form", 30.0, ando_nishio},
      {7, "form equality on double-zero traces", 10.0, form_equality},
      {8, "Schrodinger symmetric boundary and semibound", 60.0, schrodinger_properties},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = s <= c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s  [%d] %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), s,
                c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
