#include "dualext/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dualext {

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::general: return "general";
    case Criterion::range_of_friedrichs: return "range_of_friedrichs";
    case Criterion::strictly_positive: return "strictly_positive";
    case Criterion::unique_extension: return "unique_extension";
    case Criterion::bounded_imaginary_part: return "bounded_imaginary_part";
    case Criterion::outside_theory: return "outside_theory";
  }
  return "unknown";
}

const char* to_string(NecessityFailure f) {
  switch (f) {
    case NecessityFailure::v_not_in_krein_domain: return "v_not_in_krein_domain";
    case NecessityFailure::lv_not_in_friedrichs_range: return "lv_not_in_friedrichs_range";
    case NecessityFailure::v_not_in_symmetric_adjoint_domain: return "v_not_in_symmetric_adjoint_domain";
  }
  return "unknown";
}

std::optional<Criterion> criterion_from_string(const std::string& name) {
  for (Criterion c : {Criterion::general, Criterion::range_of_friedrichs, Criterion::strictly_positive,
                      Criterion::unique_extension, Criterion::bounded_imaginary_part})
    if (name == to_string(c)) return c;
  return std::nullopt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_membership_error(ErrorCode c) {
  return c == ErrorCode::out_of_form_domain || c == ErrorCode::not_in_range || c == ErrorCode::support_violation;
}

NecessityFailure failure_of(ErrorCode c) {
  return c == ErrorCode::out_of_form_domain ? NecessityFailure::v_not_in_krein_domain
                                            : NecessityFailure::lv_not_in_friedrichs_range;
}

bool finite_l2(const GridFunction& f) {
  for (Complex z : f.values())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return std::isfinite(norm_sq(f));
}

Verdict finish(Criterion c, double lhs, double rhs, std::vector<NecessityFailure> failures) {
  Verdict v;
  v.criterion = c;
  v.lhs = lhs;
  v.rhs = rhs;
  v.margin = lhs - rhs;
  v.failures = std::move(failures);
  v.dissipative = v.failures.empty() && v.margin >= -kMarginTolerance;
  return v;
}

/// Verdict for a problem that fails a necessary condition. Both memberships
/// failing at once is left undecided.
Verdict blocked(Criterion c, double lhs, std::vector<NecessityFailure> failures) {
  const auto has = [&](NecessityFailure f) { return std::find(failures.begin(), failures.end(), f) != failures.end(); };
  Verdict v;
  v.criterion = c;
  v.lhs = lhs;
  v.rhs = kInf;
  v.margin = -kInf;
  if (has(NecessityFailure::v_not_in_krein_domain) && has(NecessityFailure::lv_not_in_friedrichs_range)) {
    v.criterion = Criterion::outside_theory;
  } else {
    v.dissipative = false;
  }
  v.failures = std::move(failures);
  return v;
}

void add_unique(std::vector<NecessityFailure>& out, NecessityFailure f) {
  if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
}

/// Runs body; a membership error becomes a blocked verdict.
template <typename Body>
Verdict guarded(Criterion c, const ExtensionProblem& p, Body body) {
  auto failures = necessity_checks(p);
  if (!failures.empty()) return blocked(c, p.im_adjoint, std::move(failures));
  try {
    return body();
  } catch (const Error& e) {
    if (!is_membership_error(e.code())) throw;
    add_unique(failures, failure_of(e.code()));
    return blocked(c, p.im_adjoint, std::move(failures));
  }
}

}  // namespace

std::vector<NecessityFailure> necessity_checks(const ExtensionProblem& p) {
  std::vector<NecessityFailure> out;
  try {
    if (!std::isfinite(krein_form_sq(p.spec, p.v))) out.push_back(NecessityFailure::v_not_in_krein_domain);
  } catch (const Error& e) {
    if (!is_membership_error(e.code())) throw;
    out.push_back(NecessityFailure::v_not_in_krein_domain);
  }

  if (p.lv.max_abs() > 0.0) {
    try {
      const double s = p.phi ? friedrichs_form_sq(p.spec, *p.phi) : inverse_sqrt_form_sq(p.spec, p.lv);
      if (!std::isfinite(s)) out.push_back(NecessityFailure::lv_not_in_friedrichs_range);
    } catch (const Error& e) {
      if (!is_membership_error(e.code())) throw;
      out.push_back(NecessityFailure::lv_not_in_friedrichs_range);
    }
  }

  const GridFunction& image = p.symmetric_adjoint_v ? *p.symmetric_adjoint_v : p.adjoint_v;
  if (!finite_l2(p.v) || !finite_l2(image) || !std::isfinite(p.im_adjoint))
    out.push_back(NecessityFailure::v_not_in_symmetric_adjoint_domain);
  return out;
}

double im_action_on_v(const ExtensionProblem& p) {
  const double pairing = p.phi ? pairing_with_vf(p.spec, p.v, *p.phi).imag() : integrate(p.v, p.lv).imag();
  return p.im_adjoint + pairing;
}

Verdict verdict_general(const ExtensionProblem& p, int basis_size) {
  return guarded(Criterion::general, p, [&] {
    const double lhs = im_action_on_v(p);
    const DiscreteSqrtPair pair = discrete_sqrt_pair(p.spec, default_basis(p.spec, basis_size), p.v);
    const CVector a = pair.inverse_sqrt_coordinates(p.lv);
    const CVector w = pair.u * a + Complex(0.0, 2.0) * pair.extra_coordinates();
    return finish(Criterion::general, lhs, 0.25 * w.squaredNorm(), {});
  });
}

Verdict verdict_range_of_friedrichs(const ExtensionProblem& p) {
  if (!p.phi) throw Error(ErrorCode::invalid_argument, "criterion needs L v = V_F phi with phi given");
  return guarded(Criterion::range_of_friedrichs, p, [&] {
    const double lhs = p.im_adjoint + pairing_with_vf(p.spec, p.v, *p.phi).imag();
    const double rhs = 0.25 * krein_form_sq(p.spec, *p.phi + Complex(0.0, 2.0) * p.v);
    return finish(Criterion::range_of_friedrichs, lhs, rhs, {});
  });
}

Verdict verdict_strictly_positive(const ExtensionProblem& p) {
  if (!p.spec.strict_lower_bound || !(*p.spec.strict_lower_bound > 0.0))
    throw Error(ErrorCode::invalid_argument, "criterion needs a strictly positive imaginary part");
  return guarded(Criterion::strictly_positive, p, [&] {
    const GridFunction phi = p.phi ? *p.phi : vf_solve(p.spec, p.lv).u;
    // With V_F = V_K the kernel of V* is trivial and the projection vanishes.
    double cross = 0.0;
    if (!p.spec.friedrichs_equals_krein())
      cross = pairing_with_vf(p.spec, projection_P(p.spec, p.v), phi).imag();
    const double lhs = p.im_adjoint + cross;
    const double rhs = 0.25 * friedrichs_form_sq(p.spec, phi) + krein_form_sq(p.spec, p.v);
    return finish(Criterion::strictly_positive, lhs, rhs, {});
  });
}

Verdict verdict_unique_extension(const ExtensionProblem& p) {
  if (!p.spec.friedrichs_equals_krein())
    throw Error(ErrorCode::invalid_argument, "criterion needs V_F = V_K");
  return guarded(Criterion::unique_extension, p, [&] {
    const double extra = p.lv.max_abs() > 0.0 ? 0.25 * inverse_sqrt_form_sq(p.spec, p.lv) : 0.0;
    const double rhs = extra + krein_form_sq(p.spec, p.v);
    return finish(Criterion::unique_extension, p.im_adjoint, rhs, {});
  });
}

Verdict verdict_bounded_imaginary_part(const ExtensionProblem& p) {
  if (!p.symmetric_adjoint_v || !p.im_symmetric)
    throw Error(ErrorCode::invalid_argument, "criterion needs the symmetric part of the adjoint");
  if (p.spec.family != VFamily::rank_one && p.spec.family != VFamily::multiplication &&
      p.spec.family != VFamily::bounded_matrix)
    throw Error(ErrorCode::invalid_argument, "criterion needs a bounded imaginary part");
  return guarded(Criterion::bounded_imaginary_part, p, [&] {
    const double rhs = p.lv.max_abs() > 0.0 ? 0.25 * inverse_sqrt_form_sq(p.spec, p.lv) : 0.0;
    return finish(Criterion::bounded_imaginary_part, *p.im_symmetric, rhs, {});
  });
}

Criterion default_criterion(Scenario s) {
  switch (s) {
    case Scenario::halfline_laplacian: return Criterion::range_of_friedrichs;
    case Scenario::inverse_square_interval: return Criterion::strictly_positive;
    case Scenario::first_order_interval: return Criterion::unique_extension;
    case Scenario::halfline_schrodinger: return Criterion::bounded_imaginary_part;
  }
  return Criterion::general;
}

Verdict evaluate(const ExtensionProblem& p, std::optional<Criterion> which) {
  switch (which.value_or(default_criterion(p.scenario))) {
    case Criterion::general: return verdict_general(p);
    case Criterion::range_of_friedrichs: return verdict_range_of_friedrichs(p);
    case Criterion::strictly_positive: return verdict_strictly_positive(p);
    case Criterion::unique_extension: return verdict_unique_extension(p);
    case Criterion::bounded_imaginary_part: return verdict_bounded_imaginary_part(p);
    case Criterion::outside_theory: break;
  }
  throw Error(ErrorCode::invalid_argument, "outside_theory is not a criterion to evaluate");
}

double semibound_estimate(double eps, double l_norm) {
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "eps must be positive");
  if (!(l_norm >= 0.0)) throw Error(ErrorCode::invalid_argument, "norm must be non-negative");
  return -l_norm * l_norm / (4.0 * eps);
}

bool maximality_count(int added_dim, int defect_dim) {
  if (added_dim < 0 || defect_dim < 0) throw Error(ErrorCode::invalid_argument, "dimensions must be non-negative");
  return added_dim == defect_dim;
}

}  // namespace dualext
