#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualext/catalog.hpp"

namespace dualext {

enum class Criterion {
  general,                 // master inequality with the discrete U
  range_of_friedrichs,     // L v = V_F phi
  strictly_positive,       // V >= eps > 0, uses the kernel projection
  unique_extension,        // V_F = V_K
  bounded_imaginary_part,  // A = S + i V with V bounded
  outside_theory,
};

enum class NecessityFailure {
  v_not_in_krein_domain,
  lv_not_in_friedrichs_range,
  v_not_in_symmetric_adjoint_domain,
};

const char* to_string(Criterion c);
const char* to_string(NecessityFailure f);
std::optional<Criterion> criterion_from_string(const std::string& name);

/// Both sides of one dissipativity inequality. dissipative is empty only for
/// outside_theory.
struct Verdict {
  Criterion criterion = Criterion::general;
  std::optional<bool> dissipative;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::vector<NecessityFailure> failures;
};

inline constexpr double kMarginTolerance = 1e-12;

std::vector<NecessityFailure> necessity_checks(const ExtensionProblem& p);

/// Im <v, (A~* + L) v>, the left side of the general criterion.
double im_action_on_v(const ExtensionProblem& p);

/// Basis size of the discrete square-root pair used by verdict_general.
inline constexpr int kGeneralBasisSize = 32;

Verdict verdict_general(const ExtensionProblem& p, int basis_size = kGeneralBasisSize);
/// Requires p.phi.
Verdict verdict_range_of_friedrichs(const ExtensionProblem& p);
/// Requires a strict lower bound on the spec.
Verdict verdict_strictly_positive(const ExtensionProblem& p);
/// Requires V_F = V_K.
Verdict verdict_unique_extension(const ExtensionProblem& p);
/// Requires a bounded V and p.symmetric_adjoint_v.
Verdict verdict_bounded_imaginary_part(const ExtensionProblem& p);

/// The criterion evaluate() picks when none is requested.
Criterion default_criterion(Scenario s);
Verdict evaluate(const ExtensionProblem& p, std::optional<Criterion> which = {});

/// Lower bound -L^2 / (4 eps) for Im <psi, (S_L + i V) psi> / ||psi||^2.
double semibound_estimate(double eps, double l_norm);

/// An extension adding added_dim dimensions is maximal iff added_dim equals
/// the defect dim ker(A* - i).
bool maximality_count(int added_dim, int defect_dim);

}  // namespace dualext
