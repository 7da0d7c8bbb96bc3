#pragma once

#include <optional>
#include <string>
#include <variant>

#include "dualext/forms.hpp"

namespace dualext {

enum class Scenario {
  halfline_laplacian,       // -i f'' + W f on the half-line
  inverse_square_interval,  // -i f'' - gamma f / x^2 on (0, 1)
  first_order_interval,     // i f' + i gamma f / x on (0, 1)
  halfline_schrodinger,     // -f'' + i V on the half-line
};

const char* to_string(Scenario s);
/// Accepts the canonical names and the short aliases potsdam, shirley, konzert.
std::optional<Scenario> scenario_from_string(const std::string& name);

/// Differential action c2 f'' + c1 f' + q(x) f on core functions, split into
/// a symmetric part and the part contributed by i V.
struct OperatorModel {
  DomainKind kind = DomainKind::interval;
  double length = 1.0;
  Complex c2{};
  Complex c1{};
  std::function<Complex(double)> q_symmetric;
  std::function<Complex(double)> q_dissipative;
  /// i alpha <phi, f> phi term.
  double rank_one_alpha = 0.0;
  std::optional<Formula> rank_one_phi;
  /// Boundary conditions of the core, as the number of end splines removed.
  int drop_left = 2;
  int drop_right = 2;
};

struct ReferenceMargin {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct RankOnePerturbation {
  double alpha = 1.0;
  Formula phi;  // normalized by the builder
  Complex lambda{};
};

struct MultiplicationPerturbation {
  std::function<double(double)> potential;
  Formula k;
};

using SchrodingerPerturbation = std::variant<RankOnePerturbation, MultiplicationPerturbation>;

enum class FirstOrderVector { regular, singular };

/// One extension A_{V,L} with V = span{v} and L v given: the problem
/// carries v, the action of the adjoint on v, L v and all data needed by
/// the criteria and by the oracle.
struct ExtensionProblem {
  Scenario scenario = Scenario::halfline_laplacian;
  GridPtr grid;
  ImaginaryPartSpec spec;

  std::optional<ExtendedComplex> rho;  // boundary parameter (h for Schrodinger)
  double gamma = 0.0;
  double alpha = 0.0;
  Complex lambda{};

  GridFunction v;
  GridFunction adjoint_v;  // A~* v
  GridFunction lv;         // L v
  std::optional<GridFunction> phi;  // L v = V_F phi
  std::optional<GridFunction> symmetric_adjoint_v;  // S* v

  /// Im <v, A~* v> from the boundary identity of the scenario; the same
  /// quadrature of the energy term is used by the forms, so it cancels.
  double im_adjoint = 0.0;
  /// Im <v, S* v> where a symmetric part is singled out.
  std::optional<double> im_symmetric;

  ReferenceMargin reference;
  OperatorModel model;
  /// Number of vectors added to D(A) and dimension of ker(A~* - i).
  int added_dim = 1;
  int defect_dim = 1;
};

/// -i f'' + W f on H^2_0(0, inf); v = zeta_rho with zeta(0) = 1, zeta'(0) = rho
/// (or zeta(0) = 0, zeta'(0) = 1 for rho = inf) and L v = -phi''.
ExtensionProblem build_halfline_laplacian(GridPtr grid, ExtendedComplex rho, std::optional<Formula> phi = {},
                                          std::optional<std::function<double(double)>> potential = {});

/// -i f'' - gamma f / x^2 on (0, 1) with gamma >= sqrt 3; v = xi_rho and L v = -phi''.
ExtensionProblem build_inverse_square_interval(GridPtr grid, double gamma, ExtendedComplex rho,
                                               std::optional<Formula> phi = {});

/// i f' + i gamma f / x on (0, 1) with 0 < gamma < 1/2; v = x^{gamma+1}
/// (or the excluded x^{-gamma}) and L v = l.
ExtensionProblem build_first_order_interval(GridPtr grid, double gamma, std::optional<Formula> l = {},
                                            FirstOrderVector which = FirstOrderVector::regular);

/// -f'' + i V on H^2_0(0, inf); v = eta_h with eta(0) = 1, eta'(0) = h and L v = k.
/// Rejects Im h < 0.
ExtensionProblem build_halfline_schrodinger(GridPtr grid, ExtendedComplex h, const SchrodingerPerturbation& pert);
/// Same without the sign check on Im h.
ExtensionProblem build_halfline_schrodinger_unchecked(GridPtr grid, ExtendedComplex h,
                                                      const SchrodingerPerturbation& pert);

/// exp(-(1+i)x/sqrt2) and exp(-(1-i)x/sqrt2) combined so that f(0) = 1,
/// f'(0) = p, or f(0) = 0, f'(0) = 1 for p = inf.
Formula halfline_boundary_vector(ExtendedComplex p);

/// omega = (1 + sqrt(1 + 4 i gamma)) / 2, principal branch.
Complex inverse_square_exponent(double gamma);
/// The vector xi_rho spanned by x^omega and x^{conj(omega)+2}.
Formula inverse_square_vector(double gamma, ExtendedComplex rho);

/// Discrete dual pair: M and M~ represent A and A~ on a common basis with
/// Gram matrix G, so that <f, M g> is the matrix entry.
struct DiscretePair {
  CMatrix m;
  CMatrix m_tilde;
  CMatrix gram;
};

struct SplitPair {
  CMatrix s;  // (M + M~) / 2
  CMatrix v;  // (M - M~) / (2i)
};

/// Splits a discrete dual pair into its symmetric and non-negative parts.
/// The dual-pair relation <f, M~ g> = <M f, g> must hold on the basis.
SplitPair split_dual_pair(const DiscretePair& pair, double tol = 1e-8);

}  // namespace dualext
