#pragma once

#include <optional>
#include <vector>

#include "dualext/grid.hpp"
#include "dualext/linalg.hpp"

namespace dualext {

enum class VFamily {
  dirichlet_laplacian_halfline,
  dirichlet_laplacian_interval,
  multiplication,
  rank_one,
  bounded_matrix,
};

const char* to_string(VFamily f);

/// The non-negative imaginary part V of a dual pair, described by family.
/// The Laplacian families stand for -d^2/dx^2 on test functions; their
/// Friedrichs extension carries Dirichlet conditions and their Krein-von
/// Neumann extension is the smallest non-negative one.
struct ImaginaryPartSpec {
  VFamily family = VFamily::dirichlet_laplacian_interval;
  GridPtr grid;
  /// multiplication: the weight w >= 0.
  std::function<double(double)> weight;
  /// rank_one: alpha |phi><phi| with ||phi|| = 1.
  double alpha = 0.0;
  std::optional<GridFunction> phi;
  /// bounded_matrix: acts on node values, self-adjoint for the weighted
  /// inner product of the grid.
  CMatrix matrix;
  std::optional<double> strict_lower_bound;

  bool friedrichs_equals_krein() const;

  static ImaginaryPartSpec laplacian(GridPtr grid);
  static ImaginaryPartSpec multiplication_by(GridPtr grid, std::function<double(double)> w,
                                             std::optional<double> lower_bound = {});
  static ImaginaryPartSpec rank_one_of(GridPtr grid, double alpha, const GridFunction& phi);
  static ImaginaryPartSpec bounded(GridPtr grid, CMatrix m);
};

/// f[a, b] for the closure of the form of V (Friedrichs).
Complex friedrichs_form(const ImaginaryPartSpec& spec, const GridFunction& f, const GridFunction& g);
/// k[a, b] for the square-root form of the Krein-von Neumann extension.
Complex krein_form(const ImaginaryPartSpec& spec, const GridFunction& f, const GridFunction& g);

/// ||V_F^{1/2} f||^2; out_of_form_domain when f violates the Friedrichs
/// boundary conditions or the weighted integral diverges.
double friedrichs_form_sq(const ImaginaryPartSpec& spec, const GridFunction& f);
/// ||V_K^{1/2} f||^2.
double krein_form_sq(const ImaginaryPartSpec& spec, const GridFunction& f);

/// Lower bound for ||V_K^{1/2} h||^2 from the supremum of
/// |<h, V f>|^2 / <f, V f> over a test space of dimension test_dim inside
/// the operator domain of V. The test spaces are nested in test_dim.
double krein_form_ando_nishio(const ImaginaryPartSpec& spec, const GridFunction& h, int test_dim);

/// Functions f_0..f_{m-1} used by krein_form_ando_nishio together with V f_j.
struct TestFamily {
  std::vector<GridFunction> f;
  std::vector<GridFunction> vf;
};
TestFamily ando_nishio_family(const ImaginaryPartSpec& spec, int test_dim);

struct VfSolution {
  GridFunction u;
  double inv_form = 0.0;  // <l, V_F^{-1} l>
};

/// Solves V_F u = l with the Friedrichs boundary conditions.
VfSolution vf_solve(const ImaginaryPartSpec& spec, const GridFunction& l);

/// ||V_F^{-1/2} l||^2. Throws not_in_range when it is infinite or exceeds
/// the divergence threshold, support_violation when l lives where V vanishes.
double inverse_sqrt_form_sq(const ImaginaryPartSpec& spec, const GridFunction& l);

/// <v, V_F phi> for phi in the operator domain of V_F and v in the form
/// domain of V_K, evaluated through integration by parts.
Complex pairing_with_vf(const ImaginaryPartSpec& spec, const GridFunction& v, const GridFunction& phi);

/// V_F phi as a grid function.
GridFunction apply_vf(const ImaginaryPartSpec& spec, const GridFunction& phi);

/// Projection onto ker V* along the Friedrichs form domain. Requires a
/// strictly positive V with a closed-form kernel (interval Laplacian).
GridFunction projection_P(const ImaginaryPartSpec& spec, const GridFunction& v);

/// Finite-dimensional square roots of V_F and V_K on span(basis) and, if
/// given, span(basis, extra). Each square root is represented by the upper
/// triangular factor of the corresponding form matrix, so that
/// ||V^{1/2} sum c_j g_j|| = ||R c||.
struct DiscreteSqrtPair {
  std::vector<GridFunction> basis;
  std::optional<GridFunction> extra;
  CMatrix friedrichs_gram;  // m x m
  CMatrix krein_gram;       // (m or m+1) square
  CMatrix rf;
  CMatrix rk;
  CMatrix u;  // maps V_F^{1/2} coordinates to V_K^{1/2} coordinates

  int dim() const { return static_cast<int>(basis.size()); }
  /// Coordinates of V_F^{-1/2} l, i.e. a with R_F^H a = (<f_j, l>)_j.
  CVector inverse_sqrt_coordinates(const GridFunction& l) const;
  /// Column of R_K belonging to the extra vector.
  CVector extra_coordinates() const;
  double u_norm() const;
};

DiscreteSqrtPair discrete_sqrt_pair(const ImaginaryPartSpec& spec, std::vector<GridFunction> basis,
                                    std::optional<GridFunction> extra = {});

/// Default basis of the Friedrichs form domain used by the general criterion.
std::vector<GridFunction> default_basis(const ImaginaryPartSpec& spec, int size);

inline constexpr double kDivergenceThreshold = 1e8;

}  // namespace dualext
