#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dualext/types.hpp"

namespace dualext {

enum class DomainKind { interval, halfline };

/// Composite Gauss-Legendre rule on [offset, length]. For a half-line the
/// length is the truncation radius R. Nodes never coincide with an endpoint.
struct Grid {
  static constexpr int kPanelOrder = 8;

  DomainKind kind = DomainKind::interval;
  double length = 1.0;
  double offset = 0.0;
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  int panels() const { return n / kPanelOrder; }
  double left() const { return offset; }
  double right() const { return length; }
  double panel_width() const { return (length - offset) / panels(); }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Reference Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int order);

/// n must be a positive multiple of the panel order (8) and at least 8.
GridPtr make_grid(DomainKind kind, double length, int n, double offset = 0.0);

/// {f(0), f'(0), f(b), f'(b)}, where 0 and b are the ends of the covered domain.
struct Traces {
  Complex f0{};
  Complex df0{};
  Complex fb{};
  Complex dfb{};
};

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridPtr grid, std::vector<Complex> values, std::optional<Traces> traces = {});

  /// Samples a closed-form function. When the formula carries derivatives
  /// they are kept for later use by differentiate() and the forms.
  static GridFunction sample(GridPtr grid, Formula formula, std::optional<Traces> traces = {});
  static GridFunction zero(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const Complex> values() const { return values_; }
  Complex operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  const std::optional<Traces>& traces() const { return traces_; }
  const std::optional<Formula>& formula() const { return formula_; }

  GridFunction with_traces(Traces t) const;
  double max_abs() const;

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b);
  friend GridFunction operator*(Complex s, const GridFunction& a);

 private:
  GridPtr grid_;
  std::vector<Complex> values_;
  std::optional<Traces> traces_;
  std::optional<Formula> formula_;
};

/// sum_i w_i conj(f_i) g_i; antilinear in the first argument.
Complex integrate(const GridFunction& f, const GridFunction& g);
double norm_sq(const GridFunction& f);
/// Integral of a real density sampled on the grid.
double integrate_density(const Grid& grid, std::span<const double> density);

/// Derivative samples. Uses the closed-form derivative when one is attached,
/// otherwise differentiates the panel-wise interpolating polynomial.
GridFunction differentiate(const GridFunction& f);

/// F(x_i) = integral of f from the left end to x_i, using the panel-wise
/// interpolant (exact for polynomials of the panel degree).
GridFunction cumulative_integral(const GridFunction& f);

/// Analytic traces when present; otherwise extrapolation of the panel
/// interpolant to the domain ends. On a half-line the values at infinity are
/// reported as zero if the decay certificate holds, otherwise an error.
Traces boundary_data(const GridFunction& f);

/// |f(R)| < 1e-10 * max|f| for the node closest to the truncation radius.
bool decay_certified(const GridFunction& f, double rel_tol = 1e-10);

/// Decides whether a non-negative density is integrable at the left end of
/// [left, right] by looking at the ratio of consecutive dyadic shell integrals.
bool integrable_near_left(const std::function<double(double)>& density, double left, double right);

}  // namespace dualext
