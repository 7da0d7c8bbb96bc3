#include "dualext/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dualext {

GaussRule gauss_legendre(int order) {
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // Chebyshev initial guess, then Newton on P_order.
    double t = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (t * p1 - p0) / (t * t - 1.0);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    rule.nodes[order - 1 - i] = t;
    rule.weights[order - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return rule;
}

namespace {

constexpr int kP = Grid::kPanelOrder;

/// Panel interpolation data on the reference Gauss nodes.
struct PanelCalculus {
  GaussRule rule;
  std::array<double, kP> bary{};
  std::array<std::array<double, kP>, kP> diff{};

  PanelCalculus() : rule(gauss_legendre(kP)) {
    const auto& t = rule.nodes;
    for (int j = 0; j < kP; ++j) {
      double prod = 1.0;
      for (int k = 0; k < kP; ++k)
        if (k != j) prod *= (t[j] - t[k]);
      bary[j] = 1.0 / prod;
    }
    for (int i = 0; i < kP; ++i) {
      double diag = 0.0;
      for (int j = 0; j < kP; ++j) {
        if (i == j) continue;
        diff[i][j] = (bary[j] / bary[i]) / (t[i] - t[j]);
        diag -= diff[i][j];
      }
      diff[i][i] = diag;
    }
    std::array<double, kP> l{}, dl{};
    for (int i = 0; i < kP; ++i) {
      const double half = 0.5 * (t[i] + 1.0);
      for (int q = 0; q < kP; ++q) {
        basis_at(-1.0 + half * (t[q] + 1.0), l, dl);
        for (int j = 0; j < kP; ++j) cumulative[i][j] += half * rule.weights[q] * l[j];
      }
    }
  }

  /// cumulative[i][j] = integral of l_j over [-1, t_i].
  std::array<std::array<double, kP>, kP> cumulative{};

  /// Values l_j(s) and derivatives l_j'(s) of the Lagrange basis at a point
  /// s that is not a node (used for s = -1 and s = +1).
  void basis_at(double s, std::array<double, kP>& l, std::array<double, kP>& dl) const {
    const auto& t = rule.nodes;
    for (int j = 0; j < kP; ++j) {
      double prod = bary[j];
      double logsum = 0.0;
      for (int k = 0; k < kP; ++k) {
        if (k == j) continue;
        prod *= (s - t[k]);
        logsum += 1.0 / (s - t[k]);
      }
      l[j] = prod;
      dl[j] = prod * logsum;
    }
  }
};

const PanelCalculus& calculus() {
  static const PanelCalculus pc;
  return pc;
}

void require_same_grid(const GridFunction& f, const GridFunction& g) {
  if (f.grid_ptr() != g.grid_ptr() &&
      (f.grid().nodes != g.grid().nodes || f.grid().weights != g.grid().weights))
    throw Error(ErrorCode::grid_mismatch, "grid functions live on different grids");
}

}  // namespace

GridPtr make_grid(DomainKind kind, double length, int n, double offset) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorCode::invalid_argument, "domain length must be positive");
  if (n < kP || n % kP != 0)
    throw Error(ErrorCode::invalid_argument,
                "node count must be a positive multiple of " + std::to_string(kP));
  const int panels = n / kP;
  if (offset < 0.0 || offset >= length / panels)
    throw Error(ErrorCode::invalid_argument, "offset must lie in [0, first panel width)");

  auto grid = std::make_shared<Grid>();
  grid->kind = kind;
  grid->length = length;
  grid->offset = offset;
  grid->n = n;
  grid->nodes.reserve(n);
  grid->weights.reserve(n);
  const auto& rule = calculus().rule;
  const double h = (length - offset) / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = offset + p * h;
    for (int k = 0; k < kP; ++k) {
      grid->nodes.push_back(a + 0.5 * h * (rule.nodes[k] + 1.0));
      grid->weights.push_back(0.5 * h * rule.weights[k]);
    }
  }
  return grid;
}

GridFunction::GridFunction(GridPtr grid, std::vector<Complex> values, std::optional<Traces> traces)
    : grid_(std::move(grid)), values_(std::move(values)), traces_(traces) {
  if (!grid_) throw Error(ErrorCode::invalid_argument, "grid function without grid");
  if (static_cast<int>(values_.size()) != grid_->n)
    throw Error(ErrorCode::grid_mismatch, "value count does not match grid node count");
}

GridFunction GridFunction::sample(GridPtr grid, Formula formula, std::optional<Traces> traces) {
  if (!formula.has_value()) throw Error(ErrorCode::invalid_argument, "formula without value");
  std::vector<Complex> values(grid->n);
  for (int i = 0; i < grid->n; ++i) values[i] = formula.value(grid->nodes[i]);
  GridFunction out(std::move(grid), std::move(values), traces);
  out.formula_ = std::move(formula);
  return out;
}

GridFunction GridFunction::zero(GridPtr grid) {
  return sample(std::move(grid), Formula::zero(), Traces{});
}

GridFunction GridFunction::with_traces(Traces t) const {
  GridFunction out = *this;
  out.traces_ = t;
  return out;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

std::optional<Traces> combine_traces(const std::optional<Traces>& a, const std::optional<Traces>& b,
                                     Complex sa, Complex sb) {
  if (!a || !b) return std::nullopt;
  return Traces{sa * a->f0 + sb * b->f0, sa * a->df0 + sb * b->df0, sa * a->fb + sb * b->fb,
                sa * a->dfb + sb * b->dfb};
}

GridFunction linear_combination(const GridFunction& a, const GridFunction& b, Complex sa,
                                Complex sb) {
  require_same_grid(a, b);
  std::vector<Complex> values(a.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = sa * a[i] + sb * b[i];
  auto traces = combine_traces(a.traces(), b.traces(), sa, sb);
  if (a.formula() && b.formula()) {
    Formula f = sa * *a.formula() + sb * *b.formula();
    GridFunction out = GridFunction::sample(a.grid_ptr(), std::move(f), traces);
    return out;
  }
  return GridFunction(a.grid_ptr(), std::move(values), traces);
}

}  // namespace

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return linear_combination(a, b, 1.0, 1.0);
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return linear_combination(a, b, 1.0, -1.0);
}

GridFunction operator*(Complex s, const GridFunction& a) {
  std::vector<Complex> values(a.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = s * a[i];
  std::optional<Traces> traces;
  if (a.traces()) {
    const auto& t = *a.traces();
    traces = Traces{s * t.f0, s * t.df0, s * t.fb, s * t.dfb};
  }
  if (a.formula()) return GridFunction::sample(a.grid_ptr(), s * *a.formula(), traces);
  return GridFunction(a.grid_ptr(), std::move(values), traces);
}

Complex integrate(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  const auto& w = f.grid().weights;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double fr = f[i].real(), fi = f[i].imag(), gr = g[i].real(), gi = g[i].imag();
    re += w[i] * (fr * gr + fi * gi);
    im += w[i] * (fr * gi - fi * gr);
  }
  return {re, im};
}

double norm_sq(const GridFunction& f) {
  const auto& w = f.grid().weights;
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * std::norm(f[i]);
  return sum;
}

double integrate_density(const Grid& grid, std::span<const double> density) {
  if (static_cast<int>(density.size()) != grid.n)
    throw Error(ErrorCode::grid_mismatch, "density length does not match grid");
  double sum = 0.0;
  for (int i = 0; i < grid.n; ++i) sum += grid.weights[i] * density[i];
  return sum;
}

GridFunction differentiate(const GridFunction& f) {
  const Grid& grid = f.grid();
  if (f.formula() && f.formula()->has_first()) {
    Formula d;
    d.value = f.formula()->first;
    d.first = f.formula()->second;
    std::optional<Traces> traces;
    if (f.traces() && f.formula()->has_second()) {
      const Complex s0 = f.formula()->second(grid.left());
      const Complex sb = f.formula()->second(grid.right());
      if (std::isfinite(std::abs(s0)) && std::isfinite(std::abs(sb)))
        traces = Traces{f.traces()->df0, s0, f.traces()->dfb, sb};
    }
    return GridFunction::sample(f.grid_ptr(), std::move(d), traces);
  }
  const auto& pc = calculus();
  const double scale = 2.0 / grid.panel_width();
  std::vector<Complex> d(grid.n);
  for (int p = 0; p < grid.panels(); ++p) {
    const int base = p * kP;
    for (int i = 0; i < kP; ++i) {
      Complex acc{};
      for (int j = 0; j < kP; ++j) acc += pc.diff[i][j] * f[base + j];
      d[base + i] = scale * acc;
    }
  }
  return GridFunction(f.grid_ptr(), std::move(d));
}

GridFunction cumulative_integral(const GridFunction& f) {
  const Grid& grid = f.grid();
  const auto& pc = calculus();
  const double half = 0.5 * grid.panel_width();
  std::vector<Complex> out(grid.n);
  Complex carry{};
  for (int p = 0; p < grid.panels(); ++p) {
    const int base = p * kP;
    for (int i = 0; i < kP; ++i) {
      Complex acc{};
      for (int j = 0; j < kP; ++j) acc += pc.cumulative[i][j] * f[base + j];
      out[base + i] = carry + half * acc;
    }
    Complex whole{};
    for (int j = 0; j < kP; ++j) whole += pc.rule.weights[j] * f[base + j];
    carry += half * whole;
  }
  return GridFunction(f.grid_ptr(), std::move(out));
}

bool decay_certified(const GridFunction& f, double rel_tol) {
  const double m = f.max_abs();
  if (m == 0.0) return true;
  return std::abs(f.values().back()) < rel_tol * m;
}

Traces boundary_data(const GridFunction& f) {
  if (f.traces()) return *f.traces();
  const Grid& grid = f.grid();
  const auto& pc = calculus();
  std::array<double, kP> l{}, dl{};
  const double scale = 2.0 / grid.panel_width();

  Traces t;
  pc.basis_at(-1.0, l, dl);
  for (int j = 0; j < kP; ++j) {
    t.f0 += l[j] * f[j];
    t.df0 += scale * dl[j] * f[j];
  }
  if (grid.kind == DomainKind::halfline) {
    if (!decay_certified(f))
      throw Error(ErrorCode::invalid_argument,
                  "half-line function does not decay at the truncation radius; "
                  "its value at infinity is undefined");
    return t;  // limits at infinity are zero
  }
  pc.basis_at(1.0, l, dl);
  const int base = grid.n - kP;
  for (int j = 0; j < kP; ++j) {
    t.fb += l[j] * f[base + j];
    t.dfb += scale * dl[j] * f[base + j];
  }
  return t;
}

bool integrable_near_left(const std::function<double(double)>& density, double left, double right) {
  if (left > 0.0) return true;
  const auto& rule = calculus().rule;
  auto shell = [&](int k) {
    const double b = right * std::ldexp(1.0, -k);
    const double a = 0.5 * b;
    double s = 0.0;
    for (int q = 0; q < kP; ++q) {
      const double x = a + 0.5 * (b - a) * (rule.nodes[q] + 1.0);
      s += 0.5 * (b - a) * rule.weights[q] * density(x);
    }
    return s;
  };
  constexpr int kFirst = 30;
  constexpr int kLast = 44;
  double prev = shell(kFirst);
  if (!std::isfinite(prev)) return false;
  double ratio = 0.0;
  for (int k = kFirst + 1; k <= kLast; ++k) {
    const double cur = shell(k);
    if (!std::isfinite(cur)) return false;
    if (prev <= 1e-300) return true;
    ratio = cur / prev;
    prev = cur;
  }
  // Shell integrals of x^p scale like 2^{-k(p+1)}; integrable iff ratio < 1.
  return ratio < 1.0 - 1e-6;
}

}  // namespace dualext
