#include "dualext/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dualext {

namespace {

constexpr int kDegree = 3;

/// Values and first two derivatives of the four cubic B-splines that are
/// nonzero on the element containing x (NURBS book, algorithm A2.3).
std::array<std::array<double, kDegree + 1>, 3> spline_derivatives(const std::vector<double>& knots, int span,
                                                                   double x) {
  double ndu[kDegree + 1][kDegree + 1];
  double left[kDegree + 1], right[kDegree + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  std::array<std::array<double, kDegree + 1>, 3> ders{};
  for (int j = 0; j <= kDegree; ++j) ders[0][j] = ndu[j][kDegree];
  double a[2][kDegree + 1];
  for (int r = 0; r <= kDegree; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= 2; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = kDegree - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : kDegree - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double factor = kDegree;
  for (int k = 1; k <= 2; ++k) {
    for (int j = 0; j <= kDegree; ++j) ders[k][j] *= factor;
    factor *= kDegree - k;
  }
  return ders;
}

std::vector<Complex> sample_values(const std::optional<Formula>& f, const Grid& g, const char* what) {
  if (!f) throw Error(ErrorCode::invalid_argument, std::string("oracle needs a closed form for ") + what);
  std::vector<Complex> out(g.n);
  for (int i = 0; i < g.n; ++i) out[i] = f->value(g.nodes[i]);
  return out;
}

Complex weighted_dot(const std::vector<double>& w, const std::vector<Complex>& a, const std::vector<Complex>& b) {
  Complex s{};
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

CMatrix DiscreteOperator::imaginary_part() const {
  const CMatrix h = (m - m.adjoint()) / Complex(0.0, 2.0);
  return 0.5 * (h + h.adjoint());
}

DiscreteOperator assemble_discrete(const ExtensionProblem& p, int elements, const OracleOptions& options) {
  if (elements < 32) throw Error(ErrorCode::invalid_argument, "oracle mesh needs at least 32 elements");
  const OperatorModel& model = p.model;
  if (options.symmetric_only && !p.symmetric_adjoint_v)
    throw Error(ErrorCode::invalid_argument, "problem has no symmetric part to probe");
  const double length = model.kind == DomainKind::halfline ? options.halfline_radius : model.length;
  const GridPtr grid = make_grid(model.kind, length, Grid::kPanelOrder * elements);
  const Grid& g = *grid;

  const double h = length / elements;
  std::vector<double> knots(elements + 2 * kDegree + 1);
  for (int k = 0; k < static_cast<int>(knots.size()); ++k)
    knots[k] = std::clamp(k - kDegree, 0, elements) * h;
  knots[elements + kDegree] = length;

  const int all = elements + kDegree;
  const int first = model.drop_left;
  const int core = all - model.drop_left - model.drop_right;
  if (core < 1) throw Error(ErrorCode::invalid_argument, "mesh too coarse for the boundary conditions");

  // Dense node-by-basis tables; each column has support on four elements.
  Eigen::MatrixXd bv = Eigen::MatrixXd::Zero(g.n, core);
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(g.n, core);
  Eigen::MatrixXd bdd = Eigen::MatrixXd::Zero(g.n, core);
  for (int i = 0; i < g.n; ++i) {
    const int e = i / Grid::kPanelOrder;
    const auto d = spline_derivatives(knots, e + kDegree, g.nodes[i]);
    for (int j = 0; j <= kDegree; ++j) {
      const int col = e + j - first;
      if (col < 0 || col >= core) continue;
      bv(i, col) = d[0][j];
      bd(i, col) = d[1][j];
      bdd(i, col) = d[2][j];
    }
  }

  CVector q(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double x = g.nodes[i];
    Complex qi{};
    if (model.q_symmetric) qi += model.q_symmetric(x);
    if (!options.symmetric_only && model.q_dissipative) qi += model.q_dissipative(x);
    q(i) = qi;
  }
  const CMatrix action = model.c2 * bdd.cast<Complex>() + model.c1 * bd.cast<Complex>() + q.asDiagonal() * bv.cast<Complex>();
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(g.weights.data(), g.n);
  const Eigen::MatrixXd wbv = w.asDiagonal() * bv;

  const std::vector<Complex> v = sample_values(p.v.formula(), g, "v");
  const GridFunction& image_fn = options.symmetric_only ? *p.symmetric_adjoint_v : p.adjoint_v;
  const std::vector<Complex> image = sample_values(image_fn.formula(), g, "the adjoint action on v");
  const std::vector<Complex> lv = sample_values(p.lv.formula(), g, "L v");
  std::vector<Complex> target(g.n);
  for (int i = 0; i < g.n; ++i) target[i] = image[i] + lv[i];
  const CVector vv = Eigen::Map<const CVector>(v.data(), g.n);
  const CVector tv = Eigen::Map<const CVector>(target.data(), g.n);

  DiscreteOperator out;
  out.elements = elements;
  out.core_dim = core;
  out.m.resize(core + 1, core + 1);
  out.gram.resize(core + 1, core + 1);
  out.m.topLeftCorner(core, core) = wbv.transpose().cast<Complex>() * action;
  out.gram.topLeftCorner(core, core) = (wbv.transpose() * bv).cast<Complex>();

  out.m.topRightCorner(core, 1) = wbv.transpose().cast<Complex>() * tv;
  out.m.bottomLeftCorner(1, core) = (w.cast<Complex>().cwiseProduct(vv)).adjoint() * action;
  out.gram.topRightCorner(core, 1) = wbv.transpose().cast<Complex>() * vv;
  out.gram.bottomLeftCorner(1, core) = out.gram.topRightCorner(core, 1).adjoint();

  if (!options.symmetric_only && model.rank_one_alpha > 0.0) {
    const std::vector<Complex> phi = sample_values(model.rank_one_phi, g, "the rank-one vector");
    const CVector pv = Eigen::Map<const CVector>(phi.data(), g.n);
    const CVector pb = wbv.transpose().cast<Complex>() * pv;  // <b_j, phi>
    const Complex alpha_i(0.0, model.rank_one_alpha);
    out.m.topLeftCorner(core, core) += alpha_i * pb * pb.adjoint();
    out.m.bottomLeftCorner(1, core) += alpha_i * weighted_dot(g.weights, v, phi) * pb.adjoint();
  }

  const double im_vv = options.symmetric_only ? *p.im_symmetric + integrate(p.v, p.lv).imag() : im_action_on_v(p);
  out.m(core, core) = Complex(weighted_dot(g.weights, v, target).real(), im_vv);
  out.gram(core, core) = norm_sq(p.v);

  const Eigen::VectorXd scale = out.gram.diagonal().real().cwiseSqrt().cwiseInverse();
  const CMatrix normalized = scale.asDiagonal() * out.gram * scale.asDiagonal();
  if (hermitian_condition(0.5 * (normalized + normalized.adjoint())) > 1e12)
    throw Error(ErrorCode::degenerate_gram, "oracle Gram matrix is ill-conditioned");
  return out;
}

double pencil_min_eig(const CMatrix& h, const CMatrix& g) { return solve_pencil(h, g, false).min_eig; }

double discrete_infimum(const ExtensionProblem& p, int elements, const OracleOptions& options) {
  const DiscreteOperator d = assemble_discrete(p, elements, options);
  return pencil_min_eig(d.imaginary_part(), d.gram);
}

OracleReport cross_validate(const ExtensionProblem& p, const Verdict& verdict, const std::vector<int>& meshes,
                            const OracleOptions& options) {
  if (meshes.empty()) throw Error(ErrorCode::invalid_argument, "no meshes given");
  if (!std::is_sorted(meshes.begin(), meshes.end()) ||
      std::adjacent_find(meshes.begin(), meshes.end()) != meshes.end())
    throw Error(ErrorCode::invalid_argument, "meshes must be increasing");

  OracleReport r;
  r.meshes = meshes;
  for (int n : meshes) r.infima.push_back(discrete_infimum(p, n, options));
  r.extrapolated = r.infima.back();
  if (r.infima.size() >= 3) {
    const std::size_t k = r.infima.size();
    const double d1 = r.infima[k - 3] - r.infima[k - 2];
    const double d2 = r.infima[k - 2] - r.infima[k - 1];
    // Richardson step only for a geometric, contracting sequence of
    // differences; otherwise the finest value stands.
    if (d2 != 0.0 && d1 / d2 > 1.2) {
      const double ratio = d1 / d2;
      const double mesh_ratio = static_cast<double>(meshes[k - 1]) / meshes[k - 2];
      r.order = std::log(ratio) / std::log(mesh_ratio);
      r.extrapolated = r.infima.back() - d2 / (ratio - 1.0);
    }
  }
  const double n = meshes.back();
  r.resolution = 10.0 / (n * n);
  if (p.model.kind == DomainKind::halfline && p.v.size() > 0)
    r.tail = std::abs(p.v[p.v.size() - 1]) / std::max(p.v.max_abs(), 1e-300);

  if (!verdict.dissipative) {
    r.note = "verdict outside the theory";
  } else if (!(std::abs(verdict.margin) > r.resolution)) {
    r.note = "margin below resolution";
  } else if (*verdict.dissipative) {
    r.agrees = r.extrapolated >= -options.tolerance;
    r.note = "a non-negative infimum is evidence for dissipativity, not proof";
  } else {
    r.agrees = r.extrapolated < -options.tolerance;
  }
  if (r.agrees == false) r.note = "oracle disagrees with the verdict";
  return r;
}

}  // namespace dualext
