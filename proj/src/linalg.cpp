#include "dualext/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dualext {

CMatrix cholesky_lower(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::invalid_argument, "Cholesky of a non-square matrix");
  CMatrix l = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) diag -= std::norm(l(j, k));
    if (!(diag > 0.0))
      throw Error(ErrorCode::not_positive_definite, "matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Complex s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

CMatrix cholesky_upper_psd(const CMatrix& a, double rel_tol) {
  const Eigen::Index n = a.rows();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(a(i, i).real()));
  const double floor = rel_tol * scale;
  CMatrix r = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) diag -= std::norm(r(k, j));
    if (diag <= floor) continue;  // dependent direction: row stays zero
    const double rjj = std::sqrt(diag);
    r(j, j) = rjj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Complex s = a(j, i);
      for (Eigen::Index k = 0; k < j; ++k) s -= std::conj(r(k, j)) * r(k, i);
      r(j, i) = s / rjj;
    }
  }
  return r;
}

CVector solve_upper_adjoint_psd(const CMatrix& r, const CVector& b, double rel_tol) {
  const Eigen::Index n = r.rows();
  const double tol = rel_tol * std::max(b.norm(), std::numeric_limits<double>::min());
  CVector y = CVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex s = b(i);
    for (Eigen::Index j = 0; j < i; ++j) s -= std::conj(r(j, i)) * y(j);
    if (r(i, i) == Complex{}) {
      if (std::abs(s) > tol)
        throw Error(ErrorCode::not_in_range, "right-hand side has a component outside the range");
      continue;
    }
    y(i) = s / std::conj(r(i, i));
  }
  return y;
}

namespace {

/// Implicit QL on a real symmetric tridiagonal matrix (diagonal d, sub e with
/// e[i] coupling i and i+1). Rotations are accumulated into z when non-null.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd* z) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e.resize(n);
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  // Absolute floor so that clusters of (near) zero eigenvalues deflate.
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(d[i]) + std::abs(e[i]));
  const double floor = eps * scale;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= floor) break;
      }
      if (m == l) break;
      if (++iter > 100) throw Error(ErrorCode::invalid_argument, "QL iteration did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z) {
          for (int k = 0; k < n; ++k) {
            const double t = (*z)(k, i + 1);
            (*z)(k, i + 1) = s * (*z)(k, i) + c * t;
            (*z)(k, i) = c * (*z)(k, i) - s * t;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

}  // namespace

HermitianEigen hermitian_eigen(const CMatrix& input, bool want_vectors) {
  const Eigen::Index n = input.rows();
  if (input.cols() != n) throw Error(ErrorCode::invalid_argument, "eigenproblem of a non-square matrix");
  HermitianEigen out;
  if (n == 0) return out;

  CMatrix a = 0.5 * (input + input.adjoint());
  CMatrix q;
  if (want_vectors) q = CMatrix::Identity(n, n);

  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    CVector x = a.block(k + 1, k, m, 1);
    const double tail = x.tail(m - 1).norm();
    if (tail == 0.0) continue;
    const double xnorm = x.norm();
    const Complex phase = std::abs(x(0)) > 0.0 ? x(0) / std::abs(x(0)) : Complex{1.0};
    const Complex alpha = -phase * xnorm;
    CVector w = x;
    w(0) -= alpha;
    w /= w.norm();

    auto a22 = a.block(k + 1, k + 1, m, m);
    const CVector p = a22 * w;
    const Complex kappa = w.dot(p);  // w^H p
    const CVector r = p - kappa.real() * w;
    a22 -= 2.0 * (w * r.adjoint() + r * w.adjoint());

    a.block(k + 1, k, m, 1).setZero();
    a.block(k, k + 1, 1, m).setZero();
    a(k + 1, k) = alpha;
    a(k, k + 1) = std::conj(alpha);

    if (want_vectors) {
      auto qs = q.block(0, k + 1, n, m);
      const CVector qw = qs * w;
      qs -= 2.0 * qw * w.adjoint();
    }
  }

  std::vector<double> d(n), e(n, 0.0);
  std::vector<Complex> phase(n, Complex{1.0});
  for (Eigen::Index k = 0; k < n; ++k) d[k] = a(k, k).real();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const Complex off = a(k + 1, k);
    const double mag = std::abs(off);
    e[k] = mag;
    phase[k + 1] = mag > 0.0 ? phase[k] * off / mag : phase[k];
  }

  Eigen::MatrixXd z;
  if (want_vectors) z = Eigen::MatrixXd::Identity(n, n);
  tridiagonal_ql(d, e, want_vectors ? &z : nullptr);

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return d[i] < d[j]; });

  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.values(i) = d[order[i]];
  if (want_vectors) {
    CMatrix dz(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) dz(i, j) = phase[i] * z(i, order[j]);
    out.vectors = q * dz;
  }
  return out;
}

PencilResult solve_pencil(const CMatrix& h, const CMatrix& g, bool want_vector) {
  if (h.rows() != g.rows() || h.cols() != g.cols() || h.rows() != h.cols())
    throw Error(ErrorCode::invalid_argument, "pencil matrices have mismatched shapes");
  const CMatrix l = cholesky_lower(g);
  const auto lt = l.triangularView<Eigen::Lower>();
  CMatrix c = lt.solve(h);
  c = lt.solve(c.adjoint().eval()).adjoint().eval();
  c = 0.5 * (c + c.adjoint());

  const HermitianEigen eig = hermitian_eigen(c, want_vector);
  PencilResult out;
  out.values = eig.values;
  out.min_eig = eig.values(0);
  if (want_vector) {
    CVector y = eig.vectors.col(0);
    out.vector = l.adjoint().triangularView<Eigen::Upper>().solve(y);
    const CVector res = h * out.vector - out.min_eig * (g * out.vector);
    const double hn = std::max(h.norm(), std::numeric_limits<double>::min());
    out.residual = res.norm() / (hn * out.vector.norm());
  }
  return out;
}

CMatrix pseudo_inverse_hermitian(const CMatrix& a, double rel_tol) {
  const HermitianEigen eig = hermitian_eigen(a, true);
  const Eigen::Index n = a.rows();
  double top = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, std::abs(eig.values(i)));
  CMatrix out = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(eig.values(i)) <= rel_tol * top) continue;
    out += eig.vectors.col(i) * eig.vectors.col(i).adjoint() / eig.values(i);
  }
  return out;
}

double pseudo_quadratic(const CVector& a, const CMatrix& b, double rel_tol) {
  const HermitianEigen eig = hermitian_eigen(b, true);
  const Eigen::Index n = b.rows();
  const double top = eig.values(n - 1);
  if (!(top > 0.0)) throw Error(ErrorCode::degenerate_gram, "form Gram matrix vanishes");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.values(i) <= rel_tol * top) continue;
    sum += std::norm(eig.vectors.col(i).dot(a)) / eig.values(i);
  }
  return sum;
}

double hermitian_condition(const CMatrix& a) {
  const HermitianEigen eig = hermitian_eigen(a, false);
  const double lo = eig.values(0);
  const double hi = eig.values(eig.values.size() - 1);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace dualext
