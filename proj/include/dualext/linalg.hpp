#pragma once

#include <Eigen/Dense>

#include "dualext/types.hpp"

namespace dualext {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Lower factor L of a Hermitian positive definite A = L L^H.
/// Throws not_positive_definite when a pivot is not positive.
CMatrix cholesky_lower(const CMatrix& a);

/// Upper factor R of a Hermitian positive semidefinite A = R^H R. Pivots
/// below rel_tol * max|diag| are treated as zero and their rows left empty.
CMatrix cholesky_upper_psd(const CMatrix& a, double rel_tol = 1e-12);

/// Solves R^H y = b for an upper factor from cholesky_upper_psd. Rows with
/// a zero pivot require b to vanish there (within rel_tol * |b|);
/// otherwise not_in_range is thrown.
CVector solve_upper_adjoint_psd(const CMatrix& r, const CVector& b, double rel_tol = 1e-8);

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns, empty when not requested
};

/// Dense Hermitian eigensolver: Householder reduction to tridiagonal form,
/// a diagonal phase change to make it real, then implicit QL.
HermitianEigen hermitian_eigen(const CMatrix& a, bool want_vectors = true);

struct PencilResult {
  double min_eig = 0.0;
  CVector vector;
  double residual = 0.0;  // ||Hx - lambda Gx|| / (||H|| ||x||)
  RVector values;
};

/// Generalized problem H x = lambda G x with G positive definite, reduced to
/// standard form through the Cholesky factor of G.
PencilResult solve_pencil(const CMatrix& h, const CMatrix& g, bool want_vector = true);

/// a^H B^+ a for Hermitian positive semidefinite B, discarding eigenvalues
/// below rel_tol * max eigenvalue.
double pseudo_quadratic(const CVector& a, const CMatrix& b, double rel_tol = 1e-12);

CMatrix pseudo_inverse_hermitian(const CMatrix& a, double rel_tol = 1e-12);

/// 2-norm condition number of a Hermitian positive definite matrix.
double hermitian_condition(const CMatrix& a);

}  // namespace dualext
