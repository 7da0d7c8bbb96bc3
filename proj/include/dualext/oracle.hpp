#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dualext/criteria.hpp"

namespace dualext {

inline constexpr double kOracleTolerance = 1e-5;

struct OracleOptions {
  /// Truncation of the core on the half-line. Must be a multiple of the
  /// element width for the meshes used, so that breakpoints at integers of
  /// indicator data stay on element edges.
  double halfline_radius = 16.0;
  /// Drop i V from the action: the oracle then probes S_{V,L} alone.
  bool symmetric_only = false;
  /// Infima above -tolerance count as non-negative.
  double tolerance = kOracleTolerance;
};

/// Clamped cubic B-splines on a uniform mesh of the scenario interval, with
/// end splines removed per the boundary conditions of the core, plus one
/// column for v. Row/column order: core functions, then v.
struct DiscreteOperator {
  int elements = 0;
  int core_dim = 0;
  CMatrix m;     // <b_j, action b_k>
  CMatrix gram;  // <b_j, b_k>

  /// (M - M^H) / (2i).
  CMatrix imaginary_part() const;
};

DiscreteOperator assemble_discrete(const ExtensionProblem& p, int elements, const OracleOptions& options = {});

/// Smallest lambda with H x = lambda G x.
double pencil_min_eig(const CMatrix& h, const CMatrix& g);

/// Infimum of Im <psi, A psi> / ||psi||^2 over the discrete space.
double discrete_infimum(const ExtensionProblem& p, int elements, const OracleOptions& options = {});

struct OracleReport {
  std::vector<int> meshes;
  std::vector<double> infima;
  double extrapolated = 0.0;
  std::optional<double> order;  // from the last three meshes
  double resolution = 0.0;      // 10 / n^2 on the finest mesh
  /// Empty when the verdict is outside the theory or |margin| is below the
  /// resolution.
  std::optional<bool> agrees;
  /// |v| at the half-line truncation relative to max |v|; zero on intervals.
  double tail = 0.0;
  std::string note;
};

/// Mesh sequence used when none is given.
inline const std::vector<int> kDefaultMeshes{64, 128, 256};

OracleReport cross_validate(const ExtensionProblem& p, const Verdict& verdict,
                            const std::vector<int>& meshes = kDefaultMeshes, const OracleOptions& options = {});

}  // namespace dualext
