#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fracform {

/// Thrown when an operation requires an irreducible form but the conductance
/// support graph is disconnected.
class ReducibleFormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a linear solve is singular beyond tolerance or produces
/// non-finite values.
class NumericalFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Pin {
  int index;     // 0-based coordinate
  double value;  // prescribed value
};

struct PinnedQuadratic {
  Eigen::VectorXd minimizer;  // full vector, pinned coordinates included
  double value;               // x^T L x at the minimizer
};

/// Minimizes x^T L x subject to the pinned coordinates, L a symmetric
/// positive semidefinite (graph Laplacian style) matrix. The reduced system
/// over the free coordinates must be positive definite, which holds whenever
/// the support graph restricted to each free component reaches a pin.
inline PinnedQuadratic minimize_pinned(const Eigen::MatrixXd& L, const std::vector<Pin>& pins) {
  const Eigen::Index n = L.rows();
  std::vector<bool> pinned(static_cast<std::size_t>(n), false);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  for (const auto& p : pins) {
    if (p.index < 0 || p.index >= n)
      throw std::invalid_argument("pinned coordinate out of range");
    pinned[static_cast<std::size_t>(p.index)] = true;
    x[p.index] = p.value;
  }

  std::vector<int> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (!pinned[static_cast<std::size_t>(i)]) free_idx.push_back(static_cast<int>(i));

  if (!free_idx.empty()) {
    const Eigen::Index m = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) A(a, b) = L(free_idx[a], free_idx[b]);
      for (const auto& p : pins) rhs[a] -= L(free_idx[a], p.index) * p.value;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::VectorXd sol = ldlt.solve(rhs);

    // Singularity shows up as a large residual or non-finite entries.
    const double scale = std::max({1.0, rhs.lpNorm<Eigen::Infinity>(),
                                   A.lpNorm<Eigen::Infinity>() * sol.lpNorm<Eigen::Infinity>()});
    const double resid = (A * sol - rhs).lpNorm<Eigen::Infinity>();
    if (!sol.allFinite() || !(resid <= 1e-8 * scale))
      throw NumericalFailureError("pinned solve is singular beyond tolerance");

    for (Eigen::Index a = 0; a < m; ++a) x[free_idx[a]] = sol[a];
  }

  return {x, x.dot(L * x)};
}

}  // namespace detail
}  // namespace fracform
