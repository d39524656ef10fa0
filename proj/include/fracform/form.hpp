#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fracform/detail/pinned_solve.hpp"

namespace fracform {

/// Number of unordered boundary pairs {j1, j2}, j1 != j2.
inline int pair_count(int n) { return n * (n - 1) / 2; }

/// Index of the unordered pair {j1, j2} (1-based labels) in lexicographic
/// order over j1 < j2: (1,2), (1,3), ..., (1,n), (2,3), ...
inline int pair_index(int n, int j1, int j2) {
  if (j1 == j2 || j1 < 1 || j2 < 1 || j1 > n || j2 > n)
    throw std::invalid_argument("pair labels must be distinct and in 1..n");
  if (j1 > j2) std::swap(j1, j2);
  return (j1 - 1) * (2 * n - j1) / 2 + (j2 - j1 - 1);
}

/// Inverse of pair_index.
inline std::pair<int, int> pair_from_index(int n, int idx) {
  for (int j1 = 1; j1 < n; ++j1) {
    const int row = n - j1;
    if (idx < row) return {j1, j1 + 1 + idx};
    idx -= row;
  }
  throw std::invalid_argument("pair index out of range");
}

/// Dirichlet form on the boundary set: one nonnegative conductance per
/// unordered corner pair, E(u) = sum c_{j1,j2} (u_{j1} - u_{j2})^2. The
/// coefficient vector is dense over all pairs (zeros included) so forms of
/// the same size always serialize with the same shape.
struct DirichletForm {
  int n_boundary = 0;
  std::vector<double> coefficients;  // lexicographic over pairs, size n(n-1)/2

  DirichletForm() = default;
  explicit DirichletForm(int n) : n_boundary(n), coefficients(pair_count(n), 0.0) {
    if (n < 2) throw std::invalid_argument("form requires n_boundary >= 2");
  }

  double c(int j1, int j2) const { return coefficients[pair_index(n_boundary, j1, j2)]; }
  double& c(int j1, int j2) { return coefficients[pair_index(n_boundary, j1, j2)]; }

  double coefficient_sum() const {
    double s = 0.0;
    for (double v : coefficients) s += v;
    return s;
  }

  DirichletForm& operator*=(double t) {
    for (double& v : coefficients) v *= t;
    return *this;
  }

  friend DirichletForm operator*(double t, DirichletForm e) {
    e *= t;
    return e;
  }

  bool operator==(const DirichletForm&) const = default;

  /// All conductances equal one (the complete unit form).
  static DirichletForm unit(int n) {
    DirichletForm e(n);
    for (double& v : e.coefficients) v = 1.0;
    return e;
  }
};

using BoundaryFunction = std::vector<double>;

inline void check_form(const DirichletForm& e) {
  if (e.n_boundary < 2) throw std::invalid_argument("form requires n_boundary >= 2");
  if (static_cast<int>(e.coefficients.size()) != pair_count(e.n_boundary))
    throw std::invalid_argument("coefficient vector must cover every pair exactly once");
  for (double v : e.coefficients)
    if (!(v >= 0.0)) throw std::invalid_argument("conductances must be >= 0");
}

/// E(u); zero on constants.
inline double energy(const DirichletForm& e, const BoundaryFunction& u) {
  if (static_cast<int>(u.size()) != e.n_boundary)
    throw std::invalid_argument("boundary function has wrong length");
  double total = 0.0;
  int idx = 0;
  for (int j1 = 1; j1 <= e.n_boundary; ++j1)
    for (int j2 = j1 + 1; j2 <= e.n_boundary; ++j2) {
      const double d = u[j1 - 1] - u[j2 - 1];
      total += e.coefficients[idx++] * d * d;
    }
  return total;
}

/// True iff E(u) = 0 only for constant u, i.e. the positive-conductance
/// support graph is connected. Decided combinatorially, never numerically.
inline bool is_irreducible(const DirichletForm& e) {
  const int n = e.n_boundary;
  std::vector<int> stack{0};
  std::vector<bool> seen(n, false);
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    for (int b = 0; b < n; ++b)
      if (!seen[b] && a != b && e.c(a + 1, b + 1) > 0.0) {
        seen[b] = true;
        ++reached;
        stack.push_back(b);
      }
  }
  return reached == n;
}

/// Graph Laplacian of the form: L(a,a) = sum_b c_{ab}, L(a,b) = -c_{ab}, so
/// that E(u) = u^T L u.
inline Eigen::MatrixXd laplacian(const DirichletForm& e) {
  const int n = e.n_boundary;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int j1 = 1; j1 <= n; ++j1)
    for (int j2 = j1 + 1; j2 <= n; ++j2) {
      const double w = e.c(j1, j2);
      L(j1 - 1, j1 - 1) += w;
      L(j2 - 1, j2 - 1) += w;
      L(j1 - 1, j2 - 1) -= w;
      L(j2 - 1, j1 - 1) -= w;
    }
  return L;
}

struct PinnedMinimizer {
  BoundaryFunction u;
  double energy = 0.0;
};

/// Minimizer of E over functions with u(P_{j1}) = t1 and u(P_{j2}) = t2,
/// together with its energy (t1 - t2)^2 * C_{j1,j2}(E).
inline PinnedMinimizer pinned_minimizer(const DirichletForm& e, int j1, int j2, double t1,
                                        double t2) {
  if (j1 == j2) throw std::invalid_argument("pinned labels must differ");
  if (!is_irreducible(e)) throw ReducibleFormError("pinned minimizer requires an irreducible form");
  const auto sol =
      detail::minimize_pinned(laplacian(e), {{j1 - 1, t1}, {j2 - 1, t2}});
  BoundaryFunction u(sol.minimizer.data(), sol.minimizer.data() + sol.minimizer.size());
  const double value = energy(e, u);
  return {std::move(u), value};
}

/// Effective conductivity between corners j1 and j2: the minimum of E over
/// functions pinned to 0 at P_{j1} and 1 at P_{j2}. Symmetric in (j1, j2) and
/// strictly positive for irreducible forms.
inline double effective_conductivity(const DirichletForm& e, int j1, int j2) {
  return pinned_minimizer(e, j1, j2, 0.0, 1.0).energy;
}

/// Effective conductivities for every pair.
struct ConductivityTable {
  int n_boundary = 0;
  std::vector<double> values;  // same pair order as DirichletForm

  double at(int j1, int j2) const { return values[pair_index(n_boundary, j1, j2)]; }
};

inline ConductivityTable conductivity_table(const DirichletForm& e) {
  ConductivityTable table;
  table.n_boundary = e.n_boundary;
  table.values.resize(pair_count(e.n_boundary));
  for (int j1 = 1; j1 <= e.n_boundary; ++j1)
    for (int j2 = j1 + 1; j2 <= e.n_boundary; ++j2)
      table.values[pair_index(e.n_boundary, j1, j2)] = effective_conductivity(e, j1, j2);
  return table;
}

struct HarmonicMin {
  double value = 0.0;
  std::vector<double> argmin;
};

/// Minimum of sum b_i x_i^2 over the affine slice sum x_i = 1, which equals
/// the harmonic sum (sum 1/b_i)^-1, attained at x_i = value / b_i.
inline HarmonicMin harmonic_min(const std::vector<double>& b) {
  if (b.empty()) throw std::invalid_argument("harmonic_min requires at least one entry");
  double inv_sum = 0.0;
  for (double v : b) {
    if (!(v > 0.0)) throw std::invalid_argument("harmonic_min requires positive entries");
    inv_sum += 1.0 / v;
  }
  HarmonicMin out;
  out.value = 1.0 / inv_sum;
  out.argmin.reserve(b.size());
  for (double v : b) out.argmin.push_back(out.value / v);
  return out;
}

}  // namespace fracform
