#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fracform/form.hpp"
#include "fracform/triple.hpp"

namespace fracform {

/// One positive weight per cell.
using WeightVector = std::vector<double>;

inline WeightVector unit_weights(int k) { return WeightVector(static_cast<std::size_t>(k), 1.0); }

inline void check_weights(const FractalTriple& t, const WeightVector& r) {
  if (static_cast<int>(r.size()) != t.n_cells)
    throw std::invalid_argument("weight vector must have one entry per cell");
  for (double v : r)
    if (!(v > 0.0)) throw std::invalid_argument("cell weights must be strictly positive");
}

/// The level-1 quadratic form sum_i r_i E(v o psi_i), stored as a sparse
/// symmetric conductance map on global V1 ids. Every support edge lies
/// inside a single cell; an entry accumulates contributions from all cells
/// containing both endpoints.
struct Level1Form {
  struct Edge {
    int a = 0, b = 0;  // global ids, a < b
    double w = 0.0;
  };

  int n_level1 = 0;
  std::vector<Edge> edges;  // sorted by (a, b), strictly positive weights

  double energy(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != n_level1)
      throw std::invalid_argument("level-1 function has wrong length");
    double total = 0.0;
    for (const Edge& e : edges) {
      const double d = v[e.a - 1] - v[e.b - 1];
      total += e.w * d * d;
    }
    return total;
  }

  Eigen::MatrixXd laplacian() const {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_level1, n_level1);
    for (const Edge& e : edges) {
      L(e.a - 1, e.a - 1) += e.w;
      L(e.b - 1, e.b - 1) += e.w;
      L(e.a - 1, e.b - 1) -= e.w;
      L(e.b - 1, e.a - 1) -= e.w;
    }
    return L;
  }
};

/// Assembles the weighted level-1 form: each cell pulls the boundary form
/// back through its map and scales it by the cell weight.
inline Level1Form assemble_level1(const FractalTriple& t, const DirichletForm& e,
                                  const WeightVector& r) {
  if (e.n_boundary != t.n_boundary)
    throw std::invalid_argument("form and triple boundary sizes disagree");
  check_weights(t, r);

  std::map<std::pair<int, int>, double> acc;
  for (int i = 1; i <= t.n_cells; ++i)
    for (int h1 = 1; h1 <= t.n_boundary; ++h1)
      for (int h2 = h1 + 1; h2 <= t.n_boundary; ++h2) {
        const double w = r[i - 1] * e.c(h1, h2);
        if (w > 0.0) acc[std::minmax(t.vertex(i, h1), t.vertex(i, h2))] += w;
      }

  Level1Form out;
  out.n_level1 = t.n_level1;
  out.edges.reserve(acc.size());
  for (const auto& [key, w] : acc) out.edges.push_back({key.first, key.second, w});
  return out;
}

/// Unique minimizer of the level-1 form among functions agreeing with u on
/// the boundary ids 1..N, returned as a full level-1 function.
inline std::vector<double> harmonic_extension(const FractalTriple& t, const DirichletForm& e,
                                              const WeightVector& r, const BoundaryFunction& u) {
  if (static_cast<int>(u.size()) != t.n_boundary)
    throw std::invalid_argument("boundary function has wrong length");
  if (!is_irreducible(e))
    throw ReducibleFormError("harmonic extension requires an irreducible form");

  const Level1Form s = assemble_level1(t, e, r);
  std::vector<detail::Pin> pins;
  pins.reserve(u.size());
  for (int j = 1; j <= t.n_boundary; ++j) pins.push_back({j - 1, u[j - 1]});
  const auto sol = detail::minimize_pinned(s.laplacian(), pins);
  return {sol.minimizer.data(), sol.minimizer.data() + sol.minimizer.size()};
}

/// Renormalization operator: traces the level-1 form back onto the boundary
/// by eliminating the interior ids (Schur complement of the level-1
/// Laplacian). For every boundary u the result's energy equals the level-1
/// energy of the harmonic extension of u. Off-diagonal Schur entries carry
/// the new conductances; theory makes them nonnegative, so values in
/// [-clip_tol, 0) are treated as roundoff and clip to zero while anything
/// more negative raises NumericalFailureError.
inline DirichletForm renormalize(const FractalTriple& t, const DirichletForm& e,
                                 const WeightVector& r, double clip_tol = 1e-9) {
  if (!is_irreducible(e)) throw ReducibleFormError("renormalization requires an irreducible form");

  const Level1Form s = assemble_level1(t, e, r);
  const Eigen::MatrixXd L = s.laplacian();
  const int nb = t.n_boundary;
  const int ni = t.n_level1 - nb;

  Eigen::MatrixXd schur = L.topLeftCorner(nb, nb);
  if (ni > 0) {
    const Eigen::MatrixXd Lii = L.bottomRightCorner(ni, ni);
    const Eigen::MatrixXd Lib = L.bottomLeftCorner(ni, nb);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Lii);
    const Eigen::MatrixXd X = ldlt.solve(Lib);
    const double scale =
        std::max(1.0, Lii.lpNorm<Eigen::Infinity>() * X.lpNorm<Eigen::Infinity>());
    if (!X.allFinite() || !((Lii * X - Lib).lpNorm<Eigen::Infinity>() <= 1e-8 * scale))
      throw NumericalFailureError("interior elimination is singular beyond tolerance");
    schur -= Lib.transpose() * X;
  }
  schur = ((schur + schur.transpose()) / 2.0).eval();

  DirichletForm out(nb);
  for (int j1 = 1; j1 <= nb; ++j1)
    for (int j2 = j1 + 1; j2 <= nb; ++j2) {
      const double c = -schur(j1 - 1, j2 - 1);
      if (c < -clip_tol)
        throw NumericalFailureError("traced form has a negative conductance beyond tolerance");
      out.c(j1, j2) = std::max(c, 0.0);
    }
  // Clipping can disconnect the support graph when true conductances fall
  // below the cancellation noise of the elimination; the traced form is then
  // no longer a usable Dirichlet form.
  if (!is_irreducible(out))
    throw NumericalFailureError("traced form is reducible (conductances collapsed below resolution)");
  return out;
}

/// Effective conductivity of the renormalized form computed directly on the
/// level-1 side: the minimum of the level-1 form over functions with
/// v(P_{j1}) = 0 and v(P_{j2}) = 1 and everything else free. Must agree with
/// effective_conductivity(renormalize(t, e, r), j1, j2).
inline double effective_conductivity_level1(const FractalTriple& t, const DirichletForm& e,
                                            const WeightVector& r, int j1, int j2) {
  if (j1 == j2) throw std::invalid_argument("pinned labels must differ");
  if (!is_irreducible(e))
    throw ReducibleFormError("level-1 conductivity requires an irreducible form");
  const Level1Form s = assemble_level1(t, e, r);
  return detail::minimize_pinned(s.laplacian(), {{j1 - 1, 0.0}, {j2 - 1, 1.0}}).value;
}

}  // namespace fracform
