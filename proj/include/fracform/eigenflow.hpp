#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fracform/renorm.hpp"
#include "fracform/rng.hpp"

namespace fracform {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Weight statistics on the twenty-cell ring
// ---------------------------------------------------------------------------

struct RBarResult {
  double value = 0.0;  // max over blocks h = 0..9 of min(r_{2h+1}, r_{2h+2})
  int hbar = 0;        // smallest achieving block index
};

/// Max-min weight over the ten adjacent-cell blocks {2h+1, 2h+2}. The
/// achieving block has both weights >= value, and every block has at least
/// one weight <= value.
inline RBarResult rbar(const WeightVector& r) {
  if (r.size() != 20) throw std::invalid_argument("rbar requires twenty cell weights");
  RBarResult out{-std::numeric_limits<double>::infinity(), 0};
  for (int h = 0; h <= 9; ++h) {
    const double m = std::min(r[2 * h], r[2 * h + 1]);
    if (m > out.value) {
      out.value = m;
      out.hbar = h;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conductivity ratios driving the nonexistence argument
// ---------------------------------------------------------------------------

inline void require_counterexample_form(const DirichletForm& e) {
  if (e.n_boundary != 20)
    throw std::invalid_argument("this operation requires a form on the twenty-corner boundary");
}

struct FarConductivities {
  std::vector<double> values;  // C_{l,l+10}(E) for l = 1..20 (period ten)
  double max_value = 0.0;      // M(E)
  int lhat = 0;                // smallest maximizing label
};

/// Effective conductivities across all opposite corner pairs {l, l+10}.
inline FarConductivities far_conductivities(const DirichletForm& e) {
  require_counterexample_form(e);
  FarConductivities out;
  out.values.assign(20, 0.0);
  for (int l = 1; l <= 10; ++l) {
    const double v = effective_conductivity(e, l, l + 10);
    out.values[l - 1] = v;
    out.values[l + 9] = v;
  }
  out.lhat = 1;
  out.max_value = out.values[0];
  for (int l = 2; l <= 20; ++l)
    if (out.values[l - 1] > out.max_value) {
      out.max_value = out.values[l - 1];
      out.lhat = l;
    }
  return out;
}

struct NearPairDetail {
  int j1 = 0, j2 = 0;         // the heavy adjacent pair 2h+1, 2h+2
  double rbar_value = 0.0;
  int hbar = 0;
  double cond_base = 0.0;     // C_{j1,j2}(E)
  double cond_traced = 0.0;   // C_{j1,j2}(traced form), via the level-1 minimum
  double ratio = 0.0;         // cond_traced / cond_base, >= rbar/2
  double corner_value = 0.0;  // minimizer value at the glue point shared by the pair
};

/// Conductivity ratio across the heaviest adjacent-cell pair. Restricting
/// the level-1 sum to the two heavy cells bounds the ratio below by rbar/2.
inline NearPairDetail near_pair_detail(const DirichletForm& e, const WeightVector& r) {
  require_counterexample_form(e);
  if (!is_irreducible(e)) throw ReducibleFormError("near-pair ratio requires an irreducible form");
  const auto& t = counterexample();
  const RBarResult rb = rbar(r);

  NearPairDetail out;
  out.rbar_value = rb.value;
  out.hbar = rb.hbar;
  out.j1 = 2 * rb.hbar + 1;
  out.j2 = 2 * rb.hbar + 2;
  out.cond_base = effective_conductivity(e, out.j1, out.j2);

  const Level1Form s = assemble_level1(t, e, r);
  const auto sol = detail::minimize_pinned(s.laplacian(), {{out.j1 - 1, 0.0}, {out.j2 - 1, 1.0}});
  out.cond_traced = sol.value;
  out.corner_value = sol.minimizer[20 + out.j1 - 1];  // glue point Q_{j1} has id 20 + j1
  out.ratio = out.cond_traced / out.cond_base;
  return out;
}

inline double near_pair_ratio(const DirichletForm& e, const WeightVector& r) {
  return near_pair_detail(e, r).ratio;
}

/// Ratio of the traced conductivity across {l, l+10} to the largest far-pair
/// conductivity of the input form. Strictly below rbar/2 for every l.
inline double far_pair_ratio(const DirichletForm& e, const WeightVector& r, int l) {
  require_counterexample_form(e);
  if (l < 1 || l > 20) throw std::invalid_argument("far-pair label must lie in 1..20");
  if (!is_irreducible(e)) throw ReducibleFormError("far-pair ratio requires an irreducible form");
  const auto& t = counterexample();
  check_weights(t, r);

  const FarConductivities base = far_conductivities(e);
  const Level1Form s = assemble_level1(t, e, r);
  const int j2 = mod1(l + 10, 20);
  const double traced = detail::minimize_pinned(s.laplacian(), {{l - 1, 0.0}, {j2 - 1, 1.0}}).value;
  return traced / base.max_value;
}

// ---------------------------------------------------------------------------
// The explicit competitor across the two nine-cell arcs
// ---------------------------------------------------------------------------

/// Level-1 function witnessing the far-pair bound: zero on cell l, one on
/// cell l+10, and on each intermediate cell the pinned minimizer between the
/// cell's two glue points, at levels given by the harmonic-sum minimizers of
/// the two arcs' weights. Single-valued at every glue point, it belongs to
/// the competitor set of the {l, l+10} conductivity, and its level-1 energy
/// is at most max_far_conductivity(E) times the sum of the two harmonic sums.
inline std::vector<double> proof_test_function(const DirichletForm& e, const WeightVector& r,
                                               int l) {
  require_counterexample_form(e);
  if (!is_irreducible(e))
    throw ReducibleFormError("the competitor construction requires an irreducible form");
  const auto& t = counterexample();
  check_weights(t, r);
  l = mod1(l, 20);

  std::vector<double> arc1(9), arc2(9);
  for (int i = 1; i <= 9; ++i) {
    arc1[i - 1] = r[mod1(l + i, 20) - 1];
    arc2[i - 1] = r[mod1(l + 10 + i, 20) - 1];
  }
  const auto x = harmonic_min(arc1).argmin;
  const auto xp = harmonic_min(arc2).argmin;

  // Partial sums: s runs 0 -> 1 along the first arc, sp runs 1 -> 0 along
  // the second.
  std::vector<double> s(10, 0.0), sp(10, 1.0);
  for (int n = 1; n <= 9; ++n) {
    s[n] = s[n - 1] + x[n - 1];
    sp[n] = sp[n - 1] - xp[n - 1];
  }
  // The minimizers sum to one exactly in theory; snap the endpoints so the
  // constructed function is pinned to 0 and 1 without roundoff residue.
  s[9] = 1.0;
  sp[9] = 0.0;

  std::vector<double> v(static_cast<std::size_t>(t.n_level1), 0.0);
  const auto assign_cell = [&](int cell, const BoundaryFunction& u) {
    for (int h = 1; h <= 20; ++h) v[t.vertex(cell, h) - 1] = u[h - 1];
  };

  assign_cell(l, BoundaryFunction(20, 0.0));
  assign_cell(mod1(l + 10, 20), BoundaryFunction(20, 1.0));
  for (int j = 1; j <= 9; ++j) {
    const int c1 = mod1(l + j, 20);
    assign_cell(c1, pinned_minimizer(e, sigma(c1), mod1(sigma(c1) + 10, 20), s[j - 1], s[j]).u);
    const int c2 = mod1(l + 10 + j, 20);
    assign_cell(c2, pinned_minimizer(e, sigma(c2), mod1(sigma(c2) + 10, 20), sp[j - 1], sp[j]).u);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Fixed-point iteration
// ---------------------------------------------------------------------------

/// Scale-invariant distance between forms: sup-norm difference of the
/// coefficient vectors after normalizing each to sum one. Zero exactly when
/// the forms are proportional.
inline double residual(const DirichletForm& e, const DirichletForm& f) {
  if (e.n_boundary != f.n_boundary)
    throw std::invalid_argument("residual requires forms on the same boundary");
  const double se = e.coefficient_sum();
  const double sf = f.coefficient_sum();
  if (!(se > 0.0) || !(sf > 0.0))
    throw std::invalid_argument("residual is undefined for the zero form");
  double sup = 0.0;
  for (std::size_t i = 0; i < e.coefficients.size(); ++i)
    sup = std::max(sup, std::abs(e.coefficients[i] / se - f.coefficients[i] / sf));
  return sup;
}

struct IterationStep {
  int step = 0;                       // 0 is the initial form
  std::vector<double> coefficients;   // sum-one normalized
  double residual = kNaN;             // distance to the previous step (NaN at step 0)
  double renorm_sum = kNaN;           // coefficient sum of the raw traced form
  double cond_far_max = kNaN;         // M: largest far-pair conductivity (ring triple only)
  double cond_near = kNaN;            // m: conductivity across the heavy adjacent pair
  double phi = kNaN;                  // M / m, strictly decreasing along the iteration
  double coeff_sum = 0.0;             // of the recorded form (always 1 up to roundoff)
};

struct IterationTrace {
  bool counterexample_stats = false;
  bool converged = false;
  int steps_taken = 0;
  DirichletForm final_form;
  std::vector<IterationStep> steps;  // steps_taken + 1 records, step 0 first
};

/// Repeatedly traces the form and rescales it to coefficient sum one,
/// recording the per-step residual. Stops once the residual drops below tol
/// or after max_steps. On the twenty-cell ring every step additionally
/// records M, m and phi = M/m.
inline IterationTrace iterate(const FractalTriple& t, const DirichletForm& e0,
                              const WeightVector& r, int max_steps, double tol) {
  if (max_steps < 0) throw std::invalid_argument("max_steps must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!is_irreducible(e0)) throw ReducibleFormError("iteration requires an irreducible form");
  check_weights(t, r);

  IterationTrace trace;
  trace.counterexample_stats = is_counterexample(t);
  std::optional<RBarResult> rb;
  if (trace.counterexample_stats) rb = rbar(r);

  const auto record = [&](int step, const DirichletForm& form, double res, double renorm_sum) {
    IterationStep rec;
    rec.step = step;
    rec.coefficients = form.coefficients;
    rec.residual = res;
    rec.renorm_sum = renorm_sum;
    rec.coeff_sum = form.coefficient_sum();
    if (rb) {
      const auto far = far_conductivities(form);
      rec.cond_far_max = far.max_value;
      rec.cond_near = effective_conductivity(form, 2 * rb->hbar + 1, 2 * rb->hbar + 2);
      rec.phi = rec.cond_far_max / rec.cond_near;
    }
    trace.steps.push_back(std::move(rec));
  };

  DirichletForm cur = e0;
  {
    const double s = cur.coefficient_sum();
    if (!(s > 0.0)) throw std::invalid_argument("iteration requires a nonzero form");
    cur *= 1.0 / s;
  }
  record(0, cur, kNaN, kNaN);

  for (int step = 1; step <= max_steps; ++step) {
    DirichletForm traced;
    try {
      traced = renormalize(t, cur, r);
    } catch (const NumericalFailureError& err) {
      throw NumericalFailureError("step " + std::to_string(step) + ": " + err.what());
    }
    const double s = traced.coefficient_sum();
    if (!(s > 0.0))
      throw NumericalFailureError("step " + std::to_string(step) + ": traced form vanished");
    traced *= 1.0 / s;

    const double res = residual(traced, cur);
    record(step, traced, res, s);
    cur = std::move(traced);
    trace.steps_taken = step;
    if (res < tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_form = std::move(cur);
  return trace;
}

// ---------------------------------------------------------------------------
// Obstruction certificates
// ---------------------------------------------------------------------------

/// Per-(form, weights) record of the two incompatible conductivity bounds on
/// the twenty-cell ring: the near ratio is >= rbar/2 while every far ratio
/// stays strictly below rbar/2, so no form can be a fixed point (which would
/// force both ratios to equal one).
struct ObstructionCertificate {
  double rbar_value = 0.0;
  int hbar = 0;
  int lhat = 0;
  double near_ratio = 0.0;
  double far_ratio = 0.0;            // at lhat
  double near_margin = 0.0;          // near_ratio - rbar/2
  double far_margin = 0.0;           // rbar/2 - far_ratio
  std::vector<double> far_ratios;    // per label l = 1..20
};

inline ObstructionCertificate make_certificate(const DirichletForm& e, const WeightVector& r) {
  require_counterexample_form(e);
  if (!is_irreducible(e)) throw ReducibleFormError("certificates require an irreducible form");
  const auto& t = counterexample();
  check_weights(t, r);

  const RBarResult rb = rbar(r);
  const FarConductivities base = far_conductivities(e);
  const DirichletForm traced = renormalize(t, e, r);
  const FarConductivities after = far_conductivities(traced);

  ObstructionCertificate cert;
  cert.rbar_value = rb.value;
  cert.hbar = rb.hbar;
  cert.lhat = base.lhat;
  const int j1 = 2 * rb.hbar + 1;
  const int j2 = 2 * rb.hbar + 2;
  cert.near_ratio =
      effective_conductivity(traced, j1, j2) / effective_conductivity(e, j1, j2);
  cert.far_ratios.resize(20);
  for (int l = 1; l <= 20; ++l) cert.far_ratios[l - 1] = after.values[l - 1] / base.max_value;
  cert.far_ratio = cert.far_ratios[cert.lhat - 1];
  cert.near_margin = cert.near_ratio - rb.value / 2.0;
  cert.far_margin = rb.value / 2.0 - cert.far_ratio;
  return cert;
}

/// Validates a certificate against its weight vector: the block inequalities
/// behind rbar, the near margin (up to tol) and strict positivity of every
/// far margin. Returns human-readable descriptions of any violations.
inline std::vector<std::string> certificate_issues(const ObstructionCertificate& cert,
                                                   const WeightVector& r, double tol = 1e-9) {
  std::vector<std::string> issues;
  if (r.size() != 20 || cert.far_ratios.size() != 20 || cert.hbar < 0 || cert.hbar > 9 ||
      cert.lhat < 1 || cert.lhat > 20) {
    issues.push_back("malformed certificate");
    return issues;
  }
  if (!(r[2 * cert.hbar] >= cert.rbar_value && r[2 * cert.hbar + 1] >= cert.rbar_value))
    issues.push_back("achieving block has a weight below rbar");
  for (int h = 0; h <= 9; ++h)
    if (!(std::min(r[2 * h], r[2 * h + 1]) <= cert.rbar_value)) {
      issues.push_back("block " + std::to_string(h) + " has both weights above rbar");
      break;
    }
  if (!(cert.near_margin >= -tol))
    issues.push_back("near ratio falls below rbar/2 beyond tolerance");
  for (int l = 1; l <= 20; ++l)
    if (!(cert.rbar_value / 2.0 - cert.far_ratios[l - 1] > 0.0)) {
      issues.push_back("far ratio at label " + std::to_string(l) + " reaches rbar/2");
      break;
    }
  return issues;
}

/// Log-uniform random form on n corners with every conductance in
/// [0.1, 10]; the complete support makes it irreducible.
inline DirichletForm sample_form(int n, std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(substream(seed, stream));
  DirichletForm e(n);
  for (double& c : e.coefficients) c = 0.1 * std::pow(100.0, g.uniform01());
  return e;
}

/// Log-uniform random weights in [0.1, 10].
inline WeightVector sample_weights(int k, std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(substream(seed, stream));
  WeightVector r(static_cast<std::size_t>(k));
  for (double& v : r) v = 0.1 * std::pow(100.0, g.uniform01());
  return r;
}

/// Emits one obstruction certificate per sampled form at the given weights.
/// Together the certificates witness that no sampled form is a fixed point;
/// a fixed point would need near and far ratios equal to one, forcing
/// rbar <= 2 and rbar > 2 simultaneously.
inline std::vector<ObstructionCertificate> certify_no_eigenform(const WeightVector& r,
                                                                int sample_count,
                                                                std::uint64_t seed) {
  if (sample_count < 0) throw std::invalid_argument("sample_count must be >= 0");
  check_weights(counterexample(), r);
  std::vector<ObstructionCertificate> certs;
  certs.reserve(static_cast<std::size_t>(sample_count));
  for (int s = 0; s < sample_count; ++s) {
    try {
      certs.push_back(make_certificate(sample_form(20, seed, static_cast<std::uint64_t>(s)), r));
    } catch (const NumericalFailureError& err) {
      throw NumericalFailureError("sample " + std::to_string(s) + ": " + err.what());
    }
  }
  return certs;
}

// ---------------------------------------------------------------------------
// Grid search over the weight simplex
// ---------------------------------------------------------------------------

struct GridConfig {
  int depth = 3;          // levels per axis before symmetry reduction
  int max_steps = 200;    // iteration budget per grid point
  double tol = 1e-10;     // convergence threshold on the residual
};

/// Deterministic grid on the weight simplex {r > 0, sum r_i = k}: every
/// non-increasing assignment of the levels {1..depth} to the k cells,
/// rescaled to sum k, with exact duplicates (proportional assignments)
/// removed. Non-increasing representatives keep the grid size polynomial
/// in depth instead of exponential in k.
inline std::vector<WeightVector> weight_grid(int k, int depth) {
  if (k < 1) throw std::invalid_argument("weight grid requires k >= 1");
  if (depth < 1) throw std::invalid_argument("weight grid requires depth >= 1");

  std::vector<WeightVector> out;
  std::set<WeightVector> seen;
  WeightVector cur(static_cast<std::size_t>(k), 0.0);
  const auto emit = [&]() {
    double sum = 0.0;
    for (double v : cur) sum += v;
    WeightVector scaled(cur);
    for (double& v : scaled) v *= static_cast<double>(k) / sum;
    if (seen.insert(scaled).second) out.push_back(std::move(scaled));
  };
  const auto rec = [&](auto&& self, int pos, int level_max) -> void {
    if (pos == k) {
      emit();
      return;
    }
    for (int level = level_max; level >= 1; --level) {
      cur[static_cast<std::size_t>(pos)] = level;
      self(self, pos + 1, level);
    }
  };
  rec(rec, 0, depth);
  return out;
}

struct SearchRecord {
  int index = 0;
  WeightVector r;
  double best_residual = kNaN;        // min over recorded steps
  double final_residual = kNaN;
  int steps = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double eigenvalue_estimate = kNaN;  // renorm_sum at the final step
  std::optional<ObstructionCertificate> certificate;  // ring triple only
};

struct SearchReport {
  int grid_depth = 0;
  int max_steps = 0;
  double tol = 0.0;
  int n_cells = 0;
  bool counterexample_triple = false;
  std::vector<SearchRecord> records;
  int best_index = -1;                // -1 when every grid point failed
  double best_residual = kNaN;
  WeightVector best_r;
  std::vector<double> best_coefficients;  // sum-one normalized witness form
  double wall_ms = 0.0;               // informational; not serialized
};

/// Runs the normalized iteration from the unit form at every grid point and
/// reports the best residual found. On the twenty-cell ring each record
/// additionally carries an obstruction certificate for the final form.
/// Numeric failures are recorded per grid point without aborting the sweep.
inline SearchReport search_g_eigenform(const FractalTriple& t, const GridConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SearchReport report;
  report.grid_depth = cfg.depth;
  report.max_steps = cfg.max_steps;
  report.tol = cfg.tol;
  report.n_cells = t.n_cells;
  report.counterexample_triple = is_counterexample(t);

  const auto grid = weight_grid(t.n_cells, cfg.depth);
  const DirichletForm e0 = DirichletForm::unit(t.n_boundary);

  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    SearchRecord rec;
    rec.index = static_cast<int>(idx);
    rec.r = grid[idx];
    try {
      const IterationTrace trace = iterate(t, e0, rec.r, cfg.max_steps, cfg.tol);
      rec.steps = trace.steps_taken;
      rec.converged = trace.converged;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_step = 0;
      for (std::size_t s = 1; s < trace.steps.size(); ++s)
        if (trace.steps[s].residual < best) {
          best = trace.steps[s].residual;
          best_step = s;
        }
      rec.best_residual = best;
      rec.final_residual = trace.steps.empty() ? kNaN : trace.steps.back().residual;
      rec.eigenvalue_estimate = trace.steps.empty() ? kNaN : trace.steps.back().renorm_sum;
      if (report.counterexample_triple)
        rec.certificate = make_certificate(trace.final_form, rec.r);
      if (rec.best_residual < report.best_residual ||
          (report.best_index < 0 && std::isfinite(rec.best_residual))) {
        report.best_index = rec.index;
        report.best_residual = rec.best_residual;
        report.best_r = rec.r;
        report.best_coefficients = trace.steps[best_step].coefficients;
      }
    } catch (const NumericalFailureError& err) {
      rec.failed = true;
      rec.error = err.what();
      // The obstruction certificate does not depend on how far the iteration
      // got: it holds for any irreducible form.  Attach the one for the
      // starting form so every grid point carries a witness.
      if (report.counterexample_triple)
        rec.certificate = make_certificate(e0, rec.r);
    }
    report.records.push_back(std::move(rec));
  }

  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return report;
}

}  // namespace fracform
