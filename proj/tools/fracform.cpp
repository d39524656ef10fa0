// Command-line front end: build and validate fractal triples, evaluate
// conductivities, trace forms through the renormalization map, iterate
// toward fixed points, sweep weight grids, and emit obstruction
// certificates for the twenty-cell ring.
//
// Exit codes: 0 success, 1 usage, 2 validation or parse failure,
// 3 numerical failure, 4 certificate violation.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fracform/fracform.hpp"

namespace {

using namespace fracform;

/// Writes to the given path, or to stdout when no path was supplied.
void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    io::write_text_file(out_path, content);
}

std::pair<int, int> parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--pair", "expected two comma-separated labels, e.g. 1,11");
  try {
    const int j1 = std::stoi(text.substr(0, comma));
    const int j2 = std::stoi(text.substr(comma + 1));
    return {j1, j2};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--pair", "expected two comma-separated labels, e.g. 1,11");
  }
}

int run_triple_build(const std::string& kind, int n, const std::string& out_path) {
  FractalTriple t;
  if (kind == "counterexample") {
    if (n != 0 && n != 20) {
      std::cerr << "error: the counterexample triple has exactly 20 corners\n";
      return 1;
    }
    t = build_counterexample();
  } else {
    t = build_gasket(n == 0 ? 3 : n);
  }
  emit(out_path, io::triple_to_json(t));
  return 0;
}

int run_triple_validate(const std::string& path) {
  const FractalTriple t = io::read_triple_unchecked(path);
  const std::vector<Violation> violations = check_triple(t);
  if (violations.empty()) {
    std::cout << "valid\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << to_string(v.kind) << ": " << v.message << "\n";
  std::cout << violations.size() << " violation" << (violations.size() == 1 ? "" : "s") << "\n";
  return 2;
}

int run_conductivity(const std::string& form_path, const std::string& pair_text) {
  const DirichletForm e = io::read_form(form_path);
  const auto [j1, j2] = parse_pair(pair_text);
  std::cout << io::fmt_double(effective_conductivity(e, j1, j2)) << "\n";
  return 0;
}

int run_renorm(const std::string& triple_path, const std::string& form_path,
               const std::string& weights_path, const std::string& out_path) {
  const FractalTriple t = io::read_triple(triple_path);
  const DirichletForm e = io::read_form(form_path);
  const WeightVector r = io::read_weights(weights_path);
  emit(out_path, io::form_to_json(renormalize(t, e, r)));
  return 0;
}

int run_iterate(const std::string& triple_path, const std::string& form_path,
                const std::string& weights_path, int max_steps, double tol,
                const std::string& trace_path, const std::string& out_path) {
  const FractalTriple t = io::read_triple(triple_path);
  const DirichletForm e0 = io::read_form(form_path);
  const WeightVector r = io::read_weights(weights_path);

  const IterationTrace trace = iterate(t, e0, r, max_steps, tol);
  if (!trace_path.empty()) io::write_text_file(trace_path, io::trace_to_csv(trace));
  if (!out_path.empty()) io::write_text_file(out_path, io::form_to_json(trace.final_form));

  const IterationStep& last = trace.steps.back();
  std::cout << "steps: " << trace.steps_taken << "\n";
  std::cout << "converged: " << (trace.converged ? "true" : "false") << "\n";
  std::cout << "final_residual: " << io::fmt_double(last.residual) << "\n";
  std::cout << "eigenvalue_estimate: " << io::fmt_double(last.renorm_sum) << "\n";
  if (trace.counterexample_stats) std::cout << "phi: " << io::fmt_double(last.phi) << "\n";
  return 0;
}

int run_search(const std::string& triple_path, int grid_depth, int max_steps, double tol,
               const std::string& out_path) {
  const FractalTriple t = io::read_triple(triple_path);
  GridConfig cfg;
  cfg.depth = grid_depth;
  cfg.max_steps = max_steps;
  cfg.tol = tol;
  const SearchReport report = search_g_eigenform(t, cfg);
  emit(out_path, io::report_to_json(report));
  std::cerr << "searched " << report.records.size() << " grid points in " << report.wall_ms
            << " ms\n";
  return 0;
}

int run_certify(int samples, std::uint64_t seed, const std::string& weights_path, double tol,
                const std::string& out_path) {
  const WeightVector r = weights_path.empty() ? unit_weights(20) : io::read_weights(weights_path);
  const auto certs = certify_no_eigenform(r, samples, seed);
  emit(out_path, io::certificates_to_json(r, seed, tol, certs));
  int bad = 0;
  for (const auto& cert : certs)
    if (!certificate_issues(cert, r, tol).empty()) ++bad;
  if (bad > 0) {
    std::cerr << "error: " << bad << " of " << certs.size()
              << " certificates violate the obstruction inequalities\n";
    return 4;
  }
  std::cerr << "all " << certs.size() << " certificates hold\n";
  return 0;
}

int run_explain(const std::string& topic) {
  if (topic == "rbar") {
    std::cout
        << "rbar = max over the ten adjacent-cell blocks {2h+1, 2h+2} of the smaller of the\n"
           "two block weights; hbar is the smallest achieving block. Both weights of block\n"
           "hbar are >= rbar, and every block has at least one weight <= rbar.\n";
  } else if (topic == "near" || topic == "near-bound") {
    std::cout
        << "Near bound: the traced conductivity across the heavy adjacent pair satisfies\n"
           "  C_{2hbar+1, 2hbar+2}(trace) >= (rbar/2) * C_{2hbar+1, 2hbar+2}(E).\n"
           "Dropping every level-1 term outside the two heavy cells leaves two copies of E\n"
           "in series through their shared glue point, each weighted at least rbar; the\n"
           "series rule across the two copies contributes the factor 1/2.\n";
  } else if (topic == "far" || topic == "far-bound") {
    std::cout
        << "Far bound: for every label l the traced conductivity across {l, l+10} satisfies\n"
           "  C_{l, l+10}(trace) < (rbar/2) * M(E),  M(E) = max_l C_{l, l+10}(E).\n"
           "A competitor runs from 0 to 1 along each nine-cell arc between the two corners,\n"
           "spending on each cell the increment that minimizes the weighted sum of squares;\n"
           "that harmonic-sum minimum is < rbar/4 per arc because nine consecutive cells\n"
           "contain four full blocks, each contributing a weight <= rbar, plus a ninth cell\n"
           "of positive weight. Each cell's energy is at most M(E) times its squared\n"
           "increment, so the competitor's energy stays strictly below (rbar/2) * M(E).\n";
  } else if (topic == "phi" || topic == "lyapunov") {
    std::cout
        << "Phi(E) = M(E) / m(E), the largest far-pair conductivity over the conductivity\n"
           "across the heavy adjacent pair. The near bound gives m(trace) >= (rbar/2) m(E)\n"
           "and the far bound gives M(trace) < (rbar/2) M(E), so Phi strictly decreases at\n"
           "every renormalization step: the iteration can never cycle or settle.\n";
  } else if (topic == "obstruction") {
    std::cout
        << "If some irreducible form E satisfied trace(E) = rho * E, conductivities would\n"
           "scale uniformly: the near bound forces rho >= rbar/2, while the far bound at\n"
           "the maximizing label forces rho * M(E) < (rbar/2) * M(E), i.e. rho < rbar/2.\n"
           "The two are incompatible, so no weights admit a fixed point on this triple.\n";
  } else {
    std::cerr << "error: unknown topic \"" << topic
              << "\" (expected rbar, near, far, phi, or obstruction)\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirichlet-form renormalization on finitely ramified fractal triples"};
  app.set_version_flag("--version", std::string("fracform ") + FRACFORM_VERSION);
  app.require_subcommand(1);
  int rc = 0;

  // triple build / validate
  auto* triple = app.add_subcommand("triple", "Build or validate fractal triples");
  triple->require_subcommand(1);

  auto* build = triple->add_subcommand("build", "Construct a built-in triple");
  std::string build_kind;
  int build_n = 0;
  std::string build_out;
  build->add_option("--kind", build_kind, "Which triple to build")
      ->required()
      ->check(CLI::IsMember({"counterexample", "gasket"}));
  build->add_option("--n", build_n, "Corner count (gasket only; default 3)")
      ->check(CLI::Range(2, 1000));
  build->add_option("-o,--output", build_out, "Output path (default stdout)");
  build->callback([&] { rc = run_triple_build(build_kind, build_n, build_out); });

  auto* validate = triple->add_subcommand("validate", "Check a triple file against the axioms");
  std::string validate_path;
  validate->add_option("file", validate_path, "Triple JSON file")->required();
  validate->callback([&] { rc = run_triple_validate(validate_path); });

  // form conductivity
  auto* form = app.add_subcommand("form", "Operations on Dirichlet forms");
  form->require_subcommand(1);

  auto* cond = form->add_subcommand("conductivity", "Effective conductivity across a pair");
  std::string cond_form, cond_pair;
  cond->add_option("--form", cond_form, "Form JSON file")->required();
  cond->add_option("--pair", cond_pair, "Corner pair, e.g. 1,11")->required();
  cond->callback([&] { rc = run_conductivity(cond_form, cond_pair); });

  // renorm
  auto* renorm = app.add_subcommand("renorm", "Trace a form once through the renormalization map");
  std::string rn_triple, rn_form, rn_weights, rn_out;
  renorm->add_option("--triple", rn_triple, "Triple JSON file")->required();
  renorm->add_option("--form", rn_form, "Form JSON file")->required();
  renorm->add_option("--weights", rn_weights, "Weights JSON file")->required();
  renorm->add_option("-o,--output", rn_out, "Output path (default stdout)");
  renorm->callback([&] { rc = run_renorm(rn_triple, rn_form, rn_weights, rn_out); });

  // iterate
  auto* iter = app.add_subcommand("iterate", "Iterate the normalized renormalization map");
  std::string it_triple, it_form, it_weights, it_trace, it_out;
  int it_max_steps = 200;
  double it_tol = 1e-10;
  iter->add_option("--triple", it_triple, "Triple JSON file")->required();
  iter->add_option("--form", it_form, "Initial form JSON file")->required();
  iter->add_option("--weights", it_weights, "Weights JSON file")->required();
  iter->add_option("--max-steps", it_max_steps, "Iteration budget")->check(CLI::Range(0, 1000000));
  iter->add_option("--tol", it_tol, "Convergence threshold on the residual");
  iter->add_option("--trace", it_trace, "Write a per-step CSV trace to this path");
  iter->add_option("-o,--output", it_out, "Write the final form to this path");
  iter->callback(
      [&] { rc = run_iterate(it_triple, it_form, it_weights, it_max_steps, it_tol, it_trace, it_out); });

  // search
  auto* search = app.add_subcommand("search", "Sweep a weight grid for fixed points");
  std::string se_triple, se_out;
  int se_grid = 3, se_max_steps = 200;
  double se_tol = 1e-10;
  search->add_option("--triple", se_triple, "Triple JSON file")->required();
  search->add_option("--grid", se_grid, "Grid depth per axis")->check(CLI::Range(1, 64));
  search->add_option("--max-steps", se_max_steps, "Iteration budget per grid point")
      ->check(CLI::Range(0, 1000000));
  search->add_option("--tol", se_tol, "Convergence threshold on the residual");
  search->add_option("-o,--output", se_out, "Output path (default stdout)");
  search->callback([&] { rc = run_search(se_triple, se_grid, se_max_steps, se_tol, se_out); });

  // certify
  auto* certify = app.add_subcommand(
      "certify", "Sample random forms on the ring and certify the obstruction inequalities");
  std::string ce_weights, ce_out;
  int ce_samples = 100;
  std::uint64_t ce_seed = 42;
  double ce_tol = 1e-9;
  certify->add_option("--samples", ce_samples, "Number of sampled forms")
      ->check(CLI::Range(0, 1000000));
  certify->add_option("--seed", ce_seed, "RNG seed");
  certify->add_option("--weights", ce_weights, "Weights JSON file (default all ones)");
  certify->add_option("--tol", ce_tol, "Tolerance for the near-margin check");
  certify->add_option("-o,--output", ce_out, "Output path (default stdout)");
  certify->callback([&] { rc = run_certify(ce_samples, ce_seed, ce_weights, ce_tol, ce_out); });

  // explain
  auto* explain = app.add_subcommand("explain", "Describe one of the certified inequalities");
  std::string ex_topic;
  explain->add_option("topic", ex_topic, "rbar | near | far | phi | obstruction")->required();
  explain->callback([&] { rc = run_explain(ex_topic); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  } catch (const fracform::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TripleValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ReducibleFormError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
