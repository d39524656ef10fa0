#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fracform/fracform.hpp"

namespace {

namespace fs = std::filesystem;
using fracform::DirichletForm;
using fracform::FractalTriple;
using fracform::WeightVector;
namespace io = fracform::io;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

const std::string& cli_path() {
  static const std::string path = [] {
    if (const char* env = std::getenv("FRACFORM_CLI_PATH")) return std::string(env);
#ifdef FRACFORM_CLI_PATH
    return std::string(FRACFORM_CLI_PATH);
#else
    FAIL("set FRACFORM_CLI_PATH to the fracform binary");
    return std::string();
#endif
  }();
  return path;
}

/// Runs the CLI with the given arguments, capturing stdout; stderr is
/// silenced so diagnostic text never interferes with byte comparisons.
RunResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fracform_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_scratch(const std::string& name, const std::string& content) {
  const fs::path p = scratch_dir() / name;
  io::write_text_file(p.string(), content);
  return p.string();
}

}  // namespace

TEST_CASE("doubles format at full precision with readable specials", "[io]") {
  for (double v : {0.1, 1.0 / 3.0, 0.5, 123456.789, 1e-300, -2.75e17}) {
    const std::string text = io::fmt_double(v);
    CHECK(std::stod(text) == v);  // 17 significant digits round-trip exactly
  }
  CHECK(io::fmt_double(1.5) == "1.5");
  CHECK(io::fmt_double(std::nan("")) == "nan");
  CHECK(io::fmt_double(HUGE_VAL) == "inf");
  CHECK(io::fmt_double(-HUGE_VAL) == "-inf");
  CHECK(io::fmt_json_double(std::nan("")) == "null");
  CHECK(io::fmt_json_double(0.25) == "0.25");
}

TEST_CASE("triples survive a serialization round trip byte for byte", "[io]") {
  for (const FractalTriple& t :
       {fracform::build_counterexample(), fracform::build_gasket(3)}) {
    const std::string text = io::triple_to_json(t);
    const FractalTriple back = io::triple_from_json(io::parse_json_text(text, "triple"));
    CHECK(back == t);
    CHECK(io::triple_to_json(back) == text);
  }
}

TEST_CASE("forms and weights round trip with exact coefficients", "[io]") {
  const DirichletForm e = fracform::sample_form(20, 3, 5);
  const std::string text = io::form_to_json(e);
  const DirichletForm back = io::form_from_json(io::parse_json_text(text, "form"));
  CHECK(back.n_boundary == 20);
  CHECK(back.coefficients == e.coefficients);
  CHECK(io::form_to_json(back) == text);

  const WeightVector r = fracform::sample_weights(20, 3, 6);
  const std::string wtext = io::weights_to_json(r);
  CHECK(io::weights_from_json(io::parse_json_text(wtext, "weights")) == r);
}

TEST_CASE("malformed documents raise parse errors", "[io]") {
  CHECK_THROWS_AS(io::parse_json_text("{oops", "doc"), io::ParseError);
  CHECK_THROWS_AS(io::weights_from_json(io::parse_json_text("{}", "w")), io::ParseError);
  CHECK_THROWS_AS(io::weights_from_json(io::parse_json_text(R"({"r": []})", "w")),
                  io::ParseError);
  CHECK_THROWS_AS(io::weights_from_json(io::parse_json_text(R"({"r": [1, -2]})", "w")),
                  io::ParseError);

  const auto form = [](const char* text) {
    return io::form_from_json(io::parse_json_text(text, "form"));
  };
  CHECK_THROWS_AS(form(R"({"n_boundary": 2})"), io::ParseError);
  CHECK_THROWS_AS(form(R"({"n_boundary": 2, "coefficients": []})"), io::ParseError);
  CHECK_THROWS_AS(
      form(R"({"n_boundary": 2, "coefficients": [{"pair": [1, 2], "c": -1.0}]})"),
      io::ParseError);
  CHECK_THROWS_AS(
      form(R"({"n_boundary": 3, "coefficients": [{"pair": [1, 2], "c": 1.0},
               {"pair": [2, 1], "c": 1.0}, {"pair": [2, 3], "c": 1.0}]})"),
      io::ParseError);  // duplicate pair
  CHECK_THROWS_AS(
      form(R"({"n_boundary": 2, "coefficients": [{"pair": [1, 5], "c": 1.0}]})"),
      io::ParseError);  // label out of range

  CHECK_THROWS_AS(io::read_text_file((scratch_dir() / "missing.json").string()),
                  io::ParseError);
}

TEST_CASE("trace serialization uses the fixed column layout", "[io]") {
  const auto trace = fracform::iterate(fracform::counterexample(), DirichletForm::unit(20),
                                       fracform::unit_weights(20), 3, 1e-10);
  const std::string csv = io::trace_to_csv(trace);
  REQUIRE(csv.rfind("step,residual,M,m,phi,coeff_sum\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 records
  CHECK(csv.find("\n0,nan,") != std::string::npos);      // step zero has no residual
}

TEST_CASE("certificate serialization is stable and ordered", "[io]") {
  const auto cert =
      fracform::make_certificate(DirichletForm::unit(20), fracform::unit_weights(20));
  const std::string text = io::certificate_to_json(cert);
  const char* keys[] = {"\"rbar\"",       "\"hbar\"",       "\"lhat\"",
                        "\"near_ratio\"", "\"far_ratio\"",  "\"near_margin\"",
                        "\"far_margin\"", "\"far_ratios\""};
  std::size_t prev = 0;
  for (const char* key : keys) {
    const std::size_t at = text.find(key);
    REQUIRE(at != std::string::npos);
    CHECK(at > prev);
    prev = at;
  }
  CHECK(io::certificate_to_json(cert) == text);
}

TEST_CASE("command line reports its version", "[cli]") {
  const auto res = run_cli("--version");
  CHECK(res.exit_code == 0);
  CHECK(res.out == "fracform 0.1.0\n");
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("bogus-subcommand").exit_code == 1);
}

TEST_CASE("triple subcommands build and validate", "[cli]") {
  const auto built = run_cli("triple build --kind counterexample");
  REQUIRE(built.exit_code == 0);
  const FractalTriple t = io::triple_from_json(io::parse_json_text(built.out, "cli"));
  CHECK(t == fracform::counterexample());
  CHECK(run_cli("triple build --kind counterexample").out == built.out);

  CHECK(run_cli("triple build --kind counterexample --n 19").exit_code == 1);

  const auto gasket = run_cli("triple build --kind gasket --n 4");
  REQUIRE(gasket.exit_code == 0);
  CHECK(io::triple_from_json(io::parse_json_text(gasket.out, "cli")) ==
        fracform::build_gasket(4));

  const std::string good = write_scratch("ce.json", built.out);
  const auto ok = run_cli("triple validate " + good);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out == "valid\n");

  FractalTriple bad = fracform::build_counterexample();
  bad.cell_maps[0][2] = 5;  // foreign corner
  const std::string bad_path = write_scratch("bad.json", io::triple_to_json(bad));
  const auto rejected = run_cli("triple validate " + bad_path);
  CHECK(rejected.exit_code == 2);
  CHECK(rejected.out.find("AxiomB") != std::string::npos);
  CHECK(rejected.out.find("violation") != std::string::npos);

  CHECK(run_cli("triple validate " + (scratch_dir() / "nope.json").string()).exit_code == 2);
}

TEST_CASE("renormalization pipeline through the command line", "[cli]") {
  const std::string g2 = write_scratch("g2.json", io::triple_to_json(fracform::build_gasket(2)));
  DirichletForm seg(2);
  seg.c(1, 2) = 4.0;
  const std::string form = write_scratch("seg.json", io::form_to_json(seg));
  const std::string weights = write_scratch("w2.json", io::weights_to_json({2.0, 3.0}));

  SECTION("series conductance formula") {
    const auto res = run_cli("renorm --triple " + g2 + " --form " + form + " --weights " + weights);
    REQUIRE(res.exit_code == 0);
    const DirichletForm out = io::form_from_json(io::parse_json_text(res.out, "cli"));
    CHECK(out.c(1, 2) == Catch::Approx(4.0 * 6.0 / 5.0).epsilon(1e-13));
  }

  SECTION("every input is mandatory") {
    CHECK(run_cli("renorm --triple " + g2 + " --form " + form).exit_code == 1);
    CHECK(run_cli("renorm --triple " + g2 + " --weights " + weights).exit_code == 1);
    CHECK(run_cli("renorm --form " + form + " --weights " + weights).exit_code == 1);
  }

  SECTION("parse failures exit with the validation code") {
    const std::string junk = write_scratch("junk.json", "{not json");
    CHECK(run_cli("renorm --triple " + junk + " --form " + form + " --weights " + weights)
              .exit_code == 2);
  }

  SECTION("conductivity evaluation") {
    const std::string k3 =
        write_scratch("k3.json", io::form_to_json(DirichletForm::unit(3)));
    const auto res = run_cli("form conductivity --form " + k3 + " --pair 1,2");
    CHECK(res.exit_code == 0);
    CHECK(res.out == "1.5\n");
    CHECK(run_cli("form conductivity --form " + k3 + " --pair 1").exit_code == 1);
  }
}

TEST_CASE("iteration through the command line", "[cli]") {
  const std::string g3 = write_scratch("g3.json", io::triple_to_json(fracform::build_gasket(3)));
  const std::string unit3 =
      write_scratch("unit3.json", io::form_to_json(DirichletForm::unit(3)));
  const std::string r53 =
      write_scratch("r53.json", io::weights_to_json(WeightVector(3, 5.0 / 3.0)));

  const fs::path trace_path = scratch_dir() / "trace.csv";
  const auto res = run_cli("iterate --triple " + g3 + " --form " + unit3 + " --weights " + r53 +
                           " --trace " + trace_path.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("converged: true") != std::string::npos);
  CHECK(res.out.find("steps: 1") != std::string::npos);
  const std::string csv = io::read_text_file(trace_path.string());
  CHECK(csv.rfind("step,residual,M,m,phi,coeff_sum\n", 0) == 0);

  SECTION("numerical collapse surfaces as exit code 3") {
    const std::string ce =
        write_scratch("ce2.json", io::triple_to_json(fracform::build_counterexample()));
    const std::string unit20 =
        write_scratch("unit20.json", io::form_to_json(DirichletForm::unit(20)));
    const std::string ones =
        write_scratch("ones20.json", io::weights_to_json(fracform::unit_weights(20)));
    const auto collapse = run_cli("iterate --triple " + ce + " --form " + unit20 +
                                  " --weights " + ones + " --max-steps 200 --tol 1e-30");
    CHECK(collapse.exit_code == 3);
  }
}

TEST_CASE("search and certify emit deterministic reports", "[cli]") {
  SECTION("interval sweep finds eigenforms everywhere") {
    const std::string g2 =
        write_scratch("g2b.json", io::triple_to_json(fracform::build_gasket(2)));
    const auto res = run_cli("search --triple " + g2 + " --grid 3 --max-steps 50");
    REQUIRE(res.exit_code == 0);
    const auto rep = io::parse_json_text(res.out, "report");
    CHECK(rep.at("n_grid").get<int>() == 4);
    CHECK(rep.at("best").at("residual").get<double>() < 1e-10);
    CHECK(run_cli("search --triple " + g2 + " --grid 3 --max-steps 50").out == res.out);
  }

  SECTION("certification batch") {
    const auto res = run_cli("certify --samples 4 --seed 9");
    REQUIRE(res.exit_code == 0);
    const auto doc = io::parse_json_text(res.out, "certs");
    CHECK(doc.at("all_ok").get<bool>());
    CHECK(doc.at("samples").get<int>() == 4);
    CHECK(doc.at("certificates").size() == 4u);
    CHECK(run_cli("certify --samples 4 --seed 9").out == res.out);

    const auto empty = run_cli("certify --samples 0");
    CHECK(empty.exit_code == 0);
    CHECK(io::parse_json_text(empty.out, "certs").at("certificates").empty());
  }
}

TEST_CASE("explanations cover the obstruction vocabulary", "[cli]") {
  for (const char* topic :
       {"rbar", "near", "near-bound", "far", "far-bound", "phi", "lyapunov", "obstruction"}) {
    const auto res = run_cli(std::string("explain ") + topic);
    CHECK(res.exit_code == 0);
    CHECK(res.out.size() > 40u);
  }
  CHECK(run_cli("explain nonsense").exit_code == 1);
}
