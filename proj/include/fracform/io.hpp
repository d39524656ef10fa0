#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fracform/eigenflow.hpp"
#include "fracform/form.hpp"
#include "fracform/triple.hpp"

namespace fracform::io {

/// Raised when a file's content does not match the expected schema. Carries
/// a human-readable message naming the offending field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Canonical number formatting
//
// Every float is written with %.17g so that the decimal text round-trips to
// the exact same double on re-read; emitted files are therefore byte-stable
// across runs and platforms. JSON has no NaN/Inf literals, so non-finite
// values become null (and "nan" in CSV).
// ---------------------------------------------------------------------------

inline std::string fmt_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_json_double(double v) {
  return std::isfinite(v) ? fmt_double(v) : "null";
}

inline void append_double_array(std::string& out, const std::vector<double>& xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt_json_double(xs[i]);
  }
  out += ']';
}

// ---------------------------------------------------------------------------
// Serializers
// ---------------------------------------------------------------------------

inline std::string triple_to_json(const FractalTriple& t) {
  std::string out;
  out += "{\n";
  out += "  \"n_boundary\": " + std::to_string(t.n_boundary) + ",\n";
  out += "  \"n_cells\": " + std::to_string(t.n_cells) + ",\n";
  out += "  \"n_level1\": " + std::to_string(t.n_level1) + ",\n";
  out += "  \"cells\": [\n";
  for (std::size_t i = 0; i < t.cell_maps.size(); ++i) {
    out += "    [";
    for (std::size_t h = 0; h < t.cell_maps[i].size(); ++h) {
      if (h) out += ", ";
      out += std::to_string(t.cell_maps[i][h]);
    }
    out += i + 1 < t.cell_maps.size() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

inline std::string form_to_json(const DirichletForm& e) {
  std::string out;
  out += "{\n";
  out += "  \"n_boundary\": " + std::to_string(e.n_boundary) + ",\n";
  out += "  \"coefficients\": [\n";
  const int np = pair_count(e.n_boundary);
  for (int idx = 0; idx < np; ++idx) {
    const auto [j1, j2] = pair_from_index(e.n_boundary, idx);
    out += "    {\"pair\": [" + std::to_string(j1) + ", " + std::to_string(j2) +
           "], \"c\": " + fmt_json_double(e.coefficients[static_cast<std::size_t>(idx)]) +
           (idx + 1 < np ? "},\n" : "}\n");
  }
  out += "  ]\n}\n";
  return out;
}

inline std::string weights_to_json(const WeightVector& r) {
  std::string out = "{\n  \"r\": ";
  append_double_array(out, r);
  out += "\n}\n";
  return out;
}

inline std::string trace_to_csv(const IterationTrace& trace) {
  std::string out = "step,residual,M,m,phi,coeff_sum\n";
  for (const auto& s : trace.steps) {
    out += std::to_string(s.step) + ',' + fmt_double(s.residual) + ',' +
           fmt_double(s.cond_far_max) + ',' + fmt_double(s.cond_near) + ',' + fmt_double(s.phi) +
           ',' + fmt_double(s.coeff_sum) + '\n';
  }
  return out;
}

inline std::string certificate_to_json(const ObstructionCertificate& cert) {
  std::string out = "{";
  out += "\"rbar\": " + fmt_json_double(cert.rbar_value);
  out += ", \"hbar\": " + std::to_string(cert.hbar);
  out += ", \"lhat\": " + std::to_string(cert.lhat);
  out += ", \"near_ratio\": " + fmt_json_double(cert.near_ratio);
  out += ", \"far_ratio\": " + fmt_json_double(cert.far_ratio);
  out += ", \"near_margin\": " + fmt_json_double(cert.near_margin);
  out += ", \"far_margin\": " + fmt_json_double(cert.far_margin);
  out += ", \"far_ratios\": ";
  append_double_array(out, cert.far_ratios);
  out += "}";
  return out;
}

inline std::string certificates_to_json(const WeightVector& r, std::uint64_t seed, double tol,
                                        const std::vector<ObstructionCertificate>& certs) {
  std::string out;
  out += "{\n";
  out += "  \"weights\": ";
  append_double_array(out, r);
  out += ",\n";
  out += "  \"samples\": " + std::to_string(certs.size()) + ",\n";
  out += "  \"seed\": " + std::to_string(seed) + ",\n";
  out += "  \"tol\": " + fmt_json_double(tol) + ",\n";

  bool all_ok = true;
  std::string body;
  for (std::size_t s = 0; s < certs.size(); ++s) {
    const auto issues = certificate_issues(certs[s], r, tol);
    all_ok = all_ok && issues.empty();
    body += "    {\"sample\": " + std::to_string(s) +
            ", \"ok\": " + (issues.empty() ? "true" : "false") + ", \"issues\": [";
    for (std::size_t i = 0; i < issues.size(); ++i) {
      if (i) body += ", ";
      body += '"' + issues[i] + '"';
    }
    body += "], \"certificate\": " + certificate_to_json(certs[s]) + '}';
    body += s + 1 < certs.size() ? ",\n" : "\n";
  }
  out += std::string("  \"all_ok\": ") + (all_ok ? "true" : "false") + ",\n";
  out += "  \"certificates\": [\n" + body + "  ]\n}\n";
  return out;
}

inline std::string report_to_json(const SearchReport& rep) {
  std::string out;
  out += "{\n";
  out += "  \"grid_depth\": " + std::to_string(rep.grid_depth) + ",\n";
  out += "  \"max_steps\": " + std::to_string(rep.max_steps) + ",\n";
  out += "  \"tol\": " + fmt_json_double(rep.tol) + ",\n";
  out += "  \"n_cells\": " + std::to_string(rep.n_cells) + ",\n";
  out += std::string("  \"counterexample_triple\": ") +
         (rep.counterexample_triple ? "true" : "false") + ",\n";
  out += "  \"n_grid\": " + std::to_string(rep.records.size()) + ",\n";
  out += "  \"best\": ";
  if (rep.best_index < 0) {
    out += "null,\n";
  } else {
    out += "{\n";
    out += "    \"index\": " + std::to_string(rep.best_index) + ",\n";
    out += "    \"residual\": " + fmt_json_double(rep.best_residual) + ",\n";
    out += "    \"r\": ";
    append_double_array(out, rep.best_r);
    out += ",\n    \"coefficients\": ";
    append_double_array(out, rep.best_coefficients);
    out += "\n  },\n";
  }
  out += "  \"records\": [\n";
  for (std::size_t i = 0; i < rep.records.size(); ++i) {
    const auto& rec = rep.records[i];
    out += "    {\"index\": " + std::to_string(rec.index) + ", \"r\": ";
    append_double_array(out, rec.r);
    out += ", \"steps\": " + std::to_string(rec.steps);
    out += std::string(", \"converged\": ") + (rec.converged ? "true" : "false");
    out += std::string(", \"failed\": ") + (rec.failed ? "true" : "false");
    out += ", \"error\": \"" + rec.error + '"';
    out += ", \"best_residual\": " + fmt_json_double(rec.best_residual);
    out += ", \"final_residual\": " + fmt_json_double(rec.final_residual);
    out += ", \"eigenvalue_estimate\": " + fmt_json_double(rec.eigenvalue_estimate);
    out += ", \"certificate\": ";
    out += rec.certificate ? certificate_to_json(*rec.certificate) : std::string("null");
    out += '}';
    out += i + 1 < rep.records.size() ? ",\n" : "\n";
  }
  out += "  ]\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

inline nlohmann::json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& err) {
    throw ParseError(what + ": " + err.what());
  }
}

inline int require_int(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number_integer())
    throw ParseError(std::string("missing or non-integer field \"") + key + "\"");
  return j[key].get<int>();
}

/// Structural parse only; axiom checking is left to the caller so that a
/// validator can report every violation instead of stopping at the first.
inline FractalTriple triple_from_json(const nlohmann::json& j) {
  FractalTriple t;
  t.n_boundary = require_int(j, "n_boundary");
  t.n_cells = require_int(j, "n_cells");
  t.n_level1 = require_int(j, "n_level1");
  if (!j.contains("cells") || !j["cells"].is_array())
    throw ParseError("missing or non-array field \"cells\"");
  for (const auto& row : j["cells"]) {
    if (!row.is_array()) throw ParseError("each entry of \"cells\" must be an array of ids");
    std::vector<int> ids;
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw ParseError("cell entries must be integers");
      ids.push_back(v.get<int>());
    }
    t.cell_maps.push_back(std::move(ids));
  }
  return t;
}

inline DirichletForm form_from_json(const nlohmann::json& j) {
  const int n = require_int(j, "n_boundary");
  if (n < 2) throw ParseError("\"n_boundary\" must be at least 2");
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw ParseError("missing or non-array field \"coefficients\"");

  DirichletForm e(n);
  std::vector<bool> seen(static_cast<std::size_t>(pair_count(n)), false);
  for (const auto& entry : j["coefficients"]) {
    if (!entry.is_object() || !entry.contains("pair") || !entry.contains("c") ||
        !entry["pair"].is_array() || entry["pair"].size() != 2 ||
        !entry["pair"][0].is_number_integer() || !entry["pair"][1].is_number_integer() ||
        !entry["c"].is_number())
      throw ParseError("each coefficient entry must be {\"pair\": [j1, j2], \"c\": number}");
    const int j1 = entry["pair"][0].get<int>();
    const int j2 = entry["pair"][1].get<int>();
    int idx = 0;
    try {
      idx = pair_index(n, j1, j2);
    } catch (const std::invalid_argument& err) {
      throw ParseError(std::string("bad pair [") + std::to_string(j1) + ", " +
                       std::to_string(j2) + "]: " + err.what());
    }
    if (seen[static_cast<std::size_t>(idx)])
      throw ParseError("duplicate pair [" + std::to_string(j1) + ", " + std::to_string(j2) + "]");
    seen[static_cast<std::size_t>(idx)] = true;
    const double c = entry["c"].get<double>();
    if (!std::isfinite(c) || c < 0.0)
      throw ParseError("coefficient at pair [" + std::to_string(j1) + ", " + std::to_string(j2) +
                       "] must be finite and nonnegative");
    e.coefficients[static_cast<std::size_t>(idx)] = c;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) {
      const auto [j1, j2] = pair_from_index(n, static_cast<int>(i));
      throw ParseError("missing pair [" + std::to_string(j1) + ", " + std::to_string(j2) + "]");
    }
  return e;
}

inline WeightVector weights_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("r") || !j["r"].is_array())
    throw ParseError("missing or non-array field \"r\"");
  WeightVector r;
  for (const auto& v : j["r"]) {
    if (!v.is_number()) throw ParseError("weights must be numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x <= 0.0) throw ParseError("weights must be finite and positive");
    r.push_back(x);
  }
  if (r.empty()) throw ParseError("\"r\" must be nonempty");
  return r;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ParseError("cannot read " + path);
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("cannot write " + path);
}

inline FractalTriple read_triple(const std::string& path) {
  auto t = triple_from_json(parse_json_text(read_text_file(path), path));
  validate_triple(t);
  return t;
}

inline FractalTriple read_triple_unchecked(const std::string& path) {
  return triple_from_json(parse_json_text(read_text_file(path), path));
}

inline DirichletForm read_form(const std::string& path) {
  return form_from_json(parse_json_text(read_text_file(path), path));
}

inline WeightVector read_weights(const std::string& path) {
  return weights_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace fracform::io
