#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fracform {

/// Combinatorial model of a fractal triple (V0, V1, Psi).
///
/// Boundary vertices carry global ids 1..n_boundary (id j is the corner P_j),
/// level-1 vertices carry global ids 1..n_level1, and each cell map psi_i is
/// stored as the list of N global ids cell_maps[i-1], whose h-th entry is
/// psi_i(P_h). A valid triple satisfies:
///
///   a) cell j fixes its own corner: psi_j(P_j) = P_j for j = 1..N;
///   b) no other cell touches a corner: a boundary id j may only appear as
///      entry j of cell j;
///   c) the graph on 1..n_level1 whose edges are all pairs lying in a common
///      cell is connected;
///   plus injectivity of every cell map and exact coverage of 1..n_level1.
struct FractalTriple {
  int n_boundary = 0;                       // N >= 2
  int n_cells = 0;                          // k >= N
  int n_level1 = 0;                         // #V1
  std::vector<std::vector<int>> cell_maps;  // [cell-1][label-1] -> global id

  /// psi_i(P_h), with 1-based cell index and boundary label.
  int vertex(int cell, int label) const { return cell_maps[cell - 1][label - 1]; }

  bool operator==(const FractalTriple&) const = default;
};

struct Violation {
  enum class Kind { AxiomA, AxiomB, AxiomC, NotInjective, CoverageGap };
  Kind kind;
  int cell;    // 1-based offending cell, or 0
  int vertex;  // offending global id or boundary label, or 0
  std::string message;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::AxiomA: return "AxiomA";
    case Violation::Kind::AxiomB: return "AxiomB";
    case Violation::Kind::AxiomC: return "AxiomC";
    case Violation::Kind::NotInjective: return "NotInjective";
    case Violation::Kind::CoverageGap: return "CoverageGap";
  }
  return "?";
}

class TripleValidationError : public std::runtime_error {
 public:
  explicit TripleValidationError(std::vector<Violation> violations)
      : std::runtime_error(compose(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  static std::string compose(const std::vector<Violation>& vs) {
    std::string msg = "invalid fractal triple (" + std::to_string(vs.size()) + " violation(s))";
    for (const auto& v : vs) {
      msg += "\n  ";
      msg += to_string(v.kind);
      msg += ": ";
      msg += v.message;
    }
    return msg;
  }

  std::vector<Violation> violations_;
};

/// Reduces x modulo m into 1..m.
inline int mod1(int x, int m) {
  int y = (x - 1) % m;
  if (y < 0) y += m;
  return y + 1;
}

namespace detail {

// Disjoint-set over 0..n-1, used for the axiom c) connectivity check.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[b] = a;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace detail

/// Checks all triple invariants and reports every violation found, not just
/// the first; an empty result means the triple is valid. Structurally
/// malformed input (wrong list sizes, N < 2, k < N) throws invalid_argument
/// since it cannot be scanned meaningfully.
inline std::vector<Violation> check_triple(const FractalTriple& t) {
  if (t.n_boundary < 2) throw std::invalid_argument("fractal triple requires n_boundary >= 2");
  if (t.n_cells < t.n_boundary)
    throw std::invalid_argument("fractal triple requires n_cells >= n_boundary");
  if (static_cast<int>(t.cell_maps.size()) != t.n_cells)
    throw std::invalid_argument("cell_maps must hold n_cells lists");
  for (const auto& cell : t.cell_maps)
    if (static_cast<int>(cell.size()) != t.n_boundary)
      throw std::invalid_argument("every cell map must list n_boundary vertices");

  std::vector<Violation> out;
  const int n = t.n_boundary;
  const int k = t.n_cells;

  bool ids_in_range = true;
  for (int i = 1; i <= k; ++i) {
    std::set<int> seen;
    for (int h = 1; h <= n; ++h) {
      const int id = t.vertex(i, h);
      if (id < 1 || id > t.n_level1) {
        ids_in_range = false;
        out.push_back({Violation::Kind::CoverageGap, i, id,
                       "cell " + std::to_string(i) + " entry " + std::to_string(h) +
                           " has id " + std::to_string(id) + " outside 1.." +
                           std::to_string(t.n_level1)});
        continue;
      }
      if (!seen.insert(id).second)
        out.push_back({Violation::Kind::NotInjective, i, id,
                       "cell " + std::to_string(i) + " repeats id " + std::to_string(id)});
    }
  }

  // Coverage: the images of the cell maps must exhaust 1..n_level1.
  if (ids_in_range) {
    std::vector<bool> covered(t.n_level1 + 1, false);
    for (int i = 1; i <= k; ++i)
      for (int h = 1; h <= n; ++h) covered[t.vertex(i, h)] = true;
    for (int id = 1; id <= t.n_level1; ++id)
      if (!covered[id])
        out.push_back({Violation::Kind::CoverageGap, 0, id,
                       "id " + std::to_string(id) + " is not in the image of any cell map"});
  }

  // Axiom a): cell j keeps its own corner in place.
  for (int j = 1; j <= n; ++j)
    if (t.vertex(j, j) != j)
      out.push_back({Violation::Kind::AxiomA, j, t.vertex(j, j),
                     "cell " + std::to_string(j) + " maps corner " + std::to_string(j) +
                         " to id " + std::to_string(t.vertex(j, j)) + " instead of itself"});

  // Axiom b): a boundary id j may appear only as entry j of cell j.
  for (int i = 1; i <= k; ++i)
    for (int h = 1; h <= n; ++h) {
      const int id = t.vertex(i, h);
      if (id >= 1 && id <= n && !(i == id && h == id))
        out.push_back({Violation::Kind::AxiomB, i, id,
                       "corner " + std::to_string(id) + " appears in cell " + std::to_string(i) +
                           " at entry " + std::to_string(h)});
    }

  // Axiom c): the union of cell cliques must connect V1.
  if (ids_in_range && t.n_level1 > 0) {
    detail::UnionFind uf(t.n_level1);
    for (int i = 1; i <= k; ++i)
      for (int h = 2; h <= n; ++h) uf.unite(t.vertex(i, 1) - 1, t.vertex(i, h) - 1);
    const int root = uf.find(0);
    for (int id = 2; id <= t.n_level1; ++id)
      if (uf.find(id - 1) != root) {
        out.push_back({Violation::Kind::AxiomC, 0, id,
                       "id " + std::to_string(id) +
                           " cannot be reached from id 1 through cell edges"});
        break;  // one witness per component split is enough
      }
  }

  return out;
}

/// Validates a candidate triple, returning it unchanged when all invariants
/// hold and throwing TripleValidationError (with the full violation list)
/// otherwise.
inline FractalTriple validate_triple(FractalTriple raw) {
  auto violations = check_triple(raw);
  if (!violations.empty()) throw TripleValidationError(std::move(violations));
  return raw;
}

/// Corner label opposite bookkeeping for the twenty-cell counterexample: cell
/// i carries its two glue points at labels sigma(i) and sigma(i) + 10, where
/// sigma(i) = i - 1 for even i and i - 9 for odd i (mod 20, in 1..20).
inline int sigma(int i) {
  i = mod1(i, 20);
  return mod1(i % 2 == 0 ? i - 1 : i - 9, 20);
}

/// Builds the twenty-cell ring triple on which no G-eigenform exists. Twenty
/// cells with twenty corners each sit in a cycle; consecutive cells are glued
/// at a single point Q_i, alternating between the adjacent-corner rule
/// psi_i(P_{i+1}) = psi_{i+1}(P_i) (i odd) and the far-corner rule
/// psi_i(P_{i+9}) = psi_{i+1}(P_{i-8}) (i even). Canonical numbering: ids
/// 1..20 are the corners P_j, ids 21..40 are the glue points Q_1..Q_20, and
/// private slots fill 41..380 in (cell, label) scan order.
inline FractalTriple build_counterexample() {
  constexpr int n = 20;
  FractalTriple t;
  t.n_boundary = n;
  t.n_cells = n;
  t.cell_maps.assign(n, std::vector<int>(n, 0));

  const auto qid = [](int m) { return 20 + mod1(m, 20); };
  for (int i = 1; i <= n; ++i) {
    t.cell_maps[i - 1][i - 1] = i;                          // psi_i(P_i) = P_i
    t.cell_maps[i - 1][sigma(i) - 1] = qid(i - 1);          // Q_{i-1}
    t.cell_maps[i - 1][mod1(sigma(i) + 10, n) - 1] = qid(i);  // Q_i
  }

  int next = 41;
  for (int i = 1; i <= n; ++i)
    for (int h = 1; h <= n; ++h)
      if (t.cell_maps[i - 1][h - 1] == 0) t.cell_maps[i - 1][h - 1] = next++;
  t.n_level1 = next - 1;  // 380

  return t;
}

/// Builds the n-cell gasket triple: n corners, n cells, and one shared
/// midpoint per cell pair (psi_i(P_j) = psi_j(P_i) for i != j). n = 2 is the
/// interval split in two, n = 3 the Sierpinski gasket combinatorics.
inline FractalTriple build_gasket(int n) {
  if (n < 2) throw std::invalid_argument("gasket requires n >= 2");
  FractalTriple t;
  t.n_boundary = n;
  t.n_cells = n;
  t.cell_maps.assign(n, std::vector<int>(n, 0));

  for (int i = 1; i <= n; ++i) t.cell_maps[i - 1][i - 1] = i;
  int next = n + 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      t.cell_maps[i - 1][j - 1] = next;
      t.cell_maps[j - 1][i - 1] = next;
      ++next;
    }
  t.n_level1 = next - 1;  // n + n(n-1)/2

  return t;
}

/// The cached canonical counterexample instance.
inline const FractalTriple& counterexample() {
  static const FractalTriple t = build_counterexample();
  return t;
}

inline bool is_counterexample(const FractalTriple& t) { return t == counterexample(); }

/// Shared-vertex lists per unordered cell pair.
struct CellAdjacency {
  int n_cells = 0;
  std::map<std::pair<int, int>, std::vector<int>> shared_ids;  // key {i,i'}, i < i'

  /// Ids shared by cells i and j (possibly empty), order-insensitive.
  const std::vector<int>& shared(int i, int j) const {
    static const std::vector<int> empty;
    auto it = shared_ids.find(std::minmax(i, j));
    return it == shared_ids.end() ? empty : it->second;
  }
};

inline CellAdjacency cell_adjacency(const FractalTriple& t) {
  std::map<int, std::vector<int>> cells_of;  // id -> cells containing it
  for (int i = 1; i <= t.n_cells; ++i)
    for (int h = 1; h <= t.n_boundary; ++h) cells_of[t.vertex(i, h)].push_back(i);

  CellAdjacency adj;
  adj.n_cells = t.n_cells;
  for (const auto& [id, cells] : cells_of)
    for (std::size_t a = 0; a < cells.size(); ++a)
      for (std::size_t b = a + 1; b < cells.size(); ++b)
        adj.shared_ids[{cells[a], cells[b]}].push_back(id);
  for (auto& [pair, ids] : adj.shared_ids) std::sort(ids.begin(), ids.end());
  return adj;
}

}  // namespace fracform
