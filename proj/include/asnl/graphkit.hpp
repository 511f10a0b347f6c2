#pragma once

// Combinatorial tools: bilateration orderings, triangulation and acuteness
// tests, maximal cliques, chordality, aggregate sparsity patterns and clique
// selector matrices.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <optional>
#include <vector>

#include "asnl/core.hpp"

namespace asnl {

struct BilaterationStep {
  int vertex = 0;
  /// Already-placed vertices the new vertex is joined to (at least two).
  std::vector<int> attachments;
};

struct BilaterationOrdering {
  std::array<int, 3> seed{};
  std::vector<BilaterationStep> additions;

  /// Seed vertices followed by added vertices, in placement order.
  std::vector<int> vertex_order() const;
};

/// Greedy closure from each 3-clique seed in lexicographic order (or only from
/// `required_seed`). A vertex is absorbed once it has two placed neighbours;
/// the lowest such id goes first. Attachments list every placed neighbour.
std::optional<BilaterationOrdering> find_bilateration_ordering(
    const Graph& g, std::optional<std::array<int, 3>> required_seed = std::nullopt);

/// Same closure, but a seed must be a non-degenerate triangle and a vertex is
/// only absorbed when the directions to its placed neighbours are not all
/// collinear. The result passes verify_nondegenerate_ordering.
std::optional<BilaterationOrdering> find_nondegenerate_ordering(const Framework& fw,
                                                                double tol = 1e-10);

/// Closure in which every new vertex must attach to two adjacent placed
/// vertices. Attachments hold exactly that adjacent pair.
std::optional<BilaterationOrdering> find_triangulated_ordering(const Graph& g);

/// Seed is a 3-clique, every attachment is an edge to an already placed
/// vertex, each addition has two or more attachments, and every vertex
/// appears exactly once.
bool verify_ordering_structure(const Graph& g, const BilaterationOrdering& ord);

bool verify_nondegenerate_ordering(const Framework& fw, const BilaterationOrdering& ord,
                                   double tol = 1e-10);

/// Triangulated ordering exists and every 3-clique has all three cosines in
/// (eps, 1 - eps).
bool is_acute_triangulated(const Framework& fw, double eps = 1e-9);

/// All 3-cliques (i < j < k), lexicographic.
std::vector<std::array<int, 3>> triangles(const Graph& g);

using CliqueSet = std::vector<std::vector<int>>;

/// Bron-Kerbosch with Tomita pivoting. Each clique is sorted and the list is
/// sorted lexicographically.
CliqueSet maximal_cliques(const Graph& g);

struct ChordalityResult {
  bool chordal = false;
  /// Perfect elimination ordering when chordal.
  std::vector<int> elimination_order;
};

/// Lexicographic BFS followed by a perfect-elimination check.
ChordalityResult is_chordal(const Graph& g);

/// Chordal supergraph obtained by greedy minimum-degree elimination (lowest
/// id on ties): eliminating a vertex joins its remaining neighbours. Returns
/// the input unchanged when it is already chordal.
Graph chordal_extension(const Graph& g);

struct SparsityPattern {
  Graph graph;
  Eigen::MatrixXd aggregate;
};

/// Sum of |M_i| and the graph of its off-diagonal support above `threshold`.
/// With `extend_first_rows`, indices 0 and 1 are joined to every index >= 2.
SparsityPattern sparsity_pattern(const std::vector<Eigen::SparseMatrix<double>>& matrices,
                                 bool extend_first_rows, double threshold = 1e-14);

/// |C| x n selector: row r has a single one in column clique[r].
Eigen::MatrixXd clique_selector(const std::vector<int>& clique, int n);

}  // namespace asnl
