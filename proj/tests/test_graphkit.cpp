#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "asnl/graphkit.hpp"
#include "test_support.hpp"

using namespace asnl;
using SparseMat = Eigen::SparseMatrix<double>;

namespace {

// 1-2-3 triangle, 5 joined to 1 and 2, 4 joined to the non-adjacent pair 3, 5.
Graph bilateration_not_triangulated() { return Graph(5, {{0, 1}, {0, 2}, {1, 2}, {0, 4}, {1, 4}, {2, 3}, {3, 4}}); }

// Edges 12, 13, 23, 14, 34, 25, 35 (1-based).
Graph three_clique_graph() { return Graph(5, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {2, 3}, {1, 4}, {2, 4}}); }

Graph four_cycle() { return Graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}); }

Graph random_graph(CounterRng& rng, int n, double p) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) g.add_edge(i, j);
  return g;
}

bool is_perfect_elimination(const Graph& g, const std::vector<int>& order) {
  std::vector<int> pos(static_cast<std::size_t>(g.size()));
  for (std::size_t k = 0; k < order.size(); ++k) pos[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
  for (int v : order) {
    std::vector<int> later;
    for (int w : g.neighbors(v))
      if (pos[static_cast<std::size_t>(w)] > pos[static_cast<std::size_t>(v)]) later.push_back(w);
    if (!asnl_test::is_clique(g, later)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("bilateration ordering examples") {
  const auto k3 = find_bilateration_ordering(Graph(3, {{0, 1}, {0, 2}, {1, 2}}));
  REQUIRE(k3);
  CHECK(k3->seed == std::array<int, 3>{0, 1, 2});
  CHECK(k3->additions.empty());
  CHECK_FALSE(find_bilateration_ordering(Graph(4, {{0, 1}, {0, 2}, {0, 3}})));

  CounterRng rng(7);
  for (int t = 0; t < 50; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 4 + static_cast<int>(rng.below(15)), 2);
    const auto ord = find_bilateration_ordering(fw.graph);
    REQUIRE(ord);
    CHECK(verify_ordering_structure(fw.graph, *ord));
    CHECK(ord->vertex_order().size() == static_cast<std::size_t>(fw.size()));
  }
}

TEST_CASE("bilateration ordering honours a required seed") {
  const Graph g = bilateration_not_triangulated();
  const auto ord = find_bilateration_ordering(g, std::array<int, 3>{0, 1, 4});
  REQUIRE(ord);
  CHECK(ord->seed == std::array<int, 3>{0, 1, 4});
  CHECK(verify_ordering_structure(g, *ord));
  CHECK_FALSE(find_bilateration_ordering(g, std::array<int, 3>{0, 2, 3}));
}

TEST_CASE("found orderings are always structurally valid") {
  CounterRng rng(13);
  for (int t = 0; t < 300; ++t) {
    const Graph g = random_graph(rng, 3 + static_cast<int>(rng.below(8)), 0.45);
    if (const auto ord = find_bilateration_ordering(g)) CHECK(verify_ordering_structure(g, *ord));
    if (const auto tri = find_triangulated_ordering(g)) {
      CHECK(verify_ordering_structure(g, *tri));
      for (const auto& step : tri->additions) {
        REQUIRE(step.attachments.size() == 2);
        CHECK(g.has_edge(step.attachments[0], step.attachments[1]));
      }
    }
  }
}

TEST_CASE("non-degenerate ordering checks") {
  const Graph k3(3, {{0, 1}, {0, 2}, {1, 2}});
  BilaterationOrdering seed_only;
  seed_only.seed = {0, 1, 2};
  CHECK_FALSE(verify_nondegenerate_ordering(Framework(k3, {{0, 0}, {1, 0}, {2, 0}}), seed_only));
  CHECK(verify_nondegenerate_ordering(Framework(k3, {{0, 0}, {1, 0}, {0, 1}}), seed_only));

  // Vertex 3 at (2,0) sees both attachments (0,0) and (1,0) along one ray.
  const Graph g(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}});
  BilaterationOrdering ord;
  ord.seed = {0, 1, 2};
  ord.additions.push_back({3, {0, 1}});
  CHECK_FALSE(verify_nondegenerate_ordering(Framework(g, {{0, 0}, {1, 0}, {0.5, 1}, {2, 0}}), ord));
  CHECK(verify_nondegenerate_ordering(Framework(g, {{0, 0}, {1, 0}, {0.5, 1}, {2, 1}}), ord));

  CounterRng rng(19);
  for (int t = 0; t < 100; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 4 + static_cast<int>(rng.below(12)), 2);
    const auto nd = find_nondegenerate_ordering(fw);
    REQUIRE(nd);
    CHECK(verify_nondegenerate_ordering(fw, *nd));
  }
}

TEST_CASE("acute triangulation examples") {
  const Graph k3(3, {{0, 1}, {0, 2}, {1, 2}});
  CHECK(is_acute_triangulated(Framework(k3, {{0, 0}, {1, 0}, {0.5, 0.9}})));
  CHECK_FALSE(is_acute_triangulated(Framework(k3, {{0, 0}, {1, 0}, {0, 1}})));
  const Graph b = bilateration_not_triangulated();
  CHECK(find_bilateration_ordering(b));
  CHECK_FALSE(find_triangulated_ordering(b));
  CHECK_FALSE(is_acute_triangulated(Framework(b, {{0, 0}, {1, 0}, {0.5, 0.9}, {1.2, 1.4}, {0.5, -0.8}})));
}

TEST_CASE("triangles of a small graph") {
  CHECK(triangles(three_clique_graph()) ==
        std::vector<std::array<int, 3>>{{0, 1, 2}, {0, 2, 3}, {1, 2, 4}});
  CHECK(triangles(four_cycle()).empty());
}

TEST_CASE("maximal clique examples") {
  CHECK(maximal_cliques(three_clique_graph()) == CliqueSet{{0, 1, 2}, {0, 2, 3}, {1, 2, 4}});
  CHECK(maximal_cliques(Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})) == CliqueSet{{0, 1, 2, 3}});
  CHECK(maximal_cliques(four_cycle()) == CliqueSet{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
}

TEST_CASE("maximal cliques match subset enumeration") {
  CounterRng rng(23);
  for (int t = 0; t < 200; ++t) {
    const Graph g = random_graph(rng, 1 + static_cast<int>(rng.below(10)), rng.uniform(0.1, 0.9));
    CHECK(maximal_cliques(g) == asnl_test::brute_force_cliques(g));
  }
}

TEST_CASE("chordality examples") {
  CHECK_FALSE(is_chordal(four_cycle()).chordal);
  CHECK_FALSE(is_chordal(bilateration_not_triangulated()).chordal);
  const auto c = is_chordal(three_clique_graph());
  CHECK(c.chordal);
  CHECK(is_perfect_elimination(three_clique_graph(), c.elimination_order));
  CHECK(is_chordal(Graph(6, {{0, 1}, {0, 2}, {2, 3}, {2, 4}, {4, 5}})).chordal);
}

TEST_CASE("chordality matches chordless-cycle search") {
  CounterRng rng(29);
  for (int t = 0; t < 300; ++t) {
    const Graph g = random_graph(rng, 1 + static_cast<int>(rng.below(9)), rng.uniform(0.2, 0.8));
    const auto res = is_chordal(g);
    CHECK(res.chordal == asnl_test::brute_force_chordal(g));
    if (res.chordal) CHECK(is_perfect_elimination(g, res.elimination_order));
  }
}

TEST_CASE("chordal extension is a chordal supergraph") {
  CounterRng rng(31);
  for (int t = 0; t < 200; ++t) {
    const Graph g = random_graph(rng, 2 + static_cast<int>(rng.below(8)), rng.uniform(0.2, 0.7));
    const Graph h = chordal_extension(g);
    CHECK(asnl_test::brute_force_chordal(h));
    for (const auto& [i, j] : g.edges()) CHECK(h.has_edge(i, j));
    if (asnl_test::brute_force_chordal(g)) CHECK(h == g);
  }
}

TEST_CASE("sparsity pattern examples") {
  SparseMat m(4, 4);
  m.insert(0, 2) = 1.5;
  m.insert(2, 0) = 1.5;
  const SparsityPattern p = sparsity_pattern(std::vector<SparseMat>{m}, false);
  CHECK(p.graph.edges() == std::vector<Edge>{{0, 2}});
  CHECK(p.aggregate(0, 2) == 1.5);

  // Opposite signs must not cancel in the aggregate.
  SparseMat neg = -m;
  CHECK(sparsity_pattern(std::vector<SparseMat>{m, neg}, false).graph.edge_count() == 1);

  const SparsityPattern ext = sparsity_pattern(std::vector<SparseMat>{SparseMat(4, 4)}, true);
  CHECK(ext.graph.edges() == std::vector<Edge>{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
  CHECK_THROWS_AS(sparsity_pattern(std::vector<SparseMat>{SparseMat(3, 3), SparseMat(4, 4)}, false), DimensionMismatch);
}

TEST_CASE("clique selector examples") {
  CHECK(clique_selector({1}, 3) == Eigen::RowVector3d(0, 1, 0));
  const Eigen::MatrixXd q = clique_selector({0, 2}, 3);
  CHECK(q * Eigen::Vector3d(4, 5, 6) == Eigen::Vector2d(4, 6));
  Eigen::Matrix3d x;
  x << 1, 2, 3, 2, 5, 6, 3, 6, 9;
  Eigen::Matrix2d sub;
  sub << 1, 3, 3, 9;
  CHECK(q * x * q.transpose() == sub);
}

TEST_CASE("clique submatrices of PSD matrices are PSD") {
  CounterRng rng(37);
  for (int t = 0; t < 50; ++t) {
    const int n = 3 + static_cast<int>(rng.below(6));
    const Graph g = asnl_test::random_chordal(rng, n);
    REQUIRE(asnl_test::brute_force_chordal(g));
    Eigen::MatrixXd f(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = rng.normal();
    const Eigen::MatrixXd x = f * f.transpose();
    for (const auto& c : maximal_cliques(g)) {
      const Eigen::MatrixXd q = clique_selector(c, n);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q * x * q.transpose());
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
  }
}
