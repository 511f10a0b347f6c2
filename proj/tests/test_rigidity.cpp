#include <doctest.h>

#include <cmath>

#include "asnl/rigidity.hpp"
#include "test_support.hpp"

using namespace asnl;

namespace {

const Graph k3(3, {{0, 1}, {0, 2}, {1, 2}});

Framework generic_four_cycle(CounterRng& rng) {
  std::vector<Point2> p;
  for (int v = 0; v < 4; ++v) p.emplace_back(rng.uniform(), rng.uniform());
  return {Graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), p};
}

// Trivial motions of the plane stacked as 2n vectors: x/y translation,
// infinitesimal rotation and scaling.
Eigen::MatrixXd trivial_motions(const Framework& fw) {
  const int n = fw.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 4);
  for (int v = 0; v < n; ++v) {
    const Point2& p = fw.config[static_cast<std::size_t>(v)];
    m(2 * v, 0) = 1.0;
    m(2 * v + 1, 1) = 1.0;
    m(2 * v, 2) = -p.y();
    m(2 * v + 1, 2) = p.x();
    m(2 * v, 3) = p.x();
    m(2 * v + 1, 3) = p.y();
  }
  return m;
}

}  // namespace

TEST_CASE("rigidity function examples") {
  const double h = std::sqrt(3.0) / 2.0;
  const Eigen::VectorXd eq = rigidity_function(Framework(k3, {{0, 0}, {1, 0}, {0.5, h}}));
  CHECK(eq.isApprox(Eigen::Vector3d(0.5, 0.5, 0.5), 1e-12));

  // Triples (0,1,2), (1,0,2), (2,0,1): right angle at vertex 0.
  const Eigen::VectorXd right = rigidity_function(Framework(k3, {{0, 0}, {1, 0}, {0, 1}}));
  CHECK(right(0) == doctest::Approx(0.0));
  CHECK(right(1) == doctest::Approx(std::sqrt(0.5)));
  CHECK(right(2) == doctest::Approx(std::sqrt(0.5)));

  const Graph path(3, {{0, 1}, {1, 2}});
  CHECK(rigidity_function(Framework(path, {{0, 0}, {1, 0}, {2, 0}}))(0) == doctest::Approx(-1.0));
  CHECK(rigidity_function(Framework(path, {{0, 0}, {1, 0}, {0.5, 0}}))(0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(rigidity_function(Framework(k3, {{0, 0}, {0, 0}, {1, 1}})), CoincidentPoints);
  CHECK_THROWS_AS(rigidity_jacobian(Framework(k3, {{0, 0}, {0, 0}, {1, 1}})), CoincidentPoints);
}

TEST_CASE("rigidity function matches independent cosines") {
  CounterRng rng(41);
  for (int t = 0; t < 50; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 3 + static_cast<int>(rng.below(10)), 2);
    CHECK((rigidity_function(fw) - asnl_test::cosines(fw.graph, fw.config)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rigidity function is invariant under similarity transforms") {
  CounterRng rng(43);
  for (int t = 0; t < 100; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 3 + static_cast<int>(rng.below(12)), 2);
    const Mat2 rot = random_orthogonal(rng);
    const double scale = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.1, 10.0);
    const Vec2 shift(rng.uniform(-5, 5), rng.uniform(-5, 5));
    std::vector<Point2> moved;
    for (const auto& p : fw.config) moved.push_back(scale * rot * p + shift);
    const Eigen::VectorXd diff = rigidity_function(fw) - rigidity_function(Framework(fw.graph, moved));
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("analytic Jacobian matches central differences") {
  CounterRng rng(47);
  for (int t = 0; t < 100; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 3 + static_cast<int>(rng.below(12)), 2);
    const Eigen::MatrixXd jac = rigidity_jacobian(fw);
    const Eigen::MatrixXd fd = asnl_test::fd_jacobian(fw);
    REQUIRE(jac.rows() == fd.rows());
    REQUIRE(jac.cols() == 2 * fw.size());
    CHECK((jac - fd).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("Jacobian kernel contains the trivial motions") {
  CounterRng rng(53);
  for (int t = 0; t < 100; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 3 + static_cast<int>(rng.below(12)), 2);
    const Eigen::MatrixXd jac = rigidity_jacobian(fw);
    const Eigen::MatrixXd motions = trivial_motions(fw);
    CHECK((jac * motions).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(asnl_test::numeric_rank(motions) == 4);
  }
}

TEST_CASE("generic K3 has Jacobian rank 2") {
  const Framework fw(k3, {{0, 0}, {1, 0}, {0.3, 0.8}});
  CHECK(asnl_test::numeric_rank(asnl_test::fd_jacobian(fw)) == 2);
  const RigidityReport rep = is_infinitesimally_angle_rigid(fw);
  CHECK(rep.jacobian_rank == 2);
  CHECK(rep.required_rank == 2);
  CHECK(rep.infinitesimally_rigid);
  CHECK(rep.tolerance_used == 1e-8);
}

TEST_CASE("rank test examples") {
  CHECK_FALSE(is_infinitesimally_angle_rigid(Framework(k3, {{0, 0}, {1, 0}, {2, 0}})).infinitesimally_rigid);
  CounterRng rng(59);
  for (int t = 0; t < 20; ++t) {
    const Framework cyc = generic_four_cycle(rng);
    CHECK(asnl_test::numeric_rank(asnl_test::fd_jacobian(cyc)) < 4);
    const RigidityReport rep = is_infinitesimally_angle_rigid(cyc);
    CHECK_FALSE(rep.infinitesimally_rigid);
    CHECK(rep.required_rank == 4);
  }
}

TEST_CASE("report invariants") {
  CounterRng rng(61);
  for (int t = 0; t < 100; ++t) {
    const Framework fw = t % 2 == 0 ? asnl_test::grown_framework(rng, 3 + static_cast<int>(rng.below(12)), 2)
                                    : generic_four_cycle(rng);
    const RigidityReport rep = is_infinitesimally_angle_rigid(fw);
    CHECK(rep.infinitesimally_rigid == (rep.jacobian_rank == rep.required_rank));
    CHECK(rep.required_rank == 2 * fw.size() - 4);
    for (std::size_t i = 0; i < rep.singular_values.size(); ++i) {
      CHECK(rep.singular_values[i] >= 0.0);
      if (i > 0) CHECK(rep.singular_values[i] <= rep.singular_values[i - 1]);
    }
  }
}

TEST_CASE("grown frameworks are infinitesimally rigid") {
  CounterRng rng(67);
  for (int t = 0; t < 100; ++t) {
    const int n = 4 + static_cast<int>(rng.below(17));
    const Framework fw = asnl_test::grown_framework(rng, n, 2);
    CHECK(asnl_test::numeric_rank(asnl_test::fd_jacobian(fw), 1e-7) == 2 * n - 4);
    CHECK(is_infinitesimally_angle_rigid(fw).infinitesimally_rigid);
  }
}

TEST_CASE("fixability certification examples") {
  const FixabilityCertificate tri = certify_angle_fixability(Framework(k3, {{0, 0}, {1, 0}, {0.3, 0.8}}));
  CHECK(tri.status == FixabilityStatus::fixable_certified);
  REQUIRE(tri.ordering);
  CHECK(tri.ordering->vertex_order() == std::vector<int>{0, 1, 2});

  // Each new vertex attaches to two earlier vertices along distinct directions.
  const Graph grown(6, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}, {0, 5}, {4, 5}});
  const Framework fig(grown, {{0, 0}, {1, 0}, {0.5, 0.8}, {1.4, 0.9}, {0.9, 1.6}, {-0.2, 1.3}});
  const FixabilityCertificate cert = certify_angle_fixability(fig);
  CHECK(cert.status == FixabilityStatus::fixable_certified);
  REQUIRE(cert.ordering);
  CHECK(verify_nondegenerate_ordering(fig, *cert.ordering));

  CounterRng rng(71);
  const Framework cyc = generic_four_cycle(rng);
  CHECK(asnl_test::numeric_rank(asnl_test::fd_jacobian(cyc)) < 4);
  CHECK(certify_angle_fixability(cyc).status == FixabilityStatus::not_fixable);
  CHECK(certify_angle_fixability(Framework(k3, {{0, 0}, {1, 0}, {2, 0}})).status == FixabilityStatus::not_fixable);
}

TEST_CASE("certified fixability is consistent with the rank test") {
  CounterRng rng(73);
  for (int t = 0; t < 200; ++t) {
    const int n = 3 + static_cast<int>(rng.below(7));
    Graph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < 0.5) g.add_edge(i, j);
    std::vector<Point2> p;
    for (int v = 0; v < n; ++v) p.emplace_back(rng.uniform(), rng.uniform());
    const Framework fw(g, p);
    const FixabilityCertificate cert = certify_angle_fixability(fw);
    if (cert.status == FixabilityStatus::fixable_certified) {
      REQUIRE(cert.ordering);
      CHECK(verify_ordering_structure(g, *cert.ordering));
      CHECK(verify_nondegenerate_ordering(fw, *cert.ordering));
      CHECK(is_infinitesimally_angle_rigid(fw).infinitesimally_rigid);
    }
    if (!is_infinitesimally_angle_rigid(fw).infinitesimally_rigid)
      CHECK(cert.status == FixabilityStatus::not_fixable);
  }
}

TEST_CASE("localizability examples") {
  const Graph g(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}});
  const SensorNetwork collinear(Framework(g, {{0, 0}, {1, 0}, {2, 0}, {1, 1}}), 3);
  CHECK(anchors_collinear(collinear));
  const LocalizabilityResult c = is_angle_localizable(collinear);
  CHECK_FALSE(c.localizable);
  CHECK(c.reason == "anchors_collinear");

  const SensorNetwork two(Framework(g, {{0, 0}, {1, 0}, {0.5, 0.8}, {0.6, 0.3}}), 2);
  CHECK_FALSE(is_angle_localizable(two).localizable);

  const std::vector<Point2> truth{{0, 0}, {1, 0}, {0.5, 0.8}, {0.45, 0.3}};
  const SensorNetwork ok(Framework(Graph(4, {{0, 3}, {1, 3}, {2, 3}}), truth), 3);
  const LocalizabilityResult r = is_angle_localizable(ok);
  CHECK(r.localizable);
  CHECK(r.reason == "ok");

  // Independent check: a multi-start least-squares search over the single
  // unknown finds only the true position.
  std::vector<std::array<int, 3>> triples;
  std::vector<double> values;
  const Graph& grounded = ok.grounded_graph();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (j != i && k != i && grounded.has_edge(i, j) && grounded.has_edge(i, k)) {
          triples.push_back({i, j, k});
          values.push_back(asnl_test::cosine_at(truth[static_cast<std::size_t>(i)], truth[static_cast<std::size_t>(j)],
                                                truth[static_cast<std::size_t>(k)]));
        }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fit = asnl_test::lm_oracle({truth[0], truth[1], truth[2]}, 1, triples, values, seed, 16);
    CHECK(fit.cost < 1e-20);
    CHECK((fit.unknowns[0] - truth[3]).norm() < 1e-7);
  }
}
