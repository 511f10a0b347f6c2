#pragma once

// Geometry, graph and sensor-network model, plus synthesis of angle
// measurements. Vertex ids are 0-based everywhere in the library; the
// network file format and CLI output use 1-based ids.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "asnl/errors.hpp"
#include "asnl/rng.hpp"

namespace asnl {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Undirected edge stored with first < second.
using Edge = std::pair<int, int>;

inline Edge make_edge(int i, int j) { return i < j ? Edge{i, j} : Edge{j, i}; }

inline constexpr double kCoincidenceTol = 1e-12;

/// Simple undirected graph on vertices 0..n-1. Adjacency lists stay sorted.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);
  /// Throws InvalidGraph on self loops, duplicates or out-of-range ids.
  Graph(int n, const std::vector<Edge>& edges);

  int size() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return edge_count_; }

  /// Returns false if the edge was already present. Throws on self loops.
  bool add_edge(int i, int j);
  bool has_edge(int i, int j) const;
  const std::vector<int>& neighbors(int i) const { return adj_.at(i); }
  int degree(int i) const { return static_cast<int>(adj_.at(i).size()); }

  /// All edges, lexicographically sorted.
  std::vector<Edge> edges() const;

  /// Subgraph induced by `vertices` (relabelled 0..k-1 in the given order).
  Graph induced(const std::vector<int>& vertices) const;

  bool operator==(const Graph& other) const { return adj_ == other.adj_; }

 private:
  void check_vertex(int i) const;

  std::vector<std::vector<int>> adj_;
  int edge_count_ = 0;
};

struct Framework {
  Framework() = default;
  /// Throws DimensionMismatch if config.size() != graph.size() and
  /// PreconditionViolated on non-finite coordinates.
  Framework(Graph g, std::vector<Point2> p);

  int size() const { return graph.size(); }

  Graph graph;
  std::vector<Point2> config;
};

/// Sensor i's coordinate frame: x^i_j = rotation * x_j + offset.
struct LocalFrame {
  Mat2 rotation = Mat2::Identity();
  Vec2 offset = Vec2::Zero();
};

/// Sensor network: anchors are vertices 0..n_a-1, unknowns n_a..n-1.
/// The framework holds the sensing graph G and ground-truth positions.
class SensorNetwork {
 public:
  SensorNetwork() = default;
  /// Frames default to identity when `frames` is empty.
  SensorNetwork(Framework sensing, int anchor_count, std::vector<LocalFrame> frames = {});

  int size() const { return framework_.size(); }
  int anchor_count() const { return anchor_count_; }
  int unknown_count() const { return size() - anchor_count_; }
  bool is_anchor(int i) const { return i < anchor_count_; }

  const Framework& framework() const { return framework_; }
  const Graph& sensing_graph() const { return framework_.graph; }
  const Graph& grounded_graph() const { return grounded_; }
  Framework grounded_framework() const { return {grounded_, framework_.config}; }
  const std::vector<Point2>& positions() const { return framework_.config; }
  const Point2& position(int i) const { return framework_.config.at(i); }
  const std::vector<LocalFrame>& frames() const { return frames_; }
  const LocalFrame& frame(int i) const { return frames_.at(i); }

 private:
  Framework framework_;
  int anchor_count_ = 0;
  Graph grounded_;
  std::vector<LocalFrame> frames_;
};

enum class Regime { exact, gaussian, bounded };

const char* to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct RegimeParams {
  Regime regime = Regime::exact;
  double sigma = 0.005;    // gaussian: std-dev per angle cosine
  double tau_max = 0.01;   // bounded: max norm of a local-bearing disturbance
};

/// (i, j, k): angle at vertex i between edges (i,j) and (i,k), j < k.
struct AngleTriple {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const AngleTriple&) const = default;
};

/// Angle constraints over the grounded graph plus the bearing measurements
/// they were computed from.
struct AngleData {
  Regime regime = Regime::exact;
  std::vector<AngleTriple> triples;
  std::vector<double> values;
  /// Edges of the grounded graph; the position in this list is l_ij.
  std::vector<Edge> edges;
  std::vector<double> sigma;                  // gaussian only
  std::vector<double> lower, upper;           // bounded only
  /// Local bearing measured by `observer` towards `target`, expressed in the
  /// observer's frame. Keyed by (observer, target) over grounded edges.
  std::map<std::pair<int, int>, Vec2> bearings;

  int edge_index(int i, int j) const;
  std::size_t size() const { return triples.size(); }
};

struct LocalBearing {
  int observer = 0;
  int target = 0;
  Vec2 direction = Vec2::UnitX();
};

/// (p_i - p_j) / |p_i - p_j|.
Vec2 bearing(const Point2& pi, const Point2& pj, double tol = kCoincidenceTol);

/// Cosine of the angle at p_i between p_j and p_k, clamped to [-1, 1].
double angle_cosine(const Point2& pi, const Point2& pj, const Point2& pk,
                    double tol = kCoincidenceTol);

/// T_G: all (i, j, k) with (i,j), (i,k) edges and j < k, lexicographic.
std::vector<AngleTriple> angle_index_set(const Graph& g);

/// G plus the complete graph on `anchors`.
Graph grounded_graph(const Graph& g, const std::vector<int>& anchors);

/// z-component of the planar cross product u x v.
inline double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }
inline double triangle_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * std::abs(cross2(b - a, c - a));
}

/// Uniform sample from O(2), reflections included with probability 1/2.
Mat2 random_orthogonal(CounterRng& rng);

LocalBearing local_bearing(const SensorNetwork& net, int i, int j);

AngleData synthesize_measurements(const SensorNetwork& net, const RegimeParams& params,
                                  std::uint64_t seed);

/// Half-width of the cosine interval implied by bearing disturbances of norm
/// at most tau_max.
inline double bounded_halfwidth(double tau_max) { return 2.0 * tau_max + tau_max * tau_max; }

}  // namespace asnl
