#include "asnl/core.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace asnl {

Graph::Graph(int n) {
  if (n < 0) throw InvalidGraph("graph size must be non-negative");
  adj_.resize(static_cast<std::size_t>(n));
}

Graph::Graph(int n, const std::vector<Edge>& edges) : Graph(n) {
  for (const auto& [i, j] : edges) {
    if (!add_edge(i, j)) {
      std::ostringstream os;
      os << "duplicate edge (" << i << ", " << j << ")";
      throw InvalidGraph(os.str());
    }
  }
}

void Graph::check_vertex(int i) const {
  if (i < 0 || i >= size()) {
    std::ostringstream os;
    os << "vertex id " << i << " out of range [0, " << size() << ")";
    throw InvalidGraph(os.str());
  }
}

bool Graph::add_edge(int i, int j) {
  check_vertex(i);
  check_vertex(j);
  if (i == j) throw InvalidGraph("self loop at vertex " + std::to_string(i));
  auto& ai = adj_[static_cast<std::size_t>(i)];
  auto it = std::lower_bound(ai.begin(), ai.end(), j);
  if (it != ai.end() && *it == j) return false;
  ai.insert(it, j);
  auto& aj = adj_[static_cast<std::size_t>(j)];
  aj.insert(std::lower_bound(aj.begin(), aj.end(), i), i);
  ++edge_count_;
  return true;
}

bool Graph::has_edge(int i, int j) const {
  if (i < 0 || j < 0 || i >= size() || j >= size()) return false;
  const auto& ai = adj_[static_cast<std::size_t>(i)];
  return std::binary_search(ai.begin(), ai.end(), j);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(edge_count_));
  for (int i = 0; i < size(); ++i)
    for (int j : adj_[static_cast<std::size_t>(i)])
      if (i < j) out.emplace_back(i, j);
  return out;
}

Graph Graph::induced(const std::vector<int>& vertices) const {
  Graph sub(static_cast<int>(vertices.size()));
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (has_edge(vertices[a], vertices[b])) sub.add_edge(static_cast<int>(a), static_cast<int>(b));
  return sub;
}

Framework::Framework(Graph g, std::vector<Point2> p) : graph(std::move(g)), config(std::move(p)) {
  if (static_cast<int>(config.size()) != graph.size())
    throw DimensionMismatch("configuration length " + std::to_string(config.size()) +
                            " does not match vertex count " + std::to_string(graph.size()));
  for (std::size_t i = 0; i < config.size(); ++i)
    if (!config[i].allFinite())
      throw PreconditionViolated("non-finite coordinate at vertex " + std::to_string(i));
}

SensorNetwork::SensorNetwork(Framework sensing, int anchor_count, std::vector<LocalFrame> frames)
    : framework_(std::move(sensing)), anchor_count_(anchor_count), frames_(std::move(frames)) {
  if (anchor_count_ < 0 || anchor_count_ > framework_.size())
    throw PreconditionViolated("anchor count out of range");
  if (frames_.empty()) frames_.resize(static_cast<std::size_t>(framework_.size()));
  if (static_cast<int>(frames_.size()) != framework_.size())
    throw DimensionMismatch("one local frame per sensor required");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const Mat2& r = frames_[i].rotation;
    if ((r.transpose() * r - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-12)
      throw PreconditionViolated("frame of sensor " + std::to_string(i) + " is not orthogonal");
  }
  std::vector<int> anchors(static_cast<std::size_t>(anchor_count_));
  for (int a = 0; a < anchor_count_; ++a) anchors[static_cast<std::size_t>(a)] = a;
  grounded_ = asnl::grounded_graph(framework_.graph, anchors);
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::exact: return "exact";
    case Regime::gaussian: return "gaussian";
    case Regime::bounded: return "bounded";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "exact") return Regime::exact;
  if (s == "gaussian") return Regime::gaussian;
  if (s == "bounded") return Regime::bounded;
  throw PreconditionViolated("unknown regime '" + s + "'");
}

int AngleData::edge_index(int i, int j) const {
  const Edge e = make_edge(i, j);
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || *it != e)
    throw PreconditionViolated("(" + std::to_string(i) + ", " + std::to_string(j) +
                               ") is not an edge of the grounded graph");
  return static_cast<int>(it - edges.begin());
}

Vec2 bearing(const Point2& pi, const Point2& pj, double tol) {
  const Vec2 d = pi - pj;
  const double len = d.norm();
  if (len < tol) throw CoincidentPoints("coincident points: distance " + std::to_string(len));
  return d / len;
}

double angle_cosine(const Point2& pi, const Point2& pj, const Point2& pk, double tol) {
  return std::clamp(bearing(pi, pj, tol).dot(bearing(pi, pk, tol)), -1.0, 1.0);
}

std::vector<AngleTriple> angle_index_set(const Graph& g) {
  std::vector<AngleTriple> out;
  for (int i = 0; i < g.size(); ++i) {
    const auto& nb = g.neighbors(i);
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) out.push_back({i, nb[a], nb[b]});
  }
  return out;
}

Graph grounded_graph(const Graph& g, const std::vector<int>& anchors) {
  Graph out = g;
  for (std::size_t a = 0; a < anchors.size(); ++a)
    for (std::size_t b = a + 1; b < anchors.size(); ++b) out.add_edge(anchors[a], anchors[b]);
  return out;
}

Mat2 random_orthogonal(CounterRng& rng) {
  const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Mat2 r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  if (rng.uniform() < 0.5) r.col(1) *= -1.0;
  return r;
}

LocalBearing local_bearing(const SensorNetwork& net, int i, int j) {
  if (!net.grounded_graph().has_edge(i, j))
    throw PreconditionViolated("local bearing requested along a non-edge");
  const Vec2 g = bearing(net.position(i), net.position(j));
  Vec2 dir = net.frame(i).rotation * g;
  dir.normalize();
  return {i, j, dir};
}

namespace {

Vec2 sample_in_disk(CounterRng& rng, double radius) {
  // Uniform over the disk.
  const double r = radius * std::sqrt(rng.uniform());
  const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

AngleData synthesize_measurements(const SensorNetwork& net, const RegimeParams& params,
                                  std::uint64_t seed) {
  const Graph& gg = net.grounded_graph();
  AngleData data;
  data.regime = params.regime;
  data.triples = angle_index_set(gg);
  data.edges = gg.edges();

  // Separate streams so bearing and cosine noise are independent.
  CounterRng bearing_rng(seed, 1);
  CounterRng value_rng(seed, 2);

  for (int i = 0; i < gg.size(); ++i) {
    for (int j : gg.neighbors(i)) {
      Vec2 b = local_bearing(net, i, j).direction;
      if (params.regime == Regime::bounded) {
        b += sample_in_disk(bearing_rng, params.tau_max);
      } else if (params.regime == Regime::gaussian) {
        b += Vec2(params.sigma * bearing_rng.normal(), params.sigma * bearing_rng.normal());
      }
      data.bearings.emplace(std::make_pair(i, j), b);
    }
  }

  const auto& p = net.positions();
  data.values.reserve(data.triples.size());
  for (const auto& t : data.triples) {
    const double exact = angle_cosine(p[static_cast<std::size_t>(t.i)], p[static_cast<std::size_t>(t.j)],
                                      p[static_cast<std::size_t>(t.k)]);
    switch (params.regime) {
      case Regime::exact:
        data.values.push_back(exact);
        break;
      case Regime::gaussian:
        data.values.push_back(exact + params.sigma * value_rng.normal());
        data.sigma.push_back(params.sigma);
        break;
      case Regime::bounded: {
        const Vec2& bj = data.bearings.at({t.i, t.j});
        const Vec2& bk = data.bearings.at({t.i, t.k});
        const double measured = bj.dot(bk);
        const double half = bounded_halfwidth(params.tau_max);
        data.values.push_back(measured);
        data.lower.push_back(measured - half);
        data.upper.push_back(measured + half);
        break;
      }
    }
  }
  return data;
}

}  // namespace asnl
