#include "asnl/graphkit.hpp"

#include <algorithm>
#include <functional>

namespace asnl {

std::vector<int> BilaterationOrdering::vertex_order() const {
  std::vector<int> out(seed.begin(), seed.end());
  for (const auto& s : additions) out.push_back(s.vertex);
  return out;
}

std::vector<std::array<int, 3>> triangles(const Graph& g) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < g.size(); ++i)
    for (int j : g.neighbors(i)) {
      if (j <= i) continue;
      for (int k : g.neighbors(j))
        if (k > j && g.has_edge(i, k)) out.push_back({i, j, k});
    }
  return out;
}

namespace {

// Decides whether `v` can be placed given the current placed set; fills the
// attachments on success.
using Absorb = std::function<bool(int v, const std::vector<char>& placed, std::vector<int>& att)>;
using SeedOk = std::function<bool(const std::array<int, 3>&)>;

std::optional<BilaterationOrdering> greedy_closure(const Graph& g, const std::array<int, 3>& seed,
                                                   const Absorb& absorb) {
  const int n = g.size();
  std::vector<char> placed(static_cast<std::size_t>(n), 0);
  for (int s : seed) placed[static_cast<std::size_t>(s)] = 1;
  BilaterationOrdering ord;
  ord.seed = seed;
  int count = 3;
  std::vector<int> att;
  while (count < n) {
    bool progressed = false;
    for (int v = 0; v < n; ++v) {
      if (placed[static_cast<std::size_t>(v)]) continue;
      att.clear();
      if (absorb(v, placed, att)) {
        ord.additions.push_back({v, att});
        placed[static_cast<std::size_t>(v)] = 1;
        ++count;
        progressed = true;
        break;  // restart from the lowest id
      }
    }
    if (!progressed) return std::nullopt;
  }
  return ord;
}

std::optional<BilaterationOrdering> search(const Graph& g,
                                           std::optional<std::array<int, 3>> required_seed,
                                           const SeedOk& seed_ok, const Absorb& absorb) {
  if (g.size() < 3) return std::nullopt;
  if (required_seed) {
    auto s = *required_seed;
    std::sort(s.begin(), s.end());
    if (!g.has_edge(s[0], s[1]) || !g.has_edge(s[0], s[2]) || !g.has_edge(s[1], s[2]))
      return std::nullopt;
    if (!seed_ok(s)) return std::nullopt;
    return greedy_closure(g, s, absorb);
  }
  for (const auto& t : triangles(g)) {
    if (!seed_ok(t)) continue;
    if (auto ord = greedy_closure(g, t, absorb)) return ord;
  }
  return std::nullopt;
}

void placed_neighbors(const Graph& g, int v, const std::vector<char>& placed, std::vector<int>& out) {
  for (int u : g.neighbors(v))
    if (placed[static_cast<std::size_t>(u)]) out.push_back(u);
}

bool directions_not_all_collinear(const Framework& fw, int v, const std::vector<int>& att,
                                  double tol) {
  const Point2& pv = fw.config[static_cast<std::size_t>(v)];
  for (std::size_t a = 0; a < att.size(); ++a) {
    const Vec2 da = fw.config[static_cast<std::size_t>(att[a])] - pv;
    for (std::size_t b = a + 1; b < att.size(); ++b) {
      const Vec2 db = fw.config[static_cast<std::size_t>(att[b])] - pv;
      const double na = da.norm();
      const double nb = db.norm();
      if (na < kCoincidenceTol || nb < kCoincidenceTol) continue;
      if (std::abs(cross2(da / na, db / nb)) > tol) return true;
    }
  }
  return false;
}

bool seed_nondegenerate(const Framework& fw, const std::array<int, 3>& s, double tol) {
  return triangle_area(fw.config[static_cast<std::size_t>(s[0])], fw.config[static_cast<std::size_t>(s[1])],
                       fw.config[static_cast<std::size_t>(s[2])]) > tol;
}

}  // namespace

std::optional<BilaterationOrdering> find_bilateration_ordering(
    const Graph& g, std::optional<std::array<int, 3>> required_seed) {
  return search(
      g, required_seed, [](const std::array<int, 3>&) { return true; },
      [&g](int v, const std::vector<char>& placed, std::vector<int>& att) {
        placed_neighbors(g, v, placed, att);
        return att.size() >= 2;
      });
}

std::optional<BilaterationOrdering> find_nondegenerate_ordering(const Framework& fw, double tol) {
  const Graph& g = fw.graph;
  return search(
      g, std::nullopt, [&](const std::array<int, 3>& s) { return seed_nondegenerate(fw, s, tol); },
      [&](int v, const std::vector<char>& placed, std::vector<int>& att) {
        placed_neighbors(g, v, placed, att);
        return att.size() >= 2 && directions_not_all_collinear(fw, v, att, tol);
      });
}

std::optional<BilaterationOrdering> find_triangulated_ordering(const Graph& g) {
  return search(
      g, std::nullopt, [](const std::array<int, 3>&) { return true; },
      [&g](int v, const std::vector<char>& placed, std::vector<int>& att) {
        std::vector<int> nb;
        placed_neighbors(g, v, placed, nb);
        for (std::size_t a = 0; a < nb.size(); ++a)
          for (std::size_t b = a + 1; b < nb.size(); ++b)
            if (g.has_edge(nb[a], nb[b])) {
              att = {nb[a], nb[b]};
              return true;
            }
        return false;
      });
}

bool verify_ordering_structure(const Graph& g, const BilaterationOrdering& ord) {
  const int n = g.size();
  std::vector<char> placed(static_cast<std::size_t>(n), 0);
  for (int s : ord.seed) {
    if (s < 0 || s >= n || placed[static_cast<std::size_t>(s)]) return false;
    placed[static_cast<std::size_t>(s)] = 1;
  }
  const auto& s = ord.seed;
  if (!g.has_edge(s[0], s[1]) || !g.has_edge(s[0], s[2]) || !g.has_edge(s[1], s[2])) return false;
  for (const auto& step : ord.additions) {
    if (step.vertex < 0 || step.vertex >= n || placed[static_cast<std::size_t>(step.vertex)]) return false;
    if (step.attachments.size() < 2) return false;
    std::vector<int> att = step.attachments;
    std::sort(att.begin(), att.end());
    if (std::adjacent_find(att.begin(), att.end()) != att.end()) return false;
    for (int a : att) {
      if (a < 0 || a >= n || !placed[static_cast<std::size_t>(a)] || !g.has_edge(step.vertex, a))
        return false;
    }
    placed[static_cast<std::size_t>(step.vertex)] = 1;
  }
  return std::all_of(placed.begin(), placed.end(), [](char c) { return c != 0; });
}

bool verify_nondegenerate_ordering(const Framework& fw, const BilaterationOrdering& ord, double tol) {
  if (!verify_ordering_structure(fw.graph, ord)) return false;
  if (!seed_nondegenerate(fw, ord.seed, tol)) return false;
  for (const auto& step : ord.additions)
    if (!directions_not_all_collinear(fw, step.vertex, step.attachments, tol)) return false;
  return true;
}

bool is_acute_triangulated(const Framework& fw, double eps) {
  if (!find_triangulated_ordering(fw.graph)) return false;
  const auto& p = fw.config;
  for (const auto& t : triangles(fw.graph)) {
    const Point2& a = p[static_cast<std::size_t>(t[0])];
    const Point2& b = p[static_cast<std::size_t>(t[1])];
    const Point2& c = p[static_cast<std::size_t>(t[2])];
    if ((a - b).norm() < kCoincidenceTol || (a - c).norm() < kCoincidenceTol ||
        (b - c).norm() < kCoincidenceTol)
      return false;
    for (double cs : {angle_cosine(a, b, c), angle_cosine(b, a, c), angle_cosine(c, a, b)})
      if (!(cs > eps && cs < 1.0 - eps)) return false;
  }
  return true;
}

namespace {

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void bron_kerbosch(const Graph& g, std::vector<int>& r, std::vector<int> p, std::vector<int> x,
                   CliqueSet& out) {
  if (p.empty()) {
    if (x.empty()) {
      auto c = r;
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
    }
    return;
  }
  // Pivot maximizing |P ∩ N(u)| over P ∪ X.
  int pivot = -1;
  std::size_t best = 0;
  for (const auto* set : {&p, &x})
    for (int u : *set) {
      const std::size_t cnt = intersect(p, g.neighbors(u)).size();
      if (pivot < 0 || cnt > best) {
        pivot = u;
        best = cnt;
      }
    }
  std::vector<int> candidates;
  std::set_difference(p.begin(), p.end(), g.neighbors(pivot).begin(), g.neighbors(pivot).end(),
                      std::back_inserter(candidates));
  for (int v : candidates) {
    r.push_back(v);
    bron_kerbosch(g, r, intersect(p, g.neighbors(v)), intersect(x, g.neighbors(v)), out);
    r.pop_back();
    p.erase(std::lower_bound(p.begin(), p.end(), v));
    x.insert(std::lower_bound(x.begin(), x.end(), v), v);
  }
}

}  // namespace

CliqueSet maximal_cliques(const Graph& g) {
  CliqueSet out;
  if (g.size() == 0) return out;
  std::vector<int> r;
  std::vector<int> p(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) p[static_cast<std::size_t>(i)] = i;
  bron_kerbosch(g, r, p, {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

ChordalityResult is_chordal(const Graph& g) {
  const int n = g.size();
  // Lexicographic BFS with explicit labels; quadratic, fine at these sizes.
  std::vector<std::vector<int>> label(static_cast<std::size_t>(n));
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<int> visit_order;
  visit_order.reserve(static_cast<std::size_t>(n));
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int v = 0; v < n; ++v) {
      if (visited[static_cast<std::size_t>(v)]) continue;
      if (pick < 0 || label[static_cast<std::size_t>(v)] > label[static_cast<std::size_t>(pick)]) pick = v;
    }
    visited[static_cast<std::size_t>(pick)] = 1;
    visit_order.push_back(pick);
    for (int u : g.neighbors(pick))
      if (!visited[static_cast<std::size_t>(u)]) label[static_cast<std::size_t>(u)].push_back(n - step);
  }
  std::vector<int> peo(visit_order.rbegin(), visit_order.rend());
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(peo[static_cast<std::size_t>(i)])] = i;

  for (int v : peo) {
    int parent = -1;
    std::vector<int> later;
    for (int u : g.neighbors(v))
      if (pos[static_cast<std::size_t>(u)] > pos[static_cast<std::size_t>(v)]) {
        later.push_back(u);
        if (parent < 0 || pos[static_cast<std::size_t>(u)] < pos[static_cast<std::size_t>(parent)]) parent = u;
      }
    for (int u : later)
      if (u != parent && !g.has_edge(parent, u)) return {false, {}};
  }
  return {true, peo};
}

Graph chordal_extension(const Graph& g) {
  if (is_chordal(g).chordal) return g;
  const int n = g.size();
  Graph filled = g;
  Graph work = g;
  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    int best = 0;
    std::vector<int> alive;
    for (int v = 0; v < n; ++v) {
      if (gone[static_cast<std::size_t>(v)]) continue;
      int deg = 0;
      for (int u : work.neighbors(v))
        if (!gone[static_cast<std::size_t>(u)]) ++deg;
      if (pick < 0 || deg < best) {
        pick = v;
        best = deg;
      }
    }
    for (int u : work.neighbors(pick))
      if (!gone[static_cast<std::size_t>(u)]) alive.push_back(u);
    for (std::size_t a = 0; a < alive.size(); ++a)
      for (std::size_t b = a + 1; b < alive.size(); ++b) {
        work.add_edge(alive[a], alive[b]);
        filled.add_edge(alive[a], alive[b]);
      }
    gone[static_cast<std::size_t>(pick)] = 1;
  }
  return filled;
}

SparsityPattern sparsity_pattern(const std::vector<Eigen::SparseMatrix<double>>& matrices,
                                 bool extend_first_rows, double threshold) {
  if (matrices.empty()) throw DimensionMismatch("sparsity pattern of an empty matrix list");
  const Eigen::Index n = matrices.front().rows();
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : matrices) {
    if (m.rows() != n || m.cols() != n)
      throw DimensionMismatch("all matrices in a sparsity pattern must be " + std::to_string(n) +
                              "x" + std::to_string(n));
    for (int k = 0; k < m.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
        agg(it.row(), it.col()) += std::abs(it.value());
  }
  if (extend_first_rows) {
    for (Eigen::Index r = 0; r < std::min<Eigen::Index>(2, n); ++r)
      for (Eigen::Index c = 2; c < n; ++c) {
        agg(r, c) += 1.0;
        agg(c, r) += 1.0;
      }
  }
  SparsityPattern out{Graph(static_cast<int>(n)), agg};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (agg(i, j) > threshold || agg(j, i) > threshold)
        out.graph.add_edge(static_cast<int>(i), static_cast<int>(j));
  return out;
}

Eigen::MatrixXd clique_selector(const std::vector<int>& clique, int n) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(clique.size()), n);
  for (std::size_t r = 0; r < clique.size(); ++r) {
    if (clique[r] < 0 || clique[r] >= n)
      throw PreconditionViolated("clique index " + std::to_string(clique[r]) + " out of range");
    q(static_cast<Eigen::Index>(r), clique[r]) = 1.0;
  }
  return q;
}

}  // namespace asnl
