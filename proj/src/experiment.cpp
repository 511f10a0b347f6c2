#include "asnl/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "asnl/graphkit.hpp"
#include "asnl/network_io.hpp"

namespace asnl {

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::acute_triangulated: return "acute_triangulated";
    case GeneratorKind::bilateration: return "bilateration";
    case GeneratorKind::from_file: return "from_file";
  }
  return "?";
}

GeneratorKind generator_from_string(const std::string& s) {
  if (s == "acute_triangulated" || s == "acute") return GeneratorKind::acute_triangulated;
  if (s == "bilateration") return GeneratorKind::bilateration;
  if (s == "from_file") return GeneratorKind::from_file;
  throw PreconditionViolated("unknown generator '" + s + "'");
}

namespace {

constexpr int kRetryBudget = 10000;
constexpr double kMinSeparation = 0.01;
// Smallest |sin| between the two attachment directions of a new vertex.
constexpr double kMinAttachSine = 0.1;
// Every triangle cosine of the acute generator lies in this range, i.e.
// angles between roughly 14 and 87 degrees.
constexpr double kAcuteCosLow = 0.05;
constexpr double kAcuteCosHigh = 0.97;

struct Rejections {
  std::map<std::string, int> counts;
  void note(const std::string& why) { ++counts[why]; }
  std::string worst() const {
    std::string best = "none";
    int top = -1;
    for (const auto& [k, v] : counts)
      if (v > top) {
        best = k;
        top = v;
      }
    return best;
  }
};

[[noreturn]] void give_up(int vertex, const Rejections& rej) {
  throw GenerationFailed("no admissible placement for vertex " + std::to_string(vertex + 1) + " after " +
                         std::to_string(kRetryBudget) + " tries; most frequent rejection: " + rej.worst());
}

bool well_separated(const std::vector<Point2>& pts, const Point2& p) {
  for (const auto& q : pts)
    if ((p - q).norm() < kMinSeparation) return false;
  return true;
}

bool acute_with_margin(const Point2& a, const Point2& b, const Point2& c) {
  for (double cs : {angle_cosine(a, b, c), angle_cosine(b, a, c), angle_cosine(c, a, b)})
    if (cs < kAcuteCosLow || cs > kAcuteCosHigh) return false;
  return true;
}

std::array<Point2, 3> seed_triangle(CounterRng& rng, bool acute, Rejections& rej) {
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    std::array<Point2, 3> t;
    for (auto& p : t) p = Point2(rng.uniform(), rng.uniform());
    if (acute) {
      if (!acute_with_margin(t[0], t[1], t[2])) {
        rej.note("seed triangle not acute");
        continue;
      }
    } else {
      const double s = 2.0 * triangle_area(t[0], t[1], t[2]) /
                       std::max((t[1] - t[0]).norm() * (t[2] - t[0]).norm(), 1e-300);
      if (s < kMinAttachSine || (t[1] - t[0]).norm() < kMinSeparation || (t[2] - t[0]).norm() < kMinSeparation ||
          (t[2] - t[1]).norm() < kMinSeparation) {
        rej.note("seed triangle degenerate");
        continue;
      }
    }
    return t;
  }
  give_up(0, rej);
}

SensorNetwork finish(Graph g, std::vector<Point2> pts, int n_a, CounterRng& rng) {
  std::vector<LocalFrame> frames(pts.size());
  for (auto& f : frames) {
    f.rotation = random_orthogonal(rng);
    f.offset = Vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
  }
  return SensorNetwork(Framework(std::move(g), std::move(pts)), n_a, std::move(frames));
}

SensorNetwork grow_bilateration(int n, int n_a, CounterRng& rng) {
  Rejections rej;
  const auto seed = seed_triangle(rng, false, rej);
  std::vector<Point2> pts(seed.begin(), seed.end());
  Graph g(n);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  for (int v = 3; v < n; ++v) {
    bool placed = false;
    for (int attempt = 0; attempt < kRetryBudget && !placed; ++attempt) {
      const Point2 p(rng.uniform(), rng.uniform());
      if (!well_separated(pts, p)) {
        rej.note("too close to a placed vertex");
        continue;
      }
      std::vector<std::pair<double, int>> by_dist;
      for (int u = 0; u < v; ++u) by_dist.emplace_back((pts[static_cast<std::size_t>(u)] - p).norm(), u);
      std::partial_sort(by_dist.begin(), by_dist.begin() + 2, by_dist.end());
      const int a = by_dist[0].second;
      const int b = by_dist[1].second;
      const Vec2 ga = bearing(p, pts[static_cast<std::size_t>(a)]);
      const Vec2 gb = bearing(p, pts[static_cast<std::size_t>(b)]);
      if (std::abs(cross2(ga, gb)) < kMinAttachSine) {
        rej.note("attachment directions nearly collinear");
        continue;
      }
      pts.push_back(p);
      g.add_edge(v, a);
      g.add_edge(v, b);
      placed = true;
    }
    if (!placed) give_up(v, rej);
  }
  return finish(std::move(g), std::move(pts), n_a, rng);
}

SensorNetwork grow_acute(int n, int n_a, CounterRng& rng) {
  Rejections rej;
  const auto seed = seed_triangle(rng, true, rej);
  std::vector<Point2> pts(seed.begin(), seed.end());
  Graph g(n);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 2}};
  for (int v = 3; v < n; ++v) {
    bool placed = false;
    for (int attempt = 0; attempt < kRetryBudget && !placed; ++attempt) {
      const Point2 p(rng.uniform(), rng.uniform());
      if (!well_separated(pts, p)) {
        rej.note("too close to a placed vertex");
        continue;
      }
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const Point2& a = pts[static_cast<std::size_t>(edges[e].first)];
        const Point2& b = pts[static_cast<std::size_t>(edges[e].second)];
        const double dist = (p - 0.5 * (a + b)).norm();
        if (dist < best_dist && acute_with_margin(p, a, b)) {
          best = static_cast<int>(e);
          best_dist = dist;
        }
      }
      if (best < 0) {
        rej.note("no edge forms an acute triangle");
        continue;
      }
      const Edge e = edges[static_cast<std::size_t>(best)];
      pts.push_back(p);
      g.add_edge(v, e.first);
      g.add_edge(v, e.second);
      edges.push_back(make_edge(v, e.first));
      edges.push_back(make_edge(v, e.second));
      placed = true;
    }
    if (!placed) give_up(v, rej);
  }
  return finish(std::move(g), std::move(pts), n_a, rng);
}

}  // namespace

SensorNetwork generate_network(GeneratorKind kind, int n, int n_a, std::uint64_t seed) {
  if (n_a < 3 || n < n_a) throw PreconditionViolated("generation needs n >= n_a >= 3");
  CounterRng rng(seed, 7);
  switch (kind) {
    case GeneratorKind::bilateration:
      return grow_bilateration(n, n_a, rng);
    case GeneratorKind::acute_triangulated:
      // Any four points span a triangle with a non-acute angle, and the
      // grounded graph joins all anchors.
      if (n_a > 3) throw PreconditionViolated("acute-triangulated networks admit at most 3 anchors");
      for (int attempt = 0; attempt < 100; ++attempt) {
        SensorNetwork net = grow_acute(n, n_a, rng);
        if (is_acute_triangulated(net.grounded_framework())) return net;
      }
      throw GenerationFailed("grounded framework not acute-triangulated after 100 networks");
    case GeneratorKind::from_file:
      break;
  }
  throw PreconditionViolated("from_file networks are loaded, not generated");
}

double evaluate(const std::vector<Point2>& truth, const std::vector<Point2>& estimate) {
  if (truth.size() != estimate.size())
    throw LengthMismatch("evaluation needs equal-length position lists (" + std::to_string(truth.size()) +
                         " vs " + std::to_string(estimate.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) sum += (truth[i] - estimate[i]).squaredNorm();
  return std::sqrt(sum);
}

std::vector<Point2> unknown_positions(const SensorNetwork& net) {
  return {net.positions().begin() + net.anchor_count(), net.positions().end()};
}

SdpRunResult run_sdp_pipeline(const SensorNetwork& net, const AngleData& data, const SdpPipelineOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  SdpRunResult res;
  RankMode mode = RankMode::none;
  if (opts.rank_mode) {
    mode = *opts.rank_mode;
  } else if (data.regime == Regime::gaussian) {
    mode = is_acute_triangulated(net.grounded_framework()) ? RankMode::lambda : RankMode::all;
  }
  res.rank_mode = mode;
  switch (data.regime) {
    case Regime::exact: res.program = build_exact_program(net, data, mode); break;
    case Regime::bounded: res.program = build_disturbed_program(net, data, mode); break;
    case Regime::gaussian: res.program = build_noisy_program(net, data, mode); break;
  }
  if (opts.decompose) res.program = decompose_program(res.program, net);
  if (res.program.rank_targets.empty()) {
    res.solution = solve(res.program, opts.solver);
  } else {
    RankMinimizationResult rm = iterative_rank_minimization(res.program, opts.rank);
    res.solution = std::move(rm.solution);
    res.r_trace = std::move(rm.r_trace);
    res.outer_iterations = rm.outer_iterations;
    res.converged = rm.converged;
  }
  res.estimate = extract_positions(res.solution, res.program, net, opts.diagnostics);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::sdp: return "sdp";
    case Method::sdp_decomposed: return "sdp_decomposed";
    case Method::blp: return "blp";
  }
  return "?";
}

std::vector<Method> methods_from_string(const std::string& s) {
  if (s == "sdp") return {Method::sdp};
  if (s == "sdp_decomposed") return {Method::sdp_decomposed};
  if (s == "blp") return {Method::blp};
  if (s == "blp_and_sdp") return {Method::blp, Method::sdp};
  throw PreconditionViolated("unknown method '" + s + "'");
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  return s;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  if (spec.repetitions < 1) throw PreconditionViolated("repetitions must be at least 1");
  if (spec.methods.empty()) throw PreconditionViolated("at least one method required");
  std::vector<ResultRow> rows;
  for (int run = 0; run < spec.repetitions; ++run) {
    const std::uint64_t rep_seed = CounterRng::derive(spec.seed, static_cast<std::uint64_t>(run));
    std::optional<SensorNetwork> net;
    std::optional<AngleData> data;
    std::string setup_error;
    try {
      net = spec.generator == GeneratorKind::from_file ? load_network(spec.path)
                                                        : generate_network(spec.generator, spec.n, spec.n_a, rep_seed);
      data = synthesize_measurements(*net, spec.regime, CounterRng::derive(rep_seed, 1));
    } catch (const std::exception& e) {
      setup_error = sanitize(std::string("error: ") + e.what());
    }
    for (Method m : spec.methods) {
      ResultRow row;
      row.run = run;
      row.method = to_string(m);
      row.n = net ? net->size() : spec.n;
      row.n_a = net ? net->anchor_count() : spec.n_a;
      row.error = std::numeric_limits<double>::quiet_NaN();
      if (!setup_error.empty()) {
        row.verdict = setup_error;
        rows.push_back(row);
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        if (m == Method::blp) {
          BlpWorld world(*net, *data);
          const BlpResult br = run_blp(world, spec.max_rounds);
          row.error = br.error;
          row.metric = br.convergence_round;
          row.verdict = to_string(br.status);
        } else {
          SdpPipelineOptions opts = spec.sdp;
          opts.decompose = m == Method::sdp_decomposed;
          const SdpRunResult sr = run_sdp_pipeline(*net, *data, opts);
          row.error = evaluate(unknown_positions(*net), sr.estimate.unknowns);
          row.metric = sr.solution.iterations;
          row.verdict = to_string(sr.estimate.diagnostics.verdict);
        }
      } catch (const std::exception& e) {
        row.verdict = sanitize(std::string("error: ") + e.what());
      }
      if (spec.record_timing)
        row.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return a.run < b.run; });
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "run,method,n,n_a,error,metric,time_ms,verdict\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.run << ',' << r.method << ',' << r.n << ',' << r.n_a << ',';
    std::snprintf(buf, sizeof buf, "%.9e", r.error);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%g", r.metric);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.3f", r.time_ms);
    out << buf << ',' << r.verdict << '\n';
  }
}

}  // namespace asnl
