// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asnl/blp.hpp"
#include "asnl/experiment.hpp"
#include "asnl/graphkit.hpp"
#include "asnl/rigidity.hpp"
#include "asnl/sdp.hpp"
#include "test_support.hpp"

using namespace asnl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Smallest rank_Z seen over every SDP solution produced by any criterion.
struct RankFloor {
  int solutions = 0;
  int below = 0;
  int min_rank = 1 << 30;
  void note(const RankDiagnostics& d) {
    ++solutions;
    min_rank = std::min(min_rank, d.rank_Z);
    if (d.rank_Z < 3) ++below;
  }
} rank_floor;

SdpRunResult solve_sdp(const SensorNetwork& net, const AngleData& data, bool decompose = false) {
  SdpPipelineOptions opts;
  opts.decompose = decompose;
  SdpRunResult res = run_sdp_pipeline(net, data, opts);
  rank_floor.note(res.estimate.diagnostics);
  return res;
}

AngleData exact_data(const SensorNetwork& net, std::uint64_t seed) { return synthesize_measurements(net, {}, seed); }

double max_point_gap(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double gap = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return gap;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome rigidity_rank_test() {
  const auto t0 = Clock::now();
  CounterRng rng(101);
  int grown_ok = 0, cycles_ok = 0, collinear_ok = 0;
  double worst_jac = 0.0;
  auto jac_gap = [&](const Framework& fw) {
    worst_jac = std::max(worst_jac, (rigidity_jacobian(fw) - asnl_test::fd_jacobian(fw)).cwiseAbs().maxCoeff());
  };
  for (int t = 0; t < 200; ++t) {
    const Framework fw = asnl_test::grown_framework(rng, 4 + static_cast<int>(rng.below(17)), 2);
    grown_ok += is_infinitesimally_angle_rigid(fw).infinitesimally_rigid ? 1 : 0;
    jac_gap(fw);
  }
  for (int t = 0; t < 200; ++t) {
    std::vector<Point2> p;
    for (int v = 0; v < 4; ++v) p.emplace_back(rng.uniform(), rng.uniform());
    const Framework cyc(Graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), p);
    cycles_ok += is_infinitesimally_angle_rigid(cyc).infinitesimally_rigid ? 0 : 1;
    jac_gap(cyc);

    const Point2 base(rng.uniform(), rng.uniform());
    const double th = rng.uniform(0.0, M_PI);
    const Vec2 dir(std::cos(th), std::sin(th));
    const double s1 = rng.uniform(0.1, 1.0), s2 = s1 + rng.uniform(0.1, 1.0);
    const Framework flat(Graph(3, {{0, 1}, {0, 2}, {1, 2}}), {base, base + s1 * dir, base + s2 * dir});
    collinear_ok += is_infinitesimally_angle_rigid(flat).infinitesimally_rigid ? 0 : 1;
    jac_gap(flat);
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "grown rigid " << grown_ok << "/200, 4-cycles non-rigid " << cycles_ok << "/200, collinear triangles non-rigid "
    << collinear_ok << "/200, max |J - J_fd| " << fmt("%.2e", worst_jac) << ", " << fmt("%.1f", secs) << " s";
  return {grown_ok == 200 && cycles_ok == 200 && collinear_ok == 200 && worst_jac <= 1e-5 && secs < 30.0, d.str()};
}

Outcome exact_recovery() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (int n : {10, 20, 30}) {
    const SensorNetwork net = generate_network(GeneratorKind::acute_triangulated, n, 3, static_cast<std::uint64_t>(n));
    const AngleData data = exact_data(net, 1);
    const auto truth = unknown_positions(net);
    const SdpRunResult full = solve_sdp(net, data, false);
    const SdpRunResult dec = solve_sdp(net, data, true);
    const double ef = evaluate(truth, full.estimate.unknowns), ed = evaluate(truth, dec.estimate.unknowns);
    const double gap = max_point_gap(full.estimate.unknowns, dec.estimate.unknowns);
    const bool certified = full.estimate.diagnostics.verdict == Verdict::exact_rank3 &&
                           dec.estimate.diagnostics.verdict == Verdict::exact_rank3;
    ok = ok && certified && ef <= 1e-5 && ed <= 1e-5 && gap <= 1e-6;
    if (n == 30) ok = ok && dec.seconds < full.seconds;
    d << "n=" << n << " [" << to_string(full.estimate.diagnostics.verdict) << "/"
      << to_string(dec.estimate.diagnostics.verdict) << " err " << fmt("%.1e", ef) << "/" << fmt("%.1e", ed)
      << " gap " << fmt("%.1e", gap) << " t " << fmt("%.2f", full.seconds) << "/" << fmt("%.2f", dec.seconds)
      << " s] ";
  }
  const double secs = seconds_since(t0);
  d << "total " << fmt("%.1f", secs) << " s (full/decomposed)";
  return {ok && secs < 600.0, d.str()};
}

Outcome rank_floor_report() {
  std::ostringstream d;
  d << rank_floor.solutions << " solutions, min rank_Z " << rank_floor.min_rank << ", below 3: " << rank_floor.below;
  return {rank_floor.solutions > 0 && rank_floor.below == 0, d.str()};
}

Outcome gap_detection() {
  int instances = 0, large = 0, false_exact = 0;
  for (std::uint64_t seed = 1; instances < 50 && seed < 1000; ++seed) {
    const SensorNetwork net = generate_network(GeneratorKind::bilateration, 10, 3, seed);
    if (find_triangulated_ordering(net.grounded_graph())) continue;
    ++instances;
    const SdpRunResult res = solve_sdp(net, exact_data(net, seed));
    if (evaluate(unknown_positions(net), res.estimate.unknowns) > 1e-3) {
      ++large;
      if (res.estimate.diagnostics.verdict == Verdict::exact_rank3) ++false_exact;
    }
  }
  std::ostringstream d;
  d << instances << " non-triangulated instances, " << large << " with error > 1e-3, certified wrongly: " << false_exact;
  return {instances == 50 && false_exact == 0, d.str()};
}

Outcome blp_convergence() {
  const auto t0 = Clock::now();
  bool ok = true;
  int skipped = 0;
  double mean100 = 0.0, worst_err = 0.0;
  std::ostringstream d;
  for (int n : {100, 500, 1000}) {
    double rounds = 0.0;
    int runs = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const SensorNetwork net = generate_network(GeneratorKind::bilateration, n, 3, seed);
      if (!check_blp_preconditions(net).ok) {
        ++skipped;
        continue;
      }
      BlpWorld world(net, exact_data(net, seed));
      const BlpResult res = run_blp(world);
      ok = ok && res.status == BlpStatus::converged && res.convergence_round <= net.unknown_count() && res.error <= 1e-6;
      worst_err = std::max(worst_err, res.error);
      rounds += res.convergence_round;
      ++runs;
    }
    const double mean = runs ? rounds / runs : 0.0;
    if (n == 100) mean100 = mean;
    d << "n=" << n << " mean rounds " << fmt("%.1f", mean) << "; ";
  }
  const double secs = seconds_since(t0);
  ok = ok && skipped == 0 && mean100 >= 10.0 && mean100 <= 30.0 && secs < 60.0;
  d << "max error " << fmt("%.1e", worst_err) << ", precondition skips " << skipped << ", " << fmt("%.1f", secs) << " s";
  return {ok, d.str()};
}

Outcome noisy_pipeline() {
  int converged = 0, zero_ok = 0, max_outer = 0;
  double worst_zero = 0.0;
  std::vector<std::uint64_t> zero_fail;
  RegimeParams rp;
  rp.regime = Regime::gaussian;
  rp.sigma = 0.005;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SensorNetwork net = generate_network(GeneratorKind::acute_triangulated, 8, 3, seed);
    AngleData data = synthesize_measurements(net, rp, seed * 11 + 5);
    const SdpRunResult noisy = solve_sdp(net, data);
    if (noisy.converged && !noisy.r_trace.empty() && noisy.r_trace.back() < 1e-6 && noisy.outer_iterations <= 60)
      ++converged;
    max_outer = std::max(max_outer, noisy.outer_iterations);

    for (std::size_t t = 0; t < data.triples.size(); ++t) {
      const auto& tr = data.triples[t];
      data.values[t] = asnl_test::cosine_at(net.position(tr.i), net.position(tr.j), net.position(tr.k));
    }
    const SdpRunResult clean = solve_sdp(net, data);
    const double err = evaluate(unknown_positions(net), clean.estimate.unknowns);
    worst_zero = std::max(worst_zero, err);
    if (err <= 1e-5)
      ++zero_ok;
    else
      zero_fail.push_back(seed);
  }
  std::ostringstream d;
  d << "noisy converged " << converged << "/100 (max outer " << max_outer << "), zero-noise within 1e-5 " << zero_ok
    << "/100 (worst " << fmt("%.1e", worst_zero) << ")";
  if (!zero_fail.empty()) {
    d << ", failing seeds";
    for (auto s : zero_fail) d << " " << s;
  }
  return {converged >= 90 && zero_ok == 100, d.str()};
}

Outcome disturbance_comparison() {
  std::vector<double> sdp_err, blp_err;
  RegimeParams rp;
  rp.regime = Regime::bounded;
  rp.tau_max = 0.01;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SensorNetwork net = generate_network(GeneratorKind::acute_triangulated, 10, 3, seed);
    const AngleData data = synthesize_measurements(net, rp, seed * 13 + 1);
    const SdpRunResult res = solve_sdp(net, data);
    sdp_err.push_back(evaluate(unknown_positions(net), res.estimate.unknowns));
    BlpWorld world(net, data);
    blp_err.push_back(run_blp(world).error);
  }
  const double ms = median(sdp_err), mb = median(blp_err);
  std::ostringstream d;
  d << "median error SDP " << fmt("%.3e", ms) << " vs BLP " << fmt("%.3e", mb);
  return {ms < mb, d.str()};
}

Outcome oracle_equivalence() {
  int compared = 0, agree = 0;
  double worst = 0.0;
  for (int n : {4, 5, 6})
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const SensorNetwork net = generate_network(
          seed % 2 ? GeneratorKind::acute_triangulated : GeneratorKind::bilateration, n, 3, seed * 7 + static_cast<std::uint64_t>(n));
      const AngleData data = exact_data(net, seed);
      const SdpRunResult res = solve_sdp(net, data);
      if (res.estimate.diagnostics.verdict != Verdict::exact_rank3) continue;
      std::vector<std::array<int, 3>> triples;
      for (const auto& t : data.triples) triples.push_back({t.i, t.j, t.k});
      const std::vector<Point2> anchors(net.positions().begin(), net.positions().begin() + net.anchor_count());
      const auto fit = asnl_test::lm_oracle(anchors, net.unknown_count(), triples, data.values, seed);
      const double gap = max_point_gap(fit.unknowns, res.estimate.unknowns);
      worst = std::max(worst, gap);
      ++compared;
      if (gap <= 1e-5) ++agree;
    }
  std::ostringstream d;
  d << "exact-verdict instances " << compared << "/30, agreeing with oracle " << agree << ", max gap " << fmt("%.1e", worst);
  return {compared > 0 && agree == compared, d.str()};
}

double min_eig(const Eigen::MatrixXd& m) { return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff(); }

bool cliques_psd(const Eigen::MatrixXd& x, const CliqueSet& cliques) {
  for (const auto& c : cliques) {
    const Eigen::MatrixXd q = clique_selector(c, static_cast<int>(x.rows()));
    if (min_eig(q * x * q.transpose()) < -1e-10) return false;
  }
  return true;
}

// A PSD matrix agreeing with x on the pattern and diagonal, found by the
// full-cone solver.
bool has_psd_completion(const Eigen::MatrixXd& x, const Graph& pattern) {
  ConicProgram prog;
  const int b = prog.add_block("X", static_cast<int>(x.rows()));
  prog.add_full_cone(b);
  for (int i = 0; i < x.rows(); ++i) prog.fixed.push_back({b, i, i, x(i, i)});
  for (const auto& [i, j] : pattern.edges()) prog.fixed.push_back({b, i, j, x(i, j)});
  SolverOptions opts;
  opts.max_iter = 20000;
  const SdpSolution sol = solve(prog, opts);
  return sol.status == SolveStatus::optimal && min_eig(sol.blocks[0]) >= -1e-7 && sol.constraint_violation <= 1e-7;
}

Outcome clique_decomposition() {
  CounterRng rng(131);
  int psd_certified = 0, indefinite = 0, rejected = 0, completed = 0, false_cert = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + static_cast<int>(rng.below(8));
    const Graph g = asnl_test::random_chordal(rng, n);
    const CliqueSet cliques = maximal_cliques(g);
    Eigen::MatrixXd f(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = rng.normal();
    const Eigen::MatrixXd x = f * f.transpose();
    if (cliques_psd(x, cliques)) ++psd_certified;

    // Restrict to the pattern and lower one diagonal entry; keep the draw
    // only if the result is indefinite.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = x(i, i);
    for (const auto& [i, j] : g.edges()) m(i, j) = m(j, i) = x(i, j);
    const int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    m(k, k) *= rng.uniform(0.0, 1.0);
    if (min_eig(m) >= -1e-10) continue;
    ++indefinite;
    if (!cliques_psd(m, cliques)) {
      ++rejected;
    } else if (has_psd_completion(m, g)) {
      ++completed;
    } else {
      ++false_cert;
    }
  }
  std::ostringstream d;
  d << "PSD certified " << psd_certified << "/100; indefinite " << indefinite << ": clique-rejected " << rejected
    << ", PSD completion found " << completed << ", false certifications " << false_cert;
  return {psd_certified == 100 && false_cert == 0 && indefinite > 0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  // Criterion 3 runs last so it sees every solution produced by the others.
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, rigidity_rank_test},     {2, exact_recovery},     {4, gap_detection},
      {5, blp_convergence},        {6, noisy_pipeline},     {7, disturbance_comparison},
      {8, oracle_equivalence},     {9, clique_decomposition}, {3, rank_floor_report}};
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("criterion %d: %s | %s\n", id, out.pass ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
