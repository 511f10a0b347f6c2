// Command-line front end: network generation, analysis, centralized and
// distributed localization, and batch experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "asnl/blp.hpp"
#include "asnl/core.hpp"
#include "asnl/errors.hpp"
#include "asnl/experiment.hpp"
#include "asnl/graphkit.hpp"
#include "asnl/network_io.hpp"
#include "asnl/rigidity.hpp"
#include "asnl/sdp.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPrecondition = 2;
constexpr int kExitNoConvergence = 3;

struct GlobalFlags {
  std::uint64_t seed = 1;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
};

struct MeasurementFlags {
  std::string input;
  std::string regime = "exact";
  double sigma = 0.005;
  double tau_max = 0.01;
};

void emit(const GlobalFlags& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw asnl::PreconditionViolated("cannot write '" + g.out + "'");
  f << text;
}

json point_json(const asnl::Point2& p) { return json::array({p.x(), p.y()}); }

// Non-finite numbers have no JSON literal; they are written as null.
json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ordering_json(const asnl::BilaterationOrdering& ord) {
  json ids = json::array();
  for (int v : ord.vertex_order()) ids.push_back(v + 1);
  return ids;
}

asnl::AngleData measure(const asnl::SensorNetwork& net, const MeasurementFlags& m, std::uint64_t seed) {
  asnl::RegimeParams params;
  params.regime = asnl::regime_from_string(m.regime);
  params.sigma = m.sigma;
  params.tau_max = m.tau_max;
  return asnl::synthesize_measurements(net, params, seed);
}

void require_json(const GlobalFlags& g, const char* command) {
  if (g.format != "json")
    throw asnl::PreconditionViolated(std::string(command) + " only writes json");
}

int run_generate(const GlobalFlags& g, const std::string& kind, int n, int n_a) {
  require_json(g, "generate");
  const asnl::SensorNetwork net = asnl::generate_network(asnl::generator_from_string(kind), n, n_a, g.seed);
  emit(g, asnl::network_to_json(net).dump(2) + "\n");
  return kExitOk;
}

// Aggregate pattern of the Y block over all couplings that touch it.
asnl::Graph y_pattern(const asnl::ConicProgram& prog) {
  const int y = prog.block_index(asnl::kBlockY);
  std::vector<asnl::SparseMat> mats;
  for (const auto& c : prog.couplings)
    for (const auto& t : c.terms)
      if (t.block == y) mats.push_back(t.coefficient);
  return asnl::sparsity_pattern(mats, true).graph;
}

json cone_summary(const asnl::ConicProgram& prog, const std::string& block) {
  const int b = prog.block_index(block);
  json out = {{"dim", prog.blocks[static_cast<std::size_t>(b)].dim}, {"cones", 0}, {"largest_cone", 0}};
  for (const auto& cone : prog.cones) {
    if (cone.block != b) continue;
    out["cones"] = out["cones"].get<int>() + 1;
    out["largest_cone"] = std::max(out["largest_cone"].get<int>(), static_cast<int>(cone.indices.size()));
  }
  return out;
}

int run_analyze(const GlobalFlags& g, const std::string& input) {
  require_json(g, "analyze");
  const asnl::SensorNetwork net = asnl::load_network(input);
  const asnl::Framework grounded = net.grounded_framework();
  const asnl::RigidityReport rig = asnl::is_infinitesimally_angle_rigid(grounded, g.tol.value_or(1e-8));
  const asnl::FixabilityCertificate cert = asnl::certify_angle_fixability(grounded);
  const asnl::LocalizabilityResult loc = asnl::is_angle_localizable(net);

  json report;
  report["rank"] = rig.jacobian_rank;
  report["required_rank"] = rig.required_rank;
  report["infinitesimally_rigid"] = rig.infinitesimally_rigid;
  report["fixability_status"] = asnl::to_string(cert.status);
  report["ordering"] = cert.ordering ? ordering_json(*cert.ordering) : json(nullptr);
  report["anchors_collinear"] = asnl::anchors_collinear(net);
  report["localizable"] = loc.localizable;
  report["localizability_reason"] = loc.reason;
  report["acute_triangulated"] = asnl::is_acute_triangulated(grounded);
  const auto tri = asnl::find_triangulated_ordering(net.grounded_graph());
  report["triangulated_ordering"] = tri ? ordering_json(*tri) : json(nullptr);

  const asnl::ChordalityResult chordal = asnl::is_chordal(net.grounded_graph());
  report["grounded_graph"] = {{"vertices", net.size()},
                              {"edges", net.grounded_graph().edge_count()},
                              {"chordal", chordal.chordal},
                              {"maximal_cliques", asnl::maximal_cliques(net.grounded_graph()).size()}};

  // The Y pattern only depends on the graph and anchor positions, so exact
  // data is enough to expose it.
  const asnl::AngleData data = asnl::synthesize_measurements(net, {}, g.seed);
  const asnl::ConicProgram prog = asnl::build_exact_program(net, data);
  const asnl::Graph ypat = y_pattern(prog);
  json sdp = {{"angle_triples", data.size()}, {"constraints", prog.constraint_count()},
              {"y_pattern_chordal", asnl::is_chordal(ypat).chordal}};
  const asnl::ConicProgram dec = asnl::decompose_program(prog, net);
  sdp["decomposed"] = {{"Y", cone_summary(dec, asnl::kBlockY)}, {"D", cone_summary(dec, asnl::kBlockD)}};
  report["sdp"] = sdp;

  const asnl::BlpPreconditionReport blp = asnl::check_blp_preconditions(net);
  report["blp_preconditions"] = {{"ok", blp.ok}, {"reason", blp.reason}};
  emit(g, report.dump(2) + "\n");
  return kExitOk;
}

struct SdpFlags {
  bool decompose = false;
  std::string rank_mode;
};

int run_solve_sdp(const GlobalFlags& g, const MeasurementFlags& m, const SdpFlags& s) {
  require_json(g, "solve-sdp");
  const asnl::SensorNetwork net = asnl::load_network(m.input);
  const asnl::AngleData data = measure(net, m, g.seed);

  asnl::SdpPipelineOptions opts;
  opts.decompose = s.decompose;
  if (!s.rank_mode.empty()) opts.rank_mode = asnl::rank_mode_from_string(s.rank_mode);
  if (g.tol) {
    opts.solver.tol = *g.tol;
    opts.rank.solver.tol = *g.tol;
    opts.rank.polish.tol = *g.tol;
  }
  const asnl::SdpRunResult res = asnl::run_sdp_pipeline(net, data, opts);
  const asnl::RankDiagnostics& diag = res.estimate.diagnostics;

  json out;
  out["regime"] = m.regime;
  out["rank_mode"] = asnl::to_string(res.rank_mode);
  out["decomposed"] = s.decompose;
  json positions = json::array();
  for (std::size_t u = 0; u < res.estimate.unknowns.size(); ++u)
    positions.push_back({{"id", net.anchor_count() + static_cast<int>(u) + 1},
                         {"pos", point_json(res.estimate.unknowns[u])}});
  out["positions"] = positions;
  out["error"] = asnl::evaluate(asnl::unknown_positions(net), res.estimate.unknowns);
  out["residuals"] = {{"primal", res.solution.primal_residual},
                      {"dual", res.solution.dual_residual},
                      {"constraint_violation", res.solution.constraint_violation}};
  out["iterations"] = res.solution.iterations;
  out["solver_status"] = res.solution.status == asnl::SolveStatus::optimal ? "optimal" : "max_iter";
  json spectra = json::array();
  for (const auto& sp : diag.spectra) {
    json idx = json::array();
    for (int i : sp.indices) idx.push_back(i);
    spectra.push_back({{"block", sp.block}, {"indices", idx}, {"eigenvalues", sp.eigenvalues}, {"rank", sp.rank}});
  }
  out["spectra"] = spectra;
  out["rank_Y"] = diag.rank_Y;
  out["rank_D"] = diag.rank_D;
  out["rank_Z"] = diag.rank_Z;
  out["gram_residual"] = diag.gram_residual;
  out["min_eig_ratio_D"] = diag.min_eig_ratio_D;
  out["verdict"] = asnl::to_string(diag.verdict);
  out["rank_minimization"] = {{"outer_iterations", res.outer_iterations},
                              {"r_trace", res.r_trace},
                              {"converged", res.converged}};
  out["seconds"] = res.seconds;
  emit(g, out.dump(2) + "\n");

  const bool solved = res.rank_mode == asnl::RankMode::none || res.program.rank_targets.empty()
                          ? res.solution.status == asnl::SolveStatus::optimal
                          : res.converged;
  return solved ? kExitOk : kExitNoConvergence;
}

int run_simulate_blp(const GlobalFlags& g, const MeasurementFlags& m, std::optional<int> max_rounds) {
  const asnl::SensorNetwork net = asnl::load_network(m.input);
  const asnl::AngleData data = measure(net, m, g.seed);
  asnl::BlpWorld world(net, data, g.tol.value_or(1e-10));
  const asnl::BlpResult res = asnl::run_blp(world, max_rounds);

  if (g.format == "csv") {
    // Size of the newly localized set per round.
    std::ostringstream csv;
    csv << "round,newly_localized,messages,cumulative_error\n";
    for (const auto& r : res.rounds)
      csv << r.round << ',' << r.newly_localized.size() << ',' << r.messages_sent << ',' << r.cumulative_error << '\n';
    emit(g, csv.str());
  } else if (g.format == "json") {
    json out;
    out["status"] = asnl::to_string(res.status);
    out["convergence_round"] = res.convergence_round;
    out["error"] = number_json(res.error);
    json rounds = json::array();
    for (const auto& r : res.rounds) {
      json ids = json::array();
      for (int v : r.newly_localized) ids.push_back(v + 1);
      rounds.push_back({{"round", r.round},
                        {"newly_localized", ids},
                        {"messages", r.messages_sent},
                        {"cumulative_error", number_json(r.cumulative_error)}});
    }
    out["rounds"] = rounds;
    json sensors = json::array();
    for (int i = net.anchor_count(); i < net.size(); ++i) {
      const auto& p = res.positions[static_cast<std::size_t>(i)];
      sensors.push_back({{"id", i + 1},
                         {"pos", p ? point_json(*p) : json(nullptr)},
                         {"error", number_json(res.sensor_error[static_cast<std::size_t>(i - net.anchor_count())])}});
    }
    out["sensors"] = sensors;
    json missing = json::array();
    for (int v : res.unlocalized) missing.push_back(v + 1);
    out["unlocalized"] = missing;
    out["diagnostic"] = res.diagnostic;
    const asnl::BlpPreconditionReport pre = asnl::check_blp_preconditions(net);
    out["preconditions"] = {{"ok", pre.ok}, {"reason", pre.reason}};
    emit(g, out.dump(2) + "\n");
  } else {
    throw asnl::PreconditionViolated("unknown format '" + g.format + "'");
  }
  return res.status == asnl::BlpStatus::converged ? kExitOk : kExitNoConvergence;
}

struct ExperimentFlags {
  std::string generator = "acute_triangulated";
  std::string input;
  int n = 10;
  int n_a = 3;
  std::string method = "sdp";
  int repetitions = 1;
  std::optional<int> max_rounds;
  bool no_timing = false;
  std::string rank_mode;
};

int run_experiment_cmd(const GlobalFlags& g, const MeasurementFlags& m, const ExperimentFlags& e) {
  asnl::ExperimentSpec spec;
  spec.generator = asnl::generator_from_string(e.generator);
  spec.path = e.input;
  spec.n = e.n;
  spec.n_a = e.n_a;
  spec.regime.regime = asnl::regime_from_string(m.regime);
  spec.regime.sigma = m.sigma;
  spec.regime.tau_max = m.tau_max;
  spec.methods = asnl::methods_from_string(e.method);
  spec.seed = g.seed;
  spec.repetitions = e.repetitions;
  spec.max_rounds = e.max_rounds;
  spec.record_timing = !e.no_timing;
  if (!e.rank_mode.empty()) spec.sdp.rank_mode = asnl::rank_mode_from_string(e.rank_mode);
  if (g.tol) {
    spec.sdp.solver.tol = *g.tol;
    spec.sdp.rank.solver.tol = *g.tol;
    spec.sdp.rank.polish.tol = *g.tol;
  }
  const std::vector<asnl::ResultRow> rows = asnl::run_experiment(spec);

  if (g.format == "csv") {
    std::ostringstream csv;
    asnl::write_csv(csv, rows);
    emit(g, csv.str());
  } else if (g.format == "json") {
    json out = json::array();
    for (const auto& r : rows)
      out.push_back({{"run", r.run},
                     {"method", r.method},
                     {"n", r.n},
                     {"n_a", r.n_a},
                     {"error", number_json(r.error)},
                     {"metric", r.metric},
                     {"time_ms", r.time_ms},
                     {"verdict", r.verdict}});
    emit(g, out.dump(2) + "\n");
  } else {
    throw asnl::PreconditionViolated("unknown format '" + g.format + "'");
  }
  return kExitOk;
}

void add_measurement_flags(CLI::App* cmd, MeasurementFlags& m) {
  cmd->add_option("--regime", m.regime, "exact, gaussian or bounded")
      ->check(CLI::IsMember({"exact", "gaussian", "bounded"}));
  cmd->add_option("--sigma", m.sigma, "Gaussian cosine standard deviation")->check(CLI::PositiveNumber);
  cmd->add_option("--tau-max", m.tau_max, "Bound on local bearing disturbances")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Angle-based sensor network localization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--tol", g.tol, "Numerical tolerance for the selected command");
  app.add_option("--out", g.out, "Output file (stdout when omitted)");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::string kind = "acute_triangulated";
  int n = 10, n_a = 3;
  CLI::App* gen = app.add_subcommand("generate", "Generate a random network file");
  gen->add_option("--kind", kind, "acute_triangulated or bilateration");
  gen->add_option("--n", n, "Total number of sensors")->required();
  gen->add_option("--anchors", n_a, "Number of anchors");

  std::string analyze_input;
  CLI::App* analyze = app.add_subcommand("analyze", "Rigidity, fixability and decomposition report");
  analyze->add_option("--input", analyze_input, "Network file")->required()->check(CLI::ExistingFile);

  MeasurementFlags sdp_m;
  SdpFlags sdp_f;
  CLI::App* sdp = app.add_subcommand("solve-sdp", "Centralized localization by semidefinite programming");
  sdp->add_option("--input", sdp_m.input, "Network file")->required()->check(CLI::ExistingFile);
  add_measurement_flags(sdp, sdp_m);
  sdp->add_flag("--decompose", sdp_f.decompose, "Use the clique-decomposed program");
  sdp->add_option("--rank-mode", sdp_f.rank_mode, "none, d, lambda or all")
      ->check(CLI::IsMember({"none", "d", "lambda", "all"}));

  MeasurementFlags blp_m;
  std::optional<int> blp_rounds;
  CLI::App* blp = app.add_subcommand("simulate-blp", "Distributed bilateration localization protocol");
  blp->add_option("--input", blp_m.input, "Network file")->required()->check(CLI::ExistingFile);
  add_measurement_flags(blp, blp_m);
  blp->add_option("--max-rounds", blp_rounds, "Round limit (default: number of unknowns)")
      ->check(CLI::PositiveNumber);

  MeasurementFlags exp_m;
  ExperimentFlags exp_f;
  CLI::App* exp = app.add_subcommand("experiment", "Batch of seeded repetitions, one row per method");
  exp->add_option("--generator", exp_f.generator, "acute_triangulated, bilateration or from_file");
  exp->add_option("--input", exp_f.input, "Network file for the from_file generator");
  exp->add_option("--n", exp_f.n, "Total number of sensors");
  exp->add_option("--anchors", exp_f.n_a, "Number of anchors");
  add_measurement_flags(exp, exp_m);
  exp->add_option("--method", exp_f.method, "sdp, sdp_decomposed, blp or blp_and_sdp");
  exp->add_option("--reps", exp_f.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  exp->add_option("--max-rounds", exp_f.max_rounds, "BLP round limit")->check(CLI::PositiveNumber);
  exp->add_option("--rank-mode", exp_f.rank_mode, "none, d, lambda or all")
      ->check(CLI::IsMember({"none", "d", "lambda", "all"}));
  exp->add_flag("--no-timing", exp_f.no_timing, "Write time_ms as 0 for reproducible output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitPrecondition;
  }

  // Experiments default to CSV unless a format was requested.
  if (exp->parsed() && app.count("--format") == 0) g.format = "csv";

  try {
    if (gen->parsed()) return run_generate(g, kind, n, n_a);
    if (analyze->parsed()) return run_analyze(g, analyze_input);
    if (sdp->parsed()) return run_solve_sdp(g, sdp_m, sdp_f);
    if (blp->parsed()) return run_simulate_blp(g, blp_m, blp_rounds);
    if (exp->parsed()) return run_experiment_cmd(g, exp_m, exp_f);
  } catch (const asnl::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
