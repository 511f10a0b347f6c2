#pragma once

// Network generators, end-to-end pipelines and the batch experiment runner.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "asnl/blp.hpp"
#include "asnl/conic.hpp"
#include "asnl/core.hpp"
#include "asnl/sdp.hpp"

namespace asnl {

enum class GeneratorKind { acute_triangulated, bilateration, from_file };
const char* to_string(GeneratorKind k);
GeneratorKind generator_from_string(const std::string& s);

/// Grows a network in the unit box. Vertices 0..n_a-1 are anchors and form
/// the start of the growth, so the anchors sense each other.
///  - bilateration: each new vertex joins its two nearest placed vertices,
///    rejecting nearly collinear attachments.
///  - acute_triangulated: each new vertex joins the endpoints of the nearest
///    edge with which it forms a strictly acute triangle (with margin).
/// Frames are drawn uniformly from O(2). Throws PreconditionViolated unless
/// n >= n_a >= 3 (and n_a = 3 for the acute generator, since the anchors
/// form a clique of the grounded graph), and GenerationFailed after 10000
/// rejected placements for one vertex.
SensorNetwork generate_network(GeneratorKind kind, int n, int n_a, std::uint64_t seed);

/// Root-sum-square distance; throws LengthMismatch on unequal lengths.
double evaluate(const std::vector<Point2>& truth, const std::vector<Point2>& estimate);

/// Ground-truth positions of the unknowns, in unknown order.
std::vector<Point2> unknown_positions(const SensorNetwork& net);

struct SdpPipelineOptions {
  bool decompose = false;
  /// Unset: none for exact and bounded data; Lambda targets (plus D unless
  /// the grounded framework is acute-triangulated) for Gaussian data.
  std::optional<RankMode> rank_mode;
  /// Used when the program carries no rank targets.
  SolverOptions solver;
  RankMinimizationOptions rank;
  DiagnosticOptions diagnostics;
};

struct SdpRunResult {
  ConicProgram program;
  SdpSolution solution;
  PositionEstimate estimate;
  RankMode rank_mode = RankMode::none;
  std::vector<double> r_trace;
  int outer_iterations = 0;
  bool converged = true;
  double seconds = 0.0;
};

/// Builds the program matching data.regime, optionally decomposes it, and
/// solves it (with rank minimization when rank targets are present).
SdpRunResult run_sdp_pipeline(const SensorNetwork& net, const AngleData& data,
                              const SdpPipelineOptions& opts = {});

enum class Method { sdp, sdp_decomposed, blp };
const char* to_string(Method m);
/// Accepts sdp, sdp_decomposed, blp and blp_and_sdp (which expands to both).
std::vector<Method> methods_from_string(const std::string& s);

struct ExperimentSpec {
  GeneratorKind generator = GeneratorKind::acute_triangulated;
  int n = 10;
  int n_a = 3;
  std::string path;  // from_file only
  RegimeParams regime;
  std::vector<Method> methods{Method::sdp};
  std::uint64_t seed = 1;
  int repetitions = 1;
  SdpPipelineOptions sdp;
  std::optional<int> max_rounds;
  /// When false, time_ms is written as 0 so output is byte-reproducible.
  bool record_timing = true;
};

struct ResultRow {
  int run = 0;
  std::string method;
  int n = 0;
  int n_a = 0;
  double error = 0.0;
  /// BLP rounds or solver iterations.
  double metric = 0.0;
  double time_ms = 0.0;
  std::string verdict;
};

/// One row per repetition and method, sorted by run. Errors raised while
/// handling a repetition are recorded in the verdict column.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace asnl
