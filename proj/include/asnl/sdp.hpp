#pragma once

// Semidefinite formulations of angle-based localization: exact, bounded
// disturbance and Gaussian maximum-likelihood programs over the blocks Y
// (Gram matrix with the identity corner) and D (outer product of edge
// lengths), their clique decomposition, and position extraction with rank
// diagnostics.

#include <Eigen/Core>

#include <string>
#include <vector>

#include "asnl/conic.hpp"
#include "asnl/core.hpp"

namespace asnl {

/// Which blocks receive rank targets: D must have rank 1, every Lambda block
/// rank 1, both, or neither.
enum class RankMode { none, d, lambda, all };
const char* to_string(RankMode m);
RankMode rank_mode_from_string(const std::string& s);

inline constexpr const char* kBlockY = "Y";
inline constexpr const char* kBlockD = "D";
/// Lambda blocks of the noisy program are named "L0", "L1", ...
std::string lambda_block_name(int triple);

/// Embedding vector of sensor i into the index space of Y: the anchor
/// position in the first two slots, or a unit vector in slot 2 + (i - n_a).
Eigen::VectorXd embedding_vector(const SensorNetwork& net, int i);

/// Rows: one per angle triple, one per grounded edge, plus the 2x2 identity
/// corner of Y as four fixed entries. Full PSD cones on Y and D.
/// Rank mode `d` or `all` adds rank(D) = 1.
ConicProgram build_exact_program(const SensorNetwork& net, const AngleData& data,
                                 RankMode rank = RankMode::none);

/// Each angle row becomes the pair <Q,Y> - lower <R,D> >= 0 and
/// <Q,Y> - upper <R,D> <= 0.
ConicProgram build_disturbed_program(const SensorNetwork& net, const AngleData& data,
                                     RankMode rank = RankMode::none);

/// Adds a 3x3 block per triple holding (a, dd, 1)(a, dd, 1)^T where dd is the
/// product of the two edge lengths. Row inventory: |T| angle rows, |T|
/// product rows, m edge rows and 4 identity entries (2|T| + m + 4), plus one
/// fixed corner entry per Lambda block.
ConicProgram build_noisy_program(const SensorNetwork& net, const AngleData& data,
                                 RankMode rank = RankMode::all);

struct DecomposeOptions {
  /// Decompose over a chordal extension when the pattern of Y is not
  /// chordal. When false, a non-chordal pattern throws NotDecomposable.
  bool allow_chordal_extension = true;
};

/// Replaces the full cone on Y by cones over the maximal cliques of the
/// extended aggregate pattern (or of its chordal extension, see
/// DecomposeOptions).
/// When the grounded framework is acute-triangulated, the full cone on D is
/// replaced by cones over the maximal cliques of its pattern and any rank
/// target on D is dropped; otherwise D is left untouched.
ConicProgram decompose_program(const ConicProgram& prog, const SensorNetwork& net,
                               const DecomposeOptions& opts = {});

/// Feasible point assembled from ground truth: Y from the true unknown
/// positions, D from the true edge lengths, Lambda from the true cosines.
std::vector<Eigen::MatrixXd> ground_truth_blocks(const ConicProgram& prog, const SensorNetwork& net,
                                                 const AngleData& data);

enum class Verdict { exact_rank3, relaxation_gap, indefinite_D };
const char* to_string(Verdict v);

struct ConeSpectrum {
  std::string block;
  std::vector<int> indices;
  std::vector<double> eigenvalues;  // descending
  int rank = 0;
};

struct RankDiagnostics {
  std::vector<ConeSpectrum> spectra;
  int rank_Y = 0;
  int rank_D = 0;
  int rank_Z = 0;
  double gram_residual = 0.0;
  double min_eig_ratio_D = 0.0;
  Verdict verdict = Verdict::relaxation_gap;
};

struct DiagnosticOptions {
  double rank_ratio = 1e-6;
  double gram_tol = 1e-6;
  /// Largest solver residual for which an exact verdict may be issued.
  double residual_tol = 1e-6;
};

struct PositionEstimate {
  std::vector<Point2> unknowns;  // in unknown order
  RankDiagnostics diagnostics;
};

/// Reads X from rows 0-1 of Y and computes ranks per cone. rank_Y and rank_D
/// are maxima over the cones of the respective block.
PositionEstimate extract_positions(const SdpSolution& sol, const ConicProgram& prog,
                                   const SensorNetwork& net, const DiagnosticOptions& opts = {});

/// Block-diagonal diag(Y, D).
Eigen::MatrixXd z_view(const SdpSolution& sol, const ConicProgram& prog);

/// Fills the single missing off-diagonal pair (row, col) of a 3x3 symmetric
/// matrix so that the result is rank-1 PSD. Both known 2x2 principal blocks
/// touching the gap must be rank-1 PSD within `tol` (relative); only the
/// diagonal entry they share has to be positive.
Eigen::Matrix3d complete_rank1_psd_3x3(const Eigen::Matrix3d& m, int row, int col, double tol = 1e-9);

}  // namespace asnl
