#pragma once

// Block-structured semidefinite programs and a first-order splitting solver.

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <string>
#include <vector>

namespace asnl {

using SparseMat = Eigen::SparseMatrix<double>;

struct MatrixBlock {
  std::string name;
  int dim = 0;
};

enum class Sense { eq, le, ge };

/// sum over terms of <coefficient, block> (sense) rhs.
struct Coupling {
  struct Term {
    int block = 0;
    SparseMat coefficient;  // symmetric, full storage
  };
  std::vector<Term> terms;
  Sense sense = Sense::eq;
  double rhs = 0.0;
  std::string label;
};

struct FixedEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Principal submatrix of `block` on `indices` must be PSD. A cone over all
/// indices is the ordinary full-block constraint.
struct PsdCone {
  int block = 0;
  std::vector<int> indices;
};

struct RankTarget {
  int block = 0;
  int rank = 0;
};

struct ConicProgram {
  std::vector<MatrixBlock> blocks;
  /// Per block; an empty (0x0) matrix means a zero objective on that block.
  std::vector<SparseMat> objective;
  std::vector<Coupling> couplings;
  std::vector<FixedEntry> fixed;
  std::vector<PsdCone> cones;
  std::vector<RankTarget> rank_targets;

  int add_block(const std::string& name, int dim);
  /// Index of the block called `name`, or -1.
  int block_index(const std::string& name) const;
  /// Adds one cone over every index of `block`.
  void add_full_cone(int block);
  /// Rows counted the way the builders document them: couplings plus fixed
  /// entries.
  std::size_t constraint_count() const { return couplings.size() + fixed.size(); }

  /// Checks symmetry of every coefficient matrix, index ranges and that every
  /// referenced entry is covered by some cone. Throws PreconditionViolated.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, max_iter };
const char* to_string(SolveStatus s);

struct SdpSolution {
  std::vector<Eigen::MatrixXd> blocks;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  /// Largest violation of a coupling or fixed entry by `blocks`.
  double constraint_violation = 0.0;
  double objective = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  double seconds = 0.0;
};

/// ADMM iterate carried between solves of programs with identical cone
/// layouts. The caller guarantees the layout; only the length is checked.
struct SolverState {
  Eigen::VectorXd z;
  Eigen::VectorXd u;
  double rho = 1.0;
  double objective_scale = 1.0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  double rho = 1.0;
  double relaxation = 1.6;
  bool adaptive_rho = true;
  /// Anderson acceleration memory; 0 runs plain ADMM.
  int anderson_memory = 10;
  /// Optional starting point, matched to program blocks by index. Blocks with
  /// mismatched dimensions are ignored.
  const std::vector<Eigen::MatrixXd>* warm_start = nullptr;
  /// Optional in/out iterate; takes precedence over warm_start when usable.
  SolverState* resume = nullptr;
};

/// ADMM on the cone-split form: the affine step is a projection through a
/// precomputed pseudo-inverse of the normal matrix, the cone step is an
/// eigenvalue clamp per cone. Stops when both residuals are below tol.
/// Throws NumericalFailure on non-finite iterates.
SdpSolution solve(const ConicProgram& prog, const SolverOptions& opts = {});

struct RankMinimizationOptions {
  double w0 = 1.0;
  double alpha = 1.3;
  double eps = 1e-6;
  int max_outer = 60;
  /// Inner solves are deliberately inexact: each outer step only needs to
  /// move the eigenvector estimates, and the warm start carries progress over.
  SolverOptions solver{.tol = 1e-8, .max_iter = 1000};
  /// Full-accuracy re-solve applied once an inexact step reports r below eps.
  /// max_iter = 0 disables it.
  SolverOptions polish{.tol = 1e-8, .max_iter = 20000};
};

struct RankMinimizationResult {
  SdpSolution solution;
  /// Surrogate value r_l after each outer iteration l >= 1.
  std::vector<double> r_trace;
  int outer_iterations = 0;
  bool converged = false;
};

/// Iteration 0 solves the program without rank targets. Each later iteration
/// adds a scalar r >= 0 with objective weight w0 * alpha^l and, per targeted
/// block B of dimension n and target t, the constraint r I - V^T B V >= 0
/// where V spans the n - t smallest eigenvectors of the previous B.
/// Stops once r < eps. `converged` is false after max_outer iterations.
RankMinimizationResult iterative_rank_minimization(const ConicProgram& prog,
                                                   const RankMinimizationOptions& opts = {});

}  // namespace asnl
