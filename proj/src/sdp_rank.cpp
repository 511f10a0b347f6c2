#include <Eigen/Eigenvalues>

#include "asnl/conic.hpp"
#include "asnl/errors.hpp"

namespace asnl {

namespace {

SparseMat symmetric_unit(int dim, int i, int j) {
  SparseMat e(dim, dim);
  if (i == j) {
    e.insert(i, i) = 1.0;
  } else {
    e.insert(i, j) = 0.5;
    e.insert(j, i) = 0.5;
  }
  e.makeCompressed();
  return e;
}

}  // namespace

RankMinimizationResult iterative_rank_minimization(const ConicProgram& prog,
                                                   const RankMinimizationOptions& opts) {
  RankMinimizationResult res;
  ConicProgram base = prog;
  base.rank_targets.clear();
  res.solution = solve(base, opts.solver);

  std::vector<RankTarget> active;
  for (const auto& t : prog.rank_targets)
    if (t.rank < prog.blocks[static_cast<std::size_t>(t.block)].dim) active.push_back(t);
  if (active.empty()) {
    res.converged = true;
    return res;
  }

  std::vector<Eigen::MatrixXd> previous = res.solution.blocks;
  // Every outer step has the same blocks and cones, so the ADMM iterate
  // carries over from one step to the next.
  SolverState state;
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    ConicProgram step = base;
    const int r_block = step.add_block("rank_surrogate", 1);
    step.add_full_cone(r_block);
    step.objective[static_cast<std::size_t>(r_block)] = symmetric_unit(1, 0, 0) * (opts.w0 * std::pow(opts.alpha, outer));

    for (std::size_t k = 0; k < active.size(); ++k) {
      const int blk = active[k].block;
      const int dim = prog.blocks[static_cast<std::size_t>(blk)].dim;
      const int free_dim = dim - active[k].rank;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(previous[static_cast<std::size_t>(blk)]);
      // Eigenvalues ascend, so the first columns span the smallest ones.
      const Eigen::MatrixXd v = es.eigenvectors().leftCols(free_dim);
      const int s_block = step.add_block("rank_slack_" + std::to_string(k), free_dim);
      step.add_full_cone(s_block);
      for (int j = 0; j < free_dim; ++j)
        for (int i = 0; i <= j; ++i) {
          // S_ij - r delta_ij + (V^T B V)_ij = 0.
          Coupling c;
          c.label = "rank row " + std::to_string(k);
          c.terms.push_back({s_block, symmetric_unit(free_dim, i, j)});
          if (i == j) c.terms.push_back({r_block, -symmetric_unit(1, 0, 0)});
          const Eigen::MatrixXd outer_ij =
              0.5 * (v.col(i) * v.col(j).transpose() + v.col(j) * v.col(i).transpose());
          c.terms.push_back({blk, outer_ij.sparseView()});
          step.couplings.push_back(std::move(c));
        }
    }

    SolverOptions so = opts.solver;
    so.warm_start = &previous;
    so.resume = &state;
    SdpSolution sol = solve(step, so);
    double r = sol.blocks[static_cast<std::size_t>(r_block)](0, 0);
    if (r < opts.eps && sol.status != SolveStatus::optimal && opts.polish.max_iter > 0) {
      // The cheap inner solve claims success; confirm it at full accuracy.
      SolverOptions po = opts.polish;
      po.resume = &state;
      SdpSolution polished = solve(step, po);
      sol = std::move(polished);
      r = sol.blocks[static_cast<std::size_t>(r_block)](0, 0);
    }
    res.r_trace.push_back(r);
    res.outer_iterations = outer;
    previous = sol.blocks;
    sol.blocks.resize(prog.blocks.size());
    res.solution = std::move(sol);
    // Without polishing an inexact step is taken at its word; with it, only a
    // solve that met the tolerance can end the loop.
    const bool trusted = res.solution.status == SolveStatus::optimal || opts.polish.max_iter <= 0;
    if (r < opts.eps && trusted) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace asnl
