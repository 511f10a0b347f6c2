#include <Eigen/Eigenvalues>

#include <algorithm>
#include <set>

#include "asnl/sdp.hpp"

namespace asnl {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::exact_rank3: return "exact_rank3";
    case Verdict::relaxation_gap: return "relaxation_gap";
    case Verdict::indefinite_D: return "indefinite_D";
  }
  return "?";
}

namespace {

Eigen::MatrixXd principal(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) out(a, b) = m(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  return out;
}

}  // namespace

PositionEstimate extract_positions(const SdpSolution& sol, const ConicProgram& prog,
                                   const SensorNetwork& net, const DiagnosticOptions& opts) {
  const int y = prog.block_index(kBlockY);
  const int d = prog.block_index(kBlockD);
  if (y < 0 || static_cast<std::size_t>(y) >= sol.blocks.size())
    throw PreconditionViolated("solution has no Y block");
  const Eigen::MatrixXd& ym = sol.blocks[static_cast<std::size_t>(y)];
  const int ns = net.unknown_count();
  if (ym.rows() != ns + 2) throw DimensionMismatch("Y block does not match the network");

  PositionEstimate est;
  for (int s = 0; s < ns; ++s) est.unknowns.emplace_back(ym(0, 2 + s), ym(1, 2 + s));

  RankDiagnostics& diag = est.diagnostics;
  double d_min_ratio = 0.0;
  std::set<std::pair<int, int>> known;  // Y entries inside some cone
  for (const auto& cone : prog.cones) {
    if (cone.block != y && cone.block != d) continue;
    auto idx = cone.indices;
    std::sort(idx.begin(), idx.end());
    const Eigen::MatrixXd sub = principal(sol.blocks[static_cast<std::size_t>(cone.block)], idx);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    ConeSpectrum spec;
    spec.block = prog.blocks[static_cast<std::size_t>(cone.block)].name;
    spec.indices = idx;
    spec.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    const double top = std::max(ev(0), 0.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev(i) > opts.rank_ratio * top) ++spec.rank;
    if (cone.block == y) {
      diag.rank_Y = std::max(diag.rank_Y, spec.rank);
      for (int a : idx)
        for (int b : idx) known.insert({a, b});
    } else {
      diag.rank_D = std::max(diag.rank_D, spec.rank);
      if (top > 0.0) d_min_ratio = std::min(d_min_ratio, ev(ev.size() - 1) / top);
    }
    diag.spectra.push_back(std::move(spec));
  }
  diag.rank_Z = diag.rank_Y + diag.rank_D;
  diag.min_eig_ratio_D = d_min_ratio;

  double gram = 0.0;
  for (const auto& [a, b] : known) {
    if (a < 2 || b < 2) continue;
    const double expect = ym.col(a).head<2>().dot(ym.col(b).head<2>());
    gram += (ym(a, b) - expect) * (ym(a, b) - expect);
  }
  diag.gram_residual = std::sqrt(gram);

  const double residual = std::max({sol.primal_residual, sol.dual_residual, sol.constraint_violation});
  if (diag.rank_Y == 2 && diag.rank_D == 1 && diag.gram_residual <= opts.gram_tol &&
      residual <= opts.residual_tol) {
    diag.verdict = Verdict::exact_rank3;
  } else if (d_min_ratio < -opts.rank_ratio) {
    diag.verdict = Verdict::indefinite_D;
  } else {
    diag.verdict = Verdict::relaxation_gap;
  }
  return est;
}

Eigen::MatrixXd z_view(const SdpSolution& sol, const ConicProgram& prog) {
  const int y = prog.block_index(kBlockY);
  const int d = prog.block_index(kBlockD);
  const Eigen::MatrixXd& ym = sol.blocks.at(static_cast<std::size_t>(y));
  const Eigen::MatrixXd& dm = sol.blocks.at(static_cast<std::size_t>(d));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(ym.rows() + dm.rows(), ym.cols() + dm.cols());
  z.topLeftCorner(ym.rows(), ym.cols()) = ym;
  z.bottomRightCorner(dm.rows(), dm.cols()) = dm;
  return z;
}

Eigen::Matrix3d complete_rank1_psd_3x3(const Eigen::Matrix3d& m, int row, int col, double tol) {
  if (row == col || row < 0 || col < 0 || row > 2 || col > 2)
    throw PreconditionViolated("missing entry must be off-diagonal");
  const int pivot = 3 - row - col;
  if (!(m(pivot, pivot) > 0.0)) throw PreconditionViolated("shared diagonal entry must be positive");
  if (!(m(row, row) >= 0.0) || !(m(col, col) >= 0.0))
    throw PreconditionViolated("diagonal entries must be nonnegative");
  for (int other : {row, col}) {
    const double det = m(pivot, pivot) * m(other, other) - m(pivot, other) * m(pivot, other);
    if (std::abs(det) > tol * m(pivot, pivot) * m(other, other) || m(pivot, other) != m(other, pivot))
      throw PreconditionViolated("known 2x2 block is not rank-1 PSD");
  }
  Eigen::Matrix3d out = m;
  const double v = m(pivot, row) * m(pivot, col) / m(pivot, pivot);
  out(row, col) = v;
  out(col, row) = v;
  return out;
}

}  // namespace asnl
