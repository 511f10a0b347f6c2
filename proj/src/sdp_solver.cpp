#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include "asnl/conic.hpp"
#include "asnl/errors.hpp"

namespace asnl {

namespace {

const double kSqrt2 = std::numbers::sqrt2;

// Vectorized view of a ConicProgram. Variable v stores scale[v] * X(r, c) for
// an upper-triangle entry (r <= c) of some block, with scale sqrt(2) off the
// diagonal so that Euclidean norms match Frobenius norms. Inequality rows get
// one nonnegative slack variable each.
struct Layout {
  std::vector<std::vector<int>> index;  // per block, dim*dim, symmetric, -1 if absent
  std::vector<double> scale;
  std::vector<std::pair<int, std::pair<int, int>>> owner;  // (block, (r, c)) per variable
  int slack_begin = 0;
  int size = 0;

  int var(int block, int r, int c) const {
    const auto& blk = index[static_cast<std::size_t>(block)];
    const auto dim = static_cast<int>(std::lround(std::sqrt(static_cast<double>(blk.size()))));
    return blk[static_cast<std::size_t>(r * dim + c)];
  }
};

struct ConeSlice {
  int offset = 0;          // into the stacked cone vector
  int dim = 0;             // matrix dimension (1 for slack cones)
};

Layout make_layout(const ConicProgram& prog, int slack_count) {
  Layout lay;
  lay.index.resize(prog.blocks.size());
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto dim = static_cast<std::size_t>(prog.blocks[b].dim);
    lay.index[b].assign(dim * dim, -1);
  }
  // Deterministic numbering: block by block, column-major upper triangle.
  std::vector<std::vector<char>> used(prog.blocks.size());
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    const auto dim = static_cast<std::size_t>(prog.blocks[b].dim);
    used[b].assign(dim * dim, 0);
  }
  for (const auto& cone : prog.cones) {
    const auto dim = static_cast<std::size_t>(prog.blocks[static_cast<std::size_t>(cone.block)].dim);
    for (int a : cone.indices)
      for (int c : cone.indices)
        used[static_cast<std::size_t>(cone.block)][static_cast<std::size_t>(a) * dim + static_cast<std::size_t>(c)] = 1;
  }
  int next = 0;
  for (std::size_t b = 0; b < prog.blocks.size(); ++b) {
    const int dim = prog.blocks[b].dim;
    for (int c = 0; c < dim; ++c)
      for (int r = 0; r <= c; ++r) {
        if (!used[b][static_cast<std::size_t>(r * dim + c)]) continue;
        lay.index[b][static_cast<std::size_t>(r * dim + c)] = next;
        lay.index[b][static_cast<std::size_t>(c * dim + r)] = next;
        lay.scale.push_back(r == c ? 1.0 : kSqrt2);
        lay.owner.push_back({static_cast<int>(b), {r, c}});
        ++next;
      }
  }
  lay.slack_begin = next;
  for (int s = 0; s < slack_count; ++s) {
    lay.scale.push_back(1.0);
    lay.owner.push_back({-1, {s, s}});
  }
  lay.size = next + slack_count;
  return lay;
}

// Adds <K, block> to a row expressed in x.
void accumulate(const Layout& lay, int block, const SparseMat& k, std::map<int, double>& row) {
  for (int o = 0; o < k.outerSize(); ++o)
    for (SparseMat::InnerIterator it(k, o); it; ++it) {
      if (it.value() == 0.0) continue;
      const int v = lay.var(block, static_cast<int>(it.row()), static_cast<int>(it.col()));
      if (v < 0) throw PreconditionViolated("coefficient on an entry outside every cone");
      row[v] += it.value() / lay.scale[static_cast<std::size_t>(v)];
    }
}

// Fixed-size path for the many small cones of the noisy program.
template <int N>
void project_psd_fixed(double* z) {
  using Mat = Eigen::Matrix<double, N, N>;
  Mat m;
  int p = 0;
  for (int c = 0; c < N; ++c)
    for (int r = 0; r <= c; ++r, ++p) {
      const double val = r == c ? z[p] : z[p] / kSqrt2;
      m(r, c) = val;
      m(c, r) = val;
    }
  const Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.eigenvalues().minCoeff() >= 0.0) return;
  m.noalias() = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
  p = 0;
  for (int c = 0; c < N; ++c)
    for (int r = 0; r <= c; ++r, ++p) z[p] = r == c ? m(r, c) : m(r, c) * kSqrt2;
}

void project_psd(double* z, int dim, Eigen::MatrixXd& work, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>& es) {
  if (dim == 1) {
    z[0] = std::max(0.0, z[0]);
    return;
  }
  if (dim == 2) return project_psd_fixed<2>(z);
  if (dim == 3) return project_psd_fixed<3>(z);
  work.resize(dim, dim);
  int p = 0;
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r <= c; ++r, ++p) {
      const double val = r == c ? z[p] : z[p] / kSqrt2;
      work(r, c) = val;
      work(c, r) = val;
    }
  es.compute(work);
  if (es.eigenvalues().minCoeff() >= 0.0) return;
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  work.noalias() = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  p = 0;
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r <= c; ++r, ++p) z[p] = r == c ? work(r, c) : work(r, c) * kSqrt2;
}

}  // namespace

SdpSolution solve(const ConicProgram& prog, const SolverOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  prog.validate();

  int slack_count = 0;
  for (const auto& c : prog.couplings)
    if (c.sense != Sense::eq) ++slack_count;
  const Layout lay = make_layout(prog, slack_count);
  const int nvar = lay.size;

  // Affine rows.
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> rhs;
  int row_id = 0;
  int slack_id = lay.slack_begin;
  for (const auto& c : prog.couplings) {
    std::map<int, double> row;
    for (const auto& t : c.terms) accumulate(lay, t.block, t.coefficient, row);
    if (c.sense == Sense::ge) row[slack_id++] = -1.0;
    if (c.sense == Sense::le) row[slack_id++] = 1.0;
    for (const auto& [v, a] : row)
      if (a != 0.0) trips.emplace_back(row_id, v, a);
    rhs.push_back(c.rhs);
    ++row_id;
  }
  std::map<int, double> fixed_value;
  for (const auto& f : prog.fixed) {
    const int v = lay.var(f.block, f.row, f.col);
    auto [it, inserted] = fixed_value.emplace(v, f.value);
    if (!inserted && it->second != f.value) throw PreconditionViolated("inconsistent fixed entries");
  }
  for (const auto& [v, val] : fixed_value) {
    trips.emplace_back(row_id++, v, 1.0);
    rhs.push_back(val * lay.scale[static_cast<std::size_t>(v)]);
  }
  const int nrows = row_id;
  SparseMat a_mat(nrows, nvar);
  a_mat.setFromTriplets(trips.begin(), trips.end());
  const Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(rhs.data(), nrows);

  // Objective, normalized by its largest coefficient.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(nvar);
  for (std::size_t blk = 0; blk < prog.objective.size(); ++blk) {
    if (prog.objective[blk].nonZeros() == 0) continue;
    std::map<int, double> row;
    accumulate(lay, static_cast<int>(blk), prog.objective[blk], row);
    for (const auto& [v, val] : row) c(v) += val;
  }
  const double c_scale = c.cwiseAbs().maxCoeff() > 0.0 ? c.cwiseAbs().maxCoeff() : 1.0;
  const Eigen::VectorXd c_norm = c / c_scale;

  // Stacked cone selection.
  std::vector<int> h_index;
  std::vector<ConeSlice> slices;
  for (const auto& cone : prog.cones) {
    auto idx = cone.indices;
    std::sort(idx.begin(), idx.end());
    ConeSlice s{static_cast<int>(h_index.size()), static_cast<int>(idx.size())};
    for (std::size_t q = 0; q < idx.size(); ++q)
      for (std::size_t r = 0; r <= q; ++r) h_index.push_back(lay.var(cone.block, idx[r], idx[q]));
    slices.push_back(s);
  }
  for (int v = lay.slack_begin; v < nvar; ++v) {
    slices.push_back({static_cast<int>(h_index.size()), 1});
    h_index.push_back(v);
  }
  const auto hlen = static_cast<Eigen::Index>(h_index.size());
  Eigen::VectorXd m_diag = Eigen::VectorXd::Zero(nvar);
  for (int v : h_index) m_diag(v) += 1.0;
  if (m_diag.minCoeff() <= 0.0) throw PreconditionViolated("variable not covered by any cone");
  const Eigen::VectorXd m_inv = m_diag.cwiseInverse();

  // Pseudo-inverse of A M^-1 A^T via eigendecomposition, so redundant rows
  // (e.g. duplicated consistency relations) are harmless.
  Eigen::MatrixXd k_pinv = Eigen::MatrixXd::Zero(nrows, nrows);
  if (nrows > 0) {
    const SparseMat am = a_mat * m_inv.asDiagonal();
    const Eigen::MatrixXd k_mat = Eigen::MatrixXd(am * a_mat.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_mat);
    const double lmax = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(nrows);
    for (int i = 0; i < nrows; ++i)
      if (es.eigenvalues()(i) > 1e-12 * lmax) inv(i) = 1.0 / es.eigenvalues()(i);
    k_pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }
  const SparseMat a_t = a_mat.transpose();

  auto gather = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    for (Eigen::Index i = 0; i < hlen; ++i) out(i) = x(h_index[static_cast<std::size_t>(i)]);
  };
  auto scatter = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    out.setZero();
    for (Eigen::Index i = 0; i < hlen; ++i) out(h_index[static_cast<std::size_t>(i)]) += y(i);
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(nvar);
  if (opts.warm_start) {
    const auto& ws = *opts.warm_start;
    for (int v = 0; v < lay.slack_begin; ++v) {
      const auto& [blk, rc] = lay.owner[static_cast<std::size_t>(v)];
      if (static_cast<std::size_t>(blk) < ws.size() &&
          ws[static_cast<std::size_t>(blk)].rows() == prog.blocks[static_cast<std::size_t>(blk)].dim)
        x(v) = ws[static_cast<std::size_t>(blk)](rc.first, rc.second) * lay.scale[static_cast<std::size_t>(v)];
    }
    if (nrows > 0) {
      const Eigen::VectorXd resid = a_mat * x - b;
      for (int r = 0, s = lay.slack_begin; r < static_cast<int>(prog.couplings.size()); ++r) {
        const auto sense = prog.couplings[static_cast<std::size_t>(r)].sense;
        if (sense == Sense::eq) continue;
        // ge rows: a.x - s = b; le rows: a.x + s = b.
        const double val = resid(r) + (x(s) * (sense == Sense::ge ? -1.0 : 1.0));
        x(s) = std::max(0.0, sense == Sense::ge ? val : -val);
        ++s;
      }
    }
  }

  Eigen::VectorXd z(hlen), z_old(hlen), u = Eigen::VectorXd::Zero(hlen), hx(hlen), xhat(hlen);
  gather(x, z);
  Eigen::MatrixXd work;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  for (const auto& s : slices) project_psd(z.data() + s.offset, s.dim, work, es);

  double rho = opts.rho;
  if (opts.resume && opts.resume->z.size() == hlen && opts.resume->u.size() == hlen) {
    // Same cone layout as the previous solve: continue from its iterate.
    // Duals scale with the objective normalization.
    z = opts.resume->z;
    u = opts.resume->u * (opts.resume->objective_scale / c_scale);
    rho = opts.resume->rho;
  }
  const double alpha = opts.relaxation;
  Eigen::VectorXd v(nvar), w(nvar), tmp(nvar);
  SdpSolution sol;
  double rp = 0.0, rd = 0.0;
  int it = 0;

  // One ADMM sweep maps (z, u) to (z', u'). The sweep is a fixed-point
  // iteration, so it is accelerated with safeguarded type-II Anderson
  // mixing over the stacked state.
  auto sweep = [&](Eigen::VectorXd& zs, Eigen::VectorXd& us) {
    xhat = zs - us;
    scatter(xhat, v);
    w = m_inv.cwiseProduct(v - c_norm / rho);
    if (nrows > 0) {
      const Eigen::VectorXd lam = k_pinv * (a_mat * w - b);
      tmp = a_t * lam;
      x = w - m_inv.cwiseProduct(tmp);
    } else {
      x = w;
    }
    gather(x, hx);
    z_old = zs;
    xhat = alpha * hx + (1.0 - alpha) * z_old;
    zs = xhat + us;
    for (const auto& s : slices) project_psd(zs.data() + s.offset, s.dim, work, es);
    us += xhat - zs;
    rp = (hx - zs).norm();
    scatter(zs - z_old, tmp);
    rd = rho * tmp.norm();
  };

  const int mem = std::max(0, opts.anderson_memory);
  const Eigen::Index slen = 2 * hlen;
  Eigen::MatrixXd dw(slen, std::max(mem, 1)), df(slen, std::max(mem, 1));
  int stored = 0, head = 0;
  Eigen::VectorXd state(slen), image(slen), resid(slen), prev_state(slen), prev_resid(slen);
  Eigen::VectorXd fallback(slen);
  bool have_prev = false, pending = false;
  double pending_ref = 0.0;
  auto reset_memory = [&] {
    stored = 0;
    head = 0;
    have_prev = false;
    pending = false;
  };
  state << z, u;

  for (; it < opts.max_iter; ++it) {
    z = state.head(hlen);
    u = state.tail(hlen);
    sweep(z, u);
    if (!std::isfinite(rp) || !std::isfinite(rd)) throw NumericalFailure("non-finite iterate in conic solver");
    if (rp <= opts.tol && rd <= opts.tol) {
      ++it;
      sol.status = SolveStatus::optimal;
      break;
    }
    image << z, u;
    resid = image - state;
    const double rnorm = resid.norm();

    if (opts.adaptive_rho && it % 25 == 24) {
      double factor = 1.0;
      if (rp > 5.0 * rd && rho < 1e6) factor = 2.0;
      else if (rd > 5.0 * rp && rho > 1e-6) factor = 0.5;
      if (factor != 1.0) {
        rho *= factor;
        u /= factor;
        state << z, u;
        reset_memory();
        continue;
      }
    }
    if (mem == 0) {
      state = image;
      continue;
    }
    if (pending && rnorm > pending_ref) {
      // The mixed point made things worse: fall back to the plain sweep.
      state = fallback;
      reset_memory();
      continue;
    }
    if (have_prev) {
      dw.col(head) = state - prev_state;
      df.col(head) = resid - prev_resid;
      head = (head + 1) % mem;
      stored = std::min(stored + 1, mem);
    }
    prev_state = state;
    prev_resid = resid;
    have_prev = true;
    if (stored == 0) {
      state = image;
      pending = false;
      continue;
    }
    const auto yk = df.leftCols(stored);
    Eigen::MatrixXd gram = yk.transpose() * yk;
    gram.diagonal().array() += 1e-10 * (gram.diagonal().maxCoeff() + 1e-300);
    const Eigen::VectorXd gamma = gram.ldlt().solve(yk.transpose() * resid);
    fallback = image;
    state = image - (dw.leftCols(stored) + yk) * gamma;
    if (!state.allFinite()) {
      state = image;
      reset_memory();
      continue;
    }
    pending = true;
    pending_ref = rnorm;
  }
  if (sol.status != SolveStatus::optimal) {
    z = state.head(hlen);
    u = state.tail(hlen);
  }
  if (opts.resume) {
    opts.resume->z = z;
    opts.resume->u = u;
    opts.resume->rho = rho;
    opts.resume->objective_scale = c_scale;
  }
  sol.iterations = it;
  sol.primal_residual = rp;
  sol.dual_residual = rd;
  sol.objective = c.dot(x);
  sol.blocks.reserve(prog.blocks.size());
  for (const auto& blk : prog.blocks) sol.blocks.push_back(Eigen::MatrixXd::Zero(blk.dim, blk.dim));
  for (int var = 0; var < lay.slack_begin; ++var) {
    const auto& [blk, rc] = lay.owner[static_cast<std::size_t>(var)];
    const double val = x(var) / lay.scale[static_cast<std::size_t>(var)];
    sol.blocks[static_cast<std::size_t>(blk)](rc.first, rc.second) = val;
    sol.blocks[static_cast<std::size_t>(blk)](rc.second, rc.first) = val;
  }
  double viol = 0.0;
  for (const auto& cp : prog.couplings) {
    double lhs = 0.0;
    for (const auto& t : cp.terms)
      for (int o = 0; o < t.coefficient.outerSize(); ++o)
        for (SparseMat::InnerIterator iter(t.coefficient, o); iter; ++iter)
          lhs += iter.value() * sol.blocks[static_cast<std::size_t>(t.block)](iter.row(), iter.col());
    const double d = lhs - cp.rhs;
    if (cp.sense == Sense::eq) viol = std::max(viol, std::abs(d));
    if (cp.sense == Sense::ge) viol = std::max(viol, -d);
    if (cp.sense == Sense::le) viol = std::max(viol, d);
  }
  for (const auto& f : prog.fixed)
    viol = std::max(viol, std::abs(sol.blocks[static_cast<std::size_t>(f.block)](f.row, f.col) - f.value));
  sol.constraint_violation = viol;
  sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace asnl
