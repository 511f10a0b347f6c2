#include <algorithm>
#include <cmath>

#include "asnl/graphkit.hpp"
#include "asnl/sdp.hpp"

namespace asnl {

const char* to_string(RankMode m) {
  switch (m) {
    case RankMode::none: return "none";
    case RankMode::d: return "d";
    case RankMode::lambda: return "lambda";
    case RankMode::all: return "all";
  }
  return "?";
}

RankMode rank_mode_from_string(const std::string& s) {
  if (s == "none") return RankMode::none;
  if (s == "d") return RankMode::d;
  if (s == "lambda") return RankMode::lambda;
  if (s == "all") return RankMode::all;
  throw PreconditionViolated("unknown rank mode '" + s + "'");
}

std::string lambda_block_name(int triple) { return "L" + std::to_string(triple); }

Eigen::VectorXd embedding_vector(const SensorNetwork& net, int i) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(net.unknown_count() + 2);
  if (net.is_anchor(i)) {
    f.head<2>() = net.position(i);
  } else {
    f(2 + i - net.anchor_count()) = 1.0;
  }
  return f;
}

namespace {

SparseMat sym_outer(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::MatrixXd m = 0.5 * (u * v.transpose() + v * u.transpose());
  return m.sparseView();
}

SparseMat unit_pair(int dim, int a, int b) {
  SparseMat e(dim, dim);
  if (a == b) {
    e.insert(a, a) = 1.0;
  } else {
    e.insert(a, b) = 0.5;
    e.insert(b, a) = 0.5;
  }
  e.makeCompressed();
  return e;
}

// Coefficient matrices shared by all three programs.
struct AngleTerms {
  SparseMat q;  // <Q, Y> = (x_i - x_j)^T (x_i - x_k)
  SparseMat r;  // <R, D> = d_ij d_ik
};

AngleTerms angle_terms(const SensorNetwork& net, const AngleData& data, const AngleTriple& t) {
  const Eigen::VectorXd fi = embedding_vector(net, t.i);
  const Eigen::VectorXd fj = embedding_vector(net, t.j);
  const Eigen::VectorXd fk = embedding_vector(net, t.k);
  const int m = static_cast<int>(data.edges.size());
  return {sym_outer(fi - fk, fi - fj), unit_pair(m, data.edge_index(t.i, t.j), data.edge_index(t.i, t.k))};
}

struct Skeleton {
  ConicProgram prog;
  int y = 0;
  int d = 0;
};

void check_inputs(const SensorNetwork& net, const AngleData& data) {
  if (net.anchor_count() < 1) throw EmptyAnchorSet("the programs need at least one anchor");
  if (data.values.size() != data.triples.size())
    throw LengthMismatch("one angle value per triple required");
  if (data.edges != net.grounded_graph().edges())
    throw PreconditionViolated("angle data was synthesized for a different grounded graph");
}

Skeleton skeleton(const SensorNetwork& net, const AngleData& data) {
  check_inputs(net, data);
  Skeleton s;
  s.y = s.prog.add_block(kBlockY, net.unknown_count() + 2);
  s.d = s.prog.add_block(kBlockD, static_cast<int>(data.edges.size()));
  s.prog.add_full_cone(s.y);
  s.prog.add_full_cone(s.d);
  return s;
}

void add_edge_rows(Skeleton& s, const SensorNetwork& net, const AngleData& data) {
  const int m = static_cast<int>(data.edges.size());
  for (int l = 0; l < m; ++l) {
    const auto [i, j] = data.edges[static_cast<std::size_t>(l)];
    const Eigen::VectorXd diff = embedding_vector(net, i) - embedding_vector(net, j);
    Coupling c;
    c.label = "edge " + std::to_string(i) + "-" + std::to_string(j);
    c.terms.push_back({s.y, sym_outer(diff, diff)});
    c.terms.push_back({s.d, -unit_pair(m, l, l)});
    s.prog.couplings.push_back(std::move(c));
  }
}

void add_identity_corner(Skeleton& s) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) s.prog.fixed.push_back({s.y, r, c, r == c ? 1.0 : 0.0});
}

std::string triple_label(const AngleTriple& t) {
  return "angle " + std::to_string(t.i) + "," + std::to_string(t.j) + "," + std::to_string(t.k);
}

}  // namespace

ConicProgram build_exact_program(const SensorNetwork& net, const AngleData& data, RankMode rank) {
  Skeleton s = skeleton(net, data);
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const AngleTerms at = angle_terms(net, data, data.triples[t]);
    Coupling c;
    c.label = triple_label(data.triples[t]);
    c.terms.push_back({s.y, at.q});
    c.terms.push_back({s.d, -data.values[t] * at.r});
    s.prog.couplings.push_back(std::move(c));
  }
  add_edge_rows(s, net, data);
  add_identity_corner(s);
  if (rank == RankMode::d || rank == RankMode::all) s.prog.rank_targets.push_back({s.d, 1});
  return s.prog;
}

ConicProgram build_disturbed_program(const SensorNetwork& net, const AngleData& data, RankMode rank) {
  if (data.lower.size() != data.triples.size() || data.upper.size() != data.triples.size())
    throw PreconditionViolated("disturbed program needs an interval per triple");
  Skeleton s = skeleton(net, data);
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const AngleTerms at = angle_terms(net, data, data.triples[t]);
    Coupling lo;
    lo.label = triple_label(data.triples[t]) + " lower";
    lo.sense = Sense::ge;
    lo.terms.push_back({s.y, at.q});
    lo.terms.push_back({s.d, -data.lower[t] * at.r});
    Coupling hi;
    hi.label = triple_label(data.triples[t]) + " upper";
    hi.sense = Sense::le;
    hi.terms.push_back({s.y, at.q});
    hi.terms.push_back({s.d, -data.upper[t] * at.r});
    s.prog.couplings.push_back(std::move(lo));
    s.prog.couplings.push_back(std::move(hi));
  }
  add_edge_rows(s, net, data);
  add_identity_corner(s);
  if (rank == RankMode::d || rank == RankMode::all) s.prog.rank_targets.push_back({s.d, 1});
  return s.prog;
}

ConicProgram build_noisy_program(const SensorNetwork& net, const AngleData& data, RankMode rank) {
  if (data.sigma.size() != data.triples.size())
    throw PreconditionViolated("noisy program needs a standard deviation per triple");
  for (double sd : data.sigma)
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw PreconditionViolated("noisy program needs positive finite standard deviations");
  Skeleton s = skeleton(net, data);
  std::vector<int> lam(data.triples.size());
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    lam[t] = s.prog.add_block(lambda_block_name(static_cast<int>(t)), 3);
    s.prog.add_full_cone(lam[t]);
    const double a = data.values[t];
    const double w = 1.0 / (data.sigma[t] * data.sigma[t]);
    Eigen::Matrix3d f;
    f << 1.0, 0.0, -a, 0.0, 0.0, 0.0, -a, 0.0, a * a;
    s.prog.objective[static_cast<std::size_t>(lam[t])] = (w * f).sparseView();
  }
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const AngleTerms at = angle_terms(net, data, data.triples[t]);
    Coupling c;
    c.label = triple_label(data.triples[t]);
    c.terms.push_back({s.y, at.q});
    c.terms.push_back({lam[t], -unit_pair(3, 0, 1)});
    s.prog.couplings.push_back(std::move(c));
  }
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const AngleTerms at = angle_terms(net, data, data.triples[t]);
    Coupling c;
    c.label = triple_label(data.triples[t]) + " product";
    c.terms.push_back({lam[t], unit_pair(3, 1, 2)});
    c.terms.push_back({s.d, -at.r});
    s.prog.couplings.push_back(std::move(c));
  }
  add_edge_rows(s, net, data);
  add_identity_corner(s);
  for (int b : lam) s.prog.fixed.push_back({b, 2, 2, 1.0});
  if (rank == RankMode::lambda || rank == RankMode::all)
    for (int b : lam) s.prog.rank_targets.push_back({b, 1});
  if (rank == RankMode::d || rank == RankMode::all) s.prog.rank_targets.push_back({s.d, 1});
  return s.prog;
}

namespace {

std::vector<SparseMat> block_matrices(const ConicProgram& prog, int block) {
  const int dim = prog.blocks[static_cast<std::size_t>(block)].dim;
  std::vector<SparseMat> out;
  for (const auto& c : prog.couplings)
    for (const auto& t : c.terms)
      if (t.block == block) out.push_back(t.coefficient);
  if (prog.objective[static_cast<std::size_t>(block)].nonZeros() > 0)
    out.push_back(prog.objective[static_cast<std::size_t>(block)]);
  for (const auto& f : prog.fixed)
    if (f.block == block) out.push_back(unit_pair(dim, f.row, f.col));
  if (out.empty()) out.emplace_back(dim, dim);
  return out;
}

void replace_cones(ConicProgram& prog, int block, const CliqueSet& cliques) {
  prog.cones.erase(std::remove_if(prog.cones.begin(), prog.cones.end(),
                                  [block](const PsdCone& c) { return c.block == block; }),
                   prog.cones.end());
  for (const auto& c : cliques) prog.cones.push_back({block, c});
}

}  // namespace

ConicProgram decompose_program(const ConicProgram& prog, const SensorNetwork& net,
                               const DecomposeOptions& opts) {
  ConicProgram out = prog;
  const int y = out.block_index(kBlockY);
  const int d = out.block_index(kBlockD);
  if (y < 0 || d < 0) throw PreconditionViolated("program has no Y/D blocks to decompose");

  const SparsityPattern ypat = sparsity_pattern(block_matrices(out, y), true);
  if (is_chordal(ypat.graph).chordal) {
    replace_cones(out, y, maximal_cliques(ypat.graph));
  } else if (opts.allow_chordal_extension) {
    replace_cones(out, y, maximal_cliques(chordal_extension(ypat.graph)));
  } else {
    throw NotDecomposable("aggregate sparsity pattern of Y is not chordal");
  }

  if (is_acute_triangulated(net.grounded_framework())) {
    const SparsityPattern dpat = sparsity_pattern(block_matrices(out, d), false);
    replace_cones(out, d, maximal_cliques(dpat.graph));
    out.rank_targets.erase(std::remove_if(out.rank_targets.begin(), out.rank_targets.end(),
                                          [d](const RankTarget& r) { return r.block == d; }),
                           out.rank_targets.end());
  }
  return out;
}

std::vector<Eigen::MatrixXd> ground_truth_blocks(const ConicProgram& prog, const SensorNetwork& net,
                                                 const AngleData& data) {
  std::vector<Eigen::MatrixXd> out;
  for (const auto& b : prog.blocks) out.push_back(Eigen::MatrixXd::Zero(b.dim, b.dim));
  const int y = prog.block_index(kBlockY);
  const int d = prog.block_index(kBlockD);
  if (y >= 0) {
    Eigen::MatrixXd v(2, net.unknown_count() + 2);
    v.leftCols<2>().setIdentity();
    for (int s = 0; s < net.unknown_count(); ++s) v.col(2 + s) = net.position(net.anchor_count() + s);
    out[static_cast<std::size_t>(y)] = v.transpose() * v;
  }
  Eigen::VectorXd len(static_cast<Eigen::Index>(data.edges.size()));
  for (std::size_t l = 0; l < data.edges.size(); ++l)
    len(static_cast<Eigen::Index>(l)) =
        (net.position(data.edges[l].first) - net.position(data.edges[l].second)).norm();
  if (d >= 0) out[static_cast<std::size_t>(d)] = len * len.transpose();
  for (std::size_t t = 0; t < data.triples.size(); ++t) {
    const int b = prog.block_index(lambda_block_name(static_cast<int>(t)));
    if (b < 0) continue;
    const auto& tr = data.triples[t];
    const double a = angle_cosine(net.position(tr.i), net.position(tr.j), net.position(tr.k));
    const Eigen::Vector3d lam(a, len(data.edge_index(tr.i, tr.j)) * len(data.edge_index(tr.i, tr.k)), 1.0);
    out[static_cast<std::size_t>(b)] = lam * lam.transpose();
  }
  return out;
}

}  // namespace asnl
