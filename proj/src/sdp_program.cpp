#include <algorithm>
#include <set>
#include <utility>

#include "asnl/conic.hpp"
#include "asnl/errors.hpp"

namespace asnl {

int ConicProgram::add_block(const std::string& name, int dim) {
  if (dim <= 0) throw PreconditionViolated("block '" + name + "' must have positive dimension");
  blocks.push_back({name, dim});
  objective.emplace_back();
  return static_cast<int>(blocks.size()) - 1;
}

int ConicProgram::block_index(const std::string& name) const {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].name == name) return static_cast<int>(b);
  return -1;
}

void ConicProgram::add_full_cone(int block) {
  PsdCone cone{block, {}};
  cone.indices.resize(static_cast<std::size_t>(blocks.at(static_cast<std::size_t>(block)).dim));
  for (std::size_t i = 0; i < cone.indices.size(); ++i) cone.indices[i] = static_cast<int>(i);
  cones.push_back(std::move(cone));
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "?";
}

void ConicProgram::validate() const {
  const auto nblocks = static_cast<int>(blocks.size());
  if (objective.size() != blocks.size()) throw PreconditionViolated("objective list does not match blocks");

  std::vector<std::set<std::pair<int, int>>> covered(blocks.size());
  for (const auto& cone : cones) {
    if (cone.block < 0 || cone.block >= nblocks) throw PreconditionViolated("cone references a missing block");
    const int dim = blocks[static_cast<std::size_t>(cone.block)].dim;
    for (int a : cone.indices)
      if (a < 0 || a >= dim) throw PreconditionViolated("cone index out of range");
    for (int a : cone.indices)
      for (int b : cone.indices)
        if (a <= b) covered[static_cast<std::size_t>(cone.block)].insert({a, b});
  }

  auto check_matrix = [&](int block, const SparseMat& m, const std::string& what) {
    if (block < 0 || block >= nblocks) throw PreconditionViolated(what + " references a missing block");
    if (m.rows() == 0 && m.cols() == 0) return;
    const int dim = blocks[static_cast<std::size_t>(block)].dim;
    if (m.rows() != dim || m.cols() != dim)
      throw PreconditionViolated(what + " has the wrong dimension for block " +
                                 blocks[static_cast<std::size_t>(block)].name);
    const SparseMat diff = SparseMat(m.transpose()) - m;
    for (int k = 0; k < diff.outerSize(); ++k)
      for (SparseMat::InnerIterator it(diff, k); it; ++it)
        if (it.value() != 0.0) throw PreconditionViolated(what + " is not symmetric");
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it) {
        const auto key = std::minmax(static_cast<int>(it.row()), static_cast<int>(it.col()));
        if (it.value() != 0.0 && !covered[static_cast<std::size_t>(block)].count(key))
          throw PreconditionViolated(what + " touches an entry of block " +
                                     blocks[static_cast<std::size_t>(block)].name +
                                     " not covered by any cone");
      }
  };

  for (std::size_t b = 0; b < objective.size(); ++b) check_matrix(static_cast<int>(b), objective[b], "objective");
  for (const auto& c : couplings)
    for (const auto& t : c.terms) check_matrix(t.block, t.coefficient, "coupling '" + c.label + "'");
  for (const auto& f : fixed) {
    if (f.block < 0 || f.block >= nblocks) throw PreconditionViolated("fixed entry references a missing block");
    const auto key = std::minmax(f.row, f.col);
    if (!covered[static_cast<std::size_t>(f.block)].count(key))
      throw PreconditionViolated("fixed entry not covered by any cone");
  }
  for (const auto& r : rank_targets) {
    if (r.block < 0 || r.block >= nblocks) throw PreconditionViolated("rank target references a missing block");
    if (r.rank < 0 || r.rank > blocks[static_cast<std::size_t>(r.block)].dim)
      throw PreconditionViolated("rank target out of range");
  }
}

}  // namespace asnl
