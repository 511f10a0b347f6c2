#include "asnl/rigidity.hpp"

#include <Eigen/SVD>

#include <algorithm>

namespace asnl {

Eigen::VectorXd rigidity_function(const Framework& fw) {
  const auto triples = angle_index_set(fw.graph);
  Eigen::VectorXd f(static_cast<Eigen::Index>(triples.size()));
  for (std::size_t r = 0; r < triples.size(); ++r) {
    const auto& t = triples[r];
    f(static_cast<Eigen::Index>(r)) =
        angle_cosine(fw.config[static_cast<std::size_t>(t.i)], fw.config[static_cast<std::size_t>(t.j)],
                     fw.config[static_cast<std::size_t>(t.k)]);
  }
  return f;
}

Eigen::MatrixXd rigidity_jacobian(const Framework& fw) {
  const auto triples = angle_index_set(fw.graph);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(triples.size()), 2 * fw.size());
  for (std::size_t r = 0; r < triples.size(); ++r) {
    const auto& t = triples[r];
    const Point2& pi = fw.config[static_cast<std::size_t>(t.i)];
    const Point2& pj = fw.config[static_cast<std::size_t>(t.j)];
    const Point2& pk = fw.config[static_cast<std::size_t>(t.k)];
    const Vec2 gij = bearing(pi, pj);
    const Vec2 gik = bearing(pi, pk);
    const double dij = (pi - pj).norm();
    const double dik = (pi - pk).norm();
    // d(g_ij)/d(p_j) = -(I - g g^T) / d_ij.
    const Vec2 dj = -(Mat2::Identity() - gij * gij.transpose()) * gik / dij;
    const Vec2 dk = -(Mat2::Identity() - gik * gik.transpose()) * gij / dik;
    const auto row = static_cast<Eigen::Index>(r);
    jac.block<1, 2>(row, 2 * t.j) += dj.transpose();
    jac.block<1, 2>(row, 2 * t.k) += dk.transpose();
    jac.block<1, 2>(row, 2 * t.i) -= (dj + dk).transpose();
  }
  return jac;
}

RigidityReport is_infinitesimally_angle_rigid(const Framework& fw, double tol) {
  if (fw.size() < 3) throw PreconditionViolated("rigidity test needs at least 3 vertices");
  RigidityReport rep;
  rep.required_rank = 2 * fw.size() - 4;
  rep.tolerance_used = tol;
  const Eigen::MatrixXd jac = rigidity_jacobian(fw);
  if (jac.rows() > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const Eigen::VectorXd& s = svd.singularValues();
    rep.singular_values.assign(s.data(), s.data() + s.size());
    // Entries scale like 1 / length. The floor keeps rounding noise from
    // counting as rank when the Jacobian vanishes (collinear frameworks).
    double mean_length = 0.0;
    const auto edges = fw.graph.edges();
    for (const auto& [i, j] : edges) mean_length += (fw.config[static_cast<std::size_t>(i)] - fw.config[static_cast<std::size_t>(j)]).norm();
    mean_length /= static_cast<double>(edges.size());
    const double cutoff = s.size() > 0 ? tol * std::max(s(0), 1.0 / mean_length) : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > cutoff) ++rep.jacobian_rank;
  }
  rep.infinitesimally_rigid = rep.jacobian_rank == rep.required_rank;
  return rep;
}

const char* to_string(FixabilityStatus s) {
  switch (s) {
    case FixabilityStatus::fixable_certified: return "fixable_certified";
    case FixabilityStatus::not_fixable: return "not_fixable";
    case FixabilityStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

FixabilityCertificate certify_angle_fixability(const Framework& fw) {
  FixabilityCertificate cert;
  if (fw.size() < 3) {
    cert.status = FixabilityStatus::not_fixable;
    cert.reason = "fewer than 3 vertices";
    return cert;
  }
  RigidityReport rep;
  try {
    rep = is_infinitesimally_angle_rigid(fw);
  } catch (const CoincidentPoints&) {
    cert.reason = "coincident adjacent vertices";
    return cert;
  }
  if (!rep.infinitesimally_rigid) {
    cert.status = FixabilityStatus::not_fixable;
    cert.reason = "rigidity matrix rank " + std::to_string(rep.jacobian_rank) + " below " +
                  std::to_string(rep.required_rank);
    return cert;
  }
  if (auto ord = find_nondegenerate_ordering(fw)) {
    cert.status = FixabilityStatus::fixable_certified;
    cert.ordering = std::move(ord);
    cert.reason = "non-degenerate bilateration ordering found";
    return cert;
  }
  cert.reason = "infinitesimally rigid but no non-degenerate bilateration ordering found";
  return cert;
}

bool anchors_collinear(const SensorNetwork& net, double tol) {
  const int na = net.anchor_count();
  for (int a = 0; a < na; ++a)
    for (int b = a + 1; b < na; ++b)
      for (int c = b + 1; c < na; ++c)
        if (triangle_area(net.position(a), net.position(b), net.position(c)) > tol) return false;
  return true;
}

LocalizabilityResult is_angle_localizable(const SensorNetwork& net) {
  if (net.anchor_count() < 1) throw EmptyAnchorSet("localizability needs at least one anchor");
  LocalizabilityResult res;
  res.certificate = certify_angle_fixability(net.grounded_framework());
  if (anchors_collinear(net)) {
    res.reason = "anchors_collinear";
    return res;
  }
  switch (res.certificate.status) {
    case FixabilityStatus::fixable_certified:
      res.localizable = true;
      res.reason = "ok";
      break;
    case FixabilityStatus::not_fixable:
      res.reason = "not_fixable";
      break;
    case FixabilityStatus::inconclusive:
      res.reason = "fixability_inconclusive";
      break;
  }
  return res;
}

}  // namespace asnl
