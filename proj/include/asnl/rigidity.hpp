#pragma once

// Angle rigidity function and Jacobian, the infinitesimal rigidity rank test,
// and fixability / localizability certification.

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "asnl/core.hpp"
#include "asnl/graphkit.hpp"

namespace asnl {

/// Cosines g_ij . g_ik over angle_index_set(fw.graph), in that order.
Eigen::VectorXd rigidity_function(const Framework& fw);

/// Analytic |T| x 2n Jacobian; column 2v is x of vertex v, 2v+1 is y.
Eigen::MatrixXd rigidity_jacobian(const Framework& fw);

struct RigidityReport {
  int jacobian_rank = 0;
  int required_rank = 0;
  bool infinitesimally_rigid = false;
  std::vector<double> singular_values;  // descending
  double tolerance_used = 0.0;
};

/// Rank counts singular values above tol * max(sigma_max, 1 / mean edge
/// length); rigid iff rank = 2n - 4.
RigidityReport is_infinitesimally_angle_rigid(const Framework& fw, double tol = 1e-8);

enum class FixabilityStatus { fixable_certified, not_fixable, inconclusive };
const char* to_string(FixabilityStatus s);

struct FixabilityCertificate {
  FixabilityStatus status = FixabilityStatus::inconclusive;
  std::optional<BilaterationOrdering> ordering;
  std::string reason;
};

/// A failed rank test proves non-fixability; a non-degenerate bilateration
/// ordering proves fixability; anything else is inconclusive.
FixabilityCertificate certify_angle_fixability(const Framework& fw);

/// True when fewer than three anchors exist or every anchor triple has area
/// at most `tol`.
bool anchors_collinear(const SensorNetwork& net, double tol = 1e-10);

struct LocalizabilityResult {
  bool localizable = false;
  /// "ok", "anchors_collinear", "not_fixable" or "fixability_inconclusive".
  std::string reason;
  FixabilityCertificate certificate;
};

LocalizabilityResult is_angle_localizable(const SensorNetwork& net);

}  // namespace asnl
