#pragma once

// Simulation of the distributed bilateration localization protocol. Each
// sensor is a state machine that sees only its own local bearings and the
// messages delivered to it; the world routes messages along sensing edges in
// synchronous rounds.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asnl/core.hpp"

namespace asnl {

/// Solves [g1^T; g2^T] g = (b1, b2) and renormalizes. Throws CollinearBasis
/// when |det| <= tol.
Vec2 fg_solve(const Vec2& g1, const Vec2& g2, double b1, double b2, double tol = 1e-10);

/// Intersection of the lines x_i - t g_ik and x_j - s g_jk. Throws
/// CollinearRays when |det| <= tol.
Point2 fx_solve(const Point2& xi, const Point2& xj, const Vec2& gik, const Vec2& gjk,
                double tol = 1e-10);

enum class SensorMode { localized, unlocalized };

enum class MessageKind { position, position_and_bearing };

struct Message {
  int from = 0;
  int to = 0;
  MessageKind kind = MessageKind::position;
  Point2 position = Point2::Zero();
  Vec2 bearing = Vec2::Zero();  // global g_{from,to}; position_and_bearing only
  int round = 0;
};

struct SensorState {
  int id = 0;
  SensorMode mode = SensorMode::unlocalized;
  std::optional<Point2> position;
  /// Measured bearings to sensing neighbours, in this sensor's own frame.
  std::map<int, Vec2> local_bearings;
  /// Global positions of neighbours learned from messages (or a priori for
  /// anchor neighbours of an anchor).
  std::map<int, Point2> neighbor_positions;
  /// Global bearing g_{j,self} received from neighbour j.
  std::map<int, Vec2> received_bearings;
  /// Neighbours this sensor has already sent its position / a bearing to.
  std::map<int, MessageKind> sent;
};

struct RoundLog {
  int round = 0;
  std::vector<int> newly_localized;
  int messages_sent = 0;
  /// Root-sum-square error over unknowns localized so far.
  double cumulative_error = 0.0;
};

class BlpWorld {
 public:
  /// Anchors start localized at their true positions and know the positions
  /// of their anchor neighbours in the sensing graph. Local bearings come
  /// from `measurements.bearings` (possibly perturbed).
  BlpWorld(const SensorNetwork& net, const AngleData& measurements, double collinear_tol = 1e-10);

  /// One synchronous round: all sends are computed from the state at the
  /// start of the round, then delivered, then unlocalized sensors try to
  /// localize.
  RoundLog step_round();

  int round() const { return round_; }
  bool all_localized() const;
  /// True when the last round changed any sensor's knowledge or mode.
  bool last_round_progressed() const { return progressed_; }
  const std::vector<SensorState>& sensors() const { return sensors_; }
  const std::vector<Message>& message_log() const { return log_; }
  const SensorNetwork& network() const { return *net_; }

 private:
  std::optional<Vec2> solve_bearing_to(const SensorState& s, int target) const;
  double cumulative_error() const;

  const SensorNetwork* net_;
  double tol_;
  std::vector<SensorState> sensors_;
  std::vector<Message> log_;
  int round_ = 0;
  bool progressed_ = true;
};

enum class BlpStatus { converged, stalled, max_rounds };
const char* to_string(BlpStatus s);

struct BlpResult {
  BlpStatus status = BlpStatus::stalled;
  std::vector<RoundLog> rounds;
  /// Round in which the last unknown was localized (0 if none were needed).
  int convergence_round = 0;
  /// Estimated positions of all sensors; empty for sensors never localized.
  std::vector<std::optional<Point2>> positions;
  /// Per-unknown error, NaN where not localized.
  std::vector<double> sensor_error;
  /// Root-sum-square error over unknowns (infinite if any is missing).
  double error = 0.0;
  std::vector<int> unlocalized;
  std::string diagnostic;
};

/// Runs rounds until every sensor is localized, a round makes no progress,
/// or max_rounds (default n_s, at least 1) is reached.
BlpResult run_blp(BlpWorld& world, std::optional<int> max_rounds = std::nullopt);

struct BlpPreconditionReport {
  bool ok = false;
  std::string reason;
};

/// The sensing framework and the anchor-induced sensing subframework must
/// both have non-degenerate bilateration orderings.
BlpPreconditionReport check_blp_preconditions(const SensorNetwork& net);

}  // namespace asnl
