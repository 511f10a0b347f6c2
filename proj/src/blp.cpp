#include "asnl/blp.hpp"

#include <cmath>
#include <limits>

#include "asnl/graphkit.hpp"

namespace asnl {

Vec2 fg_solve(const Vec2& g1, const Vec2& g2, double b1, double b2, double tol) {
  const double det = cross2(g1, g2);
  if (std::abs(det) <= tol) throw CollinearBasis("reference bearings are collinear");
  // Cramer's rule on [g1^T; g2^T] g = (b1, b2).
  Vec2 g((b1 * g2.y() - b2 * g1.y()) / det, (g1.x() * b2 - g2.x() * b1) / det);
  const double len = g.norm();
  if (len < kCoincidenceTol) throw CollinearBasis("solved bearing vanished");
  return g / len;
}

Point2 fx_solve(const Point2& xi, const Point2& xj, const Vec2& gik, const Vec2& gjk, double tol) {
  // x_i - t g_ik = x_j - s g_jk  <=>  -t g_ik + s g_jk = x_j - x_i.
  const double det = cross2(-gik, gjk);
  if (std::abs(det) <= tol) throw CollinearRays("bearing rays are parallel");
  const Vec2 rhs = xj - xi;
  const double t = cross2(rhs, gjk) / det;
  return xi - t * gik;
}

const char* to_string(BlpStatus s) {
  switch (s) {
    case BlpStatus::converged: return "converged";
    case BlpStatus::stalled: return "stalled";
    case BlpStatus::max_rounds: return "max_rounds";
  }
  return "?";
}

BlpWorld::BlpWorld(const SensorNetwork& net, const AngleData& measurements, double collinear_tol)
    : net_(&net), tol_(collinear_tol) {
  const Graph& g = net.sensing_graph();
  sensors_.resize(static_cast<std::size_t>(net.size()));
  for (int i = 0; i < net.size(); ++i) {
    SensorState& s = sensors_[static_cast<std::size_t>(i)];
    s.id = i;
    for (int j : g.neighbors(i)) {
      auto it = measurements.bearings.find({i, j});
      if (it == measurements.bearings.end())
        throw PreconditionViolated("missing local bearing " + std::to_string(i) + "->" + std::to_string(j));
      s.local_bearings.emplace(j, it->second);
    }
    if (net.is_anchor(i)) {
      s.mode = SensorMode::localized;
      s.position = net.position(i);
      for (int j : g.neighbors(i))
        if (net.is_anchor(j)) s.neighbor_positions.emplace(j, net.position(j));
    }
  }
}

bool BlpWorld::all_localized() const {
  for (const auto& s : sensors_)
    if (s.mode != SensorMode::localized) return false;
  return true;
}

std::optional<Vec2> BlpWorld::solve_bearing_to(const SensorState& s, int target) const {
  // Lowest-id pair of localized neighbours with non-collinear global bearings.
  const Point2& xi = *s.position;
  for (auto a = s.neighbor_positions.begin(); a != s.neighbor_positions.end(); ++a) {
    const Vec2 da = xi - a->second;
    if (da.norm() < kCoincidenceTol) continue;
    for (auto b = std::next(a); b != s.neighbor_positions.end(); ++b) {
      const Vec2 db = xi - b->second;
      if (db.norm() < kCoincidenceTol) continue;
      const Vec2 g1 = da.normalized();
      const Vec2 g2 = db.normalized();
      if (std::abs(cross2(g1, g2)) <= tol_) continue;
      const Vec2& lt = s.local_bearings.at(target);
      const double b1 = s.local_bearings.at(a->first).dot(lt);
      const double b2 = s.local_bearings.at(b->first).dot(lt);
      return fg_solve(g1, g2, b1, b2, tol_);
    }
  }
  return std::nullopt;
}

double BlpWorld::cumulative_error() const {
  double sum = 0.0;
  for (int i = net_->anchor_count(); i < net_->size(); ++i) {
    const auto& s = sensors_[static_cast<std::size_t>(i)];
    if (s.position) sum += (*s.position - net_->position(i)).squaredNorm();
  }
  return std::sqrt(sum);
}

RoundLog BlpWorld::step_round() {
  ++round_;
  RoundLog log;
  log.round = round_;
  const Graph& g = net_->sensing_graph();

  // Send phase: reads only the state at the start of the round.
  std::vector<Message> outbox;
  for (const auto& s : sensors_) {
    if (s.mode != SensorMode::localized) continue;
    for (int k : g.neighbors(s.id)) {
      const auto prev = s.sent.find(k);
      const bool k_known_localized = s.neighbor_positions.count(k) > 0;
      if (!k_known_localized) {
        if (prev != s.sent.end() && prev->second == MessageKind::position_and_bearing) continue;
        if (auto gk = solve_bearing_to(s, k)) {
          outbox.push_back({s.id, k, MessageKind::position_and_bearing, *s.position, *gk, round_});
          continue;
        }
      }
      if (prev == s.sent.end()) outbox.push_back({s.id, k, MessageKind::position, *s.position, Vec2::Zero(), round_});
    }
  }

  // Delivery.
  bool changed = false;
  for (const auto& m : outbox) {
    SensorState& sender = sensors_[static_cast<std::size_t>(m.from)];
    auto& rec = sender.sent[m.to];
    rec = m.kind == MessageKind::position_and_bearing ? MessageKind::position_and_bearing : rec;
    SensorState& r = sensors_[static_cast<std::size_t>(m.to)];
    auto [it, inserted] = r.neighbor_positions.insert_or_assign(m.from, m.position);
    (void)it;
    changed = changed || inserted;
    if (m.kind == MessageKind::position_and_bearing) {
      changed = r.received_bearings.insert_or_assign(m.from, m.bearing).second || changed;
    }
    log_.push_back(m);
  }
  log.messages_sent = static_cast<int>(outbox.size());

  // Localization phase.
  for (auto& s : sensors_) {
    if (s.mode == SensorMode::localized || s.received_bearings.size() < 2) continue;
    bool done = false;
    for (auto a = s.received_bearings.begin(); a != s.received_bearings.end() && !done; ++a)
      for (auto b = std::next(a); b != s.received_bearings.end() && !done; ++b) {
        if (std::abs(cross2(a->second, b->second)) <= tol_) continue;
        s.position = fx_solve(s.neighbor_positions.at(a->first), s.neighbor_positions.at(b->first), a->second,
                              b->second, tol_);
        s.mode = SensorMode::localized;
        log.newly_localized.push_back(s.id);
        done = true;
      }
  }
  progressed_ = changed || !log.newly_localized.empty();
  log.cumulative_error = cumulative_error();
  return log;
}

BlpResult run_blp(BlpWorld& world, std::optional<int> max_rounds) {
  const SensorNetwork& net = world.network();
  const int limit = max_rounds.value_or(std::max(1, net.unknown_count()));
  BlpResult res;
  while (!world.all_localized()) {
    if (world.round() >= limit) {
      res.status = BlpStatus::max_rounds;
      res.diagnostic = "round limit " + std::to_string(limit) + " reached";
      break;
    }
    RoundLog log = world.step_round();
    if (!log.newly_localized.empty()) res.convergence_round = log.round;
    res.rounds.push_back(std::move(log));
    if (!world.last_round_progressed()) {
      res.status = BlpStatus::stalled;
      res.diagnostic = "no progress in round " + std::to_string(world.round());
      break;
    }
  }
  if (world.all_localized()) res.status = BlpStatus::converged;

  double sum = 0.0;
  for (const auto& s : world.sensors()) {
    res.positions.push_back(s.position);
    if (net.is_anchor(s.id)) continue;
    if (s.position) {
      const double e = (*s.position - net.position(s.id)).norm();
      res.sensor_error.push_back(e);
      sum += e * e;
    } else {
      res.sensor_error.push_back(std::numeric_limits<double>::quiet_NaN());
      res.unlocalized.push_back(s.id);
    }
  }
  res.error = res.unlocalized.empty() ? std::sqrt(sum) : std::numeric_limits<double>::infinity();
  if (res.status == BlpStatus::stalled && res.diagnostic.empty()) res.diagnostic = "stalled";
  return res;
}

BlpPreconditionReport check_blp_preconditions(const SensorNetwork& net) {
  if (net.anchor_count() < 3) return {false, "fewer than 3 anchors"};
  if (!find_nondegenerate_ordering(net.framework()))
    return {false, "sensing framework has no non-degenerate bilateration ordering"};
  std::vector<int> anchors(static_cast<std::size_t>(net.anchor_count()));
  std::vector<Point2> pos;
  for (int a = 0; a < net.anchor_count(); ++a) {
    anchors[static_cast<std::size_t>(a)] = a;
    pos.push_back(net.position(a));
  }
  const Framework sub(net.sensing_graph().induced(anchors), pos);
  if (!find_nondegenerate_ordering(sub))
    return {false, "anchor sensing subframework has no non-degenerate bilateration ordering"};
  return {true, "ok"};
}

}  // namespace asnl
