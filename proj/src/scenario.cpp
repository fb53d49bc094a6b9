#include "veds/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace veds {

namespace {

constexpr double kEps = 1e-9;

double wrap_coord(double x, double extent) {
  if (extent <= 0.0) return 0.0;
  double w = std::fmod(x, extent);
  if (w < 0.0) w += extent;
  return w;
}

bool is_horizontal(Heading h) { return h == Heading::East || h == Heading::West; }

double axis_sign(Heading h) {
  return (h == Heading::East || h == Heading::North) ? 1.0 : -1.0;
}

Heading left_of(Heading h) {
  switch (h) {
    case Heading::North: return Heading::West;
    case Heading::West: return Heading::South;
    case Heading::South: return Heading::East;
    case Heading::East: return Heading::North;
  }
  return h;
}

Heading right_of(Heading h) {
  switch (h) {
    case Heading::North: return Heading::East;
    case Heading::East: return Heading::South;
    case Heading::South: return Heading::West;
    case Heading::West: return Heading::North;
  }
  return h;
}

// Distance along the travel axis to the next intersection strictly ahead.
double distance_to_next_intersection(double pos, double block, double extent,
                                     double sign) {
  if (sign > 0.0) {
    const double k = std::floor(pos / block + kEps);
    double next = (k + 1.0) * block;
    if (next > extent + kEps) next = extent + block;  // none ahead before wrap
    return next - pos;
  }
  const double k = std::ceil(pos / block - kEps);
  double next = (k - 1.0) * block;
  return pos - next;
}

}  // namespace

double RoadNetwork::distance_to_lattice(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_rows; ++i) {
    const double y = i * block_length;
    best = std::min(best, point_segment_distance(p, {0.0, y}, {extent_x(), y}));
  }
  for (int j = 0; j < grid_cols; ++j) {
    const double x = j * block_length;
    best = std::min(best, point_segment_distance(p, {x, 0.0}, {x, extent_y()}));
  }
  return best;
}

RoadNetwork build_network(int rows, int cols, double block_length, double rsu_radius) {
  if (rows < 1 || cols < 1 || block_length <= 0.0 || rsu_radius <= 0.0) {
    throw std::invalid_argument("build_network: non-positive grid dimensions");
  }
  RoadNetwork net;
  net.grid_rows = rows;
  net.grid_cols = cols;
  net.block_length = block_length;
  net.rsu_radius = rsu_radius;

  const Vec2 mid{net.extent_x() / 2.0, net.extent_y() / 2.0};
  // Snap the midpoint to the nearest road line; prefer the x-snap on ties so
  // the choice is deterministic.
  const double sx = std::round(mid.x / block_length) * block_length;
  const double sy = std::round(mid.y / block_length) * block_length;
  if (std::abs(mid.x - sx) <= std::abs(mid.y - sy)) {
    net.rsu_position = {sx, mid.y};
  } else {
    net.rsu_position = {mid.x, sy};
  }
  return net;
}

ScenarioState step_vehicles(const ScenarioState& state, double dt, Rng& rng) {
  if (dt <= 0.0) throw std::invalid_argument("step_vehicles: dt must be positive");
  ScenarioState next = state;
  next.time += dt;
  const RoadNetwork& net = next.network;

  for (Vehicle& veh : next.vehicles) {
    double remaining = veh.speed * dt;
    // Guard against pathological loops from tiny fp residues.
    int hops = 0;
    while (remaining > kEps && hops++ < 64) {
      const bool horiz = is_horizontal(veh.heading);
      const double extent = horiz ? net.extent_x() : net.extent_y();
      if (extent <= 0.0) break;  // degenerate axis, nowhere to go
      double& pos = horiz ? veh.position.x : veh.position.y;
      const double sign = axis_sign(veh.heading);
      const double to_next =
          distance_to_next_intersection(pos, net.block_length, extent, sign);
      if (remaining < to_next - kEps) {
        pos = wrap_coord(pos + sign * remaining, extent);
        remaining = 0.0;
        break;
      }
      // Land exactly on the intersection, then draw the turn.
      pos = wrap_coord(pos + sign * to_next, extent);
      pos = std::round(pos / net.block_length) * net.block_length;
      if (pos >= extent) pos = 0.0;
      remaining -= to_next;

      const double cross_extent = horiz ? net.extent_y() : net.extent_x();
      const double u = rng.uniform();
      if (cross_extent > 0.0) {
        if (u < 0.25) {
          veh.heading = left_of(veh.heading);
        } else if (u < 0.5) {
          veh.heading = right_of(veh.heading);
        }
        // else straight
      }
      // With a degenerate cross axis the draw is still consumed but the
      // vehicle keeps going straight.
    }
  }
  return next;
}

std::pair<std::vector<int>, std::vector<int>> classify_round(ScenarioState& state,
                                                             double participation_prob,
                                                             Rng& rng) {
  if (participation_prob < 0.0 || participation_prob > 1.0) {
    throw std::invalid_argument("classify_round: participation_prob outside [0,1]");
  }
  std::vector<int> sovs, opvs;
  for (Vehicle& veh : state.vehicles) {
    const bool covered = state.network.in_coverage(veh.position);
    if (covered && rng.bernoulli(participation_prob)) {
      veh.role = Role::Sov;
      sovs.push_back(veh.id);
    } else {
      veh.role = Role::Opv;
      opvs.push_back(veh.id);
    }
  }
  std::sort(sovs.begin(), sovs.end());
  std::sort(opvs.begin(), opvs.end());
  return {std::move(sovs), std::move(opvs)};
}

int estimate_round_slots(const RoadNetwork& network, double v, double kappa,
                         double v_floor, int t_max) {
  if (kappa <= 0.0) throw std::invalid_argument("estimate_round_slots: kappa <= 0");
  if (v < 0.0) throw std::invalid_argument("estimate_round_slots: v < 0");
  if (v == 0.0) return t_max;
  const double mean_chord = (std::acos(-1.0) / 2.0) * network.rsu_radius;
  const double slots = std::ceil(mean_chord / std::max(v, v_floor) / kappa);
  return static_cast<int>(std::min<double>(slots, t_max));
}

ScenarioState make_scenario(const RoadNetwork& network, int count, double speed,
                            Rng& rng, double speed_jitter_frac) {
  ScenarioState state;
  state.network = network;
  state.vehicles.reserve(count);
  const int n_roads = network.grid_rows + network.grid_cols;
  for (int i = 0; i < count; ++i) {
    Vehicle veh;
    veh.id = i;
    const auto road = static_cast<int>(rng.uniform_index(n_roads));
    if (road < network.grid_rows) {
      const double y = road * network.block_length;
      veh.position = {rng.uniform(0.0, std::max(network.extent_x(), 1e-12)), y};
      veh.heading = rng.bernoulli(0.5) ? Heading::East : Heading::West;
      if (network.extent_x() <= 0.0) veh.position.x = 0.0;
    } else {
      const double x = (road - network.grid_rows) * network.block_length;
      veh.position = {x, rng.uniform(0.0, std::max(network.extent_y(), 1e-12))};
      veh.heading = rng.bernoulli(0.5) ? Heading::North : Heading::South;
      if (network.extent_y() <= 0.0) veh.position.y = 0.0;
    }
    veh.speed = speed;
    if (speed_jitter_frac > 0.0) {
      veh.speed *= 1.0 + speed_jitter_frac * (2.0 * rng.uniform() - 1.0);
    }
    state.vehicles.push_back(veh);
  }
  return state;
}

}  // namespace veds
