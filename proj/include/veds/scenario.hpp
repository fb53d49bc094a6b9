#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "veds/geometry.hpp"
#include "veds/rng.hpp"

namespace veds {

enum class Heading { North, South, East, West };
enum class Role { Sov, Opv };

/// Rectangular Manhattan lattice. grid_rows horizontal and grid_cols vertical
/// roads spaced block_length apart; the RSU sits at the midpoint of the
/// lattice bounding box, snapped onto the nearest road point.
struct RoadNetwork {
  int grid_rows = 3;
  int grid_cols = 3;
  double block_length = 250.0;  // meters
  Vec2 rsu_position{};
  double rsu_radius = 300.0;  // meters

  double extent_x() const { return (grid_cols - 1) * block_length; }
  double extent_y() const { return (grid_rows - 1) * block_length; }

  /// Distance from p to the nearest road segment of the lattice.
  double distance_to_lattice(Vec2 p) const;
  bool in_coverage(Vec2 p) const { return distance(p, rsu_position) <= rsu_radius; }
};

struct Vehicle {
  int id = 0;
  Vec2 position{};
  double speed = 0.0;  // m/s
  Heading heading = Heading::East;
  Role role = Role::Opv;
  long long dataset_size = 0;   // |D_m|, SOVs only
  double energy_budget = 0.0;   // E^cons, joules
  double p_max = 0.3;           // watts
  double clock_frequency = 0.0; // cycles/s, SOVs only
};

struct ScenarioState {
  RoadNetwork network;
  std::vector<Vehicle> vehicles;
  double time = 0.0;
  int round_index = 0;
};

RoadNetwork build_network(int rows, int cols, double block_length, double rsu_radius);

/// Advances every vehicle by speed*dt along its heading. Turns are drawn at
/// each intersection crossing (straight 0.5, left 0.25, right 0.25, restricted
/// to headings with a movable axis); vehicles wrap around the lattice extents.
ScenarioState step_vehicles(const ScenarioState& state, double dt, Rng& rng);

/// Splits vehicles into SOVs and OPVs for the round: each in-coverage vehicle
/// becomes an SOV with participation_prob, everything else is an OPV. Returns
/// the new state plus the id lists (ascending).
std::pair<std::vector<int>, std::vector<int>> classify_round(ScenarioState& state,
                                                             double participation_prob,
                                                             Rng& rng);

/// Round length in slots from the mean chord of the coverage disc:
/// ceil((pi/2)*r / max(v, v_floor) / kappa), capped at t_max; v == 0 -> t_max.
int estimate_round_slots(const RoadNetwork& network, double v, double kappa,
                         double v_floor = 0.1, int t_max = 1000);

/// Uniformly scatters `count` vehicles over the road lattice.
ScenarioState make_scenario(const RoadNetwork& network, int count, double speed,
                            Rng& rng, double speed_jitter_frac = 0.0);

}  // namespace veds
