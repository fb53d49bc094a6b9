#include "veds/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace veds {

namespace {
constexpr double kOnRoadTol = 1e-6;

bool is_road_line(double coord, double block, int count) {
  const double k = std::round(coord / block);
  if (k < 0 || k >= count) return false;
  return std::abs(coord - k * block) <= kOnRoadTol;
}
}  // namespace

double pathloss_los(double distance_m, double carrier_ghz) {
  if (distance_m <= 0.0) throw std::domain_error("pathloss_los: d <= 0");
  return 38.77 + 16.7 * std::log10(distance_m) + 18.2 * std::log10(carrier_ghz);
}

double pathloss_nlos(double distance_m, double carrier_ghz) {
  if (distance_m <= 0.0) throw std::domain_error("pathloss_nlos: d <= 0");
  return 36.85 + 30.0 * std::log10(distance_m) + 18.9 * std::log10(carrier_ghz);
}

LosClass ChannelModel::classify_los(Vec2 tx, Vec2 rx,
                                    const std::vector<Vehicle>& vehicles,
                                    int tx_id, int rx_id) const {
  // The direct path stays on the road lattice only when both endpoints share
  // a road line; any diagonal cuts through a block interior.
  const bool same_horizontal =
      std::abs(tx.y - rx.y) <= kOnRoadTol &&
      is_road_line(tx.y, network_.block_length, network_.grid_rows);
  const bool same_vertical =
      std::abs(tx.x - rx.x) <= kOnRoadTol &&
      is_road_line(tx.x, network_.block_length, network_.grid_cols);
  if (!same_horizontal && !same_vertical) return LosClass::Nlos;
  if (blocker_count(tx, rx, vehicles, tx_id, rx_id) > 0) return LosClass::Nlosv;
  return LosClass::Los;
}

int ChannelModel::blocker_count(Vec2 tx, Vec2 rx, const std::vector<Vehicle>& vehicles,
                                int tx_id, int rx_id) const {
  int count = 0;
  const double span = distance(tx, rx);
  if (span <= kOnRoadTol) return 0;
  for (const Vehicle& veh : vehicles) {
    if (veh.id == tx_id || veh.id == rx_id) continue;
    if (point_segment_distance(veh.position, tx, rx) > params_.blockage_width_m) continue;
    // Only vehicles strictly between the endpoints shadow the link.
    const double t = dot(veh.position - tx, rx - tx) / (span * span);
    if (t <= 0.0 || t >= 1.0) continue;
    ++count;
  }
  return count;
}

LinkGain ChannelModel::sample_gain(Vec2 tx, Vec2 rx,
                                   const std::vector<Vehicle>& vehicles, Rng& rng,
                                   int tx_id, int rx_id) const {
  const double d = std::max(distance(tx, rx), params_.min_distance_m);
  const LosClass cls = classify_los(tx, rx, vehicles, tx_id, rx_id);

  double loss_db;
  double shadow_std;
  switch (cls) {
    case LosClass::Los:
      loss_db = pathloss_los(d, params_.carrier_ghz);
      shadow_std = params_.shadow_std_los_db;
      break;
    case LosClass::Nlosv:
      loss_db = pathloss_los(d, params_.carrier_ghz);
      shadow_std = params_.shadow_std_nlosv_db;
      break;
    default:
      loss_db = pathloss_nlos(d, params_.carrier_ghz);
      shadow_std = params_.shadow_std_nlos_db;
      break;
  }
  if (params_.shadowing_enabled) loss_db += rng.normal(0.0, shadow_std);
  if (params_.blockage_enabled && cls == LosClass::Nlosv) {
    const int blockers = blocker_count(tx, rx, vehicles, tx_id, rx_id);
    for (int b = 0; b < blockers; ++b) {
      loss_db += std::max(0.0, rng.normal(params_.blockage_mean_db, params_.blockage_std_db));
    }
  }
  return {std::pow(10.0, -loss_db / 10.0), cls};
}

ChannelSnapshot ChannelModel::snapshot(const ScenarioState& state,
                                       const std::vector<int>& sovs,
                                       const std::vector<int>& opvs, Rng& rng,
                                       int slot) const {
  std::vector<const Vehicle*> by_id(state.vehicles.size(), nullptr);
  for (const Vehicle& veh : state.vehicles) {
    by_id.at(static_cast<size_t>(veh.id)) = &veh;
  }
  const auto vehicle = [&](int id) -> const Vehicle& {
    const Vehicle* v = by_id.at(static_cast<size_t>(id));
    if (v == nullptr) throw std::invalid_argument("snapshot: unknown vehicle id");
    return *v;
  };

  ChannelSnapshot snap;
  snap.slot = slot;
  const Vec2 rsu = network_.rsu_position;
  for (const int m : sovs) {
    const Vehicle& sov = vehicle(m);
    if (!network_.in_coverage(sov.position)) {
      snap.v2i_gains[m] = {0.0, LosClass::Nlos};
    } else {
      snap.v2i_gains[m] = sample_gain(sov.position, rsu, state.vehicles, rng, m, -1);
    }
  }
  for (const int n : opvs) {
    const Vehicle& opv = vehicle(n);
    if (!network_.in_coverage(opv.position)) {
      snap.opv2i_gains[n] = {0.0, LosClass::Nlos};
    } else {
      snap.opv2i_gains[n] = sample_gain(opv.position, rsu, state.vehicles, rng, n, -1);
    }
  }
  for (const int m : sovs) {
    const Vehicle& sov = vehicle(m);
    for (const int n : opvs) {
      const Vehicle& opv = vehicle(n);
      if (distance(sov.position, opv.position) > params_.v2v_range_m) {
        snap.v2v_gains[{m, n}] = {0.0, LosClass::Nlos};
      } else {
        snap.v2v_gains[{m, n}] =
            sample_gain(sov.position, opv.position, state.vehicles, rng, m, n);
      }
    }
  }
  return snap;
}

}  // namespace veds
