#pragma once

#include <map>
#include <utility>
#include <vector>

#include "veds/rng.hpp"
#include "veds/scenario.hpp"

namespace veds {

enum class LosClass { Los, Nlosv, Nlos };

struct LinkGain {
  double gain = 0.0;  // linear power gain |h|^2
  LosClass los_class = LosClass::Los;
};

/// All link power gains for one slot. Keys are vehicle ids; v2v is keyed by
/// (sov id, opv id). Ordered maps keep iteration deterministic.
struct ChannelSnapshot {
  std::map<int, LinkGain> v2i_gains;                 // SOV -> RSU
  std::map<int, LinkGain> opv2i_gains;               // OPV -> RSU
  std::map<std::pair<int, int>, LinkGain> v2v_gains; // (SOV, OPV)
  int slot = 0;
};

struct ChannelParams {
  double carrier_ghz = 5.9;
  double shadow_std_los_db = 3.0;
  double shadow_std_nlosv_db = 3.0;
  double shadow_std_nlos_db = 4.0;
  double blockage_mean_db = 5.0;
  double blockage_std_db = 2.0;   // N(5, 4): variance 4 dB^2
  double blockage_width_m = 2.0;  // lateral distance that makes a vehicle a blocker
  double v2v_range_m = 300.0;
  double min_distance_m = 1.0;    // pathloss validity floor
  bool shadowing_enabled = true;
  bool blockage_enabled = true;
};

/// Urban V2X pathloss, LOS/NLOSv branch (TR 37.885): 38.77 + 16.7 log10 d + 18.2 log10 f.
double pathloss_los(double distance_m, double carrier_ghz);

/// Urban V2X pathloss, NLOS branch: 36.85 + 30 log10 d + 18.9 log10 f.
double pathloss_nlos(double distance_m, double carrier_ghz);

class ChannelModel {
 public:
  ChannelModel(RoadNetwork network, ChannelParams params)
      : network_(std::move(network)), params_(params) {}

  const ChannelParams& params() const { return params_; }

  /// NLOS when the direct path cuts through a building block (i.e. tx and rx
  /// are not on a common road line); NLOSv when another vehicle sits within
  /// blockage_width of the open path; LOS otherwise.
  LosClass classify_los(Vec2 tx, Vec2 rx, const std::vector<Vehicle>& vehicles,
                        int tx_id = -1, int rx_id = -1) const;

  /// Number of blocking vehicles on the tx-rx path (NLOSv count).
  int blocker_count(Vec2 tx, Vec2 rx, const std::vector<Vehicle>& vehicles,
                    int tx_id = -1, int rx_id = -1) const;

  /// Draws pathloss + shadowing + per-blocker losses and converts to a linear
  /// power gain. Range/coverage cuts are applied by the snapshot builder.
  LinkGain sample_gain(Vec2 tx, Vec2 rx, const std::vector<Vehicle>& vehicles,
                       Rng& rng, int tx_id = -1, int rx_id = -1) const;

  /// Builds every SOV->RSU, OPV->RSU and SOV->OPV gain for the slot. V2I gains
  /// of vehicles outside RSU coverage are zero; V2V gains are zero beyond
  /// v2v_range.
  ChannelSnapshot snapshot(const ScenarioState& state, const std::vector<int>& sovs,
                           const std::vector<int>& opvs, Rng& rng, int slot) const;

 private:
  RoadNetwork network_;
  ChannelParams params_;
};

}  // namespace veds
