#pragma once

#include <vector>

#include "veds/scheduler.hpp"

namespace veds {

/// "All in-coverage SOVs upload successfully": the count of SOVs that were
/// inside RSU coverage at any point of the round. No transmission model.
int optimal_upper_bound(const RoundTrace& trace);

/// Static scheduling (SA): ranks SOVs by their initial V2I gain, plans
/// contiguous DT slot blocks with the minimum power that delivers the model
/// within the block under the communications budget, then executes the plan
/// open-loop against the evolving channel.
class StaticPolicy : public SlotPolicy {
 public:
  SlotSolution decide(int slot, const ChannelSnapshot& snap, const SchedulerState& state,
                      const RoundContext& ctx) override;

  struct Block {
    int sov = -1;
    int first_slot = 0;  // 1-based, inclusive
    int last_slot = 0;   // inclusive
    double power = 0.0;
  };
  const std::vector<Block>& plan() const { return plan_; }

 private:
  void build_plan(const ChannelSnapshot& first, const RoundContext& ctx);
  bool planned_ = false;
  std::vector<Block> plan_;
};

}  // namespace veds
