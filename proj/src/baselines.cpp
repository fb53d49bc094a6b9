#include "veds/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace veds {

int optimal_upper_bound(const RoundTrace& trace) {
  return static_cast<int>(trace.sovs_ever_in_coverage.size());
}

void StaticPolicy::build_plan(const ChannelSnapshot& first, const RoundContext& ctx) {
  struct Ranked {
    int sov;
    double gain;
  };
  std::vector<Ranked> ranked;
  for (const auto& [m, g] : first.v2i_gains) ranked.push_back({m, g.gain});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    return a.sov < b.sov;
  });

  const double kappa = ctx.link.slot_seconds;
  const double beta = ctx.link.bandwidth_hz;
  const double q_bits = ctx.veds.model_bits;
  int next_free = 1;
  for (const Ranked& r : ranked) {
    if (r.gain <= 0.0) continue;
    double comm_budget = ctx.budgets.at(r.sov);
    const auto cp = ctx.compute_energy.find(r.sov);
    if (cp != ctx.compute_energy.end()) comm_budget -= cp->second;
    if (comm_budget <= 0.0) continue;

    // First slot where the SOV is allowed to transmit: t_cp <= (t-1) kappa.
    int earliest = 1;
    const auto lat = ctx.compute_latency.find(r.sov);
    if (lat != ctx.compute_latency.end()) {
      earliest = static_cast<int>(std::ceil(lat->second / kappa)) + 1;
    }
    const int start = std::max(next_free, earliest);

    // Smallest block that fits: n slots at the minimum power delivering Q
    // bits over the block at the initial gain.
    for (int n = 1; start + n - 1 <= ctx.veds.total_slots; ++n) {
      const double snr_needed = std::exp2(q_bits / (n * kappa * beta)) - 1.0;
      const double p_needed = snr_needed * ctx.link.noise_power() / r.gain;
      if (p_needed > ctx.p_max.at(r.sov)) continue;
      if (n * kappa * p_needed > comm_budget) continue;
      plan_.push_back({r.sov, start, start + n - 1, p_needed});
      next_free = start + n;
      break;
    }
  }
}

SlotSolution StaticPolicy::decide(int slot, const ChannelSnapshot& snap,
                                  const SchedulerState& state, const RoundContext& ctx) {
  if (!planned_) {
    build_plan(snap, ctx);
    planned_ = true;
  }
  SlotSolution sol;
  for (const Block& block : plan_) {
    if (slot < block.first_slot || slot > block.last_slot) continue;
    if (state.zeta.at(block.sov) >= ctx.veds.model_bits) break;  // finished early
    sol.decision = SlotDecision{block.sov, TxMode::Dt, {}, {}};
    sol.decision.powers[block.sov] = block.power;
    sol.objective = slot_objective(sol.decision, snap, state, ctx);
    break;
  }
  return sol;
}

}  // namespace veds
