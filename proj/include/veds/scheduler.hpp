#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "veds/channel.hpp"
#include "veds/comm.hpp"
#include "veds/params.hpp"
#include "veds/solver.hpp"

namespace veds {

/// Virtual queues, delivered-bits progress and bookkeeping for one round.
/// Everything starts at zero.
struct SchedulerState {
  std::map<int, double> q_sov;     // joules
  std::map<int, double> q_opv;     // joules
  std::map<int, double> zeta;      // clamped delivered bits, in [0, Q]
  std::map<int, double> raw_bits;  // unclamped totals (success accounting)
  int slot = 1;
};

/// Static per-round inputs shared by the scheduler and the baselines.
struct RoundContext {
  VedsParams veds;
  LinkBudgetParams link;
  std::map<int, double> budgets;          // E^cons per vehicle id
  std::map<int, double> compute_energy;   // e^cp per SOV id
  std::map<int, double> compute_latency;  // t^cp seconds per SOV id
  std::map<int, double> p_max;            // per vehicle id
};

SchedulerState make_scheduler_state(const std::vector<int>& sovs,
                                    const std::vector<int>& opvs);

/// P3 objective y(t) of an arbitrary decision at the current state.
double slot_objective(const SlotDecision& decision, const ChannelSnapshot& snap,
                      const SchedulerState& state, const RoundContext& ctx);

/// Flattens snapshot + state into the solver's slot problem, applying the
/// eligibility rules: compute finished (t_cp <= (t-1) kappa) and zeta < Q.
SlotProblem build_slot_problem(const ChannelSnapshot& snap, const SchedulerState& state,
                               const RoundContext& ctx);

/// One pass of the per-slot enumeration: every eligible SOV, DT through the
/// closed form, COT through descending-V2V-gain relay prefixes. Keeps the
/// empty decision unless a candidate has strictly positive objective.
SlotSolution solve_slot(const ChannelSnapshot& snap, const SchedulerState& state,
                        const RoundContext& ctx, bool cot_enabled = true);

/// Queue recursions, clamped at zero. SOV budgets are net of compute energy.
void update_queues(SchedulerState& state, const SlotOutcome& outcome,
                   const RoundContext& ctx);

struct SlotRecord {
  int slot = 0;  // 1-based
  SlotDecision decision;
  double objective = 0.0;
  double bits = 0.0;                   // z of the scheduled SOV
  std::map<int, double> energies;      // nonzero entries only
  std::vector<double> zeta_at_start;   // aligned with RoundTrace::sov_ids
  std::vector<double> q_sov_after;
  std::vector<double> q_opv_after;
};

struct RoundTrace {
  std::vector<int> sov_ids;
  std::vector<int> opv_ids;
  RoundContext ctx;
  std::vector<SlotRecord> slots;
  std::map<int, double> total_bits;    // per SOV
  std::map<int, double> total_energy;  // per vehicle, communications only
  std::set<int> sovs_ever_in_coverage;
  ScenarioState final_scenario;
};

/// Decision source for the round loop; implementations are the online
/// scheduler below and the baselines.
class SlotPolicy {
 public:
  virtual ~SlotPolicy() = default;
  virtual SlotSolution decide(int slot, const ChannelSnapshot& snap,
                              const SchedulerState& state, const RoundContext& ctx) = 0;
};

/// The online scheduler; cot_enabled = false gives the V2I-only baseline.
/// hard_energy_cap additionally clamps powers so cumulative spend never
/// exceeds the communications budget (used by the baselines).
class VedsPolicy : public SlotPolicy {
 public:
  explicit VedsPolicy(bool cot_enabled = true, bool hard_energy_cap = false)
      : cot_enabled_(cot_enabled), hard_energy_cap_(hard_energy_cap) {}
  SlotSolution decide(int slot, const ChannelSnapshot& snap, const SchedulerState& state,
                      const RoundContext& ctx) override;

 private:
  bool cot_enabled_;
  bool hard_energy_cap_;
  std::map<int, double> spent_;
};

/// Runs one round: per slot updates zeta, samples the channel, asks the
/// policy, applies the outcome, updates the queues and moves the vehicles.
RoundTrace run_round(const ScenarioState& scenario, const std::vector<int>& sovs,
                     const std::vector<int>& opvs, const RoundContext& ctx,
                     const ChannelModel& channel, SlotPolicy& policy,
                     Rng& mobility_rng, Rng& channel_rng);

/// Same loop over a pre-drawn channel trace (no mobility, no sampling); used
/// by the bound-verification suites where offline and online must see
/// identical channels.
RoundTrace run_round_frozen(const std::vector<ChannelSnapshot>& snapshots,
                            const std::vector<int>& sovs, const std::vector<int>& opvs,
                            const RoundContext& ctx, SlotPolicy& policy);

/// Number of SOVs whose delivered bits reached the model size.
int success_count(const RoundTrace& trace, double model_bits);

struct BoundReport {
  double phi_total = 0.0;      // Phi, J^2
  double psi_alpha = 0.0;
  double sigma_gap_bound = 0.0;            // T^2 Phi / (V psi(alpha))
  double measured_sigma_sum = 0.0;         // online sum_m sigma(total bits)
  std::map<int, double> measured_energy;   // comm energy (+ compute for SOVs)
  std::optional<double> energy_bound_slack;      // sqrt term, when z* known
  std::optional<double> energy_bound_sqrt_arg;   // its (unclamped) argument
  std::map<int, double> energy_bound;      // per vehicle, when z* known
};

/// Performance/energy bound calculator. The optional argument is the offline
/// optimum's dsigma-weighted bit sum sum_t sum_m z*_m(t) dsigma(zeta_m(t)),
/// with the weights taken along the online trajectory (see
/// offline_weighted_bit_sum); without it only the sigma-gap side is filled.
BoundReport theorem2_report(const RoundTrace& trace,
                            std::optional<double> offline_weighted_sum = std::nullopt);

/// sum_t sum_m z*_m(t) * dsigma(zeta_m(t)) where zeta comes from the online
/// trace and z* from an offline plan over the same slots.
double offline_weighted_bit_sum(const RoundTrace& trace,
                                const std::vector<std::map<int, double>>& offline_bits);

}  // namespace veds
