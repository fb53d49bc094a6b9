#include "veds/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace veds {

SchedulerState make_scheduler_state(const std::vector<int>& sovs,
                                    const std::vector<int>& opvs) {
  SchedulerState state;
  for (const int m : sovs) {
    state.q_sov[m] = 0.0;
    state.zeta[m] = 0.0;
    state.raw_bits[m] = 0.0;
  }
  for (const int n : opvs) state.q_opv[n] = 0.0;
  return state;
}

double slot_objective(const SlotDecision& decision, const ChannelSnapshot& snap,
                      const SchedulerState& state, const RoundContext& ctx) {
  const SlotOutcome outcome = slot_outcome(decision, snap, ctx.link);
  double y = 0.0;
  for (const auto& [m, z] : outcome.bits) {
    y += ctx.veds.v_weight * z *
         dsigma(state.zeta.at(m), ctx.veds.alpha, ctx.veds.model_bits);
  }
  for (const auto& [id, e] : outcome.energies) {
    const auto qs = state.q_sov.find(id);
    if (qs != state.q_sov.end()) {
      y -= qs->second * e;
    } else {
      y -= state.q_opv.at(id) * e;
    }
  }
  return y;
}

SlotProblem build_slot_problem(const ChannelSnapshot& snap, const SchedulerState& state,
                               const RoundContext& ctx) {
  SlotProblem prob;
  prob.params = ctx.link;
  const double elapsed = (state.slot - 1) * ctx.veds.kappa;
  for (const auto& [m, gain] : snap.v2i_gains) {
    const auto lat = ctx.compute_latency.find(m);
    if (lat != ctx.compute_latency.end() && lat->second > elapsed) continue;
    if (state.zeta.at(m) >= ctx.veds.model_bits) continue;
    prob.sov_ids.push_back(m);
    prob.sov_weight.push_back(
        ctx.veds.v_weight * dsigma(state.zeta.at(m), ctx.veds.alpha, ctx.veds.model_bits));
    prob.sov_gain.push_back(gain.gain);
    prob.sov_queue.push_back(state.q_sov.at(m));
    prob.sov_pmax.push_back(ctx.p_max.at(m));
  }
  for (const auto& [n, gain] : snap.opv2i_gains) {
    prob.opv_ids.push_back(n);
    prob.opv_gain.push_back(gain.gain);
    prob.opv_queue.push_back(state.q_opv.at(n));
    prob.opv_pmax.push_back(ctx.p_max.at(n));
  }
  prob.v2v_gain.resize(prob.sov_ids.size());
  for (size_t si = 0; si < prob.sov_ids.size(); ++si) {
    prob.v2v_gain[si].resize(prob.opv_ids.size());
    for (size_t oi = 0; oi < prob.opv_ids.size(); ++oi) {
      prob.v2v_gain[si][oi] = snap.v2v_gains.at({prob.sov_ids[si], prob.opv_ids[oi]}).gain;
    }
  }
  return prob;
}

namespace {

// COT objective upper bound for any relay prefix of this SOV: all powers at
// their caps, penalties dropped.
double cot_upper_bound(const SlotProblem& prob, size_t si) {
  const double noise = prob.params.noise_power();
  double snr = prob.sov_gain[si] * prob.sov_pmax[si] / noise;
  for (size_t oi = 0; oi < prob.opv_ids.size(); ++oi) {
    snr += prob.opv_gain[oi] * prob.opv_pmax[oi] / noise;
  }
  return prob.sov_weight[si] * 0.5 * prob.params.slot_seconds *
         prob.params.bandwidth_hz * std::log1p(snr) / std::numbers::ln2;
}

}  // namespace

SlotSolution solve_slot(const ChannelSnapshot& snap, const SchedulerState& state,
                        const RoundContext& ctx, bool cot_enabled) {
  const SlotProblem prob = build_slot_problem(snap, state, ctx);
  SlotSolution best;  // empty decision, objective 0

  for (size_t si = 0; si < prob.sov_ids.size(); ++si) {
    const int m = prob.sov_ids[si];
    const DtSubproblem dt{prob.sov_weight[si], prob.sov_gain[si], prob.sov_queue[si],
                          prob.sov_pmax[si], prob.params};
    const SolveResult dt_res = solve_dt(dt);
    if (dt_res.objective > best.objective) {
      best.objective = dt_res.objective;
      best.decision = SlotDecision{m, TxMode::Dt, {}, {}};
      best.decision.powers[m] = dt_res.powers[0];
    }

    if (!cot_enabled || prob.opv_ids.empty()) continue;
    if (cot_upper_bound(prob, si) <= best.objective) continue;

    // Descending V2V gain defines the prefix order (Algorithm 1); ties break
    // toward the lower OPV id.
    std::vector<size_t> order(prob.opv_ids.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
      if (prob.v2v_gain[si][x] != prob.v2v_gain[si][y]) {
        return prob.v2v_gain[si][x] > prob.v2v_gain[si][y];
      }
      return prob.opv_ids[x] < prob.opv_ids[y];
    });

    CotSubproblem cot;
    cot.weight = prob.sov_weight[si];
    cot.gain_mr = prob.sov_gain[si];
    cot.queue_m = prob.sov_queue[si];
    cot.p_max_m = prob.sov_pmax[si];
    cot.params = prob.params;
    const double noise = prob.params.noise_power();
    double snr_cap = prob.sov_gain[si] * prob.sov_pmax[si] / noise;
    std::vector<size_t> members;
    for (size_t k = 0; k < order.size(); ++k) {
      const size_t oi = order[k];
      cot.relays.push_back({prob.opv_gain[oi], prob.v2v_gain[si][oi],
                            prob.opv_queue[oi], prob.opv_pmax[oi]});
      members.push_back(oi);
      snr_cap += prob.opv_gain[oi] * prob.opv_pmax[oi] / noise;
      // A prefix ending in a relay with no uplink gain is dominated by the
      // shorter prefix (same SNR, tighter decode constraint).
      if (prob.opv_gain[oi] <= 0.0) continue;
      const double prefix_ub = prob.sov_weight[si] * 0.5 * prob.params.slot_seconds *
                               prob.params.bandwidth_hz * std::log1p(snr_cap) /
                               std::numbers::ln2;
      if (prefix_ub <= best.objective) continue;

      SolveResult cr;
      try {
        cr = solve_cot(cot);
      } catch (const SolverIterationLimit& limit) {
        cr = limit.best_iterate;
      }
      if (cr.objective > best.objective) {
        best.objective = cr.objective;
        SlotDecision d{m, TxMode::Cot, {}, {}};
        d.powers[m] = cr.powers[0];
        for (size_t j = 0; j < members.size(); ++j) {
          d.relays.push_back(prob.opv_ids[members[j]]);
          d.powers[prob.opv_ids[members[j]]] = cr.powers[j + 1];
        }
        std::sort(d.relays.begin(), d.relays.end());
        best.decision = std::move(d);
      }
    }
  }
  return best;
}

void update_queues(SchedulerState& state, const SlotOutcome& outcome,
                   const RoundContext& ctx) {
  const double slots = ctx.veds.total_slots;
  for (auto& [m, q] : state.q_sov) {
    double comm_budget = ctx.budgets.at(m);
    const auto it = ctx.compute_energy.find(m);
    if (it != ctx.compute_energy.end()) comm_budget -= it->second;
    q = std::max(q + outcome.energy_of(m) - comm_budget / slots, 0.0);
  }
  for (auto& [n, q] : state.q_opv) {
    q = std::max(q + outcome.energy_of(n) - ctx.budgets.at(n) / slots, 0.0);
  }
}

SlotSolution VedsPolicy::decide(int /*slot*/, const ChannelSnapshot& snap,
                                const SchedulerState& state, const RoundContext& ctx) {
  SlotSolution sol = solve_slot(snap, state, ctx, cot_enabled_);
  if (!hard_energy_cap_ || sol.decision.idle()) return sol;

  // Clamp powers so no vehicle overdraws its remaining communications budget.
  bool clamped = false;
  const double kappa = ctx.link.slot_seconds;
  for (auto& [id, p] : sol.decision.powers) {
    double budget = ctx.budgets.at(id);
    const auto it = ctx.compute_energy.find(id);
    if (it != ctx.compute_energy.end()) budget -= it->second;
    const double share = sol.decision.mode == TxMode::Dt ? kappa : 0.5 * kappa;
    const double available = budget - spent_[id];
    if (p * share > available) {
      p = std::max(0.0, available / share);
      clamped = true;
    }
  }
  if (clamped) {
    // Re-derive the objective; a clamp can break the decode constraint, in
    // which case the slot idles.
    if (!decode_constraint_ok(sol.decision, snap, ctx.link)) {
      sol = SlotSolution{};
      return sol;
    }
    sol.objective = slot_objective(sol.decision, snap, state, ctx);
  }
  const SlotOutcome out = slot_outcome(sol.decision, snap, ctx.link);
  for (const auto& [id, e] : out.energies) spent_[id] += e;
  return sol;
}

namespace {

void verify_decision(const SlotDecision& d, const ChannelSnapshot& snap,
                     const SchedulerState& state, const RoundContext& ctx) {
  if (d.idle()) return;
  if (state.zeta.at(d.scheduled_sov) >= ctx.veds.model_bits) {
    throw std::logic_error("run_round: scheduled a finished SOV");
  }
  if (d.mode == TxMode::Dt && !d.relays.empty()) {
    throw std::logic_error("run_round: DT decision with relays");
  }
  for (const auto& [id, p] : d.powers) {
    if (p < -1e-12 || p > ctx.p_max.at(id) + 1e-9) {
      throw std::logic_error("run_round: power outside [0, p_max]");
    }
  }
  if (!decode_constraint_ok(d, snap, ctx.link)) {
    throw std::logic_error("run_round: decode constraint violated");
  }
}

}  // namespace

namespace {

template <typename SnapshotFn, typename PreSlotFn, typename PostSlotFn>
RoundTrace run_round_loop(const std::vector<int>& sovs, const std::vector<int>& opvs,
                          const RoundContext& ctx, SlotPolicy& policy,
                          SnapshotFn&& snapshot_for, PreSlotFn&& pre_slot,
                          PostSlotFn&& post_slot) {
  RoundTrace trace;
  trace.sov_ids = sovs;
  trace.opv_ids = opvs;
  trace.ctx = ctx;
  SchedulerState state = make_scheduler_state(sovs, opvs);
  for (const int m : sovs) trace.total_bits[m] = 0.0;

  SlotOutcome last_outcome;
  for (int t = 1; t <= ctx.veds.total_slots; ++t) {
    state.slot = t;
    if (t > 1) {
      update_progress(state.zeta, last_outcome, ctx.veds.model_bits);
    }
    pre_slot(t, trace);
    const ChannelSnapshot snap = snapshot_for(t);
    SlotSolution sol = policy.decide(t, snap, state, ctx);
    verify_decision(sol.decision, snap, state, ctx);
    const SlotOutcome outcome = slot_outcome(sol.decision, snap, ctx.link);
    update_queues(state, outcome, ctx);

    SlotRecord rec;
    rec.slot = t;
    rec.decision = sol.decision;
    rec.objective = sol.objective;
    rec.zeta_at_start.reserve(sovs.size());
    for (const int m : sovs) rec.zeta_at_start.push_back(state.zeta.at(m));
    for (const auto& [m, z] : outcome.bits) {
      rec.bits += z;
      state.raw_bits.at(m) += z;
      trace.total_bits.at(m) += z;
    }
    rec.energies = outcome.energies;
    for (const auto& [id, e] : outcome.energies) trace.total_energy[id] += e;
    rec.q_sov_after.reserve(sovs.size());
    for (const int m : sovs) rec.q_sov_after.push_back(state.q_sov.at(m));
    rec.q_opv_after.reserve(opvs.size());
    for (const int n : opvs) rec.q_opv_after.push_back(state.q_opv.at(n));
    trace.slots.push_back(std::move(rec));

    last_outcome = outcome;
    post_slot(t);
  }
  return trace;
}

}  // namespace

RoundTrace run_round(const ScenarioState& scenario, const std::vector<int>& sovs,
                     const std::vector<int>& opvs, const RoundContext& ctx,
                     const ChannelModel& channel, SlotPolicy& policy,
                     Rng& mobility_rng, Rng& channel_rng) {
  ScenarioState world = scenario;
  RoundTrace trace = run_round_loop(
      sovs, opvs, ctx, policy,
      [&](int t) { return channel.snapshot(world, sovs, opvs, channel_rng, t); },
      [&](int, RoundTrace& tr) {
        for (const int m : sovs) {
          if (world.network.in_coverage(
                  world.vehicles[static_cast<size_t>(m)].position)) {
            tr.sovs_ever_in_coverage.insert(m);
          }
        }
      },
      [&](int) { world = step_vehicles(world, ctx.veds.kappa, mobility_rng); });
  trace.final_scenario = std::move(world);
  return trace;
}

RoundTrace run_round_frozen(const std::vector<ChannelSnapshot>& snapshots,
                            const std::vector<int>& sovs, const std::vector<int>& opvs,
                            const RoundContext& ctx, SlotPolicy& policy) {
  if (static_cast<int>(snapshots.size()) != ctx.veds.total_slots) {
    throw std::invalid_argument("run_round_frozen: trace length != total_slots");
  }
  return run_round_loop(
      sovs, opvs, ctx, policy,
      [&](int t) { return snapshots[static_cast<size_t>(t - 1)]; },
      [](int, RoundTrace&) {}, [](int) {});
}

int success_count(const RoundTrace& trace, double model_bits) {
  int count = 0;
  for (const auto& [m, bits] : trace.total_bits) {
    if (bits >= model_bits) ++count;
  }
  return count;
}

BoundReport theorem2_report(const RoundTrace& trace,
                            std::optional<double> offline_weighted_sum) {
  const RoundContext& ctx = trace.ctx;
  const double slots = ctx.veds.total_slots;
  BoundReport report;
  report.psi_alpha = psi(ctx.veds.alpha);

  std::map<int, double> per_slot_budget;
  for (const int m : trace.sov_ids) {
    double b = ctx.budgets.at(m);
    const auto it = ctx.compute_energy.find(m);
    if (it != ctx.compute_energy.end()) b -= it->second;
    per_slot_budget[m] = b / slots;
  }
  for (const int n : trace.opv_ids) per_slot_budget[n] = ctx.budgets.at(n) / slots;

  std::map<int, double> phi;
  for (const auto& [id, b] : per_slot_budget) phi[id] = 0.0;
  for (const SlotRecord& rec : trace.slots) {
    for (auto& [id, f] : phi) {
      const auto it = rec.energies.find(id);
      const double e = it == rec.energies.end() ? 0.0 : it->second;
      f = std::max(f, std::abs(e - per_slot_budget.at(id)));
    }
  }
  for (const auto& [id, f] : phi) report.phi_total += f * f;

  report.sigma_gap_bound = slots * slots * report.phi_total /
                           (ctx.veds.v_weight * report.psi_alpha);
  for (const auto& [m, bits] : trace.total_bits) {
    report.measured_sigma_sum += sigma(bits, ctx.veds.alpha, ctx.veds.model_bits);
  }
  for (const auto& [id, b] : per_slot_budget) {
    double e = 0.0;
    const auto it = trace.total_energy.find(id);
    if (it != trace.total_energy.end()) e = it->second;
    const auto cp = ctx.compute_energy.find(id);
    if (cp != ctx.compute_energy.end()) e += cp->second;
    report.measured_energy[id] = e;
  }

  if (offline_weighted_sum.has_value()) {
    const double arg = 2.0 * slots * slots * report.phi_total -
                       2.0 * ctx.veds.v_weight * *offline_weighted_sum;
    report.energy_bound_sqrt_arg = arg;
    const double slack = std::sqrt(std::max(arg, 0.0));
    report.energy_bound_slack = slack;
    for (const auto& [id, b] : per_slot_budget) {
      report.energy_bound[id] = ctx.budgets.at(id) + slack;
    }
  }
  return report;
}

double offline_weighted_bit_sum(const RoundTrace& trace,
                                const std::vector<std::map<int, double>>& offline_bits) {
  if (offline_bits.size() != trace.slots.size()) {
    throw std::invalid_argument("offline_weighted_bit_sum: slot count mismatch");
  }
  double sum = 0.0;
  for (size_t t = 0; t < offline_bits.size(); ++t) {
    for (const auto& [m, z] : offline_bits[t]) {
      const auto it = std::find(trace.sov_ids.begin(), trace.sov_ids.end(), m);
      if (it == trace.sov_ids.end()) {
        throw std::invalid_argument("offline_weighted_bit_sum: unknown SOV id");
      }
      const double zeta =
          trace.slots[t].zeta_at_start[static_cast<size_t>(it - trace.sov_ids.begin())];
      sum += z * dsigma(zeta, trace.ctx.veds.alpha, trace.ctx.veds.model_bits);
    }
  }
  return sum;
}

}  // namespace veds
