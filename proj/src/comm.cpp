#include "veds/comm.hpp"

#include <cmath>
#include <stdexcept>

namespace veds {

namespace {
double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }
}  // namespace

double rate_dt(double power_w, double gain, const LinkBudgetParams& params) {
  if (power_w < 0.0) throw std::domain_error("rate_dt: negative power");
  return params.bandwidth_hz * log2_1p(power_w * gain / params.noise_power());
}

double rate_cot(double sov_power_w, double sov_gain,
                std::span<const std::pair<double, double>> relay_power_gain,
                const LinkBudgetParams& params) {
  if (sov_power_w < 0.0) throw std::domain_error("rate_cot: negative power");
  double snr = sov_power_w * sov_gain;
  for (const auto& [p_n, gain_nr] : relay_power_gain) {
    if (p_n < 0.0) throw std::domain_error("rate_cot: negative relay power");
    snr += p_n * gain_nr;
  }
  return params.bandwidth_hz * log2_1p(snr / params.noise_power());
}

double rate_v2v(double sov_power_w, double gain_mn, const LinkBudgetParams& params) {
  return rate_dt(sov_power_w, gain_mn, params);
}

namespace {

double cot_rate_of_decision(const SlotDecision& d, const ChannelSnapshot& snap,
                            const LinkBudgetParams& params) {
  std::vector<std::pair<double, double>> relay_terms;
  relay_terms.reserve(d.relays.size());
  for (const int n : d.relays) {
    relay_terms.emplace_back(d.power_of(n), snap.opv2i_gains.at(n).gain);
  }
  return rate_cot(d.power_of(d.scheduled_sov),
                  snap.v2i_gains.at(d.scheduled_sov).gain, relay_terms, params);
}

}  // namespace

bool decode_constraint_ok(const SlotDecision& decision, const ChannelSnapshot& snap,
                          const LinkBudgetParams& params) {
  if (decision.idle() || decision.mode == TxMode::Dt) return true;
  const double r_cot = cot_rate_of_decision(decision, snap, params);
  const double p_m = decision.power_of(decision.scheduled_sov);
  for (const int n : decision.relays) {
    const double r_v2v =
        rate_v2v(p_m, snap.v2v_gains.at({decision.scheduled_sov, n}).gain, params);
    if (r_cot > r_v2v + 1e-9 * std::max(1.0, r_v2v)) return false;
  }
  return true;
}

SlotOutcome slot_outcome(const SlotDecision& decision, const ChannelSnapshot& snap,
                         const LinkBudgetParams& params) {
  SlotOutcome out;
  if (decision.idle()) return out;
  if (!decode_constraint_ok(decision, snap, params)) {
    throw std::invalid_argument("slot_outcome: decision violates the decode constraint");
  }
  const int m = decision.scheduled_sov;
  const double kappa = params.slot_seconds;
  const double p_m = decision.power_of(m);
  if (decision.mode == TxMode::Dt) {
    out.bits[m] = kappa * rate_dt(p_m, snap.v2i_gains.at(m).gain, params);
    out.energies[m] = kappa * p_m;
  } else {
    out.bits[m] = 0.5 * kappa * cot_rate_of_decision(decision, snap, params);
    out.energies[m] = 0.5 * kappa * p_m;
    for (const int n : decision.relays) {
      out.energies[n] = 0.5 * kappa * decision.power_of(n);
    }
  }
  return out;
}

void update_progress(std::map<int, double>& zeta, const SlotOutcome& outcome,
                     double model_bits) {
  for (auto& [id, z] : zeta) {
    z = std::min(z + outcome.bits_of(id), model_bits);
  }
}

std::pair<double, double> compute_cost(const ComputeModel& model, double clock_hz) {
  if (clock_hz <= 0.0) throw std::domain_error("compute_cost: clock must be positive");
  const double workload = model.flops_per_sample * model.batch_size;
  const double latency = workload / clock_hz;
  const double energy = model.energy_coeff * clock_hz * clock_hz * workload;
  return {latency, energy};
}

}  // namespace veds
