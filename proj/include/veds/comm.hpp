#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "veds/channel.hpp"

namespace veds {

struct LinkBudgetParams {
  double bandwidth_hz = 20e6;       // beta
  double noise_psd_w_hz = 3.9810717055349855e-21;  // N0, -174 dBm/Hz
  double slot_seconds = 0.1;        // kappa

  double noise_power() const { return bandwidth_hz * noise_psd_w_hz; }
};

enum class TxMode { Dt, Cot };

/// One slot's scheduling decision: at most one SOV, its mode, the relay set
/// (COT only) and per-vehicle transmit powers.
struct SlotDecision {
  int scheduled_sov = -1;          // -1 = idle slot
  TxMode mode = TxMode::Dt;
  std::vector<int> relays;         // OPV ids, ascending
  std::map<int, double> powers;    // vehicle id -> watts, scheduled vehicles only

  bool idle() const { return scheduled_sov < 0; }
  double power_of(int id) const {
    const auto it = powers.find(id);
    return it == powers.end() ? 0.0 : it->second;
  }
};

struct SlotOutcome {
  std::map<int, double> bits;      // SOV id -> bits delivered this slot
  std::map<int, double> energies;  // vehicle id -> joules this slot

  double bits_of(int id) const {
    const auto it = bits.find(id);
    return it == bits.end() ? 0.0 : it->second;
  }
  double energy_of(int id) const {
    const auto it = energies.find(id);
    return it == energies.end() ? 0.0 : it->second;
  }
};

struct ComputeModel {
  double flops_per_sample = 1e8;  // N_flop
  int batch_size = 32;            // B
  double energy_coeff = 1e-28;    // rho, J s^2 / cycle^3
};

/// Direct V2I rate: beta * log2(1 + p*gain / (beta*N0)).
double rate_dt(double power_w, double gain, const LinkBudgetParams& params);

/// Cooperative rate; relay SNR terms add inside the log.
double rate_cot(double sov_power_w, double sov_gain,
                std::span<const std::pair<double, double>> relay_power_gain,
                const LinkBudgetParams& params);

/// SOV -> OPV sidelink rate, same form as rate_dt with the V2V gain.
double rate_v2v(double sov_power_w, double gain_mn, const LinkBudgetParams& params);

/// True iff every scheduled relay can decode before it transmits:
/// R_COT <= R_COT-V(m, n) for all n in the relay set. Vacuous for DT/idle.
bool decode_constraint_ok(const SlotDecision& decision, const ChannelSnapshot& snap,
                          const LinkBudgetParams& params);

/// Bits and energies produced by a feasible decision.
/// DT: bits = kappa*R_DT, SOV energy = kappa*p.
/// COT: bits = kappa/2*R_COT, SOV energy = kappa/2*p_m, relay n = kappa/2*p_n.
/// Throws if the decode constraint is violated.
SlotOutcome slot_outcome(const SlotDecision& decision, const ChannelSnapshot& snap,
                         const LinkBudgetParams& params);

/// zeta_m <- min(zeta_m + z_m, Q) for every SOV in `zeta`.
void update_progress(std::map<int, double>& zeta, const SlotOutcome& outcome,
                     double model_bits);

/// Local-update latency and energy: t = N B / l, e = rho l^2 N B.
std::pair<double, double> compute_cost(const ComputeModel& model, double clock_hz);

}  // namespace veds
