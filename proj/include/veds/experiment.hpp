#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "veds/config.hpp"
#include "veds/flsim.hpp"
#include "veds/scheduler.hpp"

namespace veds {

/// One row of the round-summary CSV.
struct RoundSummary {
  std::uint64_t seed = 0;
  int round = 0;
  std::string scheduler;
  int sov_count = 0;
  int opv_count = 0;
  int total_slots = 0;
  double round_seconds = 0.0;
  int successes = 0;
  int optimal_upper = 0;
  double energy_sov_total_j = 0.0;
  double energy_opv_total_j = 0.0;
  double max_overshoot_frac = 0.0;  // max over vehicles of (spend - E)/E
  double q_sov_final_max_j = 0.0;
  double q_opv_final_max_j = 0.0;
  double loss_gap = 0.0;  // F(w_k) - F(w*)
  double lemma1_bound_value = 0.0;
  double sigma_gap_bound = 0.0;
};

struct SlotRow {
  std::uint64_t seed = 0;
  int round = 0;
  int slot = 0;
  int sov = -1;
  int mode = 0;  // 0 DT, 1 COT
  int relay_count = 0;
  double sov_power_w = 0.0;
  double bits = 0.0;
  double energy_j = 0.0;
  double q_sov_max_j = 0.0;
  double q_opv_max_j = 0.0;
};

struct ReplicateResult {
  std::vector<RoundSummary> rounds;
  std::vector<SlotRow> slots;  // only filled when slot tracing is on
};

/// Runs the configured number of FL rounds for one seed.
ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t seed);

/// Runs all seeds (optionally in parallel) and writes round_summary.csv plus,
/// when enabled, slot_trace.csv under config.run.out_dir. Results are merged
/// in seed order so thread count never changes the bytes.
void run_experiment(const ExperimentConfig& config);

struct SweepPoint {
  double axis_value = 0.0;
  std::string scheduler;
  int seeds = 0;
  double mean_successes = 0.0;
  double sem_successes = 0.0;
  double mean_optimal_upper = 0.0;
  double mean_total_energy_j = 0.0;
  double mean_max_overshoot_frac = 0.0;
  double violation_seed_frac = 0.0;  // seeds with any vehicle > 5% over budget
};

/// Re-runs the experiment for each value of the axis ("v", "alpha" or "V"),
/// aggregating per value across seeds and rounds; writes sweep_<axis>.csv.
std::vector<SweepPoint> run_sweep(const ExperimentConfig& config,
                                  const std::string& axis,
                                  const std::vector<double>& values, int seeds,
                                  const std::string& out_dir);

std::string round_summary_csv(const std::vector<RoundSummary>& rows);
std::string slot_trace_csv(const std::vector<SlotRow>& rows);
std::string sweep_csv(const std::vector<SweepPoint>& rows, const std::string& axis);

}  // namespace veds
