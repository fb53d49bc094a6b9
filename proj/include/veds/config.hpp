#pragma once

#include <cstdint>
#include <string>

#include "veds/channel.hpp"
#include "veds/comm.hpp"

namespace veds {

/// Full experiment configuration. Every field has a default mirroring the
/// simulation parameter table; any subset can be overridden from a JSON file.
struct ExperimentConfig {
  struct Scenario {
    int grid_rows = 3;
    int grid_cols = 3;
    double block_length_m = 250.0;
    double rsu_radius_m = 300.0;
    int vehicle_count = 40;
    double speed_mps = 10.0;  // v
    double speed_jitter_frac = 0.0;
    double participation_prob = 0.5;
    double v_floor_mps = 0.1;
    int t_max_slots = 1000;
  } scenario;

  ChannelParams channel;

  struct Comm {
    double bandwidth_hz = 20e6;
    double noise_psd_dbm_hz = -174.0;
    double kappa_s = 0.1;
    double model_bits = 2e7;  // Q
    double p_max_w = 0.3;
    double energy_budget_min_j = 0.05;
    double energy_budget_max_j = 0.10;
    double energy_coeff = 1e-28;  // rho
    double flops_per_sample = 8e6;
    double clock_min_hz = 0.8e9;
    double clock_max_hz = 1.2e9;
  } comm;

  struct Veds {
    double v_weight = 0.2;
    double alpha = 2.0;
  } veds;

  struct Flsim {
    int dimension = 16;
    double mu = 0.2;
    double l_smooth = 1.0;
    double g_bound = 1.0;
    double eta = 0.1;
    int batch = 32;
    int rounds = 1;  // K
    long long dataset_size = 1000;
  } flsim;

  struct Run {
    int seeds = 1;
    std::uint64_t seed_base = 1;
    std::string scheduler = "veds";  // veds | v2i_only | static | oracle_upper
    std::string out_dir = "out";
    bool slot_trace = false;
    int jobs = 1;
  } run;

  LinkBudgetParams link_params() const {
    LinkBudgetParams p;
    p.bandwidth_hz = comm.bandwidth_hz;
    p.noise_psd_w_hz = std::pow(10.0, comm.noise_psd_dbm_hz / 10.0) / 1000.0;
    p.slot_seconds = comm.kappa_s;
    return p;
  }
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& json_text);

}  // namespace veds
