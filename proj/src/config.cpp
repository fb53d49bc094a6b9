#include "veds/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace veds {

namespace {

using nlohmann::json;

// Applies fields present in `j` onto the struct, leaving the rest at their
// defaults; unknown keys are rejected to catch typos.
template <typename Fn>
void apply_known(const json& j, std::initializer_list<const char*> known, Fn&& set) {
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known) {
      if (key == k) {
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("config: unknown key '" + key + "'");
    set(key, value);
  }
}

void read_scenario(const json& j, ExperimentConfig::Scenario& s) {
  apply_known(j,
              {"grid_rows", "grid_cols", "block_length_m", "rsu_radius_m",
               "vehicle_count", "speed_mps", "speed_jitter_frac", "participation_prob",
               "v_floor_mps", "t_max_slots"},
              [&](const std::string& k, const json& v) {
                if (k == "grid_rows") s.grid_rows = v.get<int>();
                if (k == "grid_cols") s.grid_cols = v.get<int>();
                if (k == "block_length_m") s.block_length_m = v.get<double>();
                if (k == "rsu_radius_m") s.rsu_radius_m = v.get<double>();
                if (k == "vehicle_count") s.vehicle_count = v.get<int>();
                if (k == "speed_mps") s.speed_mps = v.get<double>();
                if (k == "speed_jitter_frac") s.speed_jitter_frac = v.get<double>();
                if (k == "participation_prob") s.participation_prob = v.get<double>();
                if (k == "v_floor_mps") s.v_floor_mps = v.get<double>();
                if (k == "t_max_slots") s.t_max_slots = v.get<int>();
              });
}

void read_channel(const json& j, ChannelParams& c) {
  apply_known(j,
              {"carrier_ghz", "shadow_std_los_db", "shadow_std_nlosv_db",
               "shadow_std_nlos_db", "blockage_mean_db", "blockage_std_db",
               "blockage_width_m", "v2v_range_m", "min_distance_m", "shadowing_enabled",
               "blockage_enabled"},
              [&](const std::string& k, const json& v) {
                if (k == "carrier_ghz") c.carrier_ghz = v.get<double>();
                if (k == "shadow_std_los_db") c.shadow_std_los_db = v.get<double>();
                if (k == "shadow_std_nlosv_db") c.shadow_std_nlosv_db = v.get<double>();
                if (k == "shadow_std_nlos_db") c.shadow_std_nlos_db = v.get<double>();
                if (k == "blockage_mean_db") c.blockage_mean_db = v.get<double>();
                if (k == "blockage_std_db") c.blockage_std_db = v.get<double>();
                if (k == "blockage_width_m") c.blockage_width_m = v.get<double>();
                if (k == "v2v_range_m") c.v2v_range_m = v.get<double>();
                if (k == "min_distance_m") c.min_distance_m = v.get<double>();
                if (k == "shadowing_enabled") c.shadowing_enabled = v.get<bool>();
                if (k == "blockage_enabled") c.blockage_enabled = v.get<bool>();
              });
}

void read_comm(const json& j, ExperimentConfig::Comm& c) {
  apply_known(j,
              {"bandwidth_hz", "noise_psd_dbm_hz", "kappa_s", "model_bits", "p_max_w",
               "energy_budget_min_j", "energy_budget_max_j", "energy_coeff",
               "flops_per_sample", "clock_min_hz", "clock_max_hz"},
              [&](const std::string& k, const json& v) {
                if (k == "bandwidth_hz") c.bandwidth_hz = v.get<double>();
                if (k == "noise_psd_dbm_hz") c.noise_psd_dbm_hz = v.get<double>();
                if (k == "kappa_s") c.kappa_s = v.get<double>();
                if (k == "model_bits") c.model_bits = v.get<double>();
                if (k == "p_max_w") c.p_max_w = v.get<double>();
                if (k == "energy_budget_min_j") c.energy_budget_min_j = v.get<double>();
                if (k == "energy_budget_max_j") c.energy_budget_max_j = v.get<double>();
                if (k == "energy_coeff") c.energy_coeff = v.get<double>();
                if (k == "flops_per_sample") c.flops_per_sample = v.get<double>();
                if (k == "clock_min_hz") c.clock_min_hz = v.get<double>();
                if (k == "clock_max_hz") c.clock_max_hz = v.get<double>();
              });
}

void read_veds(const json& j, ExperimentConfig::Veds& v_block) {
  apply_known(j, {"v_weight", "alpha"}, [&](const std::string& k, const json& v) {
    if (k == "v_weight") v_block.v_weight = v.get<double>();
    if (k == "alpha") v_block.alpha = v.get<double>();
  });
}

void read_flsim(const json& j, ExperimentConfig::Flsim& f) {
  apply_known(j,
              {"dimension", "mu", "l_smooth", "g_bound", "eta", "batch", "rounds",
               "dataset_size"},
              [&](const std::string& k, const json& v) {
                if (k == "dimension") f.dimension = v.get<int>();
                if (k == "mu") f.mu = v.get<double>();
                if (k == "l_smooth") f.l_smooth = v.get<double>();
                if (k == "g_bound") f.g_bound = v.get<double>();
                if (k == "eta") f.eta = v.get<double>();
                if (k == "batch") f.batch = v.get<int>();
                if (k == "rounds") f.rounds = v.get<int>();
                if (k == "dataset_size") f.dataset_size = v.get<long long>();
              });
}

void read_run(const json& j, ExperimentConfig::Run& r) {
  apply_known(j, {"seeds", "seed_base", "scheduler", "out_dir", "slot_trace", "jobs"},
              [&](const std::string& k, const json& v) {
                if (k == "seeds") r.seeds = v.get<int>();
                if (k == "seed_base") r.seed_base = v.get<std::uint64_t>();
                if (k == "scheduler") r.scheduler = v.get<std::string>();
                if (k == "out_dir") r.out_dir = v.get<std::string>();
                if (k == "slot_trace") r.slot_trace = v.get<bool>();
                if (k == "jobs") r.jobs = v.get<int>();
              });
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = {{"grid_rows", c.scenario.grid_rows},
                   {"grid_cols", c.scenario.grid_cols},
                   {"block_length_m", c.scenario.block_length_m},
                   {"rsu_radius_m", c.scenario.rsu_radius_m},
                   {"vehicle_count", c.scenario.vehicle_count},
                   {"speed_mps", c.scenario.speed_mps},
                   {"speed_jitter_frac", c.scenario.speed_jitter_frac},
                   {"participation_prob", c.scenario.participation_prob},
                   {"v_floor_mps", c.scenario.v_floor_mps},
                   {"t_max_slots", c.scenario.t_max_slots}};
  j["channel"] = {{"carrier_ghz", c.channel.carrier_ghz},
                  {"shadow_std_los_db", c.channel.shadow_std_los_db},
                  {"shadow_std_nlosv_db", c.channel.shadow_std_nlosv_db},
                  {"shadow_std_nlos_db", c.channel.shadow_std_nlos_db},
                  {"blockage_mean_db", c.channel.blockage_mean_db},
                  {"blockage_std_db", c.channel.blockage_std_db},
                  {"blockage_width_m", c.channel.blockage_width_m},
                  {"v2v_range_m", c.channel.v2v_range_m},
                  {"min_distance_m", c.channel.min_distance_m},
                  {"shadowing_enabled", c.channel.shadowing_enabled},
                  {"blockage_enabled", c.channel.blockage_enabled}};
  j["comm"] = {{"bandwidth_hz", c.comm.bandwidth_hz},
               {"noise_psd_dbm_hz", c.comm.noise_psd_dbm_hz},
               {"kappa_s", c.comm.kappa_s},
               {"model_bits", c.comm.model_bits},
               {"p_max_w", c.comm.p_max_w},
               {"energy_budget_min_j", c.comm.energy_budget_min_j},
               {"energy_budget_max_j", c.comm.energy_budget_max_j},
               {"energy_coeff", c.comm.energy_coeff},
               {"flops_per_sample", c.comm.flops_per_sample},
               {"clock_min_hz", c.comm.clock_min_hz},
               {"clock_max_hz", c.comm.clock_max_hz}};
  j["veds"] = {{"v_weight", c.veds.v_weight}, {"alpha", c.veds.alpha}};
  j["flsim"] = {{"dimension", c.flsim.dimension}, {"mu", c.flsim.mu},
                {"l_smooth", c.flsim.l_smooth},  {"g_bound", c.flsim.g_bound},
                {"eta", c.flsim.eta},            {"batch", c.flsim.batch},
                {"rounds", c.flsim.rounds},      {"dataset_size", c.flsim.dataset_size}};
  j["run"] = {{"seeds", c.run.seeds},       {"seed_base", c.run.seed_base},
              {"scheduler", c.run.scheduler}, {"out_dir", c.run.out_dir},
              {"slot_trace", c.run.slot_trace}, {"jobs", c.run.jobs}};
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "scenario") {
      read_scenario(value, c.scenario);
    } else if (key == "channel") {
      read_channel(value, c.channel);
    } else if (key == "comm") {
      read_comm(value, c.comm);
    } else if (key == "veds") {
      read_veds(value, c.veds);
    } else if (key == "flsim") {
      read_flsim(value, c.flsim);
    } else if (key == "run") {
      read_run(value, c.run);
    } else {
      throw std::invalid_argument("config: unknown section '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << config_to_json(config) << '\n';
}

}  // namespace veds
