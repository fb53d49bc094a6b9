#include "veds/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "veds/baselines.hpp"

namespace veds {

namespace {

// Locale-independent shortest round-trip formatting.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

struct SchedulerChoice {
  enum Kind { Veds, V2iOnly, Static, OracleUpper } kind = Veds;
};

SchedulerChoice::Kind parse_scheduler(const std::string& name) {
  if (name == "veds") return SchedulerChoice::Veds;
  if (name == "v2i_only") return SchedulerChoice::V2iOnly;
  if (name == "static") return SchedulerChoice::Static;
  if (name == "oracle_upper") return SchedulerChoice::OracleUpper;
  throw std::invalid_argument("unknown scheduler: " + name);
}

// Idles every slot; used for the coverage-only oracle benchmark.
class IdlePolicy : public SlotPolicy {
 public:
  SlotSolution decide(int, const ChannelSnapshot&, const SchedulerState&,
                      const RoundContext&) override {
    return {};
  }
};

}  // namespace

ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t seed) {
  const auto kind = parse_scheduler(config.run.scheduler);
  const std::uint64_t master = stream_seed(config.run.seed_base, "replicate", seed);
  Rng mobility_rng(stream_seed(master, "mobility"));
  Rng channel_rng(stream_seed(master, "channel"));
  Rng participation_rng(stream_seed(master, "participation"));
  Rng budget_rng(stream_seed(master, "budget"));
  Rng compute_rng(stream_seed(master, "compute"));
  Rng sgd_rng(stream_seed(master, "sgd"));
  // One pool of local problems per experiment, shared across seeds.
  Rng problem_rng(stream_seed(config.run.seed_base, "problem"));

  const RoadNetwork network =
      build_network(config.scenario.grid_rows, config.scenario.grid_cols,
                    config.scenario.block_length_m, config.scenario.rsu_radius_m);
  ScenarioState world =
      make_scenario(network, config.scenario.vehicle_count, config.scenario.speed_mps,
                    mobility_rng, config.scenario.speed_jitter_frac);
  const ChannelModel channel(network, config.channel);
  const LinkBudgetParams link = config.link_params();

  const SyntheticProblem problem = make_synthetic_problem(
      config.flsim.dimension, config.scenario.vehicle_count, config.flsim.mu,
      config.flsim.l_smooth, config.flsim.g_bound, problem_rng);
  const std::vector<double> w_star = problem.global_optimum();
  const double f_star = problem.global_loss(w_star);
  std::vector<double> model(config.flsim.dimension, 0.0);

  // Budgets and power caps are fixed per vehicle for the whole experiment.
  std::map<int, double> budgets, p_max;
  std::map<int, long long> dataset_sizes;
  for (Vehicle& veh : world.vehicles) {
    veh.energy_budget = budget_rng.uniform(config.comm.energy_budget_min_j,
                                           config.comm.energy_budget_max_j);
    veh.p_max = config.comm.p_max_w;
    veh.dataset_size = config.flsim.dataset_size;
    budgets[veh.id] = veh.energy_budget;
    p_max[veh.id] = veh.p_max;
    dataset_sizes[veh.id] = veh.dataset_size;
  }

  const ComputeModel compute_model{config.comm.flops_per_sample, config.flsim.batch,
                                   config.comm.energy_coeff};

  ReplicateResult result;
  for (int round = 1; round <= config.flsim.rounds; ++round) {
    world.round_index = round;
    auto [sovs, opvs] =
        classify_round(world, config.scenario.participation_prob, participation_rng);

    RoundContext ctx;
    ctx.link = link;
    ctx.veds.v_weight = config.veds.v_weight;
    ctx.veds.alpha = config.veds.alpha;
    ctx.veds.model_bits = config.comm.model_bits;
    ctx.veds.kappa = config.comm.kappa_s;
    ctx.veds.total_slots =
        estimate_round_slots(network, config.scenario.speed_mps, config.comm.kappa_s,
                             config.scenario.v_floor_mps, config.scenario.t_max_slots);
    ctx.budgets = budgets;
    ctx.p_max = p_max;
    for (const int m : sovs) {
      const double clock =
          compute_rng.uniform(config.comm.clock_min_hz, config.comm.clock_max_hz);
      world.vehicles[static_cast<size_t>(m)].clock_frequency = clock;
      const auto [t_cp, e_cp] = compute_cost(compute_model, clock);
      ctx.compute_latency[m] = t_cp;
      ctx.compute_energy[m] = e_cp;
    }

    std::unique_ptr<SlotPolicy> policy;
    switch (kind) {
      case SchedulerChoice::Veds:
        policy = std::make_unique<VedsPolicy>(true, false);
        break;
      case SchedulerChoice::V2iOnly:
        policy = std::make_unique<VedsPolicy>(false, true);
        break;
      case SchedulerChoice::Static:
        policy = std::make_unique<StaticPolicy>();
        break;
      case SchedulerChoice::OracleUpper:
        policy = std::make_unique<IdlePolicy>();
        break;
    }

    const RoundTrace trace =
        run_round(world, sovs, opvs, ctx, channel, *policy, mobility_rng, channel_rng);
    world = trace.final_scenario;

    const int upper = optimal_upper_bound(trace);
    int successes = success_count(trace, ctx.veds.model_bits);
    std::set<int> winners;
    for (const auto& [m, bits] : trace.total_bits) {
      if (bits >= ctx.veds.model_bits) winners.insert(m);
    }
    if (kind == SchedulerChoice::OracleUpper) {
      successes = upper;
      winners.clear();
      for (const int m : trace.sovs_ever_in_coverage) winners.insert(m);
    }

    // Learning step on the synthetic problem.
    const double grad_norm_sq = [&] {
      const auto g = problem.global_gradient(model);
      double s = 0.0;
      for (const double v : g) s += v * v;
      return s;
    }();
    const double loss_before = problem.global_loss(model);
    std::map<int, std::vector<double>> locals;
    for (const int m : sovs) {
      locals[m] =
          local_sgd(model, m, problem, config.flsim.eta, config.flsim.batch, sgd_rng);
    }
    if (!winners.empty()) {
      model = aggregate(locals, winners, dataset_sizes, round).weights;
    }
    const double loss_after = problem.global_loss(model);

    RoundSummary row;
    row.seed = seed;
    row.round = round;
    row.scheduler = config.run.scheduler;
    row.sov_count = static_cast<int>(sovs.size());
    row.opv_count = static_cast<int>(opvs.size());
    row.total_slots = ctx.veds.total_slots;
    row.round_seconds = ctx.veds.total_slots * ctx.veds.kappa;
    row.successes = successes;
    row.optimal_upper = upper;
    for (const int m : sovs) {
      const auto it = trace.total_energy.find(m);
      row.energy_sov_total_j += it == trace.total_energy.end() ? 0.0 : it->second;
    }
    for (const int n : opvs) {
      const auto it = trace.total_energy.find(n);
      row.energy_opv_total_j += it == trace.total_energy.end() ? 0.0 : it->second;
    }
    for (const auto& [id, budget] : budgets) {
      double spend = 0.0;
      const auto it = trace.total_energy.find(id);
      if (it != trace.total_energy.end()) spend = it->second;
      const auto cp = ctx.compute_energy.find(id);
      if (cp != ctx.compute_energy.end()) spend += cp->second;
      row.max_overshoot_frac =
          std::max(row.max_overshoot_frac, (spend - budget) / budget);
    }
    if (!trace.slots.empty()) {
      const SlotRecord& last = trace.slots.back();
      for (const double q : last.q_sov_after) {
        row.q_sov_final_max_j = std::max(row.q_sov_final_max_j, q);
      }
      for (const double q : last.q_opv_after) {
        row.q_opv_final_max_j = std::max(row.q_opv_final_max_j, q);
      }
    }
    row.loss_gap = loss_after - f_star;
    RoundLearningRecord learn;
    learn.participating = static_cast<int>(winners.size());
    learn.loss_before = loss_before;
    learn.loss_after = loss_after;
    learn.grad_norm_sq = grad_norm_sq;
    learn.eta = config.flsim.eta;
    learn.batch = config.flsim.batch;
    row.lemma1_bound_value =
        winners.empty() ? 0.0 : lemma1_bound(learn, problem);
    row.sigma_gap_bound = theorem2_report(trace).sigma_gap_bound;
    result.rounds.push_back(row);

    if (config.run.slot_trace) {
      for (const SlotRecord& rec : trace.slots) {
        SlotRow s;
        s.seed = seed;
        s.round = round;
        s.slot = rec.slot;
        s.sov = rec.decision.scheduled_sov;
        s.mode = rec.decision.mode == TxMode::Cot ? 1 : 0;
        s.relay_count = static_cast<int>(rec.decision.relays.size());
        s.sov_power_w =
            rec.decision.idle() ? 0.0 : rec.decision.power_of(rec.decision.scheduled_sov);
        s.bits = rec.bits;
        for (const auto& [id, e] : rec.energies) s.energy_j += e;
        for (const double q : rec.q_sov_after) s.q_sov_max_j = std::max(s.q_sov_max_j, q);
        for (const double q : rec.q_opv_after) s.q_opv_max_j = std::max(s.q_opv_max_j, q);
        result.slots.push_back(s);
      }
    }
  }
  return result;
}

std::string round_summary_csv(const std::vector<RoundSummary>& rows) {
  std::ostringstream out;
  out << "# schema: veds-round-summary v1\n";
  out << "seed,round,scheduler,sov_count,opv_count,total_slots,round_seconds_s,"
         "successes,optimal_upper,energy_sov_total_J,energy_opv_total_J,"
         "max_overshoot_frac,q_sov_final_max_J,q_opv_final_max_J,loss_gap,"
         "lemma1_bound,sigma_gap_bound\n";
  for (const RoundSummary& r : rows) {
    out << fmt(r.seed) << ',' << fmt(r.round) << ',' << r.scheduler << ','
        << fmt(r.sov_count) << ',' << fmt(r.opv_count) << ',' << fmt(r.total_slots)
        << ',' << fmt(r.round_seconds) << ',' << fmt(r.successes) << ','
        << fmt(r.optimal_upper) << ',' << fmt(r.energy_sov_total_j) << ','
        << fmt(r.energy_opv_total_j) << ',' << fmt(r.max_overshoot_frac) << ','
        << fmt(r.q_sov_final_max_j) << ',' << fmt(r.q_opv_final_max_j) << ','
        << fmt(r.loss_gap) << ',' << fmt(r.lemma1_bound_value) << ','
        << fmt(r.sigma_gap_bound) << '\n';
  }
  return out.str();
}

std::string slot_trace_csv(const std::vector<SlotRow>& rows) {
  std::ostringstream out;
  out << "# schema: veds-slot-trace v1\n";
  out << "seed,round,slot,sov,mode,relay_count,sov_power_W,bits,energy_J,"
         "q_sov_max_J,q_opv_max_J\n";
  for (const SlotRow& r : rows) {
    out << fmt(r.seed) << ',' << fmt(r.round) << ',' << fmt(r.slot) << ',' << fmt(r.sov)
        << ',' << fmt(r.mode) << ',' << fmt(r.relay_count) << ',' << fmt(r.sov_power_w)
        << ',' << fmt(r.bits) << ',' << fmt(r.energy_j) << ',' << fmt(r.q_sov_max_j)
        << ',' << fmt(r.q_opv_max_j) << '\n';
  }
  return out.str();
}

namespace {

std::vector<ReplicateResult> run_all_seeds(const ExperimentConfig& config, int seeds,
                                           int jobs) {
  std::vector<ReplicateResult> results(static_cast<size_t>(seeds));
  if (jobs <= 1) {
    for (int s = 0; s < seeds; ++s) {
      results[static_cast<size_t>(s)] =
          run_replicate(config, static_cast<std::uint64_t>(s));
    }
    return results;
  }
  std::vector<std::future<ReplicateResult>> futures;
  futures.reserve(static_cast<size_t>(seeds));
  for (int s = 0; s < seeds; ++s) {
    futures.push_back(std::async(std::launch::async, [&config, s] {
      return run_replicate(config, static_cast<std::uint64_t>(s));
    }));
  }
  for (int s = 0; s < seeds; ++s) {
    results[static_cast<size_t>(s)] = futures[static_cast<size_t>(s)].get();
  }
  return results;
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
  const auto results = run_all_seeds(config, config.run.seeds, config.run.jobs);
  std::vector<RoundSummary> rounds;
  std::vector<SlotRow> slots;
  for (const ReplicateResult& r : results) {
    rounds.insert(rounds.end(), r.rounds.begin(), r.rounds.end());
    slots.insert(slots.end(), r.slots.begin(), r.slots.end());
  }
  std::filesystem::create_directories(config.run.out_dir);
  {
    std::ofstream out(config.run.out_dir + "/round_summary.csv", std::ios::binary);
    out << round_summary_csv(rounds);
  }
  if (config.run.slot_trace) {
    std::ofstream out(config.run.out_dir + "/slot_trace.csv", std::ios::binary);
    out << slot_trace_csv(slots);
  }
}

std::vector<SweepPoint> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                  const std::vector<double>& values, int seeds,
                                  const std::string& out_dir) {
  std::vector<SweepPoint> points;
  for (const double value : values) {
    ExperimentConfig config = base;
    if (axis == "v") {
      config.scenario.speed_mps = value;
    } else if (axis == "alpha") {
      config.veds.alpha = value;
    } else if (axis == "V") {
      config.veds.v_weight = value;
    } else {
      throw std::invalid_argument("sweep axis must be one of v, alpha, V");
    }
    const auto results = run_all_seeds(config, seeds, config.run.jobs);

    SweepPoint p;
    p.axis_value = value;
    p.scheduler = config.run.scheduler;
    p.seeds = seeds;
    std::vector<double> successes;
    int violated_seeds = 0;
    for (const ReplicateResult& r : results) {
      double seed_successes = 0.0;
      bool violated = false;
      for (const RoundSummary& row : r.rounds) {
        seed_successes += row.successes;
        p.mean_optimal_upper += row.optimal_upper;
        p.mean_total_energy_j += row.energy_sov_total_j + row.energy_opv_total_j;
        p.mean_max_overshoot_frac += row.max_overshoot_frac;
        if (row.max_overshoot_frac > 0.05) violated = true;
      }
      successes.push_back(seed_successes / config.flsim.rounds);
      if (violated) ++violated_seeds;
    }
    const double n_rows = static_cast<double>(seeds) * config.flsim.rounds;
    p.mean_optimal_upper /= n_rows;
    p.mean_total_energy_j /= n_rows;
    p.mean_max_overshoot_frac /= n_rows;
    double mean = 0.0;
    for (const double s : successes) mean += s;
    mean /= successes.size();
    double var = 0.0;
    for (const double s : successes) var += (s - mean) * (s - mean);
    var = successes.size() > 1 ? var / (successes.size() - 1.0) : 0.0;
    p.mean_successes = mean;
    p.sem_successes = std::sqrt(var / successes.size());
    p.violation_seed_frac = static_cast<double>(violated_seeds) / seeds;
    points.push_back(p);
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(out_dir + "/sweep_" + axis + ".csv", std::ios::binary);
    out << sweep_csv(points, axis);
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& rows, const std::string& axis) {
  std::ostringstream out;
  out << "# schema: veds-sweep v1\n";
  out << axis
      << ",scheduler,seeds,mean_successes,sem_successes,mean_optimal_upper,"
         "mean_total_energy_J,mean_max_overshoot_frac,violation_seed_frac\n";
  for (const SweepPoint& r : rows) {
    out << fmt(r.axis_value) << ',' << r.scheduler << ',' << fmt(r.seeds) << ','
        << fmt(r.mean_successes) << ',' << fmt(r.sem_successes) << ','
        << fmt(r.mean_optimal_upper) << ',' << fmt(r.mean_total_energy_j) << ','
        << fmt(r.mean_max_overshoot_frac) << ',' << fmt(r.violation_seed_frac) << '\n';
  }
  return out.str();
}

}  // namespace veds
