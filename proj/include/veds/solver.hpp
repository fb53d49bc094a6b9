#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "veds/comm.hpp"
#include "veds/params.hpp"

namespace veds {

/// Single-SOV direct-transmission power problem:
///   max  weight * kappa * R_DT(p)  -  kappa * queue * p,   0 <= p <= p_max.
struct DtSubproblem {
  double weight = 0.0;  // V * dsigma, per bit
  double gain = 0.0;    // |h_mr|^2, linear
  double queue = 0.0;   // q^SOV, joules
  double p_max = 0.3;
  LinkBudgetParams params;
};

struct CotRelay {
  double gain_nr = 0.0;  // OPV -> RSU
  double gain_mn = 0.0;  // SOV -> OPV (prefix ordering key)
  double queue = 0.0;    // q^OPV
  double p_max = 0.3;
};

/// Fixed-relay-set cooperative power problem:
///   max  weight * (kappa/2) * R_COT(p) - (kappa/2) [q_m p_m + sum q_n p_n]
///   s.t. boxes and the binding decode constraint
///        sum of uplink SNR terms <= p_m * min_n gain_mn / (beta N0).
struct CotSubproblem {
  double weight = 0.0;
  double gain_mr = 0.0;
  double queue_m = 0.0;
  double p_max_m = 0.3;
  std::vector<CotRelay> relays;  // descending gain_mn
  LinkBudgetParams params;
};

enum class SolveStatus { Optimal, Clamped, Infeasible };

struct SolveResult {
  std::vector<double> powers;  // [0] = SOV, then relays in subproblem order
  double objective = 0.0;
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

class SolverIterationLimit : public std::runtime_error {
 public:
  SolverIterationLimit(const std::string& what, SolveResult best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  SolveResult best_iterate;
};

/// P3.1 objective value at power p.
double dt_objective(const DtSubproblem& sub, double p);

/// Closed-form optimum of the DT problem (KKT of the concave 1-D objective):
/// p* = clamp(weight*beta/(ln2 * queue) - beta*N0/gain, 0, p_max), with
/// queue == 0 read as the limit p_max (when weight > 0) and gain == 0 -> 0.
SolveResult solve_dt(const DtSubproblem& sub);

/// P4 objective value at powers p (p[0] = SOV).
double cot_objective(const CotSubproblem& sub, const std::vector<double>& p);

/// True iff p satisfies boxes and decode constraints within `tol`.
bool cot_feasible(const CotSubproblem& sub, const std::vector<double>& p, double tol = 1e-9);

/// Log-barrier interior-point solve of the COT problem. Throws
/// SolverIterationLimit if the Newton iteration cap is exhausted.
SolveResult solve_cot(const CotSubproblem& sub, double tol = 1e-8);

/// 1-D grid search oracle for the DT problem (step in watts).
SolveResult grid_search_dt(const DtSubproblem& sub, double step);

/// Grid search oracle for COT with <= 2 relays; feasible points only.
/// `refine_levels` times, the grid is re-centred on the incumbent with a 10x
/// finer step.
SolveResult grid_search_cot(const CotSubproblem& sub, double step, int refine_levels = 2);

/// Everything Algorithm 1 needs for one slot, flattened to index form.
/// sov_ids/opv_ids ascending; eligibility has already been applied upstream.
struct SlotProblem {
  std::vector<int> sov_ids;
  std::vector<double> sov_weight;  // V * dsigma(zeta_m)
  std::vector<double> sov_gain;    // |h_mr|^2
  std::vector<double> sov_queue;
  std::vector<double> sov_pmax;
  std::vector<int> opv_ids;
  std::vector<double> opv_gain;  // |h_nr|^2
  std::vector<double> opv_queue;
  std::vector<double> opv_pmax;
  std::vector<std::vector<double>> v2v_gain;  // [sov index][opv index]
  LinkBudgetParams params;
};

struct SlotSolution {
  SlotDecision decision;
  double objective = 0.0;  // y(t); 0 for the empty decision
};

/// Exhaustive oracle over (SOV, mode, every relay subset, powers). DT powers
/// and <=2-relay COT powers come from refined grid search at `power_grid_step`;
/// larger subsets fall back to the convex solver. Guarded to small instances.
SlotSolution brute_force_slot(const SlotProblem& problem, double power_grid_step);

/// Frozen-channel instance for offline (multi-slot) exhaustive search.
struct TinyInstance {
  std::vector<SlotProblem> slots;       // per-slot gains; queue fields unused
  std::map<int, double> budgets;        // E^cons per vehicle id
  std::map<int, double> compute_energy; // e^cp per SOV id
  std::map<int, double> compute_done;   // t^cp seconds per SOV id
  std::vector<double> power_levels;     // <= 3 nonzero levels
  VedsParams params;                    // alpha, Q, kappa; total_slots = T
};

struct OfflineResult {
  double sigma_sum = 0.0;                     // optimal sum_m sigma(total bits)
  std::vector<std::map<int, double>> bits;    // [slot] sov -> z*_m(t)
  std::map<int, double> energy;               // per-vehicle total of the optimum
};

/// Exhaustive offline maximization of sum_m sigma(sum_t z_m(t)) over all
/// slot-decision sequences with powers restricted to power_levels (one level
/// per decision), subject to the energy budgets, eligibility and decode
/// constraints. Relay sets range over descending-gain prefixes.
OfflineResult offline_optimal(const TinyInstance& instance);

}  // namespace veds
