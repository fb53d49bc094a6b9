#pragma once

#include <map>
#include <set>
#include <vector>

#include "veds/rng.hpp"

namespace veds {

/// Pool of quadratic local objectives f_m(w) = 1/2 (w - w_m)' A_m (w - w_m)
/// with diagonal curvature (eigenvalues inside [mu, L]), built so that the
/// smoothness / strong-convexity / gradient-noise assumptions hold with the
/// stated constants. The global objective is the uniform mixture over the
/// pool; its minimizer and value are available in closed form.
struct SyntheticProblem {
  int dimension = 16;
  std::vector<std::vector<double>> local_optima;    // [member][dim]
  std::vector<std::vector<double>> curvature_diag;  // [member][dim]
  double noise_std = 0.0;  // per-coordinate SGD noise
  double mu = 0.2;
  double l_smooth = 1.0;
  double g_bound = 1.0;

  int pool_size() const { return static_cast<int>(local_optima.size()); }
  std::vector<double> global_optimum() const;
  double global_loss(const std::vector<double>& w) const;
  std::vector<double> global_gradient(const std::vector<double>& w) const;
  double local_loss(int member, const std::vector<double>& w) const;
  std::vector<double> local_gradient(int member, const std::vector<double>& w) const;
};

/// Shared diagonal curvature, centred local optima scaled so that the
/// per-sample gradient variance around the global gradient stays under
/// g_bound^2 (drift cap 0.6 G, noise budget 0.8 G).
SyntheticProblem make_synthetic_problem(int dimension, int pool_size, double mu,
                                        double l_smooth, double g_bound, Rng& rng);

struct ModelState {
  std::vector<double> weights;
  int round = 0;
};

struct RoundLearningRecord {
  int participating = 0;  // |S_hat_k|
  double loss_before = 0.0;
  double loss_after = 0.0;
  double grad_norm_sq = 0.0;  // ||grad F(w_{k-1})||^2
  double eta = 0.1;
  int batch = 32;
};

/// One local SGD pass: w - (eta/B) sum_b [A_m (w - w_m) + noise_b].
std::vector<double> local_sgd(const std::vector<double>& w, int member,
                              const SyntheticProblem& problem, double eta, int batch,
                              Rng& rng);

/// Dataset-size weighted average over the successful uploads only. Throws on
/// an empty success set (the caller skips the round instead).
ModelState aggregate(const std::map<int, std::vector<double>>& locals,
                     const std::set<int>& successes,
                     const std::map<int, long long>& dataset_sizes, int round);

/// Expected one-round loss decrease bound:
/// eta (L eta / 2 - 1) ||grad F||^2 + (L eta^2 / 2) G^2 / (B |S_hat|).
double lemma1_bound(const RoundLearningRecord& record, const SyntheticProblem& problem);

/// Multi-round gap bound with (1 - mu eta_k) contraction factors. Rounds with
/// an empty success set contribute a factor of one and no noise term (the
/// model is carried over unchanged). Requires eta_k <= 1/L.
double theorem1_bound(const std::vector<RoundLearningRecord>& history,
                      const SyntheticProblem& problem, double initial_gap);

}  // namespace veds
