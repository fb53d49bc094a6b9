#include "veds/flsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace veds {

std::vector<double> SyntheticProblem::global_optimum() const {
  std::vector<double> num(dimension, 0.0), den(dimension, 0.0);
  for (int m = 0; m < pool_size(); ++m) {
    for (int j = 0; j < dimension; ++j) {
      num[j] += curvature_diag[m][j] * local_optima[m][j];
      den[j] += curvature_diag[m][j];
    }
  }
  std::vector<double> w(dimension);
  for (int j = 0; j < dimension; ++j) w[j] = num[j] / den[j];
  return w;
}

double SyntheticProblem::global_loss(const std::vector<double>& w) const {
  double total = 0.0;
  for (int m = 0; m < pool_size(); ++m) total += local_loss(m, w);
  return total / pool_size();
}

std::vector<double> SyntheticProblem::global_gradient(const std::vector<double>& w) const {
  std::vector<double> g(dimension, 0.0);
  for (int m = 0; m < pool_size(); ++m) {
    for (int j = 0; j < dimension; ++j) {
      g[j] += curvature_diag[m][j] * (w[j] - local_optima[m][j]);
    }
  }
  for (double& v : g) v /= pool_size();
  return g;
}

double SyntheticProblem::local_loss(int member, const std::vector<double>& w) const {
  double loss = 0.0;
  for (int j = 0; j < dimension; ++j) {
    const double d = w[j] - local_optima[member][j];
    loss += 0.5 * curvature_diag[member][j] * d * d;
  }
  return loss;
}

std::vector<double> SyntheticProblem::local_gradient(int member,
                                                     const std::vector<double>& w) const {
  std::vector<double> g(dimension);
  for (int j = 0; j < dimension; ++j) {
    g[j] = curvature_diag[member][j] * (w[j] - local_optima[member][j]);
  }
  return g;
}

SyntheticProblem make_synthetic_problem(int dimension, int pool_size, double mu,
                                        double l_smooth, double g_bound, Rng& rng) {
  if (dimension < 1 || pool_size < 1 || mu <= 0.0 || mu > l_smooth) {
    throw std::invalid_argument("make_synthetic_problem: bad constants");
  }
  SyntheticProblem prob;
  prob.dimension = dimension;
  prob.mu = mu;
  prob.l_smooth = l_smooth;
  prob.g_bound = g_bound;
  // Variance budget split: client drift gets 0.3 G, per-sample noise the rest,
  // so E||g - grad F||^2 <= (0.3 G)^2 + dim * noise_std^2 = G^2 exactly.
  prob.noise_std = g_bound * std::sqrt(0.91 / static_cast<double>(dimension));

  std::vector<double> diag(dimension);
  for (int j = 0; j < dimension; ++j) {
    diag[j] = dimension == 1
                  ? l_smooth
                  : mu + (l_smooth - mu) * static_cast<double>(j) / (dimension - 1);
  }
  prob.curvature_diag.assign(pool_size, diag);

  prob.local_optima.assign(pool_size, std::vector<double>(dimension, 0.0));
  for (auto& w : prob.local_optima) {
    for (double& v : w) v = rng.normal();
  }
  // Centre the optima, then scale so max ||A (w_m - mean)|| <= 0.3 G.
  std::vector<double> mean(dimension, 0.0);
  for (const auto& w : prob.local_optima) {
    for (int j = 0; j < dimension; ++j) mean[j] += w[j];
  }
  for (double& v : mean) v /= pool_size;
  double max_drift = 0.0;
  for (auto& w : prob.local_optima) {
    double norm2 = 0.0;
    for (int j = 0; j < dimension; ++j) {
      w[j] -= mean[j];
      norm2 += diag[j] * diag[j] * w[j] * w[j];
    }
    max_drift = std::max(max_drift, std::sqrt(norm2));
  }
  if (max_drift > 0.0) {
    const double scale = 0.3 * g_bound / max_drift;
    for (auto& w : prob.local_optima) {
      for (double& v : w) v *= scale;
    }
  }
  return prob;
}

std::vector<double> local_sgd(const std::vector<double>& w, int member,
                              const SyntheticProblem& problem, double eta, int batch,
                              Rng& rng) {
  std::vector<double> grad_sum(problem.dimension, 0.0);
  for (int b = 0; b < batch; ++b) {
    for (int j = 0; j < problem.dimension; ++j) {
      const double g =
          problem.curvature_diag[member][j] * (w[j] - problem.local_optima[member][j]) +
          rng.normal(0.0, problem.noise_std);
      grad_sum[j] += g;
    }
  }
  std::vector<double> next(w);
  for (int j = 0; j < problem.dimension; ++j) {
    next[j] -= eta / batch * grad_sum[j];
  }
  return next;
}

ModelState aggregate(const std::map<int, std::vector<double>>& locals,
                     const std::set<int>& successes,
                     const std::map<int, long long>& dataset_sizes, int round) {
  if (successes.empty()) {
    throw std::invalid_argument("aggregate: empty success set");
  }
  double total_weight = 0.0;
  std::vector<double> acc;
  for (const int m : successes) {
    const auto& w = locals.at(m);
    const double weight = static_cast<double>(dataset_sizes.at(m));
    if (acc.empty()) acc.assign(w.size(), 0.0);
    for (size_t j = 0; j < w.size(); ++j) acc[j] += weight * w[j];
    total_weight += weight;
  }
  for (double& v : acc) v /= total_weight;
  return {std::move(acc), round};
}

double lemma1_bound(const RoundLearningRecord& record, const SyntheticProblem& problem) {
  if (record.participating < 1) {
    throw std::invalid_argument("lemma1_bound: needs at least one success");
  }
  const double eta = record.eta;
  const double l = problem.l_smooth;
  return eta * (l * eta / 2.0 - 1.0) * record.grad_norm_sq +
         (l * eta * eta / 2.0) * problem.g_bound * problem.g_bound /
             (record.batch * record.participating);
}

double theorem1_bound(const std::vector<RoundLearningRecord>& history,
                      const SyntheticProblem& problem, double initial_gap) {
  double bound = initial_gap;
  for (const RoundLearningRecord& rec : history) {
    if (rec.eta > 1.0 / problem.l_smooth + 1e-12) {
      throw std::invalid_argument("theorem1_bound: eta exceeds 1/L");
    }
    if (rec.participating < 1) continue;  // skipped round, model carried over
    bound *= 1.0 - problem.mu * rec.eta;
    bound += rec.eta / 2.0 * problem.g_bound * problem.g_bound /
             (rec.batch * rec.participating);
  }
  return bound;
}

}  // namespace veds
