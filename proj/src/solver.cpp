#include "veds/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace veds {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Dense Cholesky solve of H x = -g with a diagonal ridge retry. H is small
// (dimension <= 1 + number of relays) and symmetric positive definite away
// from the boundary.
bool solve_spd(std::vector<double> h, std::vector<double> g, int n,
               std::vector<double>& step) {
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<double> l = h;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = l[i * n + j];
        for (int k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
        if (i == j) {
          if (sum <= 0.0 || !std::isfinite(sum)) {
            ok = false;
            break;
          }
          l[i * n + i] = std::sqrt(sum);
        } else {
          l[i * n + j] = sum / l[j * n + j];
        }
      }
    }
    if (ok) {
      step.assign(n, 0.0);
      for (int i = 0; i < n; ++i) {
        double sum = -g[i];
        for (int k = 0; k < i; ++k) sum -= l[i * n + k] * step[k];
        step[i] = sum / l[i * n + i];
      }
      for (int i = n - 1; i >= 0; --i) {
        double sum = step[i];
        for (int k = i + 1; k < n; ++k) sum -= l[k * n + i] * step[k];
        step[i] = sum / l[i * n + i];
      }
      return true;
    }
    double diag_max = 0.0;
    for (int i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(h[i * n + i]));
    const double ridge = std::max(1e-12, 1e-10 * diag_max) * std::pow(10.0, attempt);
    for (int i = 0; i < n; ++i) h[i * n + i] += ridge;
  }
  return false;
}

}  // namespace

double dt_objective(const DtSubproblem& sub, double p) {
  const double kappa = sub.params.slot_seconds;
  return sub.weight * kappa * rate_dt(p, sub.gain, sub.params) - kappa * sub.queue * p;
}

SolveResult solve_dt(const DtSubproblem& sub) {
  SolveResult res;
  res.powers.assign(1, 0.0);
  double p;
  if (sub.gain <= 0.0) {
    p = 0.0;
  } else if (sub.queue <= 0.0) {
    p = sub.weight > 0.0 ? sub.p_max : 0.0;
  } else {
    // Stationary point of weight*kappa*beta*log2(1 + p g/(beta N0)) - kappa q p.
    const double interior = sub.weight * sub.params.bandwidth_hz / (kLn2 * sub.queue) -
                            sub.params.noise_power() / sub.gain;
    p = std::clamp(interior, 0.0, sub.p_max);
    res.status = (p == interior) ? SolveStatus::Optimal : SolveStatus::Clamped;
  }
  if (sub.gain <= 0.0 || sub.queue <= 0.0) res.status = SolveStatus::Clamped;
  res.powers[0] = p;
  res.objective = dt_objective(sub, p);
  res.kkt_residual = 0.0;
  return res;
}

double cot_objective(const CotSubproblem& sub, const std::vector<double>& p) {
  const double kappa = sub.params.slot_seconds;
  const double noise = sub.params.noise_power();
  double snr = p[0] * sub.gain_mr / noise;
  double penalty = sub.queue_m * p[0];
  for (size_t i = 0; i < sub.relays.size(); ++i) {
    snr += p[i + 1] * sub.relays[i].gain_nr / noise;
    penalty += sub.relays[i].queue * p[i + 1];
  }
  const double rate = sub.params.bandwidth_hz * std::log1p(snr) / kLn2;
  return 0.5 * kappa * (sub.weight * rate - penalty);
}

bool cot_feasible(const CotSubproblem& sub, const std::vector<double>& p, double tol) {
  if (p.size() != sub.relays.size() + 1) return false;
  if (p[0] < -tol || p[0] > sub.p_max_m + tol) return false;
  const double noise = sub.params.noise_power();
  double uplink = p[0] * sub.gain_mr / noise;
  double c = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < sub.relays.size(); ++i) {
    if (p[i + 1] < -tol || p[i + 1] > sub.relays[i].p_max + tol) return false;
    uplink += p[i + 1] * sub.relays[i].gain_nr / noise;
    c = std::min(c, sub.relays[i].gain_mn / noise);
  }
  return uplink <= c * p[0] + tol * std::max(1.0, uplink);
}

SolveResult solve_cot(const CotSubproblem& sub, double tol) {
  if (sub.relays.empty()) throw std::invalid_argument("solve_cot: empty relay set");
  const int n_relay = static_cast<int>(sub.relays.size());
  const int dim = n_relay + 1;
  const double noise = sub.params.noise_power();
  const double a_big = sub.weight * 0.5 * sub.params.slot_seconds *
                       sub.params.bandwidth_hz / kLn2;

  std::vector<double> a(dim), b(dim), pmax(dim);
  a[0] = sub.gain_mr / noise;
  b[0] = 0.5 * sub.params.slot_seconds * sub.queue_m;
  pmax[0] = sub.p_max_m;
  double c = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_relay; ++i) {
    a[i + 1] = sub.relays[i].gain_nr / noise;
    b[i + 1] = 0.5 * sub.params.slot_seconds * sub.relays[i].queue;
    pmax[i + 1] = sub.relays[i].p_max;
    c = std::min(c, sub.relays[i].gain_mn / noise);
  }

  SolveResult res;
  res.powers.assign(dim, 0.0);

  // Decode geometry: uplink SNR <= c * p_m. Without c > a_m there is no
  // strictly feasible interior; relays with positive uplink gain collapse to
  // zero and only the SOV power (in the exactly-critical case) remains free.
  const double crit_tol = 1e-12 * std::max(1.0, a[0]);
  if (!(c > a[0] + crit_tol)) {
    if (std::abs(c - a[0]) <= crit_tol && a[0] > 0.0) {
      DtSubproblem dt{sub.weight, sub.gain_mr, sub.queue_m, sub.p_max_m, sub.params};
      dt.params.slot_seconds = 0.5 * sub.params.slot_seconds;
      const SolveResult inner = solve_dt(dt);
      res.powers[0] = inner.powers[0];
    }
    res.objective = cot_objective(sub, res.powers);
    res.status = SolveStatus::Clamped;
    return res;
  }

  // Strictly feasible start: mid-box SOV power, relay powers shrunk until the
  // decode slack stays positive.
  std::vector<double> p(dim);
  p[0] = 0.5 * pmax[0];
  const double slack0 = (c - a[0]) * p[0];
  double relay_load = 0.0;
  for (int i = 1; i < dim; ++i) relay_load += a[i] * 0.45 * pmax[i];
  const double shrink = relay_load > 0.5 * slack0 ? 0.5 * slack0 / relay_load : 1.0;
  for (int i = 1; i < dim; ++i) p[i] = 0.45 * pmax[i] * shrink;

  const auto h_val = [&](const std::vector<double>& q) {
    double v = (a[0] - c) * q[0];
    for (int i = 1; i < dim; ++i) v += a[i] * q[i];
    return v;
  };
  std::vector<double> w(dim);  // gradient of the decode constraint
  w[0] = a[0] - c;
  for (int i = 1; i < dim; ++i) w[i] = a[i];

  const auto barrier = [&](const std::vector<double>& q, double mu) {
    double s = 1.0;
    double lin = 0.0;
    double bar = 0.0;
    for (int i = 0; i < dim; ++i) {
      s += a[i] * q[i];
      lin += b[i] * q[i];
      bar += std::log(q[i]) + std::log(pmax[i] - q[i]);
    }
    bar += std::log(-h_val(q));
    return -(a_big * std::log(s) - lin) - mu * bar;
  };

  const int max_total_newton = 200;
  int newton_steps = 0;
  double grad_inf = 0.0;
  double mu = 1.0;
  const double mu_min = std::min(1e-10, tol * 1e-2);
  std::vector<double> grad(dim), hess(dim * dim), step(dim);

  while (true) {
    for (int inner = 0; inner < 60; ++inner) {
      double s = 1.0;
      for (int i = 0; i < dim; ++i) s += a[i] * p[i];
      const double hneg = -h_val(p);  // positive slack
      grad_inf = 0.0;
      for (int i = 0; i < dim; ++i) {
        grad[i] = -a_big * a[i] / s + b[i] - mu / p[i] + mu / (pmax[i] - p[i]) +
                  mu * w[i] / hneg;
        grad_inf = std::max(grad_inf, std::abs(grad[i]));
      }
      std::fill(hess.begin(), hess.end(), 0.0);
      const double curv = a_big / (s * s);
      const double hcurv = mu / (hneg * hneg);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          hess[i * dim + j] = curv * a[i] * a[j] + hcurv * w[i] * w[j];
        }
        hess[i * dim + i] +=
            mu / (p[i] * p[i]) + mu / ((pmax[i] - p[i]) * (pmax[i] - p[i]));
      }
      if (!solve_spd(hess, grad, dim, step)) break;

      double decrement = 0.0;
      for (int i = 0; i < dim; ++i) decrement -= grad[i] * step[i];
      if (decrement * 0.5 <= 1e-14 * std::max(1.0, std::abs(a_big))) break;

      // Fraction-to-boundary cap, then Armijo backtracking.
      double t = 1.0;
      for (int i = 0; i < dim; ++i) {
        if (step[i] < 0.0) t = std::min(t, -0.995 * p[i] / step[i]);
        if (step[i] > 0.0) t = std::min(t, 0.995 * (pmax[i] - p[i]) / step[i]);
      }
      double wdir = 0.0;
      for (int i = 0; i < dim; ++i) wdir += w[i] * step[i];
      if (wdir > 0.0) t = std::min(t, 0.995 * hneg / wdir);

      const double phi0 = barrier(p, mu);
      double slope = 0.0;
      for (int i = 0; i < dim; ++i) slope += grad[i] * step[i];
      std::vector<double> trial(dim);
      bool moved = false;
      for (int ls = 0; ls < 50; ++ls) {
        for (int i = 0; i < dim; ++i) trial[i] = p[i] + t * step[i];
        if (barrier(trial, mu) <= phi0 + 1e-4 * t * slope) {
          p = trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      ++newton_steps;
      if (!moved) break;
      if (newton_steps >= max_total_newton) {
        SolveResult best;
        best.powers = p;
        best.objective = cot_objective(sub, p);
        best.kkt_residual = grad_inf;
        best.status = SolveStatus::Infeasible;
        throw SolverIterationLimit("solve_cot: Newton iteration cap reached", best);
      }
    }
    if (mu <= mu_min) break;
    mu = std::max(mu / 10.0, mu_min);
  }

  // Relays that cannot contribute uplink SNR are parked at zero; the objective
  // is flat in them but the spent relay energy is not.
  for (int i = 1; i < dim; ++i) {
    if (a[i] <= 0.0) p[i] = 0.0;
  }

  res.powers = p;
  res.objective = cot_objective(sub, p);
  res.kkt_residual = std::max(grad_inf, mu);
  res.status = SolveStatus::Optimal;
  return res;
}

SolveResult grid_search_dt(const DtSubproblem& sub, double step) {
  SolveResult res;
  res.powers.assign(1, 0.0);
  double best_p = 0.0;
  double best_y = dt_objective(sub, 0.0);
  const auto consider = [&](double p) {
    const double y = dt_objective(sub, p);
    if (y > best_y) {
      best_y = y;
      best_p = p;
    }
  };
  for (double p = step; p < sub.p_max; p += step) consider(p);
  consider(sub.p_max);
  res.powers[0] = best_p;
  res.objective = best_y;
  return res;
}

SolveResult grid_search_cot(const CotSubproblem& sub, double step, int refine_levels) {
  const int dim = static_cast<int>(sub.relays.size()) + 1;
  if (dim > 3) throw std::invalid_argument("grid_search_cot: supports <= 2 relays");

  std::vector<double> pmax(dim);
  pmax[0] = sub.p_max_m;
  for (size_t i = 0; i < sub.relays.size(); ++i) pmax[i + 1] = sub.relays[i].p_max;

  std::vector<double> best(dim, 0.0);
  double best_y = cot_objective(sub, best);

  std::vector<double> lo(dim, 0.0);
  std::vector<double> hi = pmax;
  double h = step;
  for (int level = 0; level <= refine_levels; ++level) {
    std::vector<std::vector<double>> axes(dim);
    for (int i = 0; i < dim; ++i) {
      for (double v = lo[i]; v < hi[i]; v += h) axes[i].push_back(v);
      axes[i].push_back(hi[i]);
    }
    std::vector<double> p(dim, 0.0);
    const std::function<void(int)> scan = [&](int d) {
      if (d == dim) {
        if (!cot_feasible(sub, p, 1e-12)) return;
        const double y = cot_objective(sub, p);
        if (y > best_y) {
          best_y = y;
          best = p;
        }
        return;
      }
      for (const double v : axes[d]) {
        p[d] = v;
        scan(d + 1);
      }
    };
    scan(0);
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::max(0.0, best[i] - h);
      hi[i] = std::min(pmax[i], best[i] + h);
    }
    h /= 10.0;
  }

  SolveResult res;
  res.powers = best;
  res.objective = best_y;
  return res;
}

SlotSolution brute_force_slot(const SlotProblem& problem, double power_grid_step) {
  const size_t n_sov = problem.sov_ids.size();
  const size_t n_opv = problem.opv_ids.size();
  if (n_sov > 4 || n_opv > 8) {
    throw std::invalid_argument("brute_force_slot: instance too large for the oracle");
  }

  SlotSolution best;  // empty decision, objective 0
  for (size_t si = 0; si < n_sov; ++si) {
    DtSubproblem dt{problem.sov_weight[si], problem.sov_gain[si],
                    problem.sov_queue[si], problem.sov_pmax[si], problem.params};
    SolveResult r = grid_search_dt(dt, power_grid_step);
    {
      // Two refinement passes around the 1-D incumbent.
      double h = power_grid_step;
      for (int level = 0; level < 2; ++level) {
        const double lo = std::max(0.0, r.powers[0] - h);
        const double hi = std::min(dt.p_max, r.powers[0] + h);
        h /= 10.0;
        for (double p = lo; p <= hi + 1e-15; p += h) {
          const double y = dt_objective(dt, std::min(p, dt.p_max));
          if (y > r.objective) {
            r.objective = y;
            r.powers[0] = std::min(p, dt.p_max);
          }
        }
      }
    }
    if (r.objective > best.objective) {
      best.objective = r.objective;
      best.decision = SlotDecision{problem.sov_ids[si], TxMode::Dt, {}, {}};
      best.decision.powers[problem.sov_ids[si]] = r.powers[0];
    }

    for (unsigned mask = 1; mask < (1u << n_opv); ++mask) {
      CotSubproblem cot;
      cot.weight = problem.sov_weight[si];
      cot.gain_mr = problem.sov_gain[si];
      cot.queue_m = problem.sov_queue[si];
      cot.p_max_m = problem.sov_pmax[si];
      cot.params = problem.params;
      std::vector<int> members;
      for (size_t oi = 0; oi < n_opv; ++oi) {
        if (mask & (1u << oi)) {
          cot.relays.push_back({problem.opv_gain[oi], problem.v2v_gain[si][oi],
                                problem.opv_queue[oi], problem.opv_pmax[oi]});
          members.push_back(static_cast<int>(oi));
        }
      }
      SolveResult cr = cot.relays.size() <= 2
                           ? grid_search_cot(cot, std::max(power_grid_step, 1e-3))
                           : solve_cot(cot);
      if (cr.objective > best.objective) {
        best.objective = cr.objective;
        SlotDecision d{problem.sov_ids[si], TxMode::Cot, {}, {}};
        d.powers[problem.sov_ids[si]] = cr.powers[0];
        for (size_t k = 0; k < members.size(); ++k) {
          d.relays.push_back(problem.opv_ids[members[k]]);
          d.powers[problem.opv_ids[members[k]]] = cr.powers[k + 1];
        }
        best.decision = std::move(d);
      }
    }
  }
  return best;
}

namespace {

struct OfflineChoice {
  int sov = -1;  // -1 = idle
  TxMode mode = TxMode::Dt;
  std::vector<int> relay_idx;  // indices into slot.opv_ids
  double level = 0.0;
  double bits = 0.0;
  std::map<int, double> energy;  // vehicle id -> joules
};

}  // namespace

OfflineResult offline_optimal(const TinyInstance& instance) {
  const int total = static_cast<int>(instance.slots.size());
  if (total > 6) throw std::invalid_argument("offline_optimal: T too large");
  const double q_bits = instance.params.model_bits;
  const double kappa = instance.params.kappa;

  // Enumerate the per-slot choice sets up front.
  std::vector<std::vector<OfflineChoice>> choices(total);
  std::vector<std::vector<double>> zmax(total);
  for (int t = 0; t < total; ++t) {
    const SlotProblem& slot = instance.slots[t];
    const size_t n_sov = slot.sov_ids.size();
    const size_t n_opv = slot.opv_ids.size();
    if (n_sov > 2 || n_opv > 2) {
      throw std::invalid_argument("offline_optimal: instance too large");
    }
    zmax[t].assign(n_sov, 0.0);
    choices[t].push_back({});  // idle
    for (size_t si = 0; si < n_sov; ++si) {
      const int m = slot.sov_ids[si];
      const double elapsed = (static_cast<double>(t + 1) - 1.0) * kappa;
      const auto done_it = instance.compute_done.find(m);
      if (done_it != instance.compute_done.end() && done_it->second > elapsed) continue;
      for (const double level : instance.power_levels) {
        if (level > slot.sov_pmax[si] + 1e-12) continue;
        OfflineChoice dt;
        dt.sov = m;
        dt.mode = TxMode::Dt;
        dt.level = level;
        dt.bits = kappa * rate_dt(level, slot.sov_gain[si], slot.params);
        dt.energy[m] = kappa * level;
        zmax[t][si] = std::max(zmax[t][si], dt.bits);
        choices[t].push_back(std::move(dt));

        // Prefixes of OPVs in descending V2V-gain order.
        std::vector<int> order(n_opv);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int x, int y) {
          if (slot.v2v_gain[si][x] != slot.v2v_gain[si][y]) {
            return slot.v2v_gain[si][x] > slot.v2v_gain[si][y];
          }
          return x < y;
        });
        for (size_t len = 1; len <= n_opv; ++len) {
          bool level_ok = true;
          std::vector<std::pair<double, double>> relay_terms;
          double min_v2v = std::numeric_limits<double>::infinity();
          for (size_t k = 0; k < len; ++k) {
            const int oi = order[k];
            if (level > slot.opv_pmax[oi] + 1e-12) level_ok = false;
            relay_terms.emplace_back(level, slot.opv_gain[oi]);
            min_v2v = std::min(min_v2v, slot.v2v_gain[si][oi]);
          }
          if (!level_ok) continue;
          const double r_cot =
              rate_cot(level, slot.sov_gain[si], relay_terms, slot.params);
          const double r_v2v = rate_v2v(level, min_v2v, slot.params);
          if (r_cot > r_v2v + 1e-9) continue;  // relays cannot decode
          OfflineChoice cot;
          cot.sov = m;
          cot.mode = TxMode::Cot;
          cot.level = level;
          for (size_t k = 0; k < len; ++k) cot.relay_idx.push_back(order[k]);
          cot.bits = 0.5 * kappa * r_cot;
          cot.energy[m] = 0.5 * kappa * level;
          for (size_t k = 0; k < len; ++k) {
            cot.energy[slot.opv_ids[order[k]]] = 0.5 * kappa * level;
          }
          zmax[t][si] = std::max(zmax[t][si], cot.bits);
          choices[t].push_back(std::move(cot));
        }
      }
    }
  }

  // Suffix bound on deliverable bits, for branch-and-bound pruning.
  std::map<int, std::vector<double>> suffix;  // sov id -> per-slot cumulative-max
  for (int t = 0; t < total; ++t) {
    for (size_t si = 0; si < instance.slots[t].sov_ids.size(); ++si) {
      auto& vec = suffix[instance.slots[t].sov_ids[si]];
      if (vec.empty()) vec.assign(total + 1, 0.0);
    }
  }
  for (auto& [m, vec] : suffix) {
    for (int t = total - 1; t >= 0; --t) {
      double z = 0.0;
      const auto& ids = instance.slots[t].sov_ids;
      const auto it = std::find(ids.begin(), ids.end(), m);
      if (it != ids.end()) z = zmax[t][static_cast<size_t>(it - ids.begin())];
      vec[t] = vec[t + 1] + z;
    }
  }

  std::map<int, double> cum_bits;
  for (const auto& [m, vec] : suffix) cum_bits[m] = 0.0;
  std::map<int, double> spend;  // communications energy so far
  std::map<int, double> limit;  // per-vehicle communications budget
  for (const auto& [id, e] : instance.budgets) {
    double cap = e;
    const auto it = instance.compute_energy.find(id);
    if (it != instance.compute_energy.end()) cap -= it->second;
    limit[id] = cap;
    spend[id] = 0.0;
  }

  OfflineResult best;
  best.sigma_sum = -std::numeric_limits<double>::infinity();
  std::vector<int> path(total, 0), best_path(total, 0);

  const std::function<void(int)> dfs = [&](int t) {
    if (t == total) {
      double value = 0.0;
      for (const auto& [m, bits] : cum_bits) {
        value += sigma(bits, instance.params.alpha, q_bits);
      }
      if (value > best.sigma_sum + 1e-15) {
        best.sigma_sum = value;
        best_path = path;
      }
      return;
    }
    double bound = 0.0;
    for (const auto& [m, bits] : cum_bits) {
      bound += sigma(bits + suffix.at(m)[t], instance.params.alpha, q_bits);
    }
    if (bound <= best.sigma_sum + 1e-15) return;

    for (size_t ci = 0; ci < choices[t].size(); ++ci) {
      const OfflineChoice& ch = choices[t][ci];
      if (ch.sov >= 0) {
        if (cum_bits.at(ch.sov) >= q_bits) continue;  // finished uploads stop
        bool affordable = true;
        for (const auto& [id, e] : ch.energy) {
          const auto lim = limit.find(id);
          if (lim != limit.end() && spend.at(id) + e > lim->second + 1e-12) {
            affordable = false;
            break;
          }
        }
        if (!affordable) continue;
      }
      path[t] = static_cast<int>(ci);
      if (ch.sov >= 0) {
        cum_bits.at(ch.sov) += ch.bits;
        for (const auto& [id, e] : ch.energy) spend[id] += e;
      }
      dfs(t + 1);
      if (ch.sov >= 0) {
        cum_bits.at(ch.sov) -= ch.bits;
        for (const auto& [id, e] : ch.energy) spend[id] -= e;
      }
    }
  };
  dfs(0);

  // Materialize the winning plan.
  best.bits.assign(total, {});
  for (auto& [id, e] : spend) e = 0.0;
  for (int t = 0; t < total; ++t) {
    const OfflineChoice& ch = choices[t][static_cast<size_t>(best_path[t])];
    if (ch.sov >= 0) {
      best.bits[t][ch.sov] = ch.bits;
      for (const auto& [id, e] : ch.energy) spend[id] += e;
    }
  }
  best.energy = spend;
  if (!std::isfinite(best.sigma_sum)) {
    best.sigma_sum = 0.0;
    for (const auto& [m, bits] : cum_bits) {
      best.sigma_sum += sigma(0.0, instance.params.alpha, q_bits);
    }
  }
  return best;
}

}  // namespace veds
