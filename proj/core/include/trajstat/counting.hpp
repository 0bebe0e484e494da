#pragma once

#include "trajstat/generators.hpp"

namespace trajstat {

struct CountResolvedState {
  double time = 0.0;
  std::vector<Mat> blocks;  // rho_k, k = 0..K_max, Schrodinger, unnormalized
  int K_max = 0;
  double tail_mass = 0.0;  // bound on the truncated-count weight
  double p(int k) const { return blocks[k].trace().real(); }
};

// Propagates the count-resolved block system
//   d rho_k/dt = L0 rho_k + J_c rho_{k-1},
// with L0 rho = -i(H_eff rho - rho H_eff^dag), by one matrix exponential of
// the (K_max+1)-block lower-bidiagonal superoperator.
CountResolvedState count_resolved_propagate(const LindbladModel& model,
                                            double tau, int K_max,
                                            const RVec& c = RVec(0));

// K_max selection: seeded from the stationary jump rate, doubled until the
// (possibly s-weighted) tail falls below 1e-8. Throws TailMassExceeded with a
// suggestion when the cap is hit.
int auto_K_max(const LindbladModel& model, double tau, const RVec& c = RVec(0),
               double s = 0.0);

// | sum_K e^{-sK} tr rho_K(tau) - Z_tau(s,c) |.
double generating_function_check(const LindbladModel& model, double s,
                                 const RVec& c, double tau);

// Density of the K-th jump at times T_grid: p_K(T) = tr[J_c rho_{K-1}(T)].
std::vector<double> jump_time_density(const LindbladModel& model, int K,
                                      const std::vector<double>& t_grid,
                                      const RVec& c = RVec(0));

// log p_K(T) at a single time, via one matrix exponential of the K-block
// system (blocks 0..K-1 feed the K-th jump intensity).
double log_jump_time_density(const LindbladModel& model, int K, double t,
                             const RVec& c = RVec(0));

struct ConcentrationReport {
  std::vector<int> K_list;
  std::vector<double> tau_list;   // tau_K = K * t(x,c)
  std::vector<double> log_ratio;  // exponent of the canonical/canonical overlap
  double slope_estimate = 0.0;    // last |log_ratio| / K
};

// Exponent sequence of the two-ensemble concentration identity at the dual
// pair x = theta(s,c), evaluated through computable densities.
ConcentrationReport concentration_report(const LindbladModel& model, double s,
                                         const RVec& c,
                                         const std::vector<int>& K_list,
                                         bool primitivity_waiver = false);

}  // namespace trajstat
