#pragma once

#include <optional>

#include "trajstat/generators.hpp"

namespace trajstat {

// Structure of a renewal process: every jump resets to the same state,
// L_i = |0><phi_i|.
struct RenewalStructure {
  CVec reset_state;               // |0>, unit norm
  std::vector<CVec> phi_vectors;  // phi_i, so that L_i = |0><phi_i|
  Mat D;                          // Sum_i |phi_i><phi_i| = i(H_eff - H_eff^dag)
};

// Rank-1 test on each jump (second singular value < 1e-10 * first) plus the
// common-left-vector test up to phase. Borderline models fall back to the
// generic path (nullopt).
std::optional<RenewalStructure> detect_renewal(const LindbladModel& model);

struct RenewalPotential {
  double g = 0.0;  // log <0|(x Id + R)^{-1}(D)|0>
  Mat f_x;         // (x Id + R)^{-1}(D) e^{-g}
  Mat rho_x;       // |0><0|
};

// Closed-form dominant eigendata of T_x for a renewal model. Requires
// x > x_min.
RenewalPotential analytic_potential(const LindbladModel& model,
                                    const RenewalStructure& structure,
                                    double x);

struct RenewalCheckReport {
  double collapse_residual = 0.0;    // |T_x^2 - e^g T_x| / |e^g T_x|
  double partition_residual = 0.0;   // relative |Z_K(x) - e^{K g(x)}|
  double lag1_correlation = 0.0;     // Pearson r of consecutive waiting times
  double lag1_std_error = 0.0;       // 1/sqrt(n)
  int n_waiting_times = 0;
};

// Product-form facts: T_x collapse, exact Z_K for psi = |0>, and i.i.d.
// waiting times sampled from the reset state.
RenewalCheckReport renewal_product_checks(const LindbladModel& model,
                                          const RenewalStructure& structure,
                                          int K, double x,
                                          int n_samples = 100000,
                                          std::uint64_t seed = 1);

}  // namespace trajstat
