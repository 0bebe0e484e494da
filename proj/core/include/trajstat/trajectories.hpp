#pragma once

#include <cstdint>
#include <random>

#include "trajstat/generators.hpp"

namespace trajstat {

struct JumpRecord {
  double time = 0.0;
  int channel = 0;  // 0-based index into model.jumps()
};

struct Trajectory {
  enum class Scheme { FixedCount, FixedTime };
  std::vector<JumpRecord> jumps;
  Scheme scheme = Scheme::FixedTime;
  double tau = 0.0;  // fixed_time truncation
  int K = 0;         // fixed_count truncation

  double final_jump_time() const {
    return jumps.empty() ? 0.0 : jumps.back().time;
  }
  int count() const { return static_cast<int>(jumps.size()); }
  RVec spin_total(const LindbladModel& model) const;
};

// Waiting-time sampler backed by the eigendecomposition of H_eff: the
// survival S_psi(t) = |exp(-it H_eff) psi|^2 is evaluated analytically and
// inverted by bracketing + bisection.
class WaitingTimeSampler {
 public:
  explicit WaitingTimeSampler(const LindbladModel& model);

  struct Draw {
    double t_w;
    int channel;
    CVec post_state;  // normalized
  };

  // Throws DarkState when the uniform draw lands below the survival floor
  // S_inf (no further jump ever occurs).
  Draw sample(const CVec& psi, std::mt19937_64& rng) const;

  double survival(const CVec& psi, double t) const;
  double survival_floor(const CVec& psi) const;
  CVec evolve(const CVec& psi, double t) const;  // exp(-it H_eff) psi
  double waiting_density(const CVec& psi, double t) const;

 private:
  const LindbladModel& model_;
  Mat h_eff_;
  Mat vecs_, vecs_inv_;
  CVec evals_;
  double slowest_decay_;  // min_j -2 Im lambda_j over damped modes
};

struct SampleBatch {
  std::vector<Trajectory> trajectories;
  std::uint64_t seed = 0;
  std::uint64_t model_hash = 0;
};

// Deterministic per-trajectory RNG sub-streams derived from (seed, index);
// batch content is invariant under worker count.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index);

SampleBatch sample_fixed_count(const LindbladModel& model, int K, int n_samples,
                               std::uint64_t seed);
SampleBatch sample_fixed_time(const LindbladModel& model, double tau,
                              int n_samples, std::uint64_t seed);

// Index-range variants for data-parallel drivers: the trajectory at index i
// depends only on (seed, i), so any partition of [0, n) concatenates to the
// full-batch result.
SampleBatch sample_fixed_count_range(const LindbladModel& model, int K,
                                     int index_lo, int index_hi,
                                     std::uint64_t seed);
SampleBatch sample_fixed_time_range(const LindbladModel& model, double tau,
                                    int index_lo, int index_hi,
                                    std::uint64_t seed);

// log |J[X] psi|^2 (fixed_count) or log |V^tau[X] psi|^2 (fixed_time).
double trajectory_log_density(const LindbladModel& model, const Trajectory& x);

// tr[rho J[X']^dag J[X]] for fixed-count records; the x-ensemble density
// matrix element up to the partition-function normalization.
Cplx trajectory_amplitude(const LindbladModel& model, const Trajectory& x,
                          const Trajectory& x_prime);

struct EquivalencePoint {
  double tau = 0.0;
  int K_shell = 0;
  double exponent = 0.0;      // (1/tau) log canonical/microcanonical ratio
  double exponent_mc = 0.0;   // Monte Carlo estimate of the same quantity
  double std_error = 0.0;
  double acceptance = 0.0;    // conditioning acceptance rate
};

std::vector<EquivalencePoint> classical_equivalence_check(
    const LindbladModel& model, double s, const std::vector<double>& tau_list,
    int n_samples, std::uint64_t seed, bool primitivity_waiver = false);

}  // namespace trajstat
