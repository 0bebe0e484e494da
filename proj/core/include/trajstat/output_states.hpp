#pragma once

#include <map>
#include <utility>

#include "trajstat/generators.hpp"
#include "trajstat/trajectories.hpp"

namespace trajstat {

struct GramMatrix {
  Mat entries;     // d^2 x d^2, rows indexed (m,m') as m*d + m'
  Mat bond_basis;  // orthonormal columns spanning the waiting-time vectors
  int rank = 0;    // effective bond dimension, <= d^2
};

// Closed-form Gram matrix of the waiting-time representation; requires a
// strictly stable H_eff (x_min < 0).
GramMatrix gram_matrix(const LindbladModel& model);

// <MPS^can_{K;x,c} | MPS^can_{K;x',c'}>, reduced to finite superoperator
// algebra through the midpoint tilt.
Cplx canonical_overlap(const LindbladModel& model, int K, const TiltPoint& a,
                       const TiltPoint& b);

// One quadrature trajectory on [0, tau0]: N ordered jump times + channels.
struct QuadTrajectory {
  std::vector<double> times;
  std::vector<int> channels;
  double weight = 1.0;
};

// Gauss-Legendre discretization of the ordered jump-time simplex for layer N.
std::vector<QuadTrajectory> layer_grid(const LindbladModel& model, double tau0,
                                       int n_jumps, int nodes_per_dim);

struct EnsembleSpec {
  enum class Kind { SEnsemble, XEnsemble };
  Kind kind = Kind::SEnsemble;
  double tau = 0.0;  // total time (s-ensemble)
  int K = 0;         // total jump count (x-ensemble)
  Cplx field;        // s or x; complex values back the imaginary-shift checks
  RVec c;

  static EnsembleSpec s_ensemble(double tau, Cplx s, RVec c = RVec(0)) {
    return {Kind::SEnsemble, tau, 0, s, std::move(c)};
  }
  static EnsembleSpec x_ensemble(int K, Cplx x, RVec c = RVec(0)) {
    return {Kind::XEnsemble, 0.0, K, x, std::move(c)};
  }
};

struct LayerBlock {
  int N = 0;
  int N_prime = 0;
  // Weight-embedded element matrix: block(a,b) = sqrt(w_a w_b) * element, so
  // the trace of a diagonal block is the quadrature layer probability.
  Mat block;
};

// Reduced output state on [0, tau0], element matrix between the quadrature
// grids of layers N and N'. For the x-ensemble and N != N' the result is the
// exact zero matrix (Fock-layer superselection), by construction.
LayerBlock reduced_block_finite(const LindbladModel& model,
                                const EnsembleSpec& spec, double tau0, int N,
                                int N_prime, int nodes_per_dim);

struct LimitState {
  double s = 0.0;
  RVec c;
  double tau0 = 0.0;
  int N_max = 0;
  double theta = 0.0;
  // Blocks (N, N') for |N - N'| <= N_max; the x-ensemble limit is the
  // diagonal part of the same object.
  std::map<std::pair<int, int>, Mat> blocks;
};

LimitState limit_state(const LindbladModel& model, double s, const RVec& c,
                       double tau0, int N_max, int nodes_per_dim,
                       bool primitivity_waiver = false);

// The same limit reached from the x-ensemble side: diagonal blocks built from
// the dominant eigendata of T_{x,c}. At dual tilts x = theta(s,c) this equals
// the diagonal part of limit_state.
LimitState limit_state_dual(const LindbladModel& model, double x, const RVec& c,
                            double tau0, int N_max, int nodes_per_dim,
                            bool primitivity_waiver = false);

// Frobenius distance between two weight-embedded blocks on the common grid.
double block_distance(const Mat& a, const Mat& b);

struct PhaseCheckReport {
  PhaseKind kind = PhaseKind::P1;
  double phi = 0.0;
  // Ensemble expected invariant under the transform: max abs deviation.
  double invariant_deviation = 0.0;
  // Ensemble expected to pick up layer/time phases: max abs deviation from
  // the predicted phase factor.
  double phase_law_deviation = 0.0;
  // Deviation of the imaginary-shift reinterpretation (s -> s - 2i phi or
  // x -> x - 2i phi) recomputed directly.
  double imaginary_shift_deviation = 0.0;
};

struct PhaseCheckContext {
  double tau = 5.0;
  double tau0 = 1.0;
  int K = 4;
  double s = 0.3;
  RVec c;
  int N_max = 1;
  int nodes_per_dim = 6;
  std::uint64_t seed = 17;
  int n_pairs = 100;  // sampled trajectory pairs for the P2 amplitude law
};

PhaseCheckReport phase_covariance_check(const LindbladModel& model,
                                        PhaseKind kind, double phi,
                                        const PhaseCheckContext& ctx);

}  // namespace trajstat
