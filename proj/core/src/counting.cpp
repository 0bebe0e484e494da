#include "trajstat/counting.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "trajstat/errors.hpp"
#include "trajstat/thermo.hpp"

namespace trajstat {

namespace {

double tilt_weight(const JumpChannel& ch, const RVec& c) {
  if (c.size() == 0) return 1.0;
  return std::exp(-c.dot(ch.spin));
}

// Schrodinger no-jump part L0(rho) = -i(H_eff rho - rho H_eff^dag).
Mat no_jump_matrix(const Mat& h_eff) {
  const int d = static_cast<int>(h_eff.rows());
  const Mat id = Mat::Identity(d, d);
  return Cplx(0, -1) * (sandwich_matrix(h_eff, id) -
                        sandwich_matrix(id, h_eff.adjoint()));
}

// Schrodinger jump part J_c(rho) = Sum_i e^{-c.M(i)} L_i rho L_i^dag.
Mat jump_matrix_schr(const LindbladModel& model, const RVec& c) {
  const int d = model.dim();
  Mat j = Mat::Zero(d * d, d * d);
  for (const auto& ch : model.jumps())
    j += tilt_weight(ch, c) * sandwich_matrix(ch.op, ch.op.adjoint());
  return j;
}

// Lower-bidiagonal block generator on n_blocks count sectors.
Mat block_generator(const LindbladModel& model, int n_blocks, const RVec& c) {
  const int n = model.dim() * model.dim();
  const Mat l0 = no_jump_matrix(effective_hamiltonian(model).matrix);
  const Mat jc = jump_matrix_schr(model, c);
  Mat b = Mat::Zero(n_blocks * n, n_blocks * n);
  for (int k = 0; k < n_blocks; ++k) {
    b.block(k * n, k * n, n, n) = l0;
    if (k > 0) b.block(k * n, (k - 1) * n, n, n) = jc;
  }
  return b;
}

CVec initial_block_vector(const LindbladModel& model, int n_blocks) {
  const int n = model.dim() * model.dim();
  CVec v = CVec::Zero(n_blocks * n);
  v.head(n) = stack(model.initial_density());
  return v;
}

}  // namespace

CountResolvedState count_resolved_propagate(const LindbladModel& model,
                                            double tau, int K_max,
                                            const RVec& c) {
  if (tau < 0 || K_max < 0)
    throw DomainError("count_resolved_propagate requires tau >= 0, K_max >= 0");
  const int d = model.dim();
  const int n = d * d;
  const Mat b = block_generator(model, K_max + 1, c);
  const CVec v = superop_exp(b, tau) * initial_block_vector(model, K_max + 1);

  CountResolvedState state;
  state.time = tau;
  state.K_max = K_max;
  state.blocks.reserve(K_max + 1);
  double total = 0.0;
  for (int k = 0; k <= K_max; ++k) {
    state.blocks.push_back(unstack(v.segment(k * n, n), d));
    total += state.blocks.back().trace().real();
  }
  const double full = partition_tau(model, TiltPoint::s_tilt(0.0, c), tau);
  state.tail_mass = std::max(0.0, full - total);
  return state;
}

int auto_K_max(const LindbladModel& model, double tau, const RVec& c,
               double s) {
  double k0 = 0.0;
  try {
    k0 = intensive_quantities(model, TiltPoint::s_tilt(0.0, c)).rate;
  } catch (const DegenerateDominant&) {
    k0 = 1.0;  // fall back to doubling from a generic seed
  }
  int K_max = static_cast<int>(
      std::ceil(3.0 + 2.0 * k0 * tau + 6.0 * std::sqrt(std::max(0.0, k0 * tau))));
  constexpr int kCap = 512;
  while (K_max <= kCap) {
    const CountResolvedState st = count_resolved_propagate(model, tau, K_max, c);
    bool ok = st.tail_mass < 1e-8;
    if (ok && s < 0.0) {
      // Anti-dilute tilts weight large K up; demand the weighted last block
      // is already negligible.
      double weighted = std::exp(-s * K_max) * st.p(K_max);
      ok = weighted < 1e-12;
    }
    if (ok) return K_max;
    K_max *= 2;
  }
  throw TailMassExceeded("tail mass above 1e-8 at the K_max cap", kCap);
}

double generating_function_check(const LindbladModel& model, double s,
                                 const RVec& c, double tau) {
  const int K_max = auto_K_max(model, tau, c, s);
  const CountResolvedState st = count_resolved_propagate(model, tau, K_max, c);
  double sum = 0.0;
  for (int k = 0; k <= K_max; ++k) sum += std::exp(-s * k) * st.p(k);
  const double z = partition_tau(model, TiltPoint::s_tilt(s, c), tau);
  return std::abs(sum - z);
}

std::vector<double> jump_time_density(const LindbladModel& model, int K,
                                      const std::vector<double>& t_grid,
                                      const RVec& c) {
  if (K < 1) throw DomainError("jump_time_density requires K >= 1");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0 || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw DomainError("T grid must be nonnegative and increasing");
  }
  const int n = model.dim() * model.dim();
  const Mat b = block_generator(model, K, c);  // blocks 0..K-1
  const Mat jc = jump_matrix_schr(model, c);
  const CVec id_vec = stack(Mat::Identity(model.dim(), model.dim()));

  std::vector<double> density;
  density.reserve(t_grid.size());
  CVec v = initial_block_vector(model, K);
  double prev_t = 0.0;
  std::map<double, Mat> step_cache;
  for (double t : t_grid) {
    const double dt = t - prev_t;
    if (dt > 0) {
      auto it = step_cache.find(dt);
      if (it == step_cache.end())
        it = step_cache.emplace(dt, superop_exp(b, dt)).first;
      v = it->second * v;
    }
    prev_t = t;
    // p_K(T) = tr[J_c rho_{K-1}(T)]
    const CVec intensity = jc * v.tail(n);
    density.push_back(id_vec.dot(intensity).real());
  }
  return density;
}

double log_jump_time_density(const LindbladModel& model, int K, double t,
                             const RVec& c) {
  if (K < 1 || t < 0) throw DomainError("log_jump_time_density: K >= 1, t >= 0");
  const int n = model.dim() * model.dim();
  const Mat b = block_generator(model, K, c);
  const Mat jc = jump_matrix_schr(model, c);
  const CVec id_vec = stack(Mat::Identity(model.dim(), model.dim()));

  // Step-split propagation with rescaling so far-tail densities stay
  // representable in the log.
  const int steps = std::max(1, static_cast<int>(std::ceil(t / 5.0)));
  const double dt = t / steps;
  const Mat step = superop_exp(b, dt);
  CVec v = initial_block_vector(model, K);
  double log_scale = 0.0;
  for (int i = 0; i < steps; ++i) {
    v = step * v;
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    v /= m;
    log_scale += std::log(m);
  }
  const double p = id_vec.dot(jc * v.tail(n)).real();
  if (p <= 0) return -std::numeric_limits<double>::infinity();
  return log_scale + std::log(p);
}

ConcentrationReport concentration_report(const LindbladModel& model, double s,
                                         const RVec& c,
                                         const std::vector<int>& K_list,
                                         bool primitivity_waiver) {
  const TiltPoint s_tilt = TiltPoint::s_tilt(s, c);
  const TiltPoint x_tilt = dual_map(model, s_tilt, primitivity_waiver);
  const double x = x_tilt.field;
  const Intensives iv = intensive_quantities(model, x_tilt, primitivity_waiver);
  const double t_per_jump = iv.rate;

  ConcentrationReport rep;
  rep.K_list = K_list;
  for (int K : K_list) {
    const double tau_K = K * t_per_jump;
    // The microcanonical state is a delta distribution, so the overlap
    // carries the (c-tilted) density squared; one e^{-c.M} per factor gives
    // the e^{-2c.M} weight of the ratio.
    const double log_p = log_jump_time_density(model, K, tau_K, c);
    const double log_zk = log_partition_K(model, x_tilt, K);
    const double log_zt = log_partition_tau(model, s_tilt, tau_K);
    rep.tau_list.push_back(tau_K);
    rep.log_ratio.push_back(-s * K - x * tau_K + 2.0 * log_p - log_zk - log_zt);
  }
  if (!rep.log_ratio.empty())
    rep.slope_estimate =
        std::abs(rep.log_ratio.back()) / rep.K_list.back();
  return rep;
}

}  // namespace trajstat
