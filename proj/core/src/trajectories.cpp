#include "trajstat/trajectories.hpp"

#include <cfenv>
#include <cmath>
#include <limits>

#include "trajstat/counting.hpp"
#include "trajstat/errors.hpp"
#include "trajstat/thermo.hpp"

namespace trajstat {

RVec Trajectory::spin_total(const LindbladModel& model) const {
  RVec m = RVec::Zero(model.spin_dim());
  for (const auto& j : jumps) m += model.jumps()[j.channel].spin;
  return m;
}

WaitingTimeSampler::WaitingTimeSampler(const LindbladModel& model)
    : model_(model) {
  h_eff_ = effective_hamiltonian(model).matrix;
  Eigen::ComplexEigenSolver<Mat> es(h_eff_);
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("H_eff eigendecomposition failed");
  evals_ = es.eigenvalues();
  vecs_ = es.eigenvectors();
  vecs_inv_ = vecs_.inverse();
  slowest_decay_ = std::numeric_limits<double>::infinity();
  for (int j = 0; j < evals_.size(); ++j) {
    const double rate = -2.0 * evals_(j).imag();
    if (rate > 1e-12) slowest_decay_ = std::min(slowest_decay_, rate);
  }
}

CVec WaitingTimeSampler::evolve(const CVec& psi, double t) const {
  CVec coef = vecs_inv_ * psi;
  for (int j = 0; j < coef.size(); ++j)
    coef(j) *= std::exp(Cplx(0, -1) * evals_(j) * t);
  return vecs_ * coef;
}

double WaitingTimeSampler::survival(const CVec& psi, double t) const {
  return evolve(psi, t).squaredNorm();
}

double WaitingTimeSampler::survival_floor(const CVec& psi) const {
  // Contributions from undamped modes persist; cross terms with damped modes
  // vanish at infinity.
  CVec coef = vecs_inv_ * psi;
  CVec undamped = CVec::Zero(psi.size());
  bool any = false;
  for (int j = 0; j < coef.size(); ++j) {
    if (-2.0 * evals_(j).imag() <= 1e-12) {
      undamped += coef(j) * vecs_.col(j);
      any = true;
    }
  }
  return any ? undamped.squaredNorm() : 0.0;
}

double WaitingTimeSampler::waiting_density(const CVec& psi, double t) const {
  const CVec phi = evolve(psi, t);
  double p = 0.0;
  for (const auto& ch : model_.jumps()) p += (ch.op * phi).squaredNorm();
  return p;
}

WaitingTimeSampler::Draw WaitingTimeSampler::sample(const CVec& psi,
                                                    std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const double floor = survival_floor(psi);
  if (u < floor + 1e-14)
    throw DarkState("no further jump occurs from this conditional state");

  // Bracket S(t_hi) <= u, then bisect S(t) = u.
  double t_lo = 0.0;
  double t_hi = std::isfinite(slowest_decay_) ? 2.0 / slowest_decay_ : 1.0;
  int guard = 0;
  while (survival(psi, t_hi) > u) {
    t_hi *= 2.0;
    if (++guard > 200)
      throw DarkState("survival never crosses the uniform draw");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    const double s_mid = survival(psi, mid);
    if (std::abs(s_mid - u) < 1e-13 && t_hi - t_lo < 1e-10) {
      t_lo = t_hi = mid;
      break;
    }
    if (s_mid > u)
      t_lo = mid;
    else
      t_hi = mid;
    if (t_hi - t_lo < 1e-12 * std::max(1.0, t_hi)) break;
  }
  Draw draw;
  draw.t_w = 0.5 * (t_lo + t_hi);

  const CVec phi = evolve(psi, draw.t_w);
  std::vector<double> weights;
  double total = 0.0;
  for (const auto& ch : model_.jumps()) {
    weights.push_back((ch.op * phi).squaredNorm());
    total += weights.back();
  }
  if (total <= 0)
    throw DarkState("zero jump intensity at the sampled waiting time");
  double pick = unif(rng) * total;
  int channel = 0;
  for (; channel + 1 < static_cast<int>(weights.size()); ++channel) {
    if (pick < weights[channel]) break;
    pick -= weights[channel];
  }
  draw.channel = channel;
  CVec post = model_.jumps()[channel].op * phi;
  draw.post_state = post / post.norm();
  return draw;
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over (seed, index); decorrelates neighbouring streams.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  auto mix = [](std::uint64_t v) {
    v ^= v >> 30;
    v *= 0xbf58476d1ce4e5b9ull;
    v ^= v >> 27;
    v *= 0x94d049bb133111ebull;
    v ^= v >> 31;
    return v;
  };
  return std::mt19937_64(mix(mix(z)));
}

SampleBatch sample_fixed_count_range(const LindbladModel& model, int K,
                                     int index_lo, int index_hi,
                                     std::uint64_t seed) {
  if (K < 0 || index_lo < 0 || index_hi < index_lo)
    throw DomainError("sample_fixed_count: K >= 0 and a valid index range");
  const WaitingTimeSampler sampler(model);
  SampleBatch batch;
  batch.seed = seed;
  batch.model_hash = model.hash();
  batch.trajectories.reserve(index_hi - index_lo);
  for (int i = index_lo; i < index_hi; ++i) {
    std::mt19937_64 rng = substream(seed, static_cast<std::uint64_t>(i));
    Trajectory traj;
    traj.scheme = Trajectory::Scheme::FixedCount;
    traj.K = K;
    int rejections = 0;
    while (true) {
      traj.jumps.clear();
      CVec psi = model.initial_state();
      double t = 0.0;
      try {
        for (int k = 0; k < K; ++k) {
          auto draw = sampler.sample(psi, rng);
          t += draw.t_w;
          traj.jumps.push_back({t, draw.channel});
          psi = draw.post_state;
        }
        break;
      } catch (const DarkState&) {
        if (++rejections > 10000)
          throw DarkState(
              "fixed-count sampling rejected 10^4 dark realizations; "
              "model is not ergodic enough for this scheme");
      }
    }
    batch.trajectories.push_back(std::move(traj));
  }
  return batch;
}

SampleBatch sample_fixed_count(const LindbladModel& model, int K,
                               int n_samples, std::uint64_t seed) {
  return sample_fixed_count_range(model, K, 0, n_samples, seed);
}

SampleBatch sample_fixed_time_range(const LindbladModel& model, double tau,
                                    int index_lo, int index_hi,
                                    std::uint64_t seed) {
  if (tau < 0 || index_lo < 0 || index_hi < index_lo)
    throw DomainError("sample_fixed_time: tau >= 0 and a valid index range");
  const WaitingTimeSampler sampler(model);
  SampleBatch batch;
  batch.seed = seed;
  batch.model_hash = model.hash();
  batch.trajectories.reserve(index_hi - index_lo);
  for (int i = index_lo; i < index_hi; ++i) {
    std::mt19937_64 rng = substream(seed, static_cast<std::uint64_t>(i));
    Trajectory traj;
    traj.scheme = Trajectory::Scheme::FixedTime;
    traj.tau = tau;
    CVec psi = model.initial_state();
    double t = 0.0;
    while (true) {
      WaitingTimeSampler::Draw draw;
      try {
        draw = sampler.sample(psi, rng);
      } catch (const DarkState&) {
        break;
      }
      if (t + draw.t_w > tau) break;
      t += draw.t_w;
      traj.jumps.push_back({t, draw.channel});
      psi = draw.post_state;
    }
    batch.trajectories.push_back(std::move(traj));
  }
  return batch;
}

SampleBatch sample_fixed_time(const LindbladModel& model, double tau,
                              int n_samples, std::uint64_t seed) {
  return sample_fixed_time_range(model, tau, 0, n_samples, seed);
}

namespace {

// Sequential propagation of |J[X] psi| with log rescaling.
std::pair<double, CVec> propagate_log(const LindbladModel& model,
                                      const WaitingTimeSampler& sampler,
                                      const Trajectory& x) {
  CVec psi = model.initial_state();
  double log_norm2 = 0.0;
  double prev = 0.0;
  for (const auto& j : x.jumps) {
    psi = model.jumps()[j.channel].op * sampler.evolve(psi, j.time - prev);
    prev = j.time;
    const double n = psi.norm();
    if (n == 0.0)
      return {-std::numeric_limits<double>::infinity(), CVec::Zero(psi.size())};
    psi /= n;
    log_norm2 += 2.0 * std::log(n);
  }
  return {log_norm2, psi};
}

}  // namespace

double trajectory_log_density(const LindbladModel& model, const Trajectory& x) {
  const WaitingTimeSampler sampler(model);
  auto [log_norm2, psi] = propagate_log(model, sampler, x);
  if (!std::isfinite(log_norm2)) return log_norm2;
  if (x.scheme == Trajectory::Scheme::FixedTime) {
    const double remaining = x.tau - x.final_jump_time();
    const CVec tail = sampler.evolve(psi, remaining);
    const double n2 = tail.squaredNorm();
    if (n2 == 0.0) return -std::numeric_limits<double>::infinity();
    log_norm2 += std::log(n2);
  }
  return log_norm2;
}

Cplx trajectory_amplitude(const LindbladModel& model, const Trajectory& x,
                          const Trajectory& x_prime) {
  const WaitingTimeSampler sampler(model);
  auto [la, va] = propagate_log(model, sampler, x);
  auto [lb, vb] = propagate_log(model, sampler, x_prime);
  if (!std::isfinite(la) || !std::isfinite(lb)) return Cplx(0, 0);
  return std::exp(0.5 * (la + lb)) * vb.dot(va);
}

std::vector<EquivalencePoint> classical_equivalence_check(
    const LindbladModel& model, double s, const std::vector<double>& tau_list,
    int n_samples, std::uint64_t seed, bool primitivity_waiver) {
  const double k_s =
      intensive_quantities(model, TiltPoint::s_tilt(s, RVec(0)),
                           primitivity_waiver)
          .rate;
  std::vector<EquivalencePoint> out;
  for (double tau : tau_list) {
    EquivalencePoint pt;
    pt.tau = tau;
    // Round half to even for the integer shell K = tau * k(s).
    pt.K_shell = static_cast<int>(std::nearbyint(tau * k_s));

    // Deterministic route through the counting module.
    const int K_max = std::max(auto_K_max(model, tau), pt.K_shell + 1);
    const CountResolvedState st = count_resolved_propagate(model, tau, K_max);
    const double log_p_shell = std::log(st.p(pt.K_shell));
    const double log_z =
        log_partition_tau(model, TiltPoint::s_tilt(s, RVec(0)), tau);
    pt.exponent = (-s * pt.K_shell + log_p_shell - log_z) / tau;

    // Monte Carlo route: rejection onto the shell plus exact reweighting.
    const SampleBatch batch = sample_fixed_time(model, tau, n_samples, seed);
    double accepted = 0.0, zhat = 0.0, z2 = 0.0;
    for (const auto& traj : batch.trajectories) {
      if (traj.count() == pt.K_shell) accepted += 1.0;
      const double w = std::exp(-s * traj.count());
      zhat += w;
      z2 += w * w;
    }
    const double n = static_cast<double>(n_samples);
    pt.acceptance = accepted / n;
    if (pt.acceptance < 1e-4)
      throw InsufficientAcceptance(
          "conditioning acceptance rate below 1e-4 at tau = " +
          std::to_string(tau));
    zhat /= n;
    const double z_var = std::max(0.0, z2 / n - zhat * zhat);
    pt.exponent_mc =
        (-s * pt.K_shell + std::log(pt.acceptance) - std::log(zhat)) / tau;
    const double se_log_acc =
        std::sqrt((1.0 - pt.acceptance) / (pt.acceptance * n));
    const double se_log_z = std::sqrt(z_var / n) / zhat;
    pt.std_error =
        std::sqrt(se_log_acc * se_log_acc + se_log_z * se_log_z) / tau;
    out.push_back(pt);
  }
  return out;
}

}  // namespace trajstat
