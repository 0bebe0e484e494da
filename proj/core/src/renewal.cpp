#include "trajstat/renewal.hpp"

#include <cmath>

#include "trajstat/errors.hpp"
#include "trajstat/trajectories.hpp"

namespace trajstat {

std::optional<RenewalStructure> detect_renewal(const LindbladModel& model) {
  if (model.num_jumps() == 0) return std::nullopt;
  constexpr double kRelTol = 1e-10;
  RenewalStructure st;
  for (const auto& ch : model.jumps()) {
    Eigen::JacobiSVD<Mat> svd(ch.op,
                              Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0) return std::nullopt;
    if (sv.size() > 1 && sv(1) >= kRelTol * sv(0)) return std::nullopt;
    CVec left = svd.matrixU().col(0);
    CVec phi = sv(0) * svd.matrixV().col(0);
    if (st.reset_state.size() == 0) {
      st.reset_state = left;
    } else {
      // Same left vector up to phase; fold the phase into phi.
      const Cplx overlap = st.reset_state.dot(left);
      if (std::abs(std::abs(overlap) - 1.0) > kRelTol) return std::nullopt;
      phi *= std::conj(overlap);
    }
    st.phi_vectors.push_back(std::move(phi));
  }
  // Fix the global phase so the largest component of |0> is real-positive.
  int imax = 0;
  st.reset_state.cwiseAbs().maxCoeff(&imax);
  const Cplx ph = st.reset_state(imax) / std::abs(st.reset_state(imax));
  st.reset_state /= ph;
  for (auto& phi : st.phi_vectors) phi *= ph;

  st.D = Mat::Zero(model.dim(), model.dim());
  for (const auto& phi : st.phi_vectors) st.D += phi * phi.adjoint();
  return st;
}

RenewalPotential analytic_potential(const LindbladModel& model,
                                    const RenewalStructure& structure,
                                    double x) {
  const auto eff = effective_hamiltonian(model);
  const SuperOperator r = build_R(eff.matrix);
  const Mat b = resolvent_solve(r, x, structure.D, eff.x_min);
  const Cplx val = structure.reset_state.dot(b * structure.reset_state);
  if (!(val.real() > 0.0))
    throw DomainError("renewal potential: <0|(x Id + R)^{-1}(D)|0> <= 0");
  RenewalPotential pot;
  pot.g = std::log(val.real());
  pot.f_x = b * std::exp(-pot.g);
  pot.rho_x = structure.reset_state * structure.reset_state.adjoint();
  return pot;
}

RenewalCheckReport renewal_product_checks(const LindbladModel& model,
                                          const RenewalStructure& structure,
                                          int K, double x, int n_samples,
                                          std::uint64_t seed) {
  if (K < 2) throw DomainError("renewal_product_checks requires K >= 2");
  const auto eff = effective_hamiltonian(model);
  if (!(eff.x_min < 0))
    throw DomainError("renewal_product_checks requires x_min < 0");

  RenewalCheckReport rep;
  const RenewalPotential pot = analytic_potential(model, structure, x);
  const double eg = std::exp(pot.g);

  const SuperOperator t = build_T(model, TiltPoint::x_tilt(x));
  const Mat t2 = t.matrix() * t.matrix();
  rep.collapse_residual = (t2 - eg * t.matrix()).norm() / (eg * t.matrix().norm());

  // Z_K from the reset state; the iterated channel collapses layer by layer.
  const LindbladModel from_reset =
      LindbladModel::make(model.hamiltonian(), model.jumps(),
                          structure.reset_state);
  const double log_zk =
      log_partition_K(from_reset, TiltPoint::x_tilt(x), K);
  rep.partition_residual = std::abs(log_zk - K * pot.g) /
                           std::max(1.0, std::abs(K * pot.g));

  // Consecutive waiting times restarted from |0> are independent draws.
  const WaitingTimeSampler sampler(from_reset);
  std::vector<double> waits;
  waits.reserve(n_samples);
  CVec psi = structure.reset_state;
  std::mt19937_64 rng = substream(seed, 0);
  for (int i = 0; i < n_samples; ++i) {
    const auto draw = sampler.sample(psi, rng);
    waits.push_back(draw.t_w);
    psi = draw.post_state;
  }
  const int n = n_samples - 1;
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += waits[i];
    my += waits[i + 1];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const double a = waits[i] - mx, b2 = waits[i + 1] - my;
    sxy += a * b2;
    sxx += a * a;
    syy += b2 * b2;
  }
  rep.lag1_correlation = sxy / std::sqrt(sxx * syy);
  rep.lag1_std_error = 1.0 / std::sqrt(static_cast<double>(n));
  rep.n_waiting_times = n_samples;
  return rep;
}

}  // namespace trajstat
