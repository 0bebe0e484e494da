#include "trajstat/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "trajstat/errors.hpp"

namespace trajstat {

namespace {

double real_eigenvalue(Cplx lambda, const char* what) {
  if (std::abs(lambda.imag()) > 1e-9 * std::max(1.0, std::abs(lambda)))
    throw DegenerateDominant(std::string(what) +
                             ": dominant eigenvalue has a nonreal part");
  return lambda.real();
}

double tilt_weight(const JumpChannel& ch, const RVec& c) {
  if (c.size() == 0) return 1.0;
  return std::exp(-c.dot(ch.spin));
}

}  // namespace

double trace_distance(const Mat& a, const Mat& b) {
  Mat diff = a - b;
  diff = 0.5 * (diff + diff.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Mat> es(diff);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

PotentialReport potential(const LindbladModel& model, const TiltPoint& tilt,
                          bool primitivity_waiver) {
  PotentialReport rep;
  rep.tilt = tilt;
  if (tilt.kind == TiltPoint::Kind::XEnsemble) {
    const SuperOperator t = build_T(model, tilt);
    EigenPair pair = dominant_eigenpair(t, DominantMode::SpectralRadius,
                                        primitivity_waiver);
    const double lam = real_eigenvalue(pair.value, "T_{x,c}");
    if (lam <= 0)
      throw DegenerateDominant("spectral radius eigenvalue is not positive");
    rep.potential = std::log(lam);
    rep.right_eig = std::move(pair.right);
    rep.left_eig_heis = pair.left;
    rep.left_eig_schr = std::move(pair.left);
    rep.gap = pair.gap;
  } else {
    const SuperOperator w = build_W(model, tilt);
    EigenPair pair = dominant_eigenpair(w, DominantMode::MaxRealPart,
                                        primitivity_waiver);
    rep.potential = real_eigenvalue(pair.value, "W_{s,c}");
    rep.right_eig = std::move(pair.right);
    rep.left_eig_heis = pair.left;
    rep.left_eig_schr = std::move(pair.left);
    rep.gap = pair.gap;
  }
  return rep;
}

TiltPoint dual_map(const LindbladModel& model, const TiltPoint& tilt,
                   bool primitivity_waiver) {
  const PotentialReport rep = potential(model, tilt, primitivity_waiver);
  if (tilt.kind == TiltPoint::Kind::SEnsemble) {
    const double x = rep.potential;  // x = theta(s,c)
    const double x_min = effective_hamiltonian(model).x_min;
    if (!(x > x_min + 1e-8))
      throw DomainError("theta(s,c) = " + std::to_string(x) +
                        " leaves the admissible window (x_min = " +
                        std::to_string(x_min) + ")");
    return TiltPoint::x_tilt(x, tilt.c);
  }
  return TiltPoint::s_tilt(rep.potential, tilt.c);  // s = g(x,c)
}

Intensives intensive_quantities(const LindbladModel& model,
                                const TiltPoint& tilt,
                                bool primitivity_waiver) {
  const PotentialReport rep = potential(model, tilt, primitivity_waiver);
  const Mat& sigma = rep.left_eig_heis;
  Intensives out;
  out.spin = RVec::Zero(model.spin_dim());

  if (tilt.kind == TiltPoint::Kind::SEnsemble) {
    const double es = std::exp(-tilt.field);
    double k = 0.0;
    for (const auto& ch : model.jumps()) {
      const double w = tilt_weight(ch, tilt.c);
      const double contraction =
          (sigma * ch.op.adjoint() * rep.right_eig * ch.op).trace().real();
      k += es * w * contraction;
      out.spin += es * w * contraction * ch.spin;
    }
    out.rate = k;
  } else {
    const auto eff = effective_hamiltonian(model);
    const SuperOperator r = build_R(eff.matrix);
    // t = tr[sigma (x Id + R)^{-1}(F)]
    const Mat resF = resolvent_solve(r, tilt.field, rep.right_eig, eff.x_min);
    out.rate = (sigma * resF).trace().real();
    const double eg = std::exp(-rep.potential);
    for (const auto& ch : model.jumps()) {
      if (ch.spin.size() == 0) continue;
      const double w = tilt_weight(ch, tilt.c);
      const Mat inner = resolvent_solve(
          r, tilt.field, ch.op.adjoint() * rep.right_eig * ch.op, eff.x_min);
      out.spin += eg * w * (sigma * inner).trace().real() * ch.spin;
    }
  }
  return out;
}

RateFunction legendre_rate(const RVec& field_grid, const RVec& potential_values,
                           int output_points) {
  const int n = static_cast<int>(field_grid.size());
  if (n < 3 || potential_values.size() != n)
    throw DomainError("legendre_rate needs a grid of at least 3 points");
  for (int i = 1; i < n; ++i)
    if (!(field_grid(i) > field_grid(i - 1)))
      throw DomainError("legendre_rate grid must be strictly increasing");

  // Convexity check via divided-difference slopes.
  std::vector<double> slope(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    slope[i] = (potential_values(i + 1) - potential_values(i)) /
               (field_grid(i + 1) - field_grid(i));
  std::vector<int> bad;
  for (int i = 0; i + 2 < n; ++i)
    if (slope[i + 1] - slope[i] < -1e-8) bad.push_back(i + 1);
  if (!bad.empty())
    throw NonConvexInput("sampled potential is not convex on its grid", bad);

  // Induced intensive grid from the (negated) slope range.
  double k_lo = -slope[n - 2], k_hi = -slope[0];
  if (k_lo > k_hi) std::swap(k_lo, k_hi);
  RateFunction rf;
  rf.grid = RVec::LinSpaced(output_points, k_lo, k_hi);
  rf.values = RVec(output_points);
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < output_points; ++j) {
    double v = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      v = std::max(v, -rf.grid(j) * field_grid(i) - potential_values(i));
    rf.values(j) = v;
    if (v < best) {
      best = v;
      rf.argmin = rf.grid(j);
    }
  }
  return rf;
}

double schrodinger_eigvec_relation_residual(const LindbladModel& model,
                                            double s, const RVec& c,
                                            bool primitivity_waiver) {
  const TiltPoint s_tilt = TiltPoint::s_tilt(s, c);
  const TiltPoint x_tilt = dual_map(model, s_tilt, primitivity_waiver);
  const PotentialReport rep_s = potential(model, s_tilt, primitivity_waiver);
  const PotentialReport rep_x = potential(model, x_tilt, primitivity_waiver);

  const auto eff = effective_hamiltonian(model);
  const SuperOperator r_star = build_R(eff.matrix).adjoint();
  Mat transformed =
      resolvent_solve(r_star, x_tilt.field, rep_x.left_eig_schr, eff.x_min);
  const Cplx tr = transformed.trace();
  if (std::abs(tr) < 1e-300)
    throw DomainError("resolvent-transformed state has zero trace");
  transformed /= tr;
  return trace_distance(rep_s.left_eig_schr, transformed);
}

}  // namespace trajstat
