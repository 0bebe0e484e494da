#include "trajstat/generators.hpp"

#include <cmath>
#include <limits>

#include "trajstat/errors.hpp"

namespace trajstat {

namespace {

double tilt_weight(const JumpChannel& ch, const RVec& c) {
  if (c.size() == 0) return 1.0;
  if (c.size() != ch.spin.size())
    throw DomainError("counting-field vector length does not match spin labels");
  return std::exp(-c.dot(ch.spin));
}

void require_kind(const TiltPoint& tilt, TiltPoint::Kind kind) {
  if (tilt.kind != kind)
    throw DomainError("tilt point has the wrong ensemble kind for this map");
}

}  // namespace

Mat tilted_jump_matrix(const LindbladModel& model, const RVec& c) {
  const int d = model.dim();
  Mat j = Mat::Zero(d * d, d * d);
  for (const auto& ch : model.jumps())
    j += tilt_weight(ch, c) * sandwich_matrix(ch.op.adjoint(), ch.op);
  return j;
}

SuperOperator build_T_complex(const LindbladModel& model, Cplx x,
                              const RVec& c) {
  const auto eff = effective_hamiltonian(model);
  const SuperOperator r = build_R(eff.matrix);
  Mat t = resolvent_matrix(r, x, eff.x_min) * tilted_jump_matrix(model, c);
  return SuperOperator(std::move(t), Picture::Heisenberg, model.dim());
}

SuperOperator build_T(const LindbladModel& model, const TiltPoint& tilt) {
  require_kind(tilt, TiltPoint::Kind::XEnsemble);
  return build_T_complex(model, Cplx(tilt.field, 0), tilt.c);
}

SuperOperator build_W_complex(const LindbladModel& model, Cplx s,
                              const RVec& c) {
  const SuperOperator r = build_R(model);
  Mat w = -r.matrix() + std::exp(-s) * tilted_jump_matrix(model, c);
  return SuperOperator(std::move(w), Picture::Heisenberg, model.dim());
}

SuperOperator build_W(const LindbladModel& model, const TiltPoint& tilt) {
  require_kind(tilt, TiltPoint::Kind::SEnsemble);
  return build_W_complex(model, Cplx(tilt.field, 0), tilt.c);
}

double partition_K(const LindbladModel& model, const TiltPoint& tilt_x,
                   int K) {
  return std::exp(log_partition_K(model, tilt_x, K));
}

double log_partition_K(const LindbladModel& model, const TiltPoint& tilt_x,
                       int K) {
  if (K < 0) throw DomainError("partition_K requires K >= 0");
  if (K == 0) return 0.0;
  const SuperOperator t = build_T(model, tilt_x);
  const int d = model.dim();
  // Scale each application by its max-abs entry and accumulate the log so
  // that |g| * K beyond ~700 cannot overflow.
  CVec v = stack(Mat::Identity(d, d));
  double log_scale = 0.0;
  for (int k = 0; k < K; ++k) {
    v = t.matrix() * v;
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    v /= m;
    log_scale += std::log(m);
  }
  // tr[rho A] = vec(rho)^dag vec(A) for Hermitian rho.
  const Cplx z = stack(model.initial_density()).dot(v);
  return log_scale + std::log(z.real());
}

double partition_tau(const LindbladModel& model, const TiltPoint& tilt_s,
                     double tau) {
  if (tau < 0) throw DomainError("partition_tau requires tau >= 0");
  require_kind(tilt_s, TiltPoint::Kind::SEnsemble);
  if (tau == 0) return 1.0;
  const SuperOperator w = build_W(model, tilt_s);
  const int d = model.dim();
  const Mat a = matrix_exp_apply(w, tau, Mat::Identity(d, d));
  return (model.initial_density() * a).trace().real();
}

double log_partition_tau(const LindbladModel& model, const TiltPoint& tilt_s,
                         double tau) {
  if (tau < 0) throw DomainError("partition_tau requires tau >= 0");
  require_kind(tilt_s, TiltPoint::Kind::SEnsemble);
  if (tau == 0) return 0.0;
  // Split into unit steps with rescaling; keeps tau*theta beyond the double
  // exponent range representable in the log.
  const SuperOperator w = build_W(model, tilt_s);
  const int d = model.dim();
  const int steps = static_cast<int>(std::ceil(tau));
  const double dt = tau / steps;
  const Mat step = superop_exp(w.matrix(), dt);
  CVec v = stack(Mat::Identity(d, d));
  double log_scale = 0.0;
  for (int k = 0; k < steps; ++k) {
    v = step * v;
    const double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    v /= m;
    log_scale += std::log(m);
  }
  const Cplx z = stack(model.initial_density()).dot(v);
  return log_scale + std::log(z.real());
}

double connection_residual(const LindbladModel& model, double s, const RVec& c,
                           double x) {
  const auto eff = effective_hamiltonian(model);
  const SuperOperator r = build_R(eff.matrix);
  const int n = model.dim() * model.dim();
  const Mat id = Mat::Identity(n, n);
  const Mat t = build_T(model, TiltPoint::x_tilt(x, c)).matrix();
  const Mat w = build_W(model, TiltPoint::s_tilt(s, c)).matrix();
  const Mat res = resolvent_matrix(r, Cplx(x, 0), eff.x_min);
  const double es = std::exp(s);
  const Mat lhs = t - es * id;
  const Mat rhs = es * res * (w - x * id);
  return (lhs - rhs).norm() / t.norm();
}

}  // namespace trajstat
