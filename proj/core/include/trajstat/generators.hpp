#pragma once

#include "trajstat/model.hpp"
#include "trajstat/superop.hpp"

namespace trajstat {

struct TiltPoint {
  enum class Kind { XEnsemble, SEnsemble };
  Kind kind = Kind::SEnsemble;
  double field = 0.0;  // x or s
  RVec c;              // counting field for the spin observable, length p

  static TiltPoint x_tilt(double x, RVec c = RVec(0)) {
    return {Kind::XEnsemble, x, std::move(c)};
  }
  static TiltPoint s_tilt(double s, RVec c = RVec(0)) {
    return {Kind::SEnsemble, s, std::move(c)};
  }
};

// Heisenberg jump part Sum_i e^{-c.M(i)} L_i^dag (.) L_i as a matrix.
Mat tilted_jump_matrix(const LindbladModel& model, const RVec& c);

// Deformed transfer map T_{x,c} = (x Id + R)^{-1} o tilted jump part.
// Requires x > x_min. The complex-x overload backs the x -> x - 2i phi
// reinterpretation of phase transform P2.
SuperOperator build_T(const LindbladModel& model, const TiltPoint& tilt);
SuperOperator build_T_complex(const LindbladModel& model, Cplx x, const RVec& c);

// Deformed Lindblad generator W_{s,c} = -R + e^{-s} * tilted jump part.
SuperOperator build_W(const LindbladModel& model, const TiltPoint& tilt);
SuperOperator build_W_complex(const LindbladModel& model, Cplx s, const RVec& c);

// Z_K(x,c) = tr[rho T_{x,c}^K(I)] by repeated application; log-space scaled
// variant for large K.
double partition_K(const LindbladModel& model, const TiltPoint& tilt_x, int K);
double log_partition_K(const LindbladModel& model, const TiltPoint& tilt_x,
                       int K);

// Z_tau(s,c) = tr[rho e^{tau W_{s,c}}(I)].
double partition_tau(const LindbladModel& model, const TiltPoint& tilt_s,
                     double tau);
double log_partition_tau(const LindbladModel& model, const TiltPoint& tilt_s,
                         double tau);

// Normalized Frobenius residual of
//   T_{x,c} - e^s Id = e^s (x Id + R)^{-1} o (W_{s,c} - x Id),
// which holds for all admissible (x, s, c).
double connection_residual(const LindbladModel& model, double s, const RVec& c,
                           double x);

}  // namespace trajstat
