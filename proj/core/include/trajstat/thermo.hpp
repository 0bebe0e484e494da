#pragma once

#include "trajstat/generators.hpp"

namespace trajstat {

struct Intensives {
  // For x-ensemble tilts: rate = t(x,c) = -dg/dx. For s-ensemble tilts:
  // rate = k(s,c) = -dtheta/ds. spin = m(x,c) or mtilde(s,c).
  double rate = 0.0;
  RVec spin;
};

struct PotentialReport {
  TiltPoint tilt;
  double potential = 0.0;  // g(x,c) or theta(s,c)
  Mat right_eig;           // F_{x,c} or E_{s,c}
  Mat left_eig_heis;       // sigma, trace-one
  Mat left_eig_schr;       // rho_{x,c} or rho_{s,c}, trace-one
  double gap = 0.0;
};

PotentialReport potential(const LindbladModel& model, const TiltPoint& tilt,
                          bool primitivity_waiver = false);

// (s,c) -> (theta(s,c), c) as an x-tilt, or (x,c) -> (g(x,c), c) as an s-tilt.
// Throws DomainError when the mapped x leaves the admissible window.
TiltPoint dual_map(const LindbladModel& model, const TiltPoint& tilt,
                   bool primitivity_waiver = false);

// First-order perturbation (Hellmann-Feynman) contractions; exact up to
// eigensolver error. Finite differences live in the tests as the independent
// cross-check.
Intensives intensive_quantities(const LindbladModel& model,
                                const TiltPoint& tilt,
                                bool primitivity_waiver = false);

struct RateFunction {
  RVec grid;    // intensive variable (t or k)
  RVec values;  // rate-function values, >= 0 up to grid error
  double argmin = 0.0;
};

// Discrete Legendre-Fenchel conjugate of a potential sampled on a 1-D grid:
// given theta(s_i) returns varphi(k) = max_i (-k s_i - theta(s_i)) on the
// slope-induced k grid (same form for g(x) -> phi(t)). Throws NonConvexInput
// when the sampled potential is not convex.
RateFunction legendre_rate(const RVec& field_grid, const RVec& potential_values,
                           int output_points = 201);

// Trace distance between rho_{s,c} from the eigensolver and the
// resolvent-transformed rho_{x,c} at the dual point x = theta(s,c).
double schrodinger_eigvec_relation_residual(const LindbladModel& model,
                                            double s, const RVec& c,
                                            bool primitivity_waiver = false);

double trace_distance(const Mat& a, const Mat& b);

}  // namespace trajstat
