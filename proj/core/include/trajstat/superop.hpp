#pragma once

#include "trajstat/model.hpp"

namespace trajstat {

enum class Picture { Heisenberg, Schrodinger };

// Column-stacking vectorization on d x d operators.
CVec stack(const Mat& a);
Mat unstack(const CVec& v, int d);

// The map A -> X A Y as a d^2 x d^2 matrix on stacked operators.
Mat sandwich_matrix(const Mat& x, const Mat& y);

// Linear map on d x d operators, stored dense as d^2 x d^2.
class SuperOperator {
 public:
  SuperOperator() = default;
  SuperOperator(Mat matrix, Picture picture, int dim)
      : matrix_(std::move(matrix)), picture_(picture), dim_(dim) {}

  const Mat& matrix() const { return matrix_; }
  Picture picture() const { return picture_; }
  int dim() const { return dim_; }

  Mat apply(const Mat& a) const { return unstack(matrix_ * stack(a), dim_); }

  // Hilbert-Schmidt adjoint; swaps picture.
  SuperOperator adjoint() const {
    return SuperOperator(matrix_.adjoint(),
                         picture_ == Picture::Heisenberg
                             ? Picture::Schrodinger
                             : Picture::Heisenberg,
                         dim_);
  }

 private:
  Mat matrix_;
  Picture picture_ = Picture::Heisenberg;
  int dim_ = 0;
};

// Heisenberg map R(A) = i A H_eff - i H_eff^dag A.
SuperOperator build_R(const LindbladModel& model);
SuperOperator build_R(const Mat& h_eff);

// Solves (x Id + R)(B) = A. Requires x > x_min (strictly, with a 1e-8 guard
// band). Throws SingularSolve if the system is numerically singular.
Mat resolvent_solve(const SuperOperator& r, double x, const Mat& a,
                    double x_min);

// Matrix of (x Id + R)^{-1} composed after the identity, i.e. the dense
// inverse used when building deformed generators. Accepts complex x for the
// imaginary-shift reinterpretations of the phase transforms.
Mat resolvent_matrix(const SuperOperator& r, Cplx x, double x_min);

// e^{tG}(A), scaling-and-squaring on the d^2 x d^2 matrix.
Mat matrix_exp_apply(const SuperOperator& g, double t, const Mat& a);
Mat superop_exp(const Mat& m, double t);

enum class DominantMode { SpectralRadius, MaxRealPart };

struct EigenPair {
  Cplx value;
  Mat right;  // eigenvector of the map, as a d x d operator
  Mat left;   // eigenvector of the adjoint map (a state for Heisenberg maps)
  double gap; // modulus or real-part distance to the subdominant eigenvalue
};

// Dominant eigenpair with the normalization tr[left] = 1, tr[right*left] = 1,
// and global phase fixed by tr[right] real-positive when possible. Throws
// DegenerateDominant when the gap is below 1e-9 unless primitivity_waiver is
// set (non-primitive but solvable cases such as renewal processes).
EigenPair dominant_eigenpair(const SuperOperator& g, DominantMode mode,
                             bool primitivity_waiver = false);

}  // namespace trajstat
