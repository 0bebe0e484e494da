#include "trajstat/superop.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "trajstat/errors.hpp"

namespace trajstat {

CVec stack(const Mat& a) {
  return Eigen::Map<const CVec>(a.data(), a.size());
}

Mat unstack(const CVec& v, int d) {
  return Eigen::Map<const Mat>(v.data(), d, d);
}

Mat sandwich_matrix(const Mat& x, const Mat& y) {
  // vec(X A Y) = (Y^T kron X) vec(A), column-major stacking.
  const int d = static_cast<int>(x.rows());
  Mat k(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      k.block(i * d, j * d, d, d) = y(j, i) * x;
  return k;
}

SuperOperator build_R(const Mat& h_eff) {
  const int d = static_cast<int>(h_eff.rows());
  const Mat id = Mat::Identity(d, d);
  Mat r = Cplx(0, 1) * (sandwich_matrix(id, h_eff) -
                        sandwich_matrix(h_eff.adjoint(), id));
  return SuperOperator(std::move(r), Picture::Heisenberg, d);
}

SuperOperator build_R(const LindbladModel& model) {
  return build_R(effective_hamiltonian(model).matrix);
}

namespace {

void check_admissible(double x, double x_min) {
  // Refuse solves within 1e-8 of the stability boundary.
  if (!(x > x_min + 1e-8))
    throw DomainError("x = " + std::to_string(x) +
                      " is not admissible (x_min = " + std::to_string(x_min) +
                      ")");
}

}  // namespace

Mat resolvent_solve(const SuperOperator& r, double x, const Mat& a,
                    double x_min) {
  check_admissible(x, x_min);
  const int n = static_cast<int>(r.matrix().rows());
  Mat sys = x * Mat::Identity(n, n) + r.matrix();
  Eigen::PartialPivLU<Mat> lu(sys);
  if (lu.rcond() < 1e-14)
    throw SingularSolve("resolvent system condition number above 1e14");
  CVec b = lu.solve(stack(a));
  return unstack(b, r.dim());
}

Mat resolvent_matrix(const SuperOperator& r, Cplx x, double x_min) {
  check_admissible(x.real(), x_min);
  const int n = static_cast<int>(r.matrix().rows());
  Mat sys = x * Mat::Identity(n, n) + r.matrix();
  Eigen::PartialPivLU<Mat> lu(sys);
  if (lu.rcond() < 1e-14)
    throw SingularSolve("resolvent system condition number above 1e14");
  return lu.inverse();
}

Mat superop_exp(const Mat& m, double t) {
  Mat scaled = t * m;
  return scaled.exp();
}

Mat matrix_exp_apply(const SuperOperator& g, double t, const Mat& a) {
  if (t < 0) throw DomainError("matrix_exp_apply requires t >= 0");
  if (t == 0) return a;
  return unstack(superop_exp(g.matrix(), t) * stack(a), g.dim());
}

namespace {

double mode_key(Cplx lambda, DominantMode mode) {
  return mode == DominantMode::SpectralRadius ? std::abs(lambda)
                                              : lambda.real();
}

}  // namespace

EigenPair dominant_eigenpair(const SuperOperator& g, DominantMode mode,
                             bool primitivity_waiver) {
  const int d = g.dim();
  Eigen::ComplexEigenSolver<Mat> es(g.matrix());
  if (es.info() != Eigen::Success)
    throw EigensolverFailure("superoperator eigendecomposition failed");

  const auto& vals = es.eigenvalues();
  int top = 0, second = -1;
  for (int i = 1; i < vals.size(); ++i)
    if (mode_key(vals(i), mode) > mode_key(vals(top), mode)) top = i;
  for (int i = 0; i < vals.size(); ++i) {
    if (i == top) continue;
    if (second < 0 || mode_key(vals(i), mode) > mode_key(vals(second), mode))
      second = i;
  }
  EigenPair pair;
  pair.value = vals(top);
  pair.gap = second < 0 ? std::numeric_limits<double>::infinity()
                        : mode_key(vals(top), mode) -
                              mode_key(vals(second), mode);
  if (pair.gap < 1e-9)
    throw DegenerateDominant(
        "dominant eigenvalue gap " + std::to_string(pair.gap) +
        " below 1e-9: uniqueness assumption violated");

  CVec right_vec = es.eigenvectors().col(top);

  // Left eigenvector from the adjoint, paired by eigenvalue conjugate.
  Eigen::ComplexEigenSolver<Mat> esa(g.matrix().adjoint());
  if (esa.info() != Eigen::Success)
    throw EigensolverFailure("adjoint eigendecomposition failed");
  int best = 0;
  double best_dist = std::abs(esa.eigenvalues()(0) - std::conj(pair.value));
  for (int i = 1; i < esa.eigenvalues().size(); ++i) {
    double dist = std::abs(esa.eigenvalues()(i) - std::conj(pair.value));
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  CVec left_vec = esa.eigenvectors().col(best);

  // Inverse-iteration polish: the raw eigenvectors of a non-normal matrix can
  // lose several digits, which the duality checks downstream cannot afford.
  const int n = static_cast<int>(g.matrix().rows());
  auto polish = [&](const Mat& m, Cplx lambda, CVec v) {
    for (int it = 0; it < 2; ++it) {
      Eigen::PartialPivLU<Mat> lu(m - lambda * Mat::Identity(n, n));
      const CVec w = lu.solve(v);
      const double nw = w.norm();
      if (!std::isfinite(nw) || nw < 1e-300) break;
      v = w / nw;
    }
    return v;
  };
  right_vec = polish(g.matrix(), pair.value, right_vec);
  left_vec = polish(g.matrix().adjoint(), std::conj(pair.value), left_vec);
  const Cplx denom = left_vec.dot(right_vec);
  if (std::abs(denom) > 1e-14)
    pair.value = left_vec.dot(g.matrix() * right_vec) / denom;

  pair.right = unstack(right_vec, d);
  pair.left = unstack(left_vec, d);

  // Normalization: tr[left] = 1, then tr[right left] = 1. Dividing by the
  // complex traces also removes the arbitrary phases; for Hermitian positive
  // pairs both scalings are real-positive so the conventions are consistent.
  const Cplx trl = pair.left.trace();
  if (std::abs(trl) < 1e-14)
    throw EigensolverFailure("left eigenvector has (near) zero trace");
  pair.left /= trl;
  pair.left = 0.5 * (pair.left + pair.left.adjoint().eval());

  const Cplx trr = pair.right.trace();
  if (std::abs(trr) > 1e-12)
    pair.right *= std::abs(trr) / trr;  // tr[right] real-positive
  const Cplx overlap = (pair.right * pair.left).trace();
  if (std::abs(overlap) < 1e-14)
    throw EigensolverFailure("dominant left/right eigenvectors are orthogonal");
  pair.right /= overlap;

  if (!primitivity_waiver) {
    const double scale = pair.right.cwiseAbs().maxCoeff();
    if ((pair.right - pair.right.adjoint()).cwiseAbs().maxCoeff() >
        1e-8 * std::max(scale, 1.0))
      throw NonPositiveEigenvector(
          "dominant right eigenvector is not Hermitian-representable");
    Mat herm = 0.5 * (pair.right + pair.right.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Mat> sa(herm);
    if (sa.eigenvalues().minCoeff() < -1e-8 * std::max(scale, 1.0))
      throw NonPositiveEigenvector(
          "dominant right eigenvector is not positive semidefinite");
  }
  return pair;
}

}  // namespace trajstat
