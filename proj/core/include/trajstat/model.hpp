#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace trajstat {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kHermTol = 1e-12;
inline constexpr double kNormTol = 1e-12;

struct JumpChannel {
  Mat op;    // d x d
  RVec spin; // label M(i), length p (possibly 0)
};

// Open-system model (H, {L_i}, spin labels, initial state). Immutable after
// construction; validated once in make().
class LindbladModel {
 public:
  static LindbladModel make(Mat hamiltonian, std::vector<JumpChannel> jumps,
                            CVec initial_state);
  static LindbladModel load(const std::string& path);
  static LindbladModel from_json_text(const std::string& text);

  int dim() const { return static_cast<int>(hamiltonian_.rows()); }
  int num_jumps() const { return static_cast<int>(jumps_.size()); }
  int spin_dim() const { return spin_dim_; }
  const Mat& hamiltonian() const { return hamiltonian_; }
  const std::vector<JumpChannel>& jumps() const { return jumps_; }
  const CVec& initial_state() const { return initial_state_; }
  Mat initial_density() const {
    return initial_state_ * initial_state_.adjoint();
  }
  // Sum_i L_i^dag L_i
  Mat dissipation_sum() const;

  std::string to_json_text() const;
  // FNV-1a over the serialized model, for reproducibility headers.
  std::uint64_t hash() const;

 private:
  LindbladModel() = default;
  Mat hamiltonian_;
  std::vector<JumpChannel> jumps_;
  CVec initial_state_;
  int spin_dim_ = 0;
};

struct EffectiveHamiltonian {
  Mat matrix;       // H - (i/2) Sum L_i^dag L_i
  CVec eigenvalues; // full spectrum
  double x_min;     // 2 * max_j Im lambda_j, always <= 0
};

EffectiveHamiltonian effective_hamiltonian(const LindbladModel& model);

enum class PhaseKind { P1, P2 };

// P1: L_i -> e^{i phi} L_i.  P2: H -> H + phi * Identity.
LindbladModel apply_phase_transform(const LindbladModel& model, PhaseKind kind,
                                    double phi);

// Shipped demo models.
LindbladModel two_level_decay(double kappa = 1.0);
LindbladModel three_level_renewal(double omega1 = 1.0, double omega2 = 0.2,
                                  double kappa = 1.0);

}  // namespace trajstat
