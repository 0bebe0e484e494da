#include "trajstat/output_states.hpp"

#include <algorithm>
#include <cmath>

#include "trajstat/errors.hpp"
#include "trajstat/thermo.hpp"

namespace trajstat {

namespace {

// Gauss-Legendre nodes/weights on [a, b] by Newton iteration on P_n.
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b);
    weights[i] = (b - a) / ((1.0 - x * x) * pp * pp);
  }
}

void extend_grid(const LindbladModel& model, double tau0, int remaining,
                 int nodes_per_dim, QuadTrajectory partial,
                 std::vector<QuadTrajectory>& out) {
  if (remaining == 0) {
    out.push_back(std::move(partial));
    return;
  }
  const double t_lo = partial.times.empty() ? 0.0 : partial.times.back();
  std::vector<double> nodes, weights;
  gauss_legendre(nodes_per_dim, t_lo, tau0, nodes, weights);
  for (int i = 0; i < nodes_per_dim; ++i) {
    for (int ch = 0; ch < model.num_jumps(); ++ch) {
      QuadTrajectory next = partial;
      next.times.push_back(nodes[i]);
      next.channels.push_back(ch);
      next.weight *= weights[i];
      extend_grid(model, tau0, remaining - 1, nodes_per_dim, std::move(next),
                  out);
    }
  }
}

RVec spin_of(const LindbladModel& model, const QuadTrajectory& x) {
  RVec m = RVec::Zero(model.spin_dim());
  for (int ch : x.channels) m += model.jumps()[ch].spin;
  return m;
}

// V^{tau0}_{s,c}[X0] psi: chained H_eff segment exponentials, with the
// e^{-sN/2 - c.M/2} tilt scalar. A complex s carries the imaginary-shift
// phases of transform P1.
CVec v_tau0_psi(const LindbladModel& model, const WaitingTimeSampler& prop,
                const QuadTrajectory& x, double tau0, Cplx s, const RVec& c,
                bool trailing_evolution) {
  CVec psi = model.initial_state();
  double prev = 0.0;
  for (std::size_t i = 0; i < x.times.size(); ++i) {
    psi = model.jumps()[x.channels[i]].op * prop.evolve(psi, x.times[i] - prev);
    prev = x.times[i];
  }
  if (trailing_evolution) psi = prop.evolve(psi, tau0 - prev);
  Cplx scale = std::exp(-0.5 * s * static_cast<double>(x.times.size()));
  if (c.size() > 0) scale *= std::exp(-0.5 * c.dot(spin_of(model, x)));
  return scale * psi;
}

}  // namespace

std::vector<QuadTrajectory> layer_grid(const LindbladModel& model, double tau0,
                                       int n_jumps, int nodes_per_dim) {
  if (n_jumps < 0 || tau0 <= 0 || nodes_per_dim < 1)
    throw DomainError("layer_grid: need n_jumps >= 0, tau0 > 0, nodes >= 1");
  double count = 1.0;
  for (int i = 0; i < n_jumps; ++i)
    count *= nodes_per_dim * model.num_jumps();
  if (count > 1e4)
    throw QuadratureOverflow("layer grid would exceed 10^4 nodes");
  std::vector<QuadTrajectory> out;
  extend_grid(model, tau0, n_jumps, nodes_per_dim, QuadTrajectory{}, out);
  return out;
}

GramMatrix gram_matrix(const LindbladModel& model) {
  const auto eff = effective_hamiltonian(model);
  if (!(eff.x_min < -1e-8))
    throw DomainError(
        "waiting-time representation requires strict stability (x_min < 0); "
        "the defining integral diverges at x_min = 0");
  const int d = model.dim();
  const SuperOperator r = build_R(eff.matrix);
  GramMatrix g;
  g.entries = Mat(d * d, d * d);
  for (int m = 0; m < d; ++m) {
    for (int mt = 0; mt < d; ++mt) {
      Mat a = Mat::Zero(d, d);
      for (const auto& ch : model.jumps())
        a += ch.op.adjoint().col(m) * ch.op.row(mt);
      const Mat b = resolvent_solve(r, 0.0, a, eff.x_min);
      for (int mp = 0; mp < d; ++mp)
        for (int mtp = 0; mtp < d; ++mtp)
          g.entries(m * d + mp, mt * d + mtp) = b(mp, mtp);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(
      0.5 * (g.entries + g.entries.adjoint().eval()));
  const double cutoff = 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > cutoff) keep.push_back(i);
  g.rank = static_cast<int>(keep.size());
  g.bond_basis = Mat(d * d, g.rank);
  for (int i = 0; i < g.rank; ++i)
    g.bond_basis.col(i) = es.eigenvectors().col(keep[i]);
  return g;
}

Cplx canonical_overlap(const LindbladModel& model, int K, const TiltPoint& a,
                       const TiltPoint& b) {
  if (K < 0) throw DomainError("canonical_overlap: K >= 0");
  if (a.kind != TiltPoint::Kind::XEnsemble ||
      b.kind != TiltPoint::Kind::XEnsemble)
    throw DomainError("canonical_overlap takes x-ensemble tilts");
  if (K == 0) return Cplx(1, 0);
  RVec c_mid;
  if (a.c.size() > 0 || b.c.size() > 0) {
    const RVec ca = a.c.size() > 0 ? a.c : RVec::Zero(b.c.size());
    const RVec cb = b.c.size() > 0 ? b.c : RVec::Zero(a.c.size());
    c_mid = 0.5 * (ca + cb);
  }
  const TiltPoint mid = TiltPoint::x_tilt(0.5 * (a.field + b.field), c_mid);
  const double log_mid = log_partition_K(model, mid, K);
  const double log_a = log_partition_K(model, a, K);
  const double log_b = log_partition_K(model, b, K);
  return Cplx(std::exp(log_mid - 0.5 * (log_a + log_b)), 0.0);
}

LayerBlock reduced_block_finite(const LindbladModel& model,
                                const EnsembleSpec& spec, double tau0, int N,
                                int N_prime, int nodes_per_dim) {
  if (N < 0 || N_prime < 0)
    throw DomainError("reduced_block_finite: layer indices must be >= 0");
  LayerBlock out;
  out.N = N;
  out.N_prime = N_prime;

  const auto grid_a = layer_grid(model, tau0, N, nodes_per_dim);
  const auto grid_b = layer_grid(model, tau0, N_prime, nodes_per_dim);
  const int na = static_cast<int>(grid_a.size());
  const int nb = static_cast<int>(grid_b.size());

  if (spec.kind == EnsembleSpec::Kind::XEnsemble && N != N_prime) {
    // Fock-layer superselection of the fixed-count state: structural zero.
    out.block = Mat::Zero(na, nb);
    return out;
  }

  const WaitingTimeSampler prop(model);
  const int d = model.dim();

  if (spec.kind == EnsembleSpec::Kind::SEnsemble) {
    if (!(spec.tau >= tau0))
      throw DomainError("s-ensemble reduced state requires tau >= tau0");
    const double s_real = spec.field.real();
    const SuperOperator w =
        build_W(model, TiltPoint::s_tilt(s_real, spec.c));
    const Mat mid = matrix_exp_apply(w, spec.tau - tau0, Mat::Identity(d, d));
    const double z =
        partition_tau(model, TiltPoint::s_tilt(s_real, spec.c), spec.tau);

    std::vector<CVec> va(na), vb(nb);
    for (int i = 0; i < na; ++i)
      va[i] = v_tau0_psi(model, prop, grid_a[i], tau0, spec.field, spec.c, true);
    for (int j = 0; j < nb; ++j)
      vb[j] = v_tau0_psi(model, prop, grid_b[j], tau0, spec.field, spec.c, true);
    out.block = Mat(na, nb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j)
        out.block(i, j) = std::sqrt(grid_a[i].weight * grid_b[j].weight) *
                          (vb[j].dot(mid * va[i])) / z;
    return out;
  }

  // x-ensemble, N == N_prime.
  const int K = spec.K;
  if (N > K) {
    out.block = Mat::Zero(na, nb);
    return out;
  }
  const double x = spec.field.real();
  const TiltPoint tilt = TiltPoint::x_tilt(x, spec.c);
  const double log_zk = log_partition_K(model, tilt, K);

  std::vector<CVec> va(na);
  if (N < K) {
    // Jumps K-N..K happen after tau0; their integral collapses to T^{K-N}(I).
    const SuperOperator t = build_T(model, tilt);
    CVec mid_vec = stack(Mat::Identity(d, d));
    for (int k = 0; k < K - N; ++k) mid_vec = t.matrix() * mid_vec;
    const Mat mid = unstack(mid_vec, d);
    for (int i = 0; i < na; ++i)
      va[i] = v_tau0_psi(model, prop, grid_a[i], tau0, Cplx(0, 0), spec.c, true);
    const double pref = std::exp(-x * tau0 - log_zk);
    out.block = Mat(na, na);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j)
        out.block(i, j) = std::sqrt(grid_a[i].weight * grid_a[j].weight) *
                          pref * (va[j].dot(mid * va[i]));
    return out;
  }

  // N == K: every jump lies before tau0 and there is no trailing evolution.
  for (int i = 0; i < na; ++i)
    va[i] = v_tau0_psi(model, prop, grid_a[i], tau0, Cplx(0, 0), spec.c, false);
  out.block = Mat(na, na);
  for (int i = 0; i < na; ++i) {
    const double ta = grid_a[i].times.empty() ? 0.0 : grid_a[i].times.back();
    for (int j = 0; j < na; ++j) {
      const double tb = grid_a[j].times.empty() ? 0.0 : grid_a[j].times.back();
      out.block(i, j) = std::sqrt(grid_a[i].weight * grid_a[j].weight) *
                        std::exp(-0.5 * x * (ta + tb) - log_zk) *
                        (va[j].dot(va[i]));
    }
  }
  return out;
}

LimitState limit_state(const LindbladModel& model, double s, const RVec& c,
                       double tau0, int N_max, int nodes_per_dim,
                       bool primitivity_waiver) {
  const PotentialReport rep =
      potential(model, TiltPoint::s_tilt(s, c), primitivity_waiver);
  LimitState lim;
  lim.s = s;
  lim.c = c;
  lim.tau0 = tau0;
  lim.N_max = N_max;
  lim.theta = rep.potential;

  const Cplx tr_rho_e =
      (model.initial_density() * rep.right_eig).trace();
  if (std::abs(tr_rho_e) < 1e-300)
    throw DegenerateDominant("tr[rho E] vanishes; limit state undefined");
  const double pref = std::exp(-tau0 * rep.potential);

  const WaitingTimeSampler prop(model);
  std::vector<std::vector<QuadTrajectory>> grids(N_max + 1);
  std::vector<std::vector<CVec>> vs(N_max + 1);
  for (int n = 0; n <= N_max; ++n) {
    grids[n] = layer_grid(model, tau0, n, nodes_per_dim);
    for (const auto& x : grids[n])
      vs[n].push_back(v_tau0_psi(model, prop, x, tau0, Cplx(s, 0), c, true));
  }
  for (int n = 0; n <= N_max; ++n) {
    for (int np = 0; np <= N_max; ++np) {
      const int na = static_cast<int>(grids[n].size());
      const int nb = static_cast<int>(grids[np].size());
      Mat block(na, nb);
      for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
          block(i, j) =
              std::sqrt(grids[n][i].weight * grids[np][j].weight) * pref *
              (vs[np][j].dot(rep.right_eig * vs[n][i])) / tr_rho_e;
      lim.blocks[{n, np}] = std::move(block);
    }
  }
  return lim;
}

LimitState limit_state_dual(const LindbladModel& model, double x, const RVec& c,
                            double tau0, int N_max, int nodes_per_dim,
                            bool primitivity_waiver) {
  const PotentialReport rep =
      potential(model, TiltPoint::x_tilt(x, c), primitivity_waiver);
  const double g = rep.potential;
  LimitState lim;
  lim.s = g;
  lim.c = c;
  lim.tau0 = tau0;
  lim.N_max = N_max;
  lim.theta = x;

  const Cplx tr_rho_f = (model.initial_density() * rep.right_eig).trace();
  if (std::abs(tr_rho_f) < 1e-300)
    throw DegenerateDominant("tr[rho F] vanishes; limit state undefined");
  const double pref = std::exp(-tau0 * x);

  const WaitingTimeSampler prop(model);
  for (int n = 0; n <= N_max; ++n) {
    const auto grid = layer_grid(model, tau0, n, nodes_per_dim);
    const int na = static_cast<int>(grid.size());
    std::vector<CVec> vs(na);
    for (int i = 0; i < na; ++i)
      vs[i] = v_tau0_psi(model, prop, grid[i], tau0, Cplx(g, 0), c, true);
    Mat block(na, na);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j)
        block(i, j) = std::sqrt(grid[i].weight * grid[j].weight) * pref *
                      (vs[j].dot(rep.right_eig * vs[i])) / tr_rho_f;
    lim.blocks[{n, n}] = std::move(block);
  }
  return lim;
}

double block_distance(const Mat& a, const Mat& b) { return (a - b).norm(); }

PhaseCheckReport phase_covariance_check(const LindbladModel& model,
                                        PhaseKind kind, double phi,
                                        const PhaseCheckContext& ctx) {
  PhaseCheckReport rep;
  rep.kind = kind;
  rep.phi = phi;
  const LindbladModel transformed = apply_phase_transform(model, kind, phi);

  if (kind == PhaseKind::P1) {
    // x-ensemble outputs invariant; s-ensemble layers pick up e^{i phi (N-N')}.
    const TiltPoint dual =
        dual_map(model, TiltPoint::s_tilt(ctx.s, ctx.c), true);
    for (int n = 0; n <= ctx.N_max; ++n) {
      const auto b0 = reduced_block_finite(
          model, EnsembleSpec::x_ensemble(ctx.K, dual.field, ctx.c), ctx.tau0,
          n, n, ctx.nodes_per_dim);
      const auto b1 = reduced_block_finite(
          transformed, EnsembleSpec::x_ensemble(ctx.K, dual.field, ctx.c),
          ctx.tau0, n, n, ctx.nodes_per_dim);
      rep.invariant_deviation = std::max(
          rep.invariant_deviation, (b0.block - b1.block).cwiseAbs().maxCoeff());
    }
    for (int n = 0; n <= ctx.N_max; ++n) {
      for (int np = 0; np <= ctx.N_max; ++np) {
        const auto b0 = reduced_block_finite(
            model, EnsembleSpec::s_ensemble(ctx.tau, Cplx(ctx.s, 0), ctx.c),
            ctx.tau0, n, np, ctx.nodes_per_dim);
        const auto b1 = reduced_block_finite(
            transformed, EnsembleSpec::s_ensemble(ctx.tau, Cplx(ctx.s, 0), ctx.c),
            ctx.tau0, n, np, ctx.nodes_per_dim);
        const Cplx law = std::exp(Cplx(0, phi * (n - np)));
        rep.phase_law_deviation =
            std::max(rep.phase_law_deviation,
                     (b1.block - law * b0.block).cwiseAbs().maxCoeff());
        // Direct recomputation of the imaginary shift s -> s - 2i phi.
        const auto bs = reduced_block_finite(
            model, EnsembleSpec::s_ensemble(ctx.tau, Cplx(ctx.s, -2.0 * phi), ctx.c),
            ctx.tau0, n, np, ctx.nodes_per_dim);
        rep.imaginary_shift_deviation =
            std::max(rep.imaginary_shift_deviation,
                     (b1.block - bs.block).cwiseAbs().maxCoeff());
      }
    }
    return rep;
  }

  // P2: s-ensemble blocks invariant; x-ensemble trajectory elements pick up
  // e^{-i phi (T - T')}.
  for (int n = 0; n <= ctx.N_max; ++n) {
    for (int np = 0; np <= ctx.N_max; ++np) {
      const auto b0 = reduced_block_finite(
          model, EnsembleSpec::s_ensemble(ctx.tau, Cplx(ctx.s, 0), ctx.c),
          ctx.tau0, n, np, ctx.nodes_per_dim);
      const auto b1 = reduced_block_finite(
          transformed, EnsembleSpec::s_ensemble(ctx.tau, Cplx(ctx.s, 0), ctx.c),
          ctx.tau0, n, np, ctx.nodes_per_dim);
      rep.invariant_deviation = std::max(
          rep.invariant_deviation, (b0.block - b1.block).cwiseAbs().maxCoeff());
    }
  }
  const TiltPoint dual = dual_map(model, TiltPoint::s_tilt(ctx.s, ctx.c), true);
  const double x = dual.field;
  const SampleBatch batch =
      sample_fixed_count(model, ctx.K, 2 * ctx.n_pairs, ctx.seed);
  for (int p = 0; p < ctx.n_pairs; ++p) {
    const Trajectory& a = batch.trajectories[2 * p];
    const Trajectory& b = batch.trajectories[2 * p + 1];
    const Cplx amp0 = trajectory_amplitude(model, a, b);
    if (std::abs(amp0) < 1e-200) continue;
    const Cplx amp1 = trajectory_amplitude(transformed, a, b);
    const double ta = a.final_jump_time(), tb = b.final_jump_time();
    const Cplx law = std::exp(Cplx(0, -phi * (ta - tb)));
    rep.phase_law_deviation = std::max(rep.phase_law_deviation,
                                       std::abs(amp1 / amp0 - law));
    // Imaginary shift on the tilted elements: the transform acts as the
    // conjugate shift of x along the imaginary axis.
    const Cplx x_shift(x, 2.0 * phi);
    const Cplx el_shift = std::exp(-0.5 * x_shift * ta) *
                          std::conj(std::exp(-0.5 * x_shift * tb)) * amp0;
    const Cplx el_trans =
        std::exp(-0.5 * x * (ta + tb)) * amp1;
    rep.imaginary_shift_deviation =
        std::max(rep.imaginary_shift_deviation,
                 std::abs(el_trans - el_shift) / std::abs(el_shift));
  }
  return rep;
}

}  // namespace trajstat
