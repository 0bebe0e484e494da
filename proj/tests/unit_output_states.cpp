#include "doctest.h"

#include <cmath>

#include "test_models.hpp"
#include "trajstat/counting.hpp"
#include "trajstat/errors.hpp"
#include "trajstat/output_states.hpp"
#include "trajstat/renewal.hpp"

using namespace trajstat;

TEST_CASE("layer grid integrates the ordered simplex") {
  const auto q = testmodels::driven_qubit();  // two channels
  const double tau0 = 1.3;
  for (int n : {0, 1, 2, 3}) {
    const auto grid = layer_grid(q, tau0, n, 5);
    double total = 0.0;
    for (const auto& x : grid) {
      total += x.weight;
      REQUIRE(static_cast<int>(x.times.size()) == n);
      for (std::size_t i = 1; i < x.times.size(); ++i)
        CHECK(x.times[i] >= x.times[i - 1]);
    }
    // Volume tau0^n / n! per channel word, times 2^n channel words.
    double expect = 1.0;
    for (int i = 1; i <= n; ++i) expect *= 2.0 * tau0 / i;
    CHECK(std::abs(total - expect) < 1e-10 * std::max(1.0, expect));
  }
  CHECK_THROWS_AS(layer_grid(q, 1.0, 7, 10), QuadratureOverflow);
  CHECK_THROWS_AS(layer_grid(q, -1.0, 1, 5), DomainError);
}

TEST_CASE("gram matrix of the renewal model") {
  const auto m = three_level_renewal();
  const auto g = gram_matrix(m);
  const int d = m.dim();
  CHECK(g.rank == 3);
  // Single jump |0><1|: only the (m = 0, m' = 0) block can be populated.
  for (int mi = 0; mi < d; ++mi)
    for (int mt = 0; mt < d; ++mt) {
      if (mi == 0 && mt == 0) continue;
      for (int mp = 0; mp < d; ++mp)
        for (int mtp = 0; mtp < d; ++mtp)
          CHECK(std::abs(g.entries(mi * d + mp, mt * d + mtp)) < 1e-14);
    }
  // Orthonormal bond basis.
  CHECK((g.bond_basis.adjoint() * g.bond_basis -
         Mat::Identity(g.rank, g.rank))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("gram matrix requires strict stability") {
  CHECK_THROWS_AS(gram_matrix(two_level_decay()), DomainError);
}

TEST_CASE("canonical overlap from the analytic renewal potential") {
  const auto m = three_level_renewal();
  const auto st = detect_renewal(m);
  REQUIRE(st.has_value());
  const double g02 = analytic_potential(m, *st, 0.2).g;
  const double g03 = analytic_potential(m, *st, 0.3).g;
  const double g04 = analytic_potential(m, *st, 0.4).g;
  const Cplx ov = canonical_overlap(m, 6, TiltPoint::x_tilt(0.2),
                                    TiltPoint::x_tilt(0.4));
  const double oracle = std::exp(6.0 * g03 - 3.0 * (g02 + g04));
  CHECK(std::abs(ov.real() / oracle - 1.0) < 1e-9);
  CHECK(std::abs(ov.imag()) < 1e-14);
  CHECK(canonical_overlap(m, 0, TiltPoint::x_tilt(0.2),
                          TiltPoint::x_tilt(0.4)) == Cplx(1, 0));
  CHECK_THROWS_AS(canonical_overlap(m, 3, TiltPoint::s_tilt(0.1),
                                    TiltPoint::x_tilt(0.4)),
                  DomainError);
}

TEST_CASE("undeformed layer probabilities match the counting module") {
  const auto q = testmodels::driven_qubit();
  const double tau0 = 1.0;
  const auto counted = count_resolved_propagate(q, tau0, 8);
  const EnsembleSpec spec = EnsembleSpec::s_ensemble(4.0, Cplx(0, 0));
  for (int n : {0, 1, 2}) {
    const auto blk = reduced_block_finite(q, spec, tau0, n, n, 10);
    CHECK(std::abs(blk.block.trace().real() - counted.p(n)) < 1e-8);
    CHECK(std::abs(blk.block.trace().imag()) < 1e-12);
  }
}

TEST_CASE("fixed-count layer traces are a probability distribution") {
  const auto q = testmodels::driven_qubit();
  const int K = 3;
  const EnsembleSpec spec = EnsembleSpec::x_ensemble(K, Cplx(0.3, 0));
  double total = 0.0;
  for (int n = 0; n <= K; ++n) {
    const auto blk = reduced_block_finite(q, spec, 1.0, n, n, 8);
    const double tr = blk.block.trace().real();
    CHECK(tr >= -1e-12);
    total += tr;
  }
  CHECK(std::abs(total - 1.0) < 1e-6);
  // Layer superselection: off-diagonal blocks vanish identically.
  const auto off = reduced_block_finite(q, spec, 1.0, 1, 2, 8);
  CHECK(off.block.isZero(0.0));
}

TEST_CASE("renewal fixed-count blocks already sit at the limit") {
  const auto m = three_level_renewal();
  const double x = 0.3, tau0 = 1.0;
  const EnsembleSpec spec = EnsembleSpec::x_ensemble(5, Cplx(x, 0));
  const auto fin = reduced_block_finite(m, spec, tau0, 1, 1, 6);
  const auto lim = limit_state_dual(m, x, RVec(0), tau0, 1, 6, true);
  CHECK(block_distance(fin.block, lim.blocks.at({1, 1})) < 1e-10);
}

TEST_CASE("finite-time blocks converge to the limit state") {
  const auto q = testmodels::driven_qubit();
  const double s = 0.3, tau0 = 1.0;
  const auto lim = limit_state(q, s, RVec(0), tau0, 0, 6);
  auto dist = [&](double tau) {
    const auto blk = reduced_block_finite(
        q, EnsembleSpec::s_ensemble(tau, Cplx(s, 0)), tau0, 0, 0, 6);
    return block_distance(blk.block, lim.blocks.at({0, 0}));
  };
  const double d4 = dist(4.0), d8 = dist(8.0);
  CHECK(d8 < d4);
  CHECK(d8 < 1e-3);
}

TEST_CASE("phase covariance of the reduced states") {
  const auto q = testmodels::driven_qubit();
  PhaseCheckContext ctx;
  const auto rep = phase_covariance_check(q, PhaseKind::P1, 0.3, ctx);
  CHECK(rep.invariant_deviation < 1e-10);
  CHECK(rep.phase_law_deviation < 1e-10);
  CHECK(rep.imaginary_shift_deviation < 1e-10);
}
