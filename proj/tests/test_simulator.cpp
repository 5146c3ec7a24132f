#include <gtest/gtest.h>

#include <mfldp/mfldp.hpp>

using namespace mfldp;

namespace {

Model v0() { return ehrenfest_from_potential(zero_potential(), 1); }

Trajectory exact_flow(double x0, double T, int steps) {
  Trajectory tr;
  for (int k = 0; k <= steps; ++k) {
    const double t = T * k / steps;
    tr.times.push_back(t);
    tr.states.push_back(Vector{x0 * std::exp(-2.0 * t)});
  }
  return tr;
}

}  // namespace

// n = 1 is a two-state flip process with unit rate: jumps form a Poisson
// process of rate 1.
TEST(Simulator, PoissonClockForSingleSpin) {
  const Model m = v0();
  const double T = 3.0;
  const int reps = 10000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r)
    sum += static_cast<double>(simulate_path(m, 1, Vector{1.0}, T, SplitMix64::derive(99, r).next()).jumps);
  const double mean = sum / reps;
  const double sigma = std::sqrt(T / reps);
  EXPECT_NEAR(mean, T, 3.0 * sigma);
}

TEST(Simulator, DeterministicGivenSeed) {
  const Model m = glauber_from_potential(uniform_base_rates(3), 3, curie_weiss_simplex(1.5));
  const Vector start = {0.5, 0.25, 0.25};
  const auto a = simulate_path(m, 40, start, 2.0, 17);
  const auto b = simulate_path(m, 40, start, 2.0, 17);
  const auto c = simulate_path(m, 40, start, 2.0, 18);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.times, c.times);
}

TEST(Simulator, LatticeClosureAndSingleJumps) {
  const Model cube = ehrenfest_from_potential(curie_weiss_cube(1.2), 2);
  const auto tr = simulate_path(cube, 30, Vector{0.2, -0.4}, 3.0, 5);
  ASSERT_GT(tr.jumps, 10u);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    EXPECT_NO_THROW(lattice_counts(Domain::cube, 30, tr.states[k], 1e-12));
    if (k > 0 && k + 1 < tr.size()) {
      EXPECT_GT(tr.times[k], tr.times[k - 1]);
      double moved = 0.0;
      int axes = 0;
      for (int i = 0; i < 2; ++i) {
        const double dx = std::abs(tr.states[k][i] - tr.states[k - 1][i]);
        if (dx > 0) ++axes;
        moved += dx;
      }
      EXPECT_EQ(axes, 1);
      EXPECT_NEAR(moved, 2.0 / 30.0, 1e-12);
    }
  }
  const Model simplex = glauber_from_potential(uniform_base_rates(3), 3, zero_potential());
  const auto ts = simulate_path(simplex, 12, Vector{0.5, 0.25, 0.25}, 3.0, 6);
  for (const auto& mu : ts.states) {
    const Counts c = lattice_counts(Domain::simplex, 12, mu, 1e-12);
    EXPECT_EQ(c[0] + c[1] + c[2], 12);
  }
}

TEST(Simulator, EmptyStateIsNeverLeft) {
  // mass can flow into state 3 but a particle must enter before any can leave;
  // with base rates 0 into state 3 it stays empty forever.
  std::vector<double> r = uniform_base_rates(3);
  r[0 * 3 + 2] = 0.0;
  r[1 * 3 + 2] = 0.0;
  const Model closed = glauber_from_potential(r, 3, zero_potential());
  const auto tr = simulate_path(closed, 20, Vector{0.5, 0.5, 0.0}, 5.0, 3);
  for (const auto& mu : tr.states) EXPECT_EQ(mu[2], 0.0);
}

TEST(Simulator, AbsorptionIsReported) {
  // all base rates zero: total rate vanishes immediately
  const Model m = glauber_from_potential(std::vector<double>(4, 0.0), 2, zero_potential());
  const auto tr = simulate_path(m, 10, Vector{0.5, 0.5}, 1.0, 1);
  EXPECT_TRUE(tr.absorbed);
  EXPECT_EQ(tr.jumps, 0u);
  EXPECT_EQ(tr.states.back(), tr.states.front());
}

TEST(Simulator, LawOfLargeNumbers) {
  const Model m = v0();
  const Trajectory ref = exact_flow(0.8, 1.0, 1000);
  const double d = sup_distance(simulate_path(m, 20000, Vector{0.8}, 1.0, 4), ref);
  EXPECT_LT(d, 0.05);
}

TEST(Simulator, SupDistanceSeesJumpLeftLimits) {
  Trajectory path;
  path.kind = PathKind::piecewise_constant;
  path.times = {0.0, 0.5, 1.0};
  path.states = {Vector{0.0}, Vector{1.0}, Vector{1.0}};
  Trajectory ref;
  ref.times = {0.0, 1.0};
  ref.states = {Vector{0.0}, Vector{1.0}};
  // just before 0.5 the path is 0 while the reference is 0.5
  EXPECT_NEAR(sup_distance(path, ref), 0.5, 1e-15);
}

TEST(TubeProbability, WholeSpaceTubeIsCertain) {
  const Model m = v0();
  const auto ref = polyline({0.0, 1.0}, {Vector{0.3}, Vector{-0.4}}, 10);
  EXPECT_EQ(estimate_tube_probability(m, 20, ref, 2.5, 200, 1, 1).probability(), 1.0);
}

TEST(TubeProbability, Preconditions) {
  const Model m = v0();
  const auto ref = polyline({0.0, 1.0}, {Vector{0.3}, Vector{-0.4}}, 10);
  EXPECT_THROW(estimate_tube_probability(m, 20, ref, 0.1, 0, 1, 1), InvalidArgument);
  EXPECT_THROW(estimate_tube_probability(m, 20, ref, 0.0, 10, 1, 1), InvalidArgument);
  Trajectory outside = ref;
  outside.states[3] = Vector{1.5};
  EXPECT_THROW(estimate_tube_probability(m, 20, outside, 0.1, 10, 1, 1), InvalidArgument);
}

TEST(TubeProbability, IndependentOfThreadCount) {
  const Model m = v0();
  const auto ref = exact_flow(0.6, 0.5, 50);
  const auto a = estimate_tube_probability(m, 50, ref, 0.1, 9000, 21, 1);
  const auto b = estimate_tube_probability(m, 50, ref, 0.1, 9000, 21, 3);
  EXPECT_EQ(a.hits, b.hits);
}

TEST(TubeProbability, FlowTubeGrowsWithN) {
  const Model m = v0();
  const auto ref = exact_flow(0.6, 1.0, 200);
  double prev = -1.0;
  for (long n : {50L, 100L, 200L}) {
    const double p = estimate_tube_probability(m, n, ref, 0.1, 4000, 3, 0).probability();
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(RateEstimate, FlowReferenceHasSmallDecay) {
  const Model m = v0();
  FlowConfig cfg;
  cfg.horizon = 0.5;
  cfg.dt = 5e-3;
  const auto ref = integrate_mkv(m, Vector{0.6}, cfg);
  const auto rep = ldp_rate_estimate(m, ref, 0.1, {100, 200}, 4000, 5, InitialRate::point_mass(Vector{0.6}), 0);
  ASSERT_EQ(rep.decay_estimates.size(), 2u);
  for (const auto& e : rep.decay_estimates) {
    ASSERT_TRUE(e.has_value());
    EXPECT_LT(*e, 0.1);
    EXPECT_GE(*e, 0.0);
  }
  EXPECT_LT(rep.reference_action.value(), 1e-6);
}

TEST(RateEstimate, ZeroHitsGiveAbsentEstimate) {
  const Model m = v0();
  const auto ref = polyline({0.0, 1.0}, {Vector{-0.8}, Vector{0.8}}, 20);
  const auto rep = ldp_rate_estimate(m, ref, 0.02, {200}, 50, 1, InitialRate::point_mass(Vector{-0.8}), 1);
  EXPECT_EQ(rep.hits[0], 0u);
  EXPECT_EQ(rep.tube_probabilities[0], 0.0);
  EXPECT_FALSE(rep.decay_estimates[0].has_value());
}

TEST(RateEstimate, RejectsUnorderedN) {
  const Model m = v0();
  const auto ref = polyline({0.0, 1.0}, {Vector{0.0}, Vector{0.0}}, 2);
  EXPECT_THROW(ldp_rate_estimate(m, ref, 0.1, {100, 50}, 10, 1, InitialRate::zero(), 1), InvalidArgument);
}

TEST(Rng, StreamsAreDistinctAndUniform) {
  SplitMix64 a = SplitMix64::derive(1, 0), b = SplitMix64::derive(1, 1);
  EXPECT_NE(a.next(), b.next());
  SplitMix64 r(123);
  double mean = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / N, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / N));
}
