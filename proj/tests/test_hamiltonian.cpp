#include <gtest/gtest.h>

#include <random>

#include <mfldp/mfldp.hpp>

using namespace mfldp;

namespace {

Model v0() { return ehrenfest_from_potential(zero_potential(), 1); }
Model potts(int d, double beta = 0.0) {
  return glauber_from_potential(uniform_base_rates(d), d, beta == 0.0 ? zero_potential() : curie_weiss_simplex(beta));
}

// Golden-section maximisation of a concave function on [lo, hi].
template <class F>
double golden_max(F f, double lo, double hi, int iters = 200) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

// sup over p in [-R,R]^2 (gauge p_3 = 0 for d = 3, p_2 = 0 for d = 2) by a
// coarse grid scan refined with nested golden sections.
double brute_force_glauber(const Model& m, ConstSpan mu, ConstSpan v) {
  const std::size_t d = mu.size();
  auto obj = [&](const Vector& p) { return dot(p, v) - eval_H(m, mu, p); };
  if (d == 2) {
    return golden_max([&](double a) { return obj(Vector{a, 0.0}); }, -10.0, 10.0);
  }
  return golden_max(
      [&](double a) { return golden_max([&](double b) { return obj(Vector{a, b, 0.0}); }, -10.0, 10.0, 120); }, -10.0,
      10.0, 120);
}

Vector random_cube(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(static_cast<std::size_t>(d));
  for (auto& v : x) v = u(rng);
  return x;
}

Vector random_simplex(std::mt19937_64& rng, int d) {
  std::exponential_distribution<double> e(1.0);
  Vector mu(static_cast<std::size_t>(d));
  double s = 0.0;
  for (auto& v : mu) s += (v = e(rng));
  for (auto& v : mu) v /= s;
  return mu;
}

Vector random_state(std::mt19937_64& rng, const Model& m) {
  return domain_of(m) == Domain::cube ? random_cube(rng, dimension(m)) : random_simplex(rng, dimension(m));
}

Vector random_p(std::mt19937_64& rng, int d, double scale = 1.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector p(static_cast<std::size_t>(d));
  for (auto& v : p) v = u(rng);
  return p;
}

std::vector<Model> all_models() {
  return {v0(),
          ehrenfest_from_potential(curie_weiss_cube(1.4), 2),
          ehrenfest_sqrt_example(),
          ehrenfest_nonunique_example(0.4),
          potts(2),
          potts(3, 2.0),
          glauber_from_potential({0.0, 1.0, 0.5, 2.0, 0.0, 1.0, 0.3, 0.0, 0.0}, 3, curie_weiss_simplex(1.0))};
}

}  // namespace

TEST(Hamiltonian, VanishesAtZeroMomentum) {
  std::mt19937_64 rng(1);
  for (const auto& m : all_models())
    for (int s = 0; s < 200; ++s) {
      const Vector x = random_state(rng, m);
      EXPECT_EQ(eval_H(m, x, Vector(x.size(), 0.0)), 0.0);
    }
}

TEST(Hamiltonian, HandEvaluation) {
  EXPECT_NEAR(eval_H(v0(), Vector{0.0}, Vector{0.5 * std::log(2.0)}), 0.25, 1e-15);
  for (double c : {-3.0, 0.0, 2.5}) EXPECT_NEAR(eval_H(potts(2), Vector{0.5, 0.5}, Vector{c, c}), 0.0, 1e-15);
}

TEST(Hamiltonian, RejectsDimensionMismatch) {
  EXPECT_THROW(eval_H(v0(), Vector{0.0}, Vector{0.0, 1.0}), InvalidArgument);
  EXPECT_THROW(grad_H_p(potts(3), Vector{0.5, 0.5}, Vector{0.0, 0.0, 0.0}), InvalidArgument);
}

TEST(Hamiltonian, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  for (const auto& m : all_models()) {
    const int d = dimension(m);
    for (int s = 0; s < 100; ++s) {
      const Vector x = random_state(rng, m);
      const Vector p = random_p(rng, d);
      const Vector g = grad_H_p(m, x, p);
      for (int i = 0; i < d; ++i) {
        const double h = 1e-5;
        Vector a = p, b = p;
        a[i] += h;
        b[i] -= h;
        EXPECT_NEAR(g[i], (eval_H(m, x, a) - eval_H(m, x, b)) / (2 * h), 1e-6 * (1.0 + std::abs(g[i])));
      }
      if (domain_of(m) == Domain::simplex) {
        double s_ = 0.0;
        for (double v : g) s_ += v;
        EXPECT_NEAR(s_, 0.0, 1e-12);
      }
    }
  }
}

TEST(Hamiltonian, VectorField) {
  for (double x : {-0.7, 0.0, 0.35}) EXPECT_NEAR(vector_field_F(v0(), Vector{x})[0], -2.0 * x, 1e-15);
  EXPECT_NEAR(vector_field_F(ehrenfest_nonunique_example(0.5), Vector{0.25})[0], 1.0, 1e-15);
  const Model g = potts(3, 1.5);
  const Vector mu = {0.2, 0.5, 0.3};
  Vector t(9);
  std::get<GlauberModel>(g).rates(mu, t);
  const Vector F = vector_field_F(g, mu);
  for (int a = 0; a < 3; ++a) {
    double expect = 0.0;
    for (int b = 0; b < 3; ++b) expect += t[b * 3 + a] - t[a * 3 + b];
    EXPECT_NEAR(F[a], expect, 1e-14);
  }
  // Ehrenfest: 2 (v_+ - v_-)
  const Model cw = ehrenfest_from_potential(curie_weiss_cube(1.2), 2);
  Vector up(2), down(2);
  std::get<EhrenfestModel>(cw).rates(Vector{0.3, -0.6}, up, down);
  const Vector Fc = vector_field_F(cw, Vector{0.3, -0.6});
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(Fc[i], 2.0 * (up[i] - down[i]), 1e-15);
}

TEST(Hamiltonian, ConvexInMomentum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& m : all_models())
    for (int s = 0; s < 100; ++s) {
      const Vector x = random_state(rng, m);
      const Vector p1 = random_p(rng, dimension(m), 3.0), p2 = random_p(rng, dimension(m), 3.0);
      const double l = u(rng);
      Vector mid(p1.size());
      for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = l * p1[i] + (1 - l) * p2[i];
      EXPECT_LE(eval_H(m, x, mid), l * eval_H(m, x, p1) + (1 - l) * eval_H(m, x, p2) + 1e-10);
    }
}

TEST(Hamiltonian, GlauberGaugeInvariance) {
  std::mt19937_64 rng(4);
  const Model m = potts(3, 0.7);
  for (int s = 0; s < 50; ++s) {
    const Vector mu = random_simplex(rng, 3);
    const Vector p = {0.25, -0.5, 1.0};
    Vector q = p;
    for (auto& v : q) v += 0.75;
    EXPECT_EQ(eval_H(m, mu, p), eval_H(m, mu, q));
  }
}

TEST(Lagrangian, ClosedFormExample) {
  const auto L = legendre_ehrenfest_1coord(0.5, 0.5, 1.5);
  const double expect = 0.75 * std::log(2.0) - 0.25;
  EXPECT_NEAR(L.value.value(), expect, 1e-14);
  EXPECT_NEAR(expect, 0.2698604, 1e-7);
  EXPECT_NEAR((*L.maximizer)[0], 0.5 * std::log(2.0), 1e-14);
  const double brute = golden_max(
      [](double p) { return 1.5 * p - 0.5 * std::expm1(2 * p) - 0.5 * std::expm1(-2 * p); }, -10, 10);
  EXPECT_NEAR(L.value.value(), brute, 1e-10);
}

TEST(Lagrangian, ZeroOnTheDrift) {
  for (double a : {0.1, 0.5, 2.0})
    for (double b : {0.0, 0.3, 1.0}) EXPECT_NEAR(legendre_ehrenfest_1coord(a, b, 2 * (a - b)).value.value(), 0.0, 1e-14);
  EXPECT_NEAR(legendre_ehrenfest_1coord(0.0, 0.7, -1.4).value.value(), 0.0, 1e-14);
}

TEST(Lagrangian, OneSidedCases) {
  EXPECT_TRUE(legendre_ehrenfest_1coord(0.0, 1.0, 1.0).is_infinite());
  EXPECT_TRUE(legendre_ehrenfest_1coord(1.0, 0.0, -1.0).is_infinite());
  EXPECT_TRUE(legendre_ehrenfest_1coord(0.0, 0.0, 0.1).is_infinite());
  EXPECT_EQ(legendre_ehrenfest_1coord(0.0, 0.0, 0.0).value.value(), 0.0);
  // v = 0 with only one direction: sup approached as p -> -inf, not attained
  const auto L = legendre_ehrenfest_1coord(0.0, 0.8, 0.0);
  EXPECT_DOUBLE_EQ(L.value.value(), 0.8);
  EXPECT_FALSE(L.maximizer.has_value());
  // brute force against the one-sided closed form
  for (double v : {-0.3, -1.0, -4.0}) {
    const double brute = golden_max([&](double p) { return p * v - 0.8 * std::expm1(-2 * p); }, -20, 20);
    EXPECT_NEAR(legendre_ehrenfest_1coord(0.0, 0.8, v).value.value(), brute, 1e-9);
  }
  EXPECT_THROW(legendre_ehrenfest_1coord(-0.1, 1.0, 0.0), InvalidArgument);
}

TEST(Lagrangian, MatchesOneDimensionalBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ra(0.01, 2.0), rv(-3.0, 3.0);
  for (int s = 0; s < 100; ++s) {
    const double a = ra(rng), b = ra(rng), v = rv(rng);
    const double brute =
        golden_max([&](double p) { return p * v - a * std::expm1(2 * p) - b * std::expm1(-2 * p); }, -15, 15);
    EXPECT_NEAR(legendre_ehrenfest_1coord(a, b, v).value.value(), brute, 1e-9 * (1 + brute));
  }
}

TEST(Lagrangian, DriftVelocityHasZeroCost) {
  std::mt19937_64 rng(6);
  for (const auto& m : all_models())
    for (int s = 0; s < 50; ++s) {
      const Vector x = random_state(rng, m);
      const auto L = legendre(m, x, vector_field_F(m, x));
      ASSERT_FALSE(L.is_infinite());
      EXPECT_NEAR(L.value.value(), 0.0, 1e-9);
    }
}

TEST(Lagrangian, GlauberOffTangentIsInfinite) {
  EXPECT_TRUE(legendre(potts(2), Vector{0.5, 0.5}, Vector{0.05, 0.05}).is_infinite());
  EXPECT_TRUE(legendre(potts(3), Vector{0.3, 0.3, 0.4}, Vector{0.1, 0.0, 0.0}).is_infinite());
}

TEST(Lagrangian, GlauberBoundaryCases) {
  const Model m = potts(3);
  // mass cannot leave an empty state
  EXPECT_TRUE(legendre(m, Vector{0.0, 0.5, 0.5}, Vector{-0.1, 0.05, 0.05}).is_infinite());
  // inflow into an empty state is fine
  const auto L = legendre(m, Vector{0.0, 0.5, 0.5}, Vector{0.2, -0.1, -0.1});
  ASSERT_FALSE(L.is_infinite());
  EXPECT_GT(L.value.value(), 0.0);
  // zero velocity at a corner: closed-set split, not attained
  const auto C = legendre(m, Vector{1.0, 0.0, 0.0}, Vector{0.0, 0.0, 0.0});
  ASSERT_FALSE(C.is_infinite());
  EXPECT_NEAR(C.value.value(), 2.0, 1e-12);  // total escape rate from the corner
}

TEST(Lagrangian, GlauberMatchesBruteForceGrid) {
  const Model m2 = potts(2);
  for (double w : {-0.8, -0.2, 0.0, 0.3, 1.1}) {
    const Vector v = {w, -w};
    const auto L = legendre(m2, Vector{0.5, 0.5}, v);
    EXPECT_NEAR(L.value.value(), brute_force_glauber(m2, Vector{0.5, 0.5}, v), 1e-6);
  }
  const Model m3 = potts(3, 1.2);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int s = 0; s < 5; ++s) {
    const Vector mu = random_simplex(rng, 3);
    Vector v = {u(rng), u(rng), 0.0};
    v[2] = -v[0] - v[1];
    const auto L = legendre(m3, mu, v);
    EXPECT_NEAR(L.value.value(), brute_force_glauber(m3, mu, v), 1e-6);
  }
}

TEST(Lagrangian, FenchelYoung) {
  std::mt19937_64 rng(8);
  for (const auto& m : all_models())
    for (int s = 0; s < 100; ++s) {
      const Vector x = random_state(rng, m);
      const Vector p = random_p(rng, dimension(m));
      const Vector v = grad_H_p(m, x, p);
      const double H = eval_H(m, x, p);
      const auto L = legendre(m, x, v);
      ASSERT_FALSE(L.is_infinite());
      EXPECT_NEAR(L.value.value(), dot(p, v) - H, 1e-8 * (1.0 + std::abs(H)));
      // inequality at an unrelated momentum
      const Vector q = random_p(rng, dimension(m));
      EXPECT_GE(L.value.value() + eval_H(m, x, q), dot(q, v) - 1e-9);
      EXPECT_GE(L.value.value(), 0.0);
    }
}

// sup_v <p,v> - L(x,v) over a velocity grid recovers H(x,p).
TEST(Lagrangian, Biconjugacy) {
  std::mt19937_64 rng(9);
  const Model m = ehrenfest_from_potential(curie_weiss_cube(0.8), 1);
  for (int s = 0; s < 10; ++s) {
    const Vector x = random_cube(rng, 1);
    const Vector p = random_p(rng, 1, 1.0);
    double best = -1e300;
    for (int k = -4000; k <= 4000; ++k) {
      const double v = k * 2e-3;
      const auto L = legendre(m, x, Vector{v});
      if (!L.is_infinite()) best = std::max(best, p[0] * v - L.value.value());
    }
    EXPECT_NEAR(best, eval_H(m, x, p), 1e-4);
  }
}

TEST(FiniteGenerator, ConstantGivesZero) {
  const auto c = [](ConstSpan) { return 3.0; };
  EXPECT_EQ(eval_Hn(v0(), 10, c, Vector{0.2}), 0.0);
  EXPECT_EQ(eval_Hn(potts(3, 1.0), 6, c, Vector{0.5, 1.0 / 3.0, 1.0 / 6.0}), 0.0);
}

TEST(FiniteGenerator, LinearFunctionIsExact) {
  const double p = 0.37;
  const auto f = [p](ConstSpan x) { return p * x[0]; };
  for (long n : {4L, 40L, 400L}) {
    for (long k = 0; k <= n; k += std::max(1L, n / 8)) {
      const double x = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n);
      const double expect = 0.5 * (1 - x) * std::expm1(2 * p) + 0.5 * (1 + x) * std::expm1(-2 * p);
      EXPECT_NEAR(eval_Hn(v0(), n, f, Vector{x}), expect, 1e-12);
    }
  }
}

TEST(FiniteGenerator, RejectsOffLatticeState) {
  const auto f = [](ConstSpan x) { return x[0]; };
  EXPECT_THROW(eval_Hn(v0(), 10, f, Vector{0.25}), InvalidArgument);
  EXPECT_NO_THROW(eval_Hn(v0(), 10, f, Vector{0.2 + 1e-12}));
}

TEST(FiniteGenerator, ErrorHalvesWhenNDoubles) {
  auto sup_err = [](const Model& m, long n, const ScalarFunction& f, const SmoothFunction& g) {
    double e = 0.0;
    const int d = dimension(m);
    if (domain_of(m) == Domain::cube) {
      for (long k = 0; k <= n; ++k) {
        const Vector x = {-1.0 + 2.0 * k / static_cast<double>(n)};
        Vector p(1);
        g.gradient(x, p);
        e = std::max(e, std::abs(eval_Hn(m, n, f, x) - eval_H(m, x, p)));
      }
    } else {
      for (long i = 0; i <= n; ++i)
        for (long j = 0; i + j <= n; ++j) {
          const Vector mu = {i / static_cast<double>(n), j / static_cast<double>(n), (n - i - j) / static_cast<double>(n)};
          Vector p(static_cast<std::size_t>(d));
          g.gradient(mu, p);
          e = std::max(e, std::abs(eval_Hn(m, n, f, mu) - eval_H(m, mu, p)));
        }
    }
    return e;
  };
  const SmoothFunction q1 = quadratic_function(Vector{0.1}, 1.3);
  const double r1 = sup_err(v0(), 100, q1.value, q1) / sup_err(v0(), 200, q1.value, q1);
  EXPECT_GE(r1, 1.7);
  EXPECT_LE(r1, 2.3);
  const SmoothFunction q3 = quadratic_function(Vector{0.2, 0.3, 0.5}, 1.0);
  const Model g = potts(3);
  const double r3 = sup_err(g, 100, q3.value, q3) / sup_err(g, 200, q3.value, q3);
  EXPECT_GE(r3, 1.7);
  EXPECT_LE(r3, 2.3);
}
