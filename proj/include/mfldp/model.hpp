#pragma once

// Mean-field jump models on the cube [-1,1]^d (Ehrenfest type) and on the
// probability simplex over {1,...,d} (Glauber type).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"

namespace mfldp {

/// A C^1 potential V together with its gradient.
struct Potential {
  std::string kind;
  double beta = 0.0;
  std::function<double(ConstSpan)> value;
  std::function<void(ConstSpan, MutableSpan)> gradient;
};

inline Potential zero_potential() {
  return {"zero", 0.0, [](ConstSpan) { return 0.0; },
          [](ConstSpan, MutableSpan g) { std::fill(g.begin(), g.end(), 0.0); }};
}

/// V(x) = beta/2 * |x|^2.
inline Potential quadratic_potential(double beta) {
  return {"quadratic", beta,
          [beta](ConstSpan x) { return 0.5 * beta * dot(x, x); },
          [beta](ConstSpan x, MutableSpan g) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = beta * x[i];
          }};
}

/// Cube: V(x) = -beta/2 * |x|^2, the mean-field Ising interaction per coordinate.
inline Potential curie_weiss_cube(double beta) {
  Potential p = quadratic_potential(-beta);
  p.kind = "curie_weiss";
  p.beta = beta;
  return p;
}

/// Simplex: V(mu) = -beta/2 * d/(d-1) * sum_a (mu(a) - 1/d)^2.
/// For d = 2 this is -beta/2 * (mu(1) - mu(2))^2.
inline Potential curie_weiss_simplex(double beta) {
  auto scale = [](std::size_t d) { return static_cast<double>(d) / static_cast<double>(d - 1); };
  return {"curie_weiss", beta,
          [beta, scale](ConstSpan mu) {
            const double c = 1.0 / static_cast<double>(mu.size());
            double s = 0.0;
            for (double m : mu) s += (m - c) * (m - c);
            return -0.5 * beta * scale(mu.size()) * s;
          },
          [beta, scale](ConstSpan mu, MutableSpan g) {
            const double c = 1.0 / static_cast<double>(mu.size());
            for (std::size_t a = 0; a < mu.size(); ++a) g[a] = -beta * scale(mu.size()) * (mu[a] - c);
          }};
}

/// Largest deviation between the supplied gradient and central differences of V.
inline double audit_potential_gradient(const Potential& V, ConstSpan x, double step = 1e-6) {
  Vector g(x.size()), y(x.begin(), x.end());
  V.gradient(x, g);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] + step;
    double up = V.value(y);
    y[i] = x[i] - step;
    double down = V.value(y);
    y[i] = x[i];
    err = std::max(err, std::abs((up - down) / (2 * step) - g[i]));
  }
  return err;
}

/// Ehrenfest-type model. `rates` fills the limiting fields v_+^i(x), v_-^i(x);
/// `finite_rates` fills the per-spin rates r_{n,+}^i(x), r_{n,-}^i(x) of the
/// n-particle system, so that the magnetisation jumps by +2/n e_i at rate
/// n (1-x_i)/2 r_{n,+}^i(x).
struct EhrenfestModel {
  using RateFn = std::function<void(ConstSpan x, MutableSpan up, MutableSpan down)>;
  using FiniteRateFn = std::function<void(ConstSpan x, long n, MutableSpan up, MutableSpan down)>;

  int d = 1;
  std::string name;
  RateFn rates;
  FiniteRateFn finite_rates;
  std::optional<Potential> potential;

  double v_plus(ConstSpan x, int i) const {
    Vector up(d), down(d);
    rates(x, up, down);
    return up[i];
  }
  double v_minus(ConstSpan x, int i) const {
    Vector up(d), down(d);
    rates(x, up, down);
    return down[i];
  }
};

/// Glauber-type model. `rates` fills the row-major d x d table v(a,b,mu);
/// `finite_kernel` fills r_n(a,b,mu), so that a particle moves from a to b at
/// total rate n mu(a) r_n(a,b,mu). Diagonal entries are always zero.
struct GlauberModel {
  using RateFn = std::function<void(ConstSpan mu, MutableSpan table)>;
  using FiniteRateFn = std::function<void(ConstSpan mu, long n, MutableSpan table)>;

  int d = 2;
  std::string name;
  RateFn rates;
  FiniteRateFn finite_kernel;
  std::optional<Potential> potential;
  std::vector<double> base_rates;  // row-major d x d, empty when not potential-based

  double v(int a, int b, ConstSpan mu) const {
    Vector t(static_cast<std::size_t>(d * d));
    rates(mu, t);
    return t[static_cast<std::size_t>(a * d + b)];
  }
};

using Model = std::variant<EhrenfestModel, GlauberModel>;

inline int dimension(const Model& m) {
  return std::visit([](const auto& x) { return x.d; }, m);
}

inline Domain domain_of(const Model& m) {
  return std::holds_alternative<EhrenfestModel>(m) ? Domain::cube : Domain::simplex;
}

inline const std::string& name_of(const Model& m) {
  return std::visit([](const auto& x) -> const std::string& { return x.name; }, m);
}

inline const std::optional<Potential>& potential_of(const Model& m) {
  return std::visit([](const auto& x) -> const std::optional<Potential>& { return x.potential; }, m);
}

// ---------------------------------------------------------------------------
// Default finite-n rates: divide out the occupation factor and cap at n.

inline EhrenfestModel::FiniteRateFn ehrenfest_capped_finite_rates(EhrenfestModel::RateFn v) {
  return [v = std::move(v)](ConstSpan x, long n, MutableSpan up, MutableSpan down) {
    v(x, up, down);
    const double cap = static_cast<double>(n);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double occ_minus = 0.5 * (1.0 - x[i]);  // fraction of -1 spins
      const double occ_plus = 0.5 * (1.0 + x[i]);
      up[i] = occ_minus > 0.0 ? std::min(up[i] / occ_minus, cap) : cap;
      down[i] = occ_plus > 0.0 ? std::min(down[i] / occ_plus, cap) : cap;
    }
  };
}

inline GlauberModel::FiniteRateFn glauber_capped_finite_kernel(GlauberModel::RateFn v) {
  return [v = std::move(v)](ConstSpan mu, long n, MutableSpan table) {
    v(mu, table);
    const std::size_t d = mu.size();
    const double cap = static_cast<double>(n);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        double& r = table[a * d + b];
        r = (a == b) ? 0.0 : (mu[a] > 0.0 ? std::min(r / mu[a], cap) : 0.0);
      }
  };
}

// ---------------------------------------------------------------------------
// Constructors.

/// v_+^i = (1-x_i)/2 e^{-dV/dx_i}, v_-^i = (1+x_i)/2 e^{+dV/dx_i};
/// r_{n,+-}^i(x) = exp{-n/2 (V(x +- 2/n e_i) - V(x))}.
inline EhrenfestModel ehrenfest_from_potential(Potential V, int d) {
  require(d > 0, "ehrenfest_from_potential: d must be positive");
  EhrenfestModel m;
  m.d = d;
  m.name = "ehrenfest_potential_" + V.kind;
  m.rates = [V, d](ConstSpan x, MutableSpan up, MutableSpan down) {
    Vector g(static_cast<std::size_t>(d));
    V.gradient(x, g);
    for (int i = 0; i < d; ++i) {
      up[i] = 0.5 * (1.0 - x[i]) * std::exp(-g[i]);
      down[i] = 0.5 * (1.0 + x[i]) * std::exp(g[i]);
    }
  };
  m.finite_rates = [V, d](ConstSpan x, long n, MutableSpan up, MutableSpan down) {
    const double v0 = V.value(x);
    const double step = 2.0 / static_cast<double>(n);
    const double half_n = 0.5 * static_cast<double>(n);
    Vector y(x.begin(), x.end());
    for (int i = 0; i < d; ++i) {
      y[i] = x[i] + step;
      up[i] = std::exp(-half_n * (V.value(y) - v0));
      y[i] = x[i] - step;
      down[i] = std::exp(-half_n * (V.value(y) - v0));
      y[i] = x[i];
    }
  };
  m.potential = std::move(V);
  return m;
}

/// d = 1 model with limiting rates sqrt(1 -+ x) and truncated finite-n rates
/// (2/sqrt(1 -+ x)) ^ n; individual spin rates diverge at the faces.
inline EhrenfestModel ehrenfest_sqrt_example() {
  EhrenfestModel m;
  m.d = 1;
  m.name = "ehrenfest_sqrt";
  m.rates = [](ConstSpan x, MutableSpan up, MutableSpan down) {
    up[0] = std::sqrt(std::max(0.0, 1.0 - x[0]));
    down[0] = std::sqrt(std::max(0.0, 1.0 + x[0]));
  };
  m.finite_rates = [](ConstSpan x, long n, MutableSpan up, MutableSpan down) {
    const double cap = static_cast<double>(n);
    const double a = 1.0 - x[0], b = 1.0 + x[0];
    up[0] = a > 0.0 ? std::min(2.0 / std::sqrt(a), cap) : cap;
    down[0] = b > 0.0 ? std::min(2.0 / std::sqrt(b), cap) : cap;
  };
  return m;
}

/// d = 1 model with v_+ = 1 + sqrt(x^+), v_- = 1 on [-epsilon, epsilon].
/// Outside that neighbourhood both fields are multiplied by linear cutoffs
/// min(1, (1 -+ x)/(1 - epsilon)) so they vanish at the outward faces.
inline EhrenfestModel ehrenfest_nonunique_example(double epsilon) {
  require(epsilon > 0.0 && epsilon < 1.0, "ehrenfest_nonunique_example: epsilon must lie in (0,1)");
  EhrenfestModel m;
  m.d = 1;
  m.name = "ehrenfest_nonunique";
  m.rates = [epsilon](ConstSpan x, MutableSpan up, MutableSpan down) {
    const double cut_up = std::min(1.0, std::max(0.0, 1.0 - x[0]) / (1.0 - epsilon));
    const double cut_down = std::min(1.0, std::max(0.0, 1.0 + x[0]) / (1.0 - epsilon));
    up[0] = (1.0 + std::sqrt(std::max(0.0, x[0]))) * cut_up;
    down[0] = cut_down;
  };
  m.finite_rates = ehrenfest_capped_finite_rates(m.rates);
  return m;
}

/// Glauber dynamics for a Gibbs/Potts measure:
/// v(a,b,mu) = mu(a) r(a,b) exp{(dV/dmu_a - dV/dmu_b)/2},
/// r_n(a,b,mu) = r(a,b) exp{-n/2 (V(mu - delta_a/n + delta_b/n) - V(mu))}.
inline GlauberModel glauber_from_potential(std::vector<double> base_rates, int d, Potential V) {
  require(d > 0, "glauber_from_potential: d must be positive");
  require(base_rates.size() == static_cast<std::size_t>(d * d),
          "glauber_from_potential: base rate table must be d x d");
  for (double r : base_rates) require(r >= 0.0 && std::isfinite(r), "glauber_from_potential: negative base rate");
  GlauberModel m;
  m.d = d;
  m.name = "glauber_potential_" + V.kind;
  m.rates = [V, d, r = base_rates](ConstSpan mu, MutableSpan table) {
    Vector g(static_cast<std::size_t>(d));
    V.gradient(mu, g);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        table[a * d + b] = (a == b) ? 0.0 : mu[a] * r[a * d + b] * std::exp(0.5 * (g[a] - g[b]));
  };
  m.finite_kernel = [V, d, r = base_rates](ConstSpan mu, long n, MutableSpan table) {
    const double v0 = V.value(mu);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double half_n = 0.5 * static_cast<double>(n);
    Vector y(mu.begin(), mu.end());
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        if (a == b || r[a * d + b] == 0.0) {
          table[a * d + b] = 0.0;
          continue;
        }
        y[a] -= inv_n;
        y[b] += inv_n;
        table[a * d + b] = r[a * d + b] * std::exp(-half_n * (V.value(y) - v0));
        y[a] = mu[a];
        y[b] = mu[b];
      }
  };
  m.potential = std::move(V);
  m.base_rates = std::move(base_rates);
  return m;
}

/// Base rates r(a,b) = 1 off the diagonal.
inline std::vector<double> uniform_base_rates(int d) {
  std::vector<double> r(static_cast<std::size_t>(d * d), 1.0);
  for (int a = 0; a < d; ++a) r[a * d + a] = 0.0;
  return r;
}

inline void check_state(const Model& m, ConstSpan x, const char* where) {
  require(static_cast<int>(x.size()) == dimension(m), std::string(where) + ": dimension mismatch");
  require(in_domain(domain_of(m), x), std::string(where) + ": state outside E");
}

}  // namespace mfldp
