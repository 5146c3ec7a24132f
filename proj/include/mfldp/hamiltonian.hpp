#pragma once

// Limiting Hamiltonians H(x,p), their momentum gradients, the exponentially
// tilted generators H_n, and the Legendre-Fenchel Lagrangians L(x,v).
//
//   cube:    H(x,p)  = sum_i v_+^i(x) (e^{2p_i} - 1) + v_-^i(x) (e^{-2p_i} - 1)
//   simplex: H(mu,p) = sum_{a,b} v(a,b,mu) (e^{p_b - p_a} - 1)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core.hpp"
#include "lattice.hpp"
#include "model.hpp"

namespace mfldp {

// ---------------------------------------------------------------------------
// Rate-level kernels. These take precomputed rate arrays and are used in the
// hot loops of the grid solvers.

inline double ehrenfest_H(ConstSpan up, ConstSpan down, ConstSpan p) {
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    h += up[i] * std::expm1(2.0 * p[i]) + down[i] * std::expm1(-2.0 * p[i]);
  return h;
}

inline void ehrenfest_grad_H(ConstSpan up, ConstSpan down, ConstSpan p, MutableSpan out) {
  for (std::size_t i = 0; i < p.size(); ++i)
    out[i] = 2.0 * up[i] * std::exp(2.0 * p[i]) - 2.0 * down[i] * std::exp(-2.0 * p[i]);
}

inline double glauber_H(ConstSpan table, ConstSpan p) {
  const std::size_t d = p.size();
  double h = 0.0;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      if (a != b && table[a * d + b] != 0.0) h += table[a * d + b] * std::expm1(p[b] - p[a]);
  return h;
}

inline void glauber_grad_H(ConstSpan table, ConstSpan p, MutableSpan out) {
  const std::size_t d = p.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) {
      const double w = table[a * d + b];
      if (a == b || w == 0.0) continue;
      const double flux = w * std::exp(p[b] - p[a]);
      out[b] += flux;
      out[a] -= flux;
    }
}

// ---------------------------------------------------------------------------
// Model-level evaluation.

namespace detail {
inline void check_dims(const Model& m, ConstSpan x, ConstSpan p, const char* where) {
  const auto d = static_cast<std::size_t>(dimension(m));
  require(x.size() == d && p.size() == d, std::string(where) + ": dimension mismatch");
}
}  // namespace detail

inline double eval_H(const Model& model, ConstSpan x, ConstSpan p) {
  detail::check_dims(model, x, p, "eval_H");
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EhrenfestModel>) {
          Vector up(x.size()), down(x.size());
          m.rates(x, up, down);
          return ehrenfest_H(up, down, p);
        } else {
          Vector t(x.size() * x.size());
          m.rates(x, t);
          return glauber_H(t, p);
        }
      },
      model);
}

/// Gradient of H in the momentum. For the simplex the components sum to zero.
inline Vector grad_H_p(const Model& model, ConstSpan x, ConstSpan p) {
  detail::check_dims(model, x, p, "grad_H_p");
  Vector out(x.size());
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EhrenfestModel>) {
          Vector up(x.size()), down(x.size());
          m.rates(x, up, down);
          ehrenfest_grad_H(up, down, p, out);
        } else {
          Vector t(x.size() * x.size());
          m.rates(x, t);
          glauber_grad_H(t, p, out);
        }
      },
      model);
  return out;
}

/// McKean-Vlasov vector field F(x) = H_p(x, 0).
inline Vector vector_field_F(const Model& model, ConstSpan x) {
  const Vector zero(x.size(), 0.0);
  return grad_H_p(model, x, zero);
}

// ---------------------------------------------------------------------------
// Lagrangians.

struct LagrangianValue {
  ExtendedReal value;
  std::optional<Vector> maximizer;  // absent when infinite or not attained

  bool is_infinite() const { return value.is_infinite(); }
  static LagrangianValue infinite() { return {ExtendedReal::infinity(), std::nullopt}; }
};

/// sup_p { p v - a (e^{2p} - 1) - b (e^{-2p} - 1) } in closed form.
inline LagrangianValue legendre_ehrenfest_1coord(double a, double b, double v) {
  require(a >= 0.0 && b >= 0.0, "legendre_ehrenfest_1coord: rates must be non-negative");
  require(std::isfinite(v), "legendre_ehrenfest_1coord: velocity must be finite");
  if (a > 0.0 && b > 0.0) {
    // u = e^{2p} is the positive root of 2a u^2 - v u - 2b = 0.
    const double s = std::sqrt(v * v + 16.0 * a * b);
    const double u = v >= 0.0 ? (v + s) / (4.0 * a) : 4.0 * b / (s - v);
    const double p = 0.5 * std::log(u);
    const double value = p * v - a * (u - 1.0) - b * (1.0 / u - 1.0);
    return {ExtendedReal(std::max(0.0, value)), Vector{p}};
  }
  if (a == 0.0 && b == 0.0) {
    if (v == 0.0) return {ExtendedReal(0.0), Vector{0.0}};
    return LagrangianValue::infinite();
  }
  if (a == 0.0) {
    // Only downward jumps: finite iff v <= 0.
    if (v > 0.0) return LagrangianValue::infinite();
    if (v == 0.0) return {ExtendedReal(b), std::nullopt};
    const double ratio = -v / (2.0 * b);
    const double p = -0.5 * std::log(ratio);
    const double value = -0.5 * v * std::log(ratio) + 0.5 * v + b;
    return {ExtendedReal(std::max(0.0, value)), Vector{p}};
  }
  // b == 0: only upward jumps.
  if (v < 0.0) return LagrangianValue::infinite();
  if (v == 0.0) return {ExtendedReal(a), std::nullopt};
  const double ratio = v / (2.0 * a);
  const double p = 0.5 * std::log(ratio);
  const double value = 0.5 * v * std::log(ratio) - 0.5 * v + a;
  return {ExtendedReal(std::max(0.0, value)), Vector{p}};
}

struct LegendreOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-12;   // relative to the rate/velocity scale
  double regularization = 1e-10;
  double sum_tol = 1e-12;        // tolerance on sum(v) = 0 and on tight closed sets
};

namespace detail {

// Concave dual sup_p <p,v> - sum_{a != b} w_ab (e^{p_b - p_a} - 1) restricted
// to the index set `idx`. Closed sets (no allowed edge leaving them) decide
// finiteness: net outflow from a closed set is impossible, and a closed set
// with zero net flow forces every edge entering it to carry zero flux, which
// splits the problem. Without such sets the supremum is attained and damped
// Newton on the gauge slice sum(p) = 0 finds it.
class GlauberDual {
 public:
  GlauberDual(ConstSpan w, ConstSpan v, std::size_t d, const LegendreOptions& opt)
      : w_(w), v_(v), d_(d), opt_(opt) {
    scale_ = 1.0 + sup_norm(v);
    for (double x : w) scale_ += x;
  }

  // Returns +inf via std::nullopt.
  std::optional<double> solve(const std::vector<std::size_t>& idx, Vector& p_out, bool& attained) {
    const std::size_t k = idx.size();
    if (k == 1) {
      if (std::abs(v_[idx[0]]) > opt_.sum_tol * scale_) return std::nullopt;
      p_out[idx[0]] = 0.0;
      return 0.0;
    }
    require(k <= 24, "legendre: simplex dimension too large for closed-set enumeration");
    const std::uint32_t full = (1u << k) - 1u;
    std::optional<std::uint32_t> tight;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      if (!closed(idx, mask)) continue;
      double net = 0.0;
      for (std::size_t j = 0; j < k; ++j)
        if (mask >> j & 1u) net += v_[idx[j]];
      if (net < -opt_.sum_tol * scale_) return std::nullopt;
      if (!tight && net <= opt_.sum_tol * scale_) tight = mask;
    }
    if (tight) {
      attained = false;
      std::vector<std::size_t> inside, outside;
      for (std::size_t j = 0; j < k; ++j) ((*tight >> j & 1u) ? inside : outside).push_back(idx[j]);
      double suppressed = 0.0;
      for (std::size_t b : outside)
        for (std::size_t a : inside) suppressed += w_[b * d_ + a];
      auto left = solve(inside, p_out, attained);
      if (!left) return std::nullopt;
      auto right = solve(outside, p_out, attained);
      if (!right) return std::nullopt;
      return *left + *right + suppressed;
    }
    return newton(idx, p_out);
  }

 private:
  bool closed(const std::vector<std::size_t>& idx, std::uint32_t mask) const {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (!(mask >> i & 1u)) continue;
      for (std::size_t j = 0; j < idx.size(); ++j)
        if (!(mask >> j & 1u) && w_[idx[i] * d_ + idx[j]] > 0.0) return false;
    }
    return true;
  }

  double objective(const std::vector<std::size_t>& idx, const Eigen::VectorXd& p) const {
    const std::size_t k = idx.size();
    double f = 0.0;
    for (std::size_t i = 0; i < k; ++i) f += p[i] * v_[idx[i]];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double w = w_[idx[i] * d_ + idx[j]];
        if (i != j && w > 0.0) f -= w * std::expm1(p[j] - p[i]);
      }
    return f;
  }

  double newton(const std::vector<std::size_t>& idx, Vector& p_out) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd grad(k);
    Eigen::MatrixXd hess(k, k);
    double f = objective(idx, p);
    double gnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt_.max_iterations; ++it) {
      grad.setZero();
      hess.setZero();
      for (Eigen::Index i = 0; i < k; ++i) grad[i] = v_[idx[i]];
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
          const double w = w_[idx[i] * d_ + idx[j]];
          if (i == j || w <= 0.0) continue;
          const double flux = w * std::exp(p[j] - p[i]);
          grad[j] -= flux;
          grad[i] += flux;
          hess(i, i) += flux;
          hess(j, j) += flux;
          hess(i, j) -= flux;
          hess(j, i) -= flux;
        }
      gnorm = grad.lpNorm<Eigen::Infinity>();
      if (!std::isfinite(gnorm)) break;
      if (gnorm < opt_.gradient_tol * scale_) {
        for (Eigen::Index i = 0; i < k; ++i) p_out[idx[i]] = p[i];
        return f;
      }
      hess.array() += 1.0 / static_cast<double>(k);
      hess.diagonal().array() += opt_.regularization;
      Eigen::VectorXd step = hess.ldlt().solve(grad);
      double t = 1.0;
      const double slope = grad.dot(step);
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        Eigen::VectorXd trial = p + t * step;
        trial.array() -= trial.mean();
        const double ft = objective(idx, trial);
        // near the optimum the ascent is below the objective's round-off; take the Newton step then
        if (std::isfinite(ft) && (ft >= f + 1e-4 * t * slope || std::abs(ft - f) <= 1e-13 * scale_)) {
          p = trial;
          f = ft;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        // no further ascent possible in floating point: accept if the gradient is at round-off level
        if (gnorm < 1.5e-8 * scale_) {
          for (Eigen::Index i = 0; i < k; ++i) p_out[idx[i]] = p[i];
          return f;
        }
        break;
      }
    }
    throw NonConvergence("legendre: Newton iteration for the simplex dual did not converge (gradient norm " +
                             short_number(gnorm) + ")",
                         gnorm);
  }

  ConstSpan w_, v_;
  std::size_t d_;
  LegendreOptions opt_;
  double scale_;
};

}  // namespace detail

/// Lagrangian from a precomputed simplex rate table (row-major d x d).
inline LagrangianValue glauber_legendre(ConstSpan table, ConstSpan velocity, const LegendreOptions& opt = {}) {
  const std::size_t d = velocity.size();
  double total = 0.0, scale = 1.0 + sup_norm(velocity);
  for (double v : velocity) total += v;
  for (double w : table) scale += w;
  if (std::abs(total) > opt.sum_tol * scale) return LagrangianValue::infinite();
  detail::GlauberDual dual(table, velocity, d, opt);
  std::vector<std::size_t> all(d);
  for (std::size_t a = 0; a < d; ++a) all[a] = a;
  Vector p(d, 0.0);
  bool attained = true;
  auto value = dual.solve(all, p, attained);
  if (!value) return LagrangianValue::infinite();
  if (!attained) return {ExtendedReal(std::max(0.0, *value)), std::nullopt};
  double mean = 0.0;
  for (double x : p) mean += x;
  mean /= static_cast<double>(d);
  for (double& x : p) x -= mean;
  return {ExtendedReal(std::max(0.0, *value)), p};
}

inline LagrangianValue ehrenfest_legendre(ConstSpan up, ConstSpan down, ConstSpan velocity) {
  ExtendedReal total(0.0);
  Vector p(velocity.size());
  bool attained = true;
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    LagrangianValue c = legendre_ehrenfest_1coord(up[i], down[i], velocity[i]);
    if (c.is_infinite()) return LagrangianValue::infinite();
    total += c.value;
    if (c.maximizer) p[i] = (*c.maximizer)[0];
    else attained = false;
  }
  if (!attained) return {total, std::nullopt};
  return {total, p};
}

/// L(x,v) = sup_p <p,v> - H(x,p).
inline LagrangianValue legendre(const Model& model, ConstSpan x, ConstSpan velocity,
                                const LegendreOptions& opt = {}) {
  detail::check_dims(model, x, velocity, "legendre");
  return std::visit(
      [&](const auto& m) -> LagrangianValue {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EhrenfestModel>) {
          Vector up(x.size()), down(x.size());
          m.rates(x, up, down);
          return ehrenfest_legendre(up, down, velocity);
        } else {
          Vector t(x.size() * x.size());
          m.rates(x, t);
          return glauber_legendre(t, velocity, opt);
        }
      },
      model);
}

// ---------------------------------------------------------------------------
// Finite-n tilted generator H_n f = n^{-1} e^{-nf} A_n e^{nf}.

using ScalarFunction = std::function<double(ConstSpan)>;

inline double eval_Hn(const Model& model, long n, const ScalarFunction& f, ConstSpan state) {
  require(static_cast<int>(state.size()) == dimension(model), "eval_Hn: dimension mismatch");
  const Domain dom = domain_of(model);
  const Vector x = lattice_point(dom, n, lattice_counts(dom, n, state));
  const double nn = static_cast<double>(n);
  const double f0 = f(x);
  const std::size_t d = x.size();
  Vector y = x;
  double total = 0.0;
  if (const auto* m = std::get_if<EhrenfestModel>(&model)) {
    Vector up(d), down(d);
    m->finite_rates(x, n, up, down);
    const double step = 2.0 / nn;
    for (std::size_t i = 0; i < d; ++i) {
      const double occ_minus = 0.5 * (1.0 - x[i]), occ_plus = 0.5 * (1.0 + x[i]);
      if (occ_minus > 0.0 && up[i] != 0.0) {
        y[i] = x[i] + step;
        total += occ_minus * up[i] * std::expm1(nn * (f(y) - f0));
      }
      if (occ_plus > 0.0 && down[i] != 0.0) {
        y[i] = x[i] - step;
        total += occ_plus * down[i] * std::expm1(nn * (f(y) - f0));
      }
      y[i] = x[i];
    }
    return total;
  }
  const auto& m = std::get<GlauberModel>(model);
  Vector kernel(d * d);
  m.finite_kernel(x, n, kernel);
  const double inv_n = 1.0 / nn;
  for (std::size_t a = 0; a < d; ++a) {
    if (x[a] <= 0.0) continue;
    for (std::size_t b = 0; b < d; ++b) {
      const double r = kernel[a * d + b];
      if (a == b || r == 0.0) continue;
      y[a] = x[a] - inv_n;
      y[b] = x[b] + inv_n;
      total += x[a] * r * std::expm1(nn * (f(y) - f0));
      y[a] = x[a];
      y[b] = x[b];
    }
  }
  return total;
}

}  // namespace mfldp
