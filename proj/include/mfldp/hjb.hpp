#pragma once

// Grid solver for the resolvent equation f - lambda H(x, grad f) = h, the
// semigroup obtained by iterating resolvents, the comparison experiment, and
// a dynamic-programming evaluation of the variational (Nisio) semigroup.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace mfldp {

enum class Scheme {
  upwind,          // jump-structure upwinding, monotone for every gradient
  lax_friedrichs,  // central H plus sigma-weighted dissipation, cube only
};

inline const char* to_string(Scheme s) { return s == Scheme::upwind ? "upwind" : "lax_friedrichs"; }

struct SchemeOptions {
  Scheme scheme = Scheme::upwind;
  double p_max = 8.0;  // momentum cap for the Lax-Friedrichs dissipation bound
};

/// Monotone discretisation of x -> H(x, grad f(x)) on a grid.
///
/// Upwind, cube:   sum_i v_+^i (e^{2 D+_i f} - 1) + v_-^i (e^{-2 D-_i f} - 1)
/// Upwind, simplex: sum_{a != b} v(a,b) (e^{m [f(mu + (delta_b - delta_a)/m) - f(mu)]} - 1)
/// Lax-Friedrichs:  H(x, clamp(D_c f)) + sum_i sigma_i (D+_i f - D-_i f)/2
///
/// All variants are nondecreasing in every neighbour value and nonincreasing
/// in the centre value, so f - lambda H_h(f) - h is a monotone scheme.
class DiscreteHamiltonian {
 public:
  DiscreteHamiltonian(const Model& model, std::shared_ptr<const Grid> grid, SchemeOptions opt = {})
      : grid_(std::move(grid)), opt_(opt), d_(grid_->dim()) {
    require(domain_of(model) == grid_->domain(), "DiscreteHamiltonian: grid and model live on different spaces");
    require(dimension(model) == d_, "DiscreteHamiltonian: dimension mismatch");
    require(opt.p_max > 0.0, "DiscreteHamiltonian: p_max must be positive");
    const std::size_t n = grid_->size();
    const auto d = static_cast<std::size_t>(d_);
    if (grid_->domain() == Domain::cube) {
      const auto& m = std::get<EhrenfestModel>(model);
      up_.resize(n * d);
      down_.resize(n * d);
      nbr_.resize(n * 2 * d);
      for (std::size_t k = 0; k < n; ++k) {
        m.rates(grid_->node(k), MutableSpan(up_).subspan(k * d, d), MutableSpan(down_).subspan(k * d, d));
        for (int i = 0; i < d_; ++i) {
          nbr_[k * 2 * d + 2 * i] = grid_->neighbor(k, i, +1);
          nbr_[k * 2 * d + 2 * i + 1] = grid_->neighbor(k, i, -1);
        }
      }
      if (opt_.scheme == Scheme::lax_friedrichs) {
        sigma_.resize(n * d);
        const double e = std::exp(2.0 * opt_.p_max), ie = std::exp(-2.0 * opt_.p_max);
        for (std::size_t j = 0; j < n * d; ++j)
          sigma_[j] = std::max(std::abs(2.0 * up_[j] * e - 2.0 * down_[j] * ie),
                               std::abs(2.0 * up_[j] * ie - 2.0 * down_[j] * e));
      }
    } else {
      require(opt_.scheme == Scheme::upwind, "DiscreteHamiltonian: Lax-Friedrichs is only available on cube grids");
      const auto& m = std::get<GlauberModel>(model);
      table_.resize(n * d * d);
      nbr_.assign(n * d * d, -1);
      for (std::size_t k = 0; k < n; ++k) {
        m.rates(grid_->node(k), MutableSpan(table_).subspan(k * d * d, d * d));
        for (int a = 0; a < d_; ++a)
          for (int b = 0; b < d_; ++b) nbr_[k * d * d + a * d + b] = grid_->edge_neighbor(k, a, b);
      }
    }
  }

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const SchemeOptions& options() const { return opt_; }

  struct Local {
    double value;
    double d_center;  // derivative in the centre value, <= 0
  };

  /// Scheme value at `node` with the centre value replaced by `y`.
  Local local(ConstSpan f, std::size_t node, double y) const {
    if (grid_->domain() == Domain::simplex) return local_simplex(f, node, y);
    return opt_.scheme == Scheme::upwind ? local_cube_upwind(f, node, y) : local_cube_lf(f, node, y);
  }

  double value(ConstSpan f, std::size_t node) const { return local(f, node, f[node]).value; }

  /// Smallest and largest neighbour value used by the stencil at `node`.
  std::pair<double, double> neighbor_range(ConstSpan f, std::size_t node) const {
    double lo = f[node], hi = f[node];
    const std::size_t width = grid_->domain() == Domain::cube ? 2 * d_ : static_cast<std::size_t>(d_ * d_);
    for (std::size_t j = 0; j < width; ++j) {
      const long nb = nbr_[node * width + j];
      if (nb < 0) continue;
      lo = std::min(lo, f[static_cast<std::size_t>(nb)]);
      hi = std::max(hi, f[static_cast<std::size_t>(nb)]);
    }
    return {lo, hi};
  }

  /// Largest total rate at any node, an upper bound on |H_p(x,0)|-type quantities.
  double max_rate() const {
    double r = 0.0;
    if (grid_->domain() == Domain::cube) {
      for (std::size_t j = 0; j < up_.size(); ++j) r = std::max(r, up_[j] + down_[j]);
    } else {
      const std::size_t dd = static_cast<std::size_t>(d_ * d_);
      for (std::size_t k = 0; k < grid_->size(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < dd; ++j) s += table_[k * dd + j];
        r = std::max(r, s);
      }
    }
    return r;
  }

 private:
  Local local_cube_upwind(ConstSpan f, std::size_t k, double y) const {
    const double inv_h = 2.0 / grid_->spacing();  // momentum enters as 2p
    const auto d = static_cast<std::size_t>(d_);
    double v = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const long plus = nbr_[k * 2 * d + 2 * i], minus = nbr_[k * 2 * d + 2 * i + 1];
      const double a = up_[k * d + i], b = down_[k * d + i];
      if (a > 0.0 && plus >= 0) {
        const double z = inv_h * (f[static_cast<std::size_t>(plus)] - y);
        v += a * std::expm1(z);
        dv -= inv_h * a * std::exp(z);
      }
      if (b > 0.0 && minus >= 0) {
        const double z = inv_h * (f[static_cast<std::size_t>(minus)] - y);
        v += b * std::expm1(z);
        dv -= inv_h * b * std::exp(z);
      }
    }
    return {v, dv};
  }

  Local local_cube_lf(ConstSpan f, std::size_t k, double y) const {
    const double h = grid_->spacing();
    const auto d = static_cast<std::size_t>(d_);
    double v = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const long plus = nbr_[k * 2 * d + 2 * i], minus = nbr_[k * 2 * d + 2 * i + 1];
      const double a = up_[k * d + i], b = down_[k * d + i];
      double p = 0.0, dp = 0.0;  // central (or one-sided at a face) derivative and its y-sensitivity
      if (plus >= 0 && minus >= 0) {
        p = (f[static_cast<std::size_t>(plus)] - f[static_cast<std::size_t>(minus)]) / (2.0 * h);
        const double sigma = sigma_[k * d + i];
        v += sigma * (f[static_cast<std::size_t>(plus)] - 2.0 * y + f[static_cast<std::size_t>(minus)]) / (2.0 * h);
        dv -= sigma / h;
      } else if (plus >= 0) {
        p = (f[static_cast<std::size_t>(plus)] - y) / h;
        dp = -1.0 / h;
      } else if (minus >= 0) {
        p = (y - f[static_cast<std::size_t>(minus)]) / h;
        dp = 1.0 / h;
      }
      const bool clamped = std::abs(p) > opt_.p_max;
      p = std::clamp(p, -opt_.p_max, opt_.p_max);
      v += a * std::expm1(2.0 * p) + b * std::expm1(-2.0 * p);
      if (!clamped) dv += dp * (2.0 * a * std::exp(2.0 * p) - 2.0 * b * std::exp(-2.0 * p));
    }
    return {v, dv};
  }

  Local local_simplex(ConstSpan f, std::size_t k, double y) const {
    const double m = static_cast<double>(grid_->resolution());
    const auto dd = static_cast<std::size_t>(d_ * d_);
    double v = 0.0, dv = 0.0;
    for (std::size_t j = 0; j < dd; ++j) {
      const double w = table_[k * dd + j];
      const long nb = nbr_[k * dd + j];
      if (w <= 0.0 || nb < 0) continue;
      const double z = m * (f[static_cast<std::size_t>(nb)] - y);
      v += w * std::expm1(z);
      dv -= m * w * std::exp(z);
    }
    return {v, dv};
  }

  std::shared_ptr<const Grid> grid_;
  SchemeOptions opt_;
  int d_;
  Vector up_, down_, sigma_, table_;
  std::vector<long> nbr_;
};

/// Scheme value at one node. Builds the operator; loops should reuse a
/// DiscreteHamiltonian instead.
inline double numerical_hamiltonian(const Model& model, const GridFunction& f, std::size_t node,
                                    SchemeOptions opt = {}) {
  require(node < f.grid->size(), "numerical_hamiltonian: node out of range");
  return DiscreteHamiltonian(model, f.grid, opt).value(f.values, node);
}

// ---------------------------------------------------------------------------
// Resolvent.

struct ResolventOptions {
  SchemeOptions scheme;
  double omega = 1.0;          // outer relaxation of the nodewise solve
  double tolerance = 1e-10;    // on the a-posteriori sup-error bound
  long max_iterations = 100000;
  int threads = 1;
  std::optional<Vector> initial;  // starting iterate, defaults to h
};

struct ResolventResult {
  GridFunction f;
  long iterations = 0;
  double last_update = 0.0;
  double error_bound = 0.0;  // bound on sup |f - exact discrete solution|
  double residual = 0.0;     // sup |f - lambda H_h(f) - h|
};

namespace detail {

// Root of g(y) = y - lambda H_h(y) - h, increasing with slope >= 1 and, for
// the upwind variants, concave. Safeguarded Newton inside a bracket.
inline double solve_node(const DiscreteHamiltonian& op, ConstSpan f, std::size_t k, double lambda, double h,
                         double& slope_out) {
  auto g = [&](double y, double& dg) {
    auto loc = op.local(f, k, y);
    dg = 1.0 - lambda * loc.d_center;
    return y - lambda * loc.value - h;
  };
  double y = f[k], dg = 1.0;
  double gy = g(y, dg);
  double lo, hi;
  if (std::isfinite(gy)) {
    lo = gy > 0.0 ? y - gy : y;
    hi = gy > 0.0 ? y : y - gy;
  } else {
    // Upwind only (Lax-Friedrichs values are bounded): root within the
    // range of h and the neighbour values.
    auto [a, b] = op.neighbor_range(f, k);
    lo = std::min(a, h);
    hi = std::max(b, h);
  }
  if (gy == 0.0) {
    slope_out = dg;
    return y;
  }
  if (!std::isfinite(gy) || !std::isfinite(dg) || y < lo || y > hi) y = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    gy = g(y, dg);
    if (gy == 0.0) break;
    if (gy > 0.0) hi = std::min(hi, y);
    else lo = std::max(lo, y);
    double next = std::isfinite(gy) && std::isfinite(dg) ? y - gy / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= 1e-15 * (1.0 + std::abs(y)) || hi - lo <= 1e-15 * (1.0 + std::abs(y))) {
      y = next;
      break;
    }
    y = next;
  }
  g(y, dg);
  slope_out = std::isfinite(dg) ? dg : std::numeric_limits<double>::max();
  return y;
}

}  // namespace detail

inline double resolvent_residual(const DiscreteHamiltonian& op, double lambda, ConstSpan f, ConstSpan h) {
  double r = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) r = std::max(r, std::abs(f[k] - lambda * op.value(f, k) - h[k]));
  return r;
}

/// Solves f - lambda H_h(f) = h by nodewise-exact Jacobi sweeps
/// f <- (1 - omega) f + omega J(f), where J(f)_k solves the node equation with
/// the neighbours frozen. J is monotone and a sup-norm contraction with factor
/// max_k c_k / (1 + c_k), c_k = -lambda dH_h/df_k; iteration stops once the
/// resulting error bound drops below the tolerance.
inline ResolventResult solve_resolvent(const DiscreteHamiltonian& op, double lambda, const GridFunction& h,
                                       const ResolventOptions& opt = {}) {
  require(lambda > 0.0 && std::isfinite(lambda), "solve_resolvent: lambda must be positive");
  require(opt.omega > 0.0 && opt.omega <= 1.0, "solve_resolvent: omega must lie in (0,1]");
  const std::size_t n = op.grid().size();
  require(h.values.size() == n, "solve_resolvent: h does not live on the operator grid");
  Vector f = opt.initial ? *opt.initial : h.values;
  require(f.size() == n, "solve_resolvent: initial iterate has the wrong size");
  Vector next(n), slope(n);
  ResolventResult res;
  for (long it = 1; it <= opt.max_iterations; ++it) {
    parallel_for(n, opt.threads, [&](std::size_t k) {
      const double y = detail::solve_node(op, f, k, lambda, h.values[k], slope[k]);
      next[k] = (1.0 - opt.omega) * f[k] + opt.omega * y;
    });
    double update = 0.0, rho = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      update = std::max(update, std::abs(next[k] - f[k]));
      rho = std::max(rho, 1.0 - 1.0 / slope[k]);
    }
    f.swap(next);
    const double lip = 1.0 - opt.omega + opt.omega * rho;
    const double bound = lip < 1.0 ? update * lip / (1.0 - lip) : std::numeric_limits<double>::infinity();
    res.iterations = it;
    res.last_update = update;
    res.error_bound = bound;
    if (bound <= opt.tolerance || update == 0.0) {
      res.f = GridFunction{op.grid_ptr(), std::move(f)};
      res.residual = resolvent_residual(op, lambda, res.f.values, h.values);
      return res;
    }
  }
  const double r = resolvent_residual(op, lambda, f, h.values);
  throw NonConvergence("solve_resolvent: no convergence after " + std::to_string(opt.max_iterations) +
                           " sweeps (error bound " + short_number(res.error_bound) + ", residual " +
                           short_number(r) + ")",
                       r);
}

inline ResolventResult solve_resolvent(const Model& model, std::shared_ptr<const Grid> grid, double lambda,
                                       const GridFunction& h, const ResolventOptions& opt = {}) {
  const DiscreteHamiltonian op(model, std::move(grid), opt.scheme);
  return solve_resolvent(op, lambda, h, opt);
}

// ---------------------------------------------------------------------------
// Comparison experiment.

struct ComparisonLevel {
  int resolution = 0;
  double spacing = 0.0;
  double solver_tolerance = 0.0;
  double max_pairwise_difference = 0.0;
  std::vector<long> iterations;
  std::vector<double> error_bounds;
};

struct ComparisonReport {
  double lambda = 0.0;
  std::vector<ComparisonLevel> levels;
  bool differences_decrease = false;
  bool all_zero_solution = false;  // set when h vanishes; all runs must then give 0
};

struct ComparisonOptions {
  ResolventOptions solver;
  // Solver tolerance at grid spacing h is tolerance_factor * h^2, so the
  // solver error stays below the O(h) discretisation error at every level.
  // A factor <= 0 keeps solver.tolerance at every level.
  double tolerance_factor = 1e-6;
};

/// Solves the resolvent equation from every initialisation at every
/// resolution and records the largest pairwise sup-difference per level.
inline ComparisonReport comparison_experiment(const Model& model, double lambda, const ScalarFunction& h,
                                              const std::vector<int>& resolutions,
                                              const std::vector<ScalarFunction>& inits,
                                              const ComparisonOptions& opt = {}) {
  require(inits.size() >= 2, "comparison_experiment: need at least 2 initialisations");
  require(!resolutions.empty(), "comparison_experiment: need at least one resolution");
  ComparisonReport rep;
  rep.lambda = lambda;
  for (int m : resolutions) {
    auto grid = std::make_shared<const Grid>(domain_of(model) == Domain::cube ? Grid::cube(dimension(model), m)
                                                                              : Grid::simplex(dimension(model), m));
    const DiscreteHamiltonian op(model, grid, opt.solver.scheme);
    const GridFunction hg = GridFunction::sample(grid, h);
    ComparisonLevel level;
    level.resolution = m;
    level.spacing = grid->spacing();
    ResolventOptions ro = opt.solver;
    if (opt.tolerance_factor > 0.0) ro.tolerance = opt.tolerance_factor * grid->spacing() * grid->spacing();
    level.solver_tolerance = ro.tolerance;
    std::vector<Vector> sols;
    for (const auto& init : inits) {
      ro.initial = grid->sample(init);
      ResolventResult r = solve_resolvent(op, lambda, hg, ro);
      level.iterations.push_back(r.iterations);
      level.error_bounds.push_back(r.error_bound);
      sols.push_back(std::move(r.f.values));
    }
    for (std::size_t a = 0; a < sols.size(); ++a)
      for (std::size_t b = a + 1; b < sols.size(); ++b)
        level.max_pairwise_difference = std::max(level.max_pairwise_difference, max_abs_diff(sols[a], sols[b]));
    rep.levels.push_back(std::move(level));
  }
  rep.differences_decrease = true;
  for (std::size_t j = 1; j < rep.levels.size(); ++j)
    if (!(rep.levels[j].max_pairwise_difference < rep.levels[j - 1].max_pairwise_difference))
      rep.differences_decrease = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Semigroup.

/// V(t) f0 ~ R(t/m)^m f0: m resolvent solves with lambda = t/m, each started
/// from the previous iterate.
inline GridFunction semigroup_via_resolvent(const DiscreteHamiltonian& op, const GridFunction& f0, double t, int steps,
                                            ResolventOptions opt = {}) {
  require(t > 0.0 && std::isfinite(t), "semigroup_via_resolvent: t must be positive");
  require(steps >= 1, "semigroup_via_resolvent: steps must be >= 1");
  const double lambda = t / steps;
  GridFunction f = f0;
  for (int s = 0; s < steps; ++s) {
    opt.initial = f.values;
    f = solve_resolvent(op, lambda, f, opt).f;
  }
  return f;
}

inline GridFunction semigroup_via_resolvent(const Model& model, std::shared_ptr<const Grid> grid,
                                            const GridFunction& f0, double t, int steps, ResolventOptions opt = {}) {
  const DiscreteHamiltonian op(model, std::move(grid), opt.scheme);
  return semigroup_via_resolvent(op, f0, t, steps, std::move(opt));
}

// ---------------------------------------------------------------------------
// Nisio semigroup by dynamic programming.

struct NisioOptions {
  double p_max = 8.0;
  bool include_zero_velocity = true;
  int threads = 1;
};

/// Backward DP for V(t) f0(x) = sup_gamma f0(gamma(t)) - int L(gamma, gamma').
/// Controls at node x are v = H_p(x, p) for p on a uniform grid of
/// `velocity_samples` points per free axis in [-p_max, p_max] (this contains
/// F(x) at p = 0 when the count is odd, and F(x) is added otherwise), with
/// exact cost L(x, H_p(x,p)) = <p, H_p> - H; plus the zero velocity.
/// Each of `time_steps` Euler intervals applies
///   value(x) <- max_v value(x + dt v) - dt L(x, v)
/// with multilinear (cube) or barycentric (simplex) interpolation.
inline GridFunction nisio_value_dp(const Model& model, const GridFunction& f0, double t, int time_steps,
                                   int velocity_samples, const NisioOptions& opt = {}) {
  require(t > 0.0 && std::isfinite(t), "nisio_value_dp: t must be positive");
  require(time_steps >= 1, "nisio_value_dp: time_steps must be >= 1");
  require(velocity_samples >= 1, "nisio_value_dp: velocity_samples must be >= 1");
  const Grid& grid = *f0.grid;
  require(grid.domain() == domain_of(model) && grid.dim() == dimension(model), "nisio_value_dp: grid/model mismatch");
  const std::size_t n = grid.size();
  const auto d = static_cast<std::size_t>(grid.dim());
  const std::size_t free_axes = grid.domain() == Domain::cube ? d : d - 1;
  std::size_t per_node = 1;
  for (std::size_t i = 0; i < free_axes; ++i) per_node *= static_cast<std::size_t>(velocity_samples);

  // Controls depend only on the node: tabulate (velocity, running cost) once.
  struct Control {
    Vector v;
    double cost;
  };
  std::vector<std::vector<Control>> controls(n);
  parallel_for(n, opt.threads, [&](std::size_t k) {
    const ConstSpan x = grid.node(k);
    auto& list = controls[k];
    Vector p(d, 0.0);
    bool has_drift = false;
    for (std::size_t c = 0; c < per_node; ++c) {
      std::size_t rest = c;
      bool zero = true;
      for (std::size_t i = 0; i < free_axes; ++i) {
        const auto j = static_cast<int>(rest % static_cast<std::size_t>(velocity_samples));
        rest /= static_cast<std::size_t>(velocity_samples);
        p[i] = velocity_samples == 1 ? 0.0 : -opt.p_max + 2.0 * opt.p_max * j / (velocity_samples - 1);
        if (p[i] != 0.0) zero = false;
      }
      has_drift = has_drift || zero;
      Vector v = grad_H_p(model, x, p);
      const double cost = std::max(0.0, dot(p, v) - eval_H(model, x, p));
      if (std::isfinite(cost) && std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); }))
        list.push_back({std::move(v), cost});
    }
    if (!has_drift) list.push_back({vector_field_F(model, x), 0.0});
    if (opt.include_zero_velocity) {
      const Vector zero(d, 0.0);
      LagrangianValue L = legendre(model, x, zero);
      if (!L.is_infinite()) list.push_back({zero, L.value.value()});
    }
  });

  const double dt = t / time_steps;
  Vector value = f0.values, next(n);
  const Domain dom = grid.domain();
  for (int s = 0; s < time_steps; ++s) {
    parallel_for(n, opt.threads, [&](std::size_t k) {
      const ConstSpan x = grid.node(k);
      double best = -std::numeric_limits<double>::infinity();
      Vector y(d);
      for (const auto& c : controls[k]) {
        for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + dt * c.v[i];
        const Vector yp = project_to_domain(dom, y);
        best = std::max(best, grid.interpolate(value, yp) - dt * c.cost);
      }
      next[k] = best;
    });
    value.swap(next);
  }
  return GridFunction{f0.grid, std::move(value)};
}

}  // namespace mfldp
