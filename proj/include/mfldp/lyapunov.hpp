#pragma once

// Monotonicity of a rate function I_0 along McKean-Vlasov flows.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "action.hpp"
#include "core.hpp"
#include "flow.hpp"
#include "model.hpp"

namespace mfldp {

struct LyapunovReport {
  std::vector<double> times;
  std::vector<double> values;
  double max_increase = 0.0;  // largest I_0(x(t_{k+1})) - I_0(x(t_k)), 0 if none
  double tolerance = 0.0;
  double error_bound = 0.0;   // integrator error estimate used for the default tolerance
  bool monotone = true;
};

/// Richardson estimate of the integration error of I_0 along the flow:
/// sup over common times of |I0(x_dt) - I0(x_{dt/2})| scaled by the order
/// factor 2^q / (2^q - 1). Not below a round-off floor.
inline double integrator_error_bound(const Model& model, ConstSpan start, const FlowConfig& cfg,
                                     const std::function<double(ConstSpan)>& I0) {
  FlowConfig fine = cfg;
  fine.dt = cfg.dt / 2.0;
  const Trajectory a = integrate_mkv(model, start, cfg);
  const Trajectory b = integrate_mkv(model, start, fine);
  const double order = cfg.method == FlowMethod::rk4 ? 4.0 : 1.0;
  const double factor = std::pow(2.0, order) / (std::pow(2.0, order) - 1.0);
  double diff = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double va = I0(a.states[k]);
    const double vb = I0(b.at(a.times[k]));
    diff = std::max(diff, std::abs(va - vb));
    scale = std::max(scale, std::abs(va));
  }
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + scale);
  return std::max(factor * diff, floor);
}

/// Integrates the flow from `start`, evaluates I_0 at every step and checks
/// that it never increases by more than the tolerance. Without an explicit
/// tolerance, 10 times the integrator error bound is used.
inline LyapunovReport lyapunov_check(const Model& model, ConstSpan start, const FlowConfig& cfg,
                                     const std::function<double(ConstSpan)>& I0,
                                     std::optional<double> tolerance = std::nullopt) {
  require(static_cast<bool>(I0), "lyapunov_check: I0 evaluator is empty");
  if (tolerance) require(*tolerance >= 0.0, "lyapunov_check: tolerance must be >= 0");
  const Trajectory tr = integrate_mkv(model, start, cfg);
  LyapunovReport rep;
  rep.times = tr.times;
  rep.values.reserve(tr.size());
  for (const auto& x : tr.states) {
    const double v = I0(x);
    require(std::isfinite(v), "lyapunov_check: I0 is not finite along the flow");
    rep.values.push_back(v);
  }
  for (std::size_t k = 1; k < rep.values.size(); ++k)
    rep.max_increase = std::max(rep.max_increase, rep.values[k] - rep.values[k - 1]);
  rep.error_bound = integrator_error_bound(model, start, cfg, I0);
  rep.tolerance = tolerance ? *tolerance : 10.0 * rep.error_bound;
  rep.monotone = rep.max_increase <= rep.tolerance;
  return rep;
}

/// Simplex models with a potential: I_0 = S(mu | uniform) + V(mu).
inline LyapunovReport lyapunov_check(const Model& model, ConstSpan start, const FlowConfig& cfg,
                                     std::optional<double> tolerance = std::nullopt) {
  const InitialRate I0 = gibbs_initial_rate(model);
  return lyapunov_check(model, start, cfg, [&I0](ConstSpan mu) { return I0.evaluator(mu); }, tolerance);
}

/// <grad I_0(mu), F(mu)> for I_0 = S + V at an interior point.
inline double gibbs_derivative_along_flow(const Model& model, ConstSpan mu) {
  const auto& m = std::get<GlauberModel>(model);
  require(m.potential.has_value(), "gibbs_derivative_along_flow: model carries no potential");
  const std::size_t d = mu.size();
  Vector g(d);
  m.potential->gradient(mu, g);
  for (std::size_t a = 0; a < d; ++a) {
    require(mu[a] > 0.0, "gibbs_derivative_along_flow: state must be interior");
    g[a] += std::log(static_cast<double>(d) * mu[a]) + 1.0;
  }
  return dot(g, vector_field_F(model, mu));
}

/// Nonzero root of m = tanh(beta m) (0 when beta <= 1): the magnetisation of
/// the Curie-Weiss fixed points.
inline double curie_weiss_magnetisation(double beta) {
  if (beta <= 1.0) return 0.0;
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (std::tanh(beta * mid) > mid ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace mfldp
