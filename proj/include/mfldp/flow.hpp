#pragma once

// Fixed-step integrators for the McKean-Vlasov equation x' = F(x) = H_p(x,0)
// and for characteristic curves x' = H_p(x, grad g(x)).

#include <cmath>
#include <functional>
#include <sstream>
#include <string>

#include "core.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "trajectory.hpp"

namespace mfldp {

enum class FlowMethod { rk4, euler };

inline const char* to_string(FlowMethod m) { return m == FlowMethod::rk4 ? "rk4" : "euler"; }

struct FlowConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  FlowMethod method = FlowMethod::rk4;
  bool boundary_projection = true;

  void validate() const {
    require(dt > 0.0 && std::isfinite(dt), "FlowConfig: dt must be positive");
    require(horizon > 0.0 && std::isfinite(horizon), "FlowConfig: horizon must be positive");
    require(dt <= horizon * (1.0 + 1e-12), "FlowConfig: dt must not exceed the horizon");
  }

  std::size_t steps() const {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
  }
};

/// A C^1 function with its gradient, used to build characteristic fields.
struct SmoothFunction {
  std::function<double(ConstSpan)> value;
  std::function<void(ConstSpan, MutableSpan)> gradient;
};

inline SmoothFunction constant_function(double c) {
  return {[c](ConstSpan) { return c; }, [](ConstSpan, MutableSpan g) { std::fill(g.begin(), g.end(), 0.0); }};
}

/// g(x) = <p, x> + c.
inline SmoothFunction linear_function(Vector p, double c = 0.0) {
  return {[p, c](ConstSpan x) { return dot(p, x) + c; },
          [p](ConstSpan, MutableSpan g) { std::copy(p.begin(), p.end(), g.begin()); }};
}

/// g(x) = (curvature/2) |x - center|^2.
inline SmoothFunction quadratic_function(Vector center, double curvature) {
  return {[center, curvature](ConstSpan x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
            return 0.5 * curvature * s;
          },
          [center, curvature](ConstSpan x, MutableSpan g) {
            for (std::size_t i = 0; i < x.size(); ++i) g[i] = curvature * (x[i] - center[i]);
          }};
}

using VectorField = std::function<Vector(ConstSpan)>;

/// Generic fixed-step integration on E. Fields are always evaluated at points
/// of E (stage points are projected first) because rates are only defined there.
inline Trajectory integrate_field(const VectorField& field, Domain dom, ConstSpan start, const FlowConfig& cfg) {
  cfg.validate();
  require(in_domain(dom, start), "integrate: start outside E");
  const std::size_t steps = cfg.steps();
  const double h = cfg.horizon / static_cast<double>(steps);
  const std::size_t d = start.size();

  Trajectory tr;
  tr.kind = PathKind::piecewise_linear;
  tr.times.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.times.push_back(0.0);
  tr.states.emplace_back(start.begin(), start.end());

  auto eval = [&](const Vector& x) { return field(project_to_domain(dom, x)); };
  Vector x(start.begin(), start.end()), tmp(d);
  for (std::size_t s = 1; s <= steps; ++s) {
    Vector next(d);
    if (cfg.method == FlowMethod::euler) {
      const Vector k1 = eval(x);
      for (std::size_t i = 0; i < d; ++i) next[i] = x[i] + h * k1[i];
    } else {
      const Vector k1 = eval(x);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      const Vector k2 = eval(tmp);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      const Vector k3 = eval(tmp);
      for (std::size_t i = 0; i < d; ++i) tmp[i] = x[i] + h * k3[i];
      const Vector k4 = eval(tmp);
      for (std::size_t i = 0; i < d; ++i) next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    for (double v : next) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "integrate: non-finite state at step " << s << " (t = " << static_cast<double>(s) * h
            << "), previous state";
        for (double c : x) msg << ' ' << c;
        throw NonConvergence(msg.str(), std::numeric_limits<double>::infinity());
      }
    }
    if (cfg.boundary_projection) {
      Vector projected = project_to_domain(dom, next);
      tr.projection_distance = std::max(tr.projection_distance, max_abs_diff(projected, next));
      next = std::move(projected);
    }
    x = next;
    tr.times.push_back(s == steps ? cfg.horizon : static_cast<double>(s) * h);
    tr.states.push_back(std::move(next));
  }
  return tr;
}

inline Trajectory integrate_mkv(const Model& model, ConstSpan start, const FlowConfig& cfg) {
  check_state(model, start, "integrate_mkv");
  return integrate_field([&model](ConstSpan x) { return vector_field_F(model, x); }, domain_of(model), start, cfg);
}

/// Integrates x' = H_p(x, grad g(x)).
inline Trajectory integrate_characteristics(const Model& model, const SmoothFunction& g, ConstSpan start,
                                            const FlowConfig& cfg) {
  check_state(model, start, "integrate_characteristics");
  const std::size_t d = start.size();
  return integrate_field(
      [&model, &g, d](ConstSpan x) {
        Vector p(d);
        g.gradient(x, p);
        return grad_H_p(model, x, p);
      },
      domain_of(model), start, cfg);
}

/// gamma_a(t) = 0 for t <= a and (t - a)^2 afterwards, sampled on the step grid
/// of `cfg`. Every member solves x' = 2 sqrt(x) from x(0) = 0.
inline Trajectory mkv_branch_solution(const Model& model, double a, const FlowConfig& cfg) {
  const auto* m = std::get_if<EhrenfestModel>(&model);
  require(m != nullptr && m->name == "ehrenfest_nonunique",
          "mkv_branch_solution: model must be the non-uniqueness example");
  require(a >= 0.0 && std::isfinite(a), "mkv_branch_solution: branch time must be >= 0");
  cfg.validate();
  const std::size_t steps = cfg.steps();
  const double h = cfg.horizon / static_cast<double>(steps);
  Trajectory tr;
  tr.kind = PathKind::piecewise_linear;
  for (std::size_t s = 0; s <= steps; ++s) {
    const double t = s == steps ? cfg.horizon : static_cast<double>(s) * h;
    tr.times.push_back(t);
    tr.states.push_back(Vector{t <= a ? 0.0 : (t - a) * (t - a)});
  }
  return tr;
}

}  // namespace mfldp
