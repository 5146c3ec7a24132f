#pragma once

// Path-space rate functional I(gamma) = I_0(gamma(0)) + int L(gamma, gamma') dt
// on sampled piecewise-linear trajectories.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "core.hpp"
#include "hamiltonian.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "trajectory.hpp"

namespace mfldp {

enum class InitialRateKind { point_mass, gibbs, custom, zero };

inline const char* to_string(InitialRateKind k) {
  switch (k) {
    case InitialRateKind::point_mass: return "point";
    case InitialRateKind::gibbs: return "gibbs";
    case InitialRateKind::custom: return "custom";
    case InitialRateKind::zero: return "zero";
  }
  return "?";
}

struct InitialRate {
  InitialRateKind kind = InitialRateKind::zero;
  std::optional<Vector> point;
  std::function<double(ConstSpan)> evaluator;
  double tolerance = 1e-9;

  /// Zero at the point (within `tol` in max-norm) and +inf elsewhere.
  static InitialRate point_mass(Vector x, double tol = 1e-9) {
    InitialRate r;
    r.kind = InitialRateKind::point_mass;
    r.point = std::move(x);
    r.tolerance = tol;
    return r;
  }
  static InitialRate custom(std::function<double(ConstSpan)> f) {
    InitialRate r;
    r.kind = InitialRateKind::custom;
    r.evaluator = std::move(f);
    return r;
  }
  static InitialRate zero() { return {}; }

  ExtendedReal operator()(ConstSpan x) const {
    switch (kind) {
      case InitialRateKind::zero: return ExtendedReal(0.0);
      case InitialRateKind::point_mass:
        require(point->size() == x.size(), "InitialRate: dimension mismatch");
        return max_abs_diff(*point, x) <= tolerance ? ExtendedReal(0.0) : ExtendedReal::infinity();
      case InitialRateKind::gibbs:
      case InitialRateKind::custom: {
        const double v = evaluator(x);
        return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::infinity();
      }
    }
    return ExtendedReal::infinity();
  }
};

/// Relative entropy against the uniform measure, with 0 log 0 = 0.
inline double relative_entropy_uniform(ConstSpan mu) {
  const double d = static_cast<double>(mu.size());
  double s = 0.0;
  for (double m : mu)
    if (m > 0.0) s += m * std::log(d * m);
  return s;
}

/// I_0(mu) = S(mu | uniform) + V(mu).
inline InitialRate gibbs_initial_rate(const Model& model) {
  const auto* m = std::get_if<GlauberModel>(&model);
  require(m != nullptr, "gibbs_initial_rate: only defined for simplex models");
  require(m->potential.has_value(), "gibbs_initial_rate: model carries no potential");
  InitialRate r;
  r.kind = InitialRateKind::gibbs;
  r.evaluator = [V = *m->potential](ConstSpan mu) { return relative_entropy_uniform(mu) + V.value(mu); };
  return r;
}

struct ActionResult {
  ExtendedReal total;
  ExtendedReal initial_part;
  Vector running_part;  // L(midpoint, chord velocity) * dt per interval; 0 beyond an infinite interval
  std::optional<std::size_t> infinite_interval;
  std::optional<Vector> infinite_velocity;
};

/// Chord velocities per interval, Lagrangian at the interval midpoint state,
/// midpoint quadrature. The first infinite interval makes the total +inf.
inline ActionResult evaluate_action(const Model& model, const Trajectory& traj, const InitialRate& I0,
                                    int threads = 1) {
  require(traj.kind == PathKind::piecewise_linear, "evaluate_action: trajectory must be piecewise linear");
  require(traj.size() >= 2, "evaluate_action: need at least 2 points");
  const std::size_t d = static_cast<std::size_t>(dimension(model));
  traj.validate(domain_of(model), d);

  ActionResult res;
  res.initial_part = I0(traj.states.front());
  const std::size_t intervals = traj.size() - 1;
  std::vector<LagrangianValue> local(intervals);
  parallel_for(intervals, threads, [&](std::size_t k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    Vector mid(d), vel(d);
    for (std::size_t i = 0; i < d; ++i) {
      mid[i] = 0.5 * (traj.states[k][i] + traj.states[k + 1][i]);
      vel[i] = (traj.states[k + 1][i] - traj.states[k][i]) / dt;
    }
    local[k] = legendre(model, mid, vel);
  });

  res.running_part.assign(intervals, 0.0);
  ExtendedReal running(0.0);
  for (std::size_t k = 0; k < intervals; ++k) {
    if (local[k].is_infinite()) {
      res.infinite_interval = k;
      const double dt = traj.times[k + 1] - traj.times[k];
      Vector vel(d);
      for (std::size_t i = 0; i < d; ++i) vel[i] = (traj.states[k + 1][i] - traj.states[k][i]) / dt;
      res.infinite_velocity = std::move(vel);
      running = ExtendedReal::infinity();
      break;
    }
    res.running_part[k] = local[k].value.value() * (traj.times[k + 1] - traj.times[k]);
    running += ExtendedReal(res.running_part[k]);
  }
  res.total = res.initial_part + running;
  return res;
}

}  // namespace mfldp
