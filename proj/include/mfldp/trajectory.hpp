#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "core.hpp"

namespace mfldp {

enum class PathKind { piecewise_constant, piecewise_linear };

/// Time grid plus states. Simulation output is piecewise constant (cadlag),
/// analysis input is piecewise linear between samples.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  PathKind kind = PathKind::piecewise_linear;

  bool absorbed = false;             // simulation hit a state with zero total rate
  std::size_t jumps = 0;             // simulation only
  double projection_distance = 0.0;  // flows: largest single projection back onto E

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.back() - times.front(); }

  /// State at time t, clamped to the time range.
  Vector at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    if (kind == PathKind::piecewise_constant) return states[k];
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    Vector x(states[k].size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - w) * states[k][i] + w * states[k + 1][i];
    return x;
  }

  void validate(Domain dom, std::size_t d, double tol = 1e-9) const {
    require(!times.empty() && times.size() == states.size(), "trajectory: times and states must match");
    for (std::size_t k = 0; k < times.size(); ++k) {
      require(std::isfinite(times[k]), "trajectory: non-finite time");
      if (k > 0) require(times[k] > times[k - 1], "trajectory: times must be strictly increasing");
      require(states[k].size() == d, "trajectory: state dimension mismatch");
      require(in_domain(dom, states[k], tol),
              "trajectory: state " + std::to_string(k) + " lies outside E");
    }
  }
};

/// Straight segments through the given knots, resampled with `per_segment`
/// intervals per segment.
inline Trajectory polyline(const std::vector<double>& knot_times, const std::vector<Vector>& knots,
                           std::size_t per_segment) {
  require(knot_times.size() == knots.size() && knots.size() >= 2, "polyline: need >= 2 knots");
  require(per_segment >= 1, "polyline: per_segment must be >= 1");
  Trajectory tr;
  tr.kind = PathKind::piecewise_linear;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    for (std::size_t j = (s == 0 ? 0 : 1); j <= per_segment; ++j) {
      const double w = static_cast<double>(j) / static_cast<double>(per_segment);
      tr.times.push_back((1.0 - w) * knot_times[s] + w * knot_times[s + 1]);
      Vector x(knots[s].size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - w) * knots[s][i] + w * knots[s + 1][i];
      tr.states.push_back(std::move(x));
    }
  }
  return tr;
}

/// Same path traversed backwards in time over the same time range.
inline Trajectory time_reversed(const Trajectory& tr) {
  Trajectory out = tr;
  const double t0 = tr.times.front(), t1 = tr.times.back();
  const std::size_t n = tr.size();
  for (std::size_t k = 0; k < n; ++k) {
    out.times[k] = t0 + (t1 - tr.times[n - 1 - k]);
    out.states[k] = tr.states[n - 1 - k];
  }
  return out;
}

}  // namespace mfldp
