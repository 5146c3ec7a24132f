#pragma once

// Exact (Gillespie) simulation of the n-particle empirical processes and
// plain Monte-Carlo estimates of tube probabilities around reference paths.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "action.hpp"
#include "core.hpp"
#include "lattice.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "trajectory.hpp"

namespace mfldp {

/// Transition structure of A_n on integer counts. Cube transitions are ordered
/// (up_0, down_0, up_1, down_1, ...); simplex transitions (a -> b) row-major
/// with a != b.
class JumpKernel {
 public:
  JumpKernel(const Model& model, long n) : model_(&model), n_(n), dom_(domain_of(model)), d_(dimension(model)) {
    require(n >= 1, "simulator: n must be >= 1");
    transitions_ = dom_ == Domain::cube ? 2 * d_ : d_ * (d_ - 1);
    // Small cube lattices: tabulate every state once, shared read-only by replicas.
    if (dom_ == Domain::cube) {
      double states = std::pow(static_cast<double>(n + 1), d_);
      if (states * transitions_ <= 4e6) {
        table_.resize(static_cast<std::size_t>(states) * transitions_);
        Counts k(static_cast<std::size_t>(d_), 0);
        for (std::size_t s = 0; s < static_cast<std::size_t>(states); ++s) {
          std::size_t rest = s;
          for (int i = 0; i < d_; ++i) {
            k[i] = static_cast<long>(rest % static_cast<std::size_t>(n + 1));
            rest /= static_cast<std::size_t>(n + 1);
          }
          compute(k, std::span<double>(table_).subspan(s * transitions_, transitions_));
        }
      }
    }
  }

  int transitions() const { return transitions_; }
  long n() const { return n_; }
  Domain domain() const { return dom_; }
  int dim() const { return d_; }

  /// Fills `rates` (size transitions()) for occupation counts `k`.
  void rates(const Counts& k, std::span<double> rates) const {
    if (!table_.empty()) {
      std::size_t s = 0;
      for (int i = d_ - 1; i >= 0; --i) s = s * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(k[i]);
      const double* src = table_.data() + s * transitions_;
      std::copy(src, src + transitions_, rates.begin());
      return;
    }
    compute(k, rates);
  }

  /// Applies transition `j` to the counts.
  void apply(Counts& k, int j) const {
    if (dom_ == Domain::cube) {
      k[j / 2] += (j % 2 == 0) ? 1 : -1;
      return;
    }
    const auto [a, b] = pair(j);
    --k[a];
    ++k[b];
  }

  std::pair<int, int> pair(int j) const {
    const int a = j / (d_ - 1);
    int b = j % (d_ - 1);
    if (b >= a) ++b;
    return {a, b};
  }

 private:
  void compute(const Counts& k, std::span<double> out) const {
    const Vector x = lattice_point(dom_, n_, k);
    if (dom_ == Domain::cube) {
      const auto& m = std::get<EhrenfestModel>(*model_);
      Vector up(static_cast<std::size_t>(d_)), down(static_cast<std::size_t>(d_));
      m.finite_rates(x, n_, up, down);
      for (int i = 0; i < d_; ++i) {
        out[2 * i] = (k[i] < n_) ? static_cast<double>(n_ - k[i]) * up[i] : 0.0;
        out[2 * i + 1] = (k[i] > 0) ? static_cast<double>(k[i]) * down[i] : 0.0;
      }
    } else {
      const auto& m = std::get<GlauberModel>(*model_);
      Vector kernel(static_cast<std::size_t>(d_ * d_));
      m.finite_kernel(x, n_, kernel);
      int j = 0;
      for (int a = 0; a < d_; ++a)
        for (int b = 0; b < d_; ++b) {
          if (a == b) continue;
          out[j++] = k[a] > 0 ? static_cast<double>(k[a]) * kernel[a * d_ + b] : 0.0;
        }
    }
    for (double r : out)
      require(r >= 0.0 && std::isfinite(r), "simulator: model produced a negative or non-finite rate");
  }

  const Model* model_;
  long n_;
  Domain dom_;
  int d_;
  int transitions_;
  std::vector<double> table_;
};

/// Runs the jump chain from `k` until `horizon`. `on_jump(t, counts)` is
/// called after every jump and may return false to stop early. Returns true
/// if the chain was absorbed (zero total rate) before the horizon.
template <class OnJump>
bool run_jump_chain(const JumpKernel& kernel, Counts& k, double horizon, SplitMix64& rng, OnJump&& on_jump) {
  std::vector<double> rates(static_cast<std::size_t>(kernel.transitions()));
  double t = 0.0;
  while (true) {
    kernel.rates(k, rates);
    double total = 0.0;
    for (double r : rates) total += r;
    if (total <= 0.0) return true;
    t += rng.exponential(total);
    if (t >= horizon) return false;
    const double target = rng.uniform() * total;
    double cum = 0.0;
    int chosen = -1;
    for (int j = 0; j < static_cast<int>(rates.size()); ++j) {
      if (rates[j] <= 0.0) continue;
      cum += rates[j];
      chosen = j;
      if (cum > target) break;
    }
    kernel.apply(k, chosen);
    if (!on_jump(t, k)) return false;
  }
}

/// Piecewise-constant realisation on [0, horizon]. The last sample sits at the
/// horizon and repeats the final state.
inline Trajectory simulate_path(const Model& model, long n, ConstSpan start, double horizon, std::uint64_t seed) {
  require(horizon > 0.0 && std::isfinite(horizon), "simulate_path: horizon must be positive");
  check_state(model, start, "simulate_path");
  const JumpKernel kernel(model, n);
  Counts k = lattice_counts(kernel.domain(), n, start);
  SplitMix64 rng(seed);
  Trajectory tr;
  tr.kind = PathKind::piecewise_constant;
  tr.times.push_back(0.0);
  tr.states.push_back(lattice_point(kernel.domain(), n, k));
  tr.absorbed = run_jump_chain(kernel, k, horizon, rng, [&](double t, const Counts& c) {
    tr.times.push_back(t);
    tr.states.push_back(lattice_point(kernel.domain(), n, c));
    ++tr.jumps;
    return true;
  });
  tr.times.push_back(horizon);
  tr.states.push_back(tr.states.back());
  return tr;
}

/// sup_t |path(t) - ref(t)|_inf for a piecewise-constant path against a
/// piecewise-linear reference, both on [0, T]. Exact: on each constant piece
/// the distance is convex between reference knots.
inline double sup_distance(const Trajectory& path, const Trajectory& ref) {
  require(path.kind == PathKind::piecewise_constant, "sup_distance: path must be piecewise constant");
  std::vector<double> checks = ref.times;
  for (std::size_t j = 0; j < path.size(); ++j) checks.push_back(path.times[j]);
  std::sort(checks.begin(), checks.end());
  double dist = 0.0;
  for (double t : checks) {
    if (t > ref.times.back() || t > path.times.back()) continue;
    const Vector r = ref.at(t);
    // left limit and value at t
    auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - path.times.begin()) - 1;
    dist = std::max(dist, max_abs_diff(path.states[k], r));
    if (k > 0 && path.times[k] == t) dist = std::max(dist, max_abs_diff(path.states[k - 1], r));
  }
  return dist;
}

struct TubeEstimate {
  std::uint64_t hits = 0;
  std::uint64_t replicas = 0;
  double probability() const { return replicas ? static_cast<double>(hits) / static_cast<double>(replicas) : 0.0; }
};

namespace detail {

// Online tube test along one realisation; stops at the first exit.
class TubeWatcher {
 public:
  TubeWatcher(const Trajectory& ref, double delta, Domain dom, long n)
      : ref_(ref), delta_(delta), dom_(dom), n_(n), state_(ref.states.front().size()) {}

  bool start(const Counts& k) {
    state_ = lattice_point(dom_, n_, k);
    knot_ = 1;
    return inside(0.0);
  }

  // Checks up to t with the current state, then the new state at t.
  bool jump(double t, const Counts& k) {
    if (!sweep_to(t)) return false;
    state_ = lattice_point(dom_, n_, k);
    return inside(t);
  }

  bool finish() { return sweep_to(ref_.times.back()); }

 private:
  bool sweep_to(double t) {
    while (knot_ < ref_.size() && ref_.times[knot_] <= t) {
      if (!inside_at_knot(knot_)) return false;
      ++knot_;
    }
    return inside(t);
  }
  bool inside_at_knot(std::size_t j) const {
    for (std::size_t i = 0; i < state_.size(); ++i)
      if (std::abs(state_[i] - ref_.states[j][i]) >= delta_) return false;
    return true;
  }
  bool inside(double t) const {
    const Vector r = ref_.at(t);
    for (std::size_t i = 0; i < state_.size(); ++i)
      if (std::abs(state_[i] - r[i]) >= delta_) return false;
    return true;
  }

  const Trajectory& ref_;
  double delta_;
  Domain dom_;
  long n_;
  Vector state_;
  std::size_t knot_ = 1;
};

}  // namespace detail

/// Fraction of replicas whose path stays in the open delta-tube (sup over
/// time of the max-norm) around `reference` on [0, T]. Paths start at the
/// lattice point nearest to reference(0). Replica r uses the stream
/// SplitMix64::derive(seed, r); counts are reduced by replica index, so the
/// result does not depend on the thread count.
inline TubeEstimate estimate_tube_probability(const Model& model, long n, const Trajectory& reference, double delta,
                                              std::uint64_t replicas, std::uint64_t seed, int threads = 0) {
  require(replicas >= 1, "estimate_tube_probability: replicas must be >= 1");
  require(delta > 0.0 && std::isfinite(delta), "estimate_tube_probability: delta must be positive");
  require(reference.kind == PathKind::piecewise_linear, "estimate_tube_probability: reference must be piecewise linear");
  require(reference.times.front() == 0.0, "estimate_tube_probability: reference must start at t = 0");
  const Domain dom = domain_of(model);
  reference.validate(dom, static_cast<std::size_t>(dimension(model)));
  const JumpKernel kernel(model, n);
  const Counts start = nearest_lattice_counts(dom, n, reference.states.front());
  const double horizon = reference.times.back();

  constexpr std::uint64_t block = 4096;
  const std::uint64_t blocks = (replicas + block - 1) / block;
  std::vector<std::uint64_t> block_hits(static_cast<std::size_t>(blocks), 0);
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    const std::uint64_t lo = b * block, hi = std::min(replicas, lo + block);
    std::uint64_t hits = 0;
    detail::TubeWatcher watcher(reference, delta, dom, n);
    for (std::uint64_t r = lo; r < hi; ++r) {
      SplitMix64 rng = SplitMix64::derive(seed, r);
      Counts k = start;
      if (!watcher.start(k)) continue;
      bool ok = true;
      run_jump_chain(kernel, k, horizon, rng, [&](double t, const Counts& c) {
        ok = watcher.jump(t, c);
        return ok;
      });
      if (ok && watcher.finish()) ++hits;
    }
    block_hits[b] = hits;
  });
  TubeEstimate est;
  est.replicas = replicas;
  for (auto h : block_hits) est.hits += h;
  return est;
}

struct RateReport {
  std::vector<long> n_values;
  std::vector<double> tube_probabilities;
  std::vector<std::uint64_t> hits;
  std::vector<std::optional<double>> decay_estimates;  // -(1/n) log p_hat; absent when p_hat = 0
  ExtendedReal reference_action;
  double delta = 0.0;
  std::uint64_t replicas = 0;
  std::uint64_t seed = 0;
  std::string rng = SplitMix64::algorithm;
};

/// Per-n seed: the entry for n_values[j] uses seed' = mix(seed ^ mix(n)).
inline std::uint64_t seed_for_n(std::uint64_t seed, long n) {
  return SplitMix64::mix(seed ^ SplitMix64::mix(static_cast<std::uint64_t>(n)));
}

inline RateReport ldp_rate_estimate(const Model& model, const Trajectory& reference, double delta,
                                    const std::vector<long>& n_values, std::uint64_t replicas, std::uint64_t seed,
                                    const InitialRate& I0, int threads = 0) {
  require(!n_values.empty(), "ldp_rate_estimate: n_values must not be empty");
  for (std::size_t j = 1; j < n_values.size(); ++j)
    require(n_values[j] > n_values[j - 1], "ldp_rate_estimate: n_values must be increasing");
  RateReport rep;
  rep.n_values = n_values;
  rep.delta = delta;
  rep.replicas = replicas;
  rep.seed = seed;
  rep.reference_action = evaluate_action(model, reference, I0, threads).total;
  for (long n : n_values) {
    const TubeEstimate est = estimate_tube_probability(model, n, reference, delta, replicas, seed_for_n(seed, n), threads);
    rep.hits.push_back(est.hits);
    rep.tube_probabilities.push_back(est.probability());
    if (est.hits > 0)
      rep.decay_estimates.emplace_back(-std::log(est.probability()) / static_cast<double>(n));
    else
      rep.decay_estimates.emplace_back(std::nullopt);
  }
  return rep;
}

}  // namespace mfldp
