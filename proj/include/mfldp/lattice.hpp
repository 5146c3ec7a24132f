#pragma once

// The n-particle state spaces E_{1,n} and E_{2,n} as integer occupation counts.

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>
#include <vector>

#include "core.hpp"

namespace mfldp {

using Counts = std::vector<long>;

/// Cube: number of +1 spins per coordinate, k_i = n(1+x_i)/2.
/// Simplex: particles per state, N_a = n mu(a).
/// Throws when x is farther than `tol` (in state units) from the n-lattice.
inline Counts lattice_counts(Domain dom, long n, ConstSpan x, double tol = 1e-9) {
  require(n >= 1, "lattice: n must be >= 1");
  require(in_domain(dom, x, tol), "lattice: state outside E");
  const double nn = static_cast<double>(n);
  Counts k(x.size());
  long total = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double raw = dom == Domain::cube ? 0.5 * nn * (1.0 + x[i]) : nn * x[i];
    const double snapped = std::round(raw);
    const double state_scale = dom == Domain::cube ? 2.0 / nn : 1.0 / nn;
    require(std::abs(raw - snapped) * state_scale <= tol,
            "lattice: state is not on the n = " + std::to_string(n) + " lattice");
    k[i] = static_cast<long>(snapped);
    total += k[i];
  }
  if (dom == Domain::simplex) require(total == n, "lattice: simplex counts do not sum to n");
  return k;
}

inline Vector lattice_point(Domain dom, long n, const Counts& k) {
  const double nn = static_cast<double>(n);
  Vector x(k.size());
  for (std::size_t i = 0; i < k.size(); ++i)
    x[i] = dom == Domain::cube ? 2.0 * static_cast<double>(k[i]) / nn - 1.0 : static_cast<double>(k[i]) / nn;
  return x;
}

/// Nearest lattice point. For the simplex the largest-remainder rule keeps sum = n.
inline Counts nearest_lattice_counts(Domain dom, long n, ConstSpan x) {
  require(n >= 1, "lattice: n must be >= 1");
  const double nn = static_cast<double>(n);
  Counts k(x.size());
  if (dom == Domain::cube) {
    for (std::size_t i = 0; i < x.size(); ++i)
      k[i] = std::clamp(static_cast<long>(std::lround(0.5 * nn * (1.0 + x[i]))), 0L, n);
    return k;
  }
  long total = 0;
  std::vector<std::pair<double, std::size_t>> rem;
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double raw = std::max(0.0, nn * x[a]);
    k[a] = static_cast<long>(std::floor(raw));
    total += k[a];
    rem.emplace_back(raw - std::floor(raw), a);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
  for (std::size_t j = 0; total < n; ++j, ++total) ++k[rem[j % rem.size()].second];
  while (total > n) {
    auto it = std::max_element(k.begin(), k.end());
    --*it;
    --total;
  }
  return k;
}

}  // namespace mfldp
