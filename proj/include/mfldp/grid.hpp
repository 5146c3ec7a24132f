#pragma once

// Regular lattices over the cube [-1,1]^d and the probability simplex, with
// neighbour tables and interpolation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace mfldp {

class Grid {
 public:
  /// m points per axis, spacing h = 2/(m-1).
  static Grid cube(int d, int m) {
    require(d >= 1, "Grid::cube: d must be >= 1");
    require(m >= 2, "Grid::cube: need at least 2 points per axis");
    const double total = std::pow(static_cast<double>(m), d);
    require(total <= 5e7, "Grid::cube: too many nodes");
    Grid g(Domain::cube, d, m);
    g.spacing_ = 2.0 / static_cast<double>(m - 1);
    const auto count = static_cast<std::size_t>(total);
    g.coords_.resize(count * static_cast<std::size_t>(d));
    g.index_.resize(count * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < count; ++k) {
      std::size_t rest = k;
      for (int i = 0; i < d; ++i) {
        const int j = static_cast<int>(rest % static_cast<std::size_t>(m));
        rest /= static_cast<std::size_t>(m);
        g.index_[k * d + i] = j;
        g.coords_[k * d + i] = j == m - 1 ? 1.0 : -1.0 + g.spacing_ * j;
      }
    }
    g.count_ = count;
    return g;
  }

  /// Barycentric lattice {k/m : sum k = m}; edge length 1/m along delta_b - delta_a.
  static Grid simplex(int d, int m) {
    require(d >= 2, "Grid::simplex: d must be >= 2");
    require(m >= 1, "Grid::simplex: lattice denominator must be >= 1");
    require(std::pow(static_cast<double>(m + 1), d) < 1.8e19, "Grid::simplex: lattice too large to index");
    Grid g(Domain::simplex, d, m);
    g.spacing_ = 1.0 / static_cast<double>(m);
    std::vector<int> k(static_cast<std::size_t>(d), 0);
    // Enumerate compositions of m into d parts (last part implied).
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == d - 1) {
        k[pos] = remaining;
        g.add_simplex_node(k);
        return;
      }
      for (int c = remaining; c >= 0; --c) {
        k[pos] = c;
        rec(pos + 1, remaining - c);
      }
    };
    rec(0, m);
    return g;
  }

  Domain domain() const { return domain_; }
  int dim() const { return d_; }
  int resolution() const { return m_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return count_; }

  ConstSpan node(std::size_t k) const {
    return ConstSpan(coords_).subspan(k * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_));
  }
  std::span<const int> index(std::size_t k) const {
    return std::span<const int>(index_).subspan(k * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_));
  }

  /// Cube: neighbour along `axis` in direction +1/-1, or -1 at a face.
  long neighbor(std::size_t k, int axis, int dir) const {
    const int j = index_[k * d_ + axis] + dir;
    if (j < 0 || j >= m_) return -1;
    long stride = 1;
    for (int i = 0; i < axis; ++i) stride *= m_;
    return static_cast<long>(k) + dir * stride;
  }

  /// Simplex: node of mu + (delta_b - delta_a)/m, or -1 when mu(a) = 0.
  long edge_neighbor(std::size_t k, int a, int b) const {
    const auto idx = index(k);
    if (a == b || idx[a] == 0) return -1;
    std::vector<int> c(idx.begin(), idx.end());
    --c[a];
    ++c[b];
    return lookup(c);
  }

  /// Node with the given integer multi-index (cube: per-axis index,
  /// simplex: counts), or -1.
  long lookup(const std::vector<int>& c) const {
    if (domain_ == Domain::cube) {
      long k = 0, stride = 1;
      for (int i = 0; i < d_; ++i) {
        if (c[i] < 0 || c[i] >= m_) return -1;
        k += c[i] * stride;
        stride *= m_;
      }
      return k;
    }
    int total = 0;
    for (int v : c) {
      if (v < 0) return -1;
      total += v;
    }
    if (total != m_) return -1;
    auto it = simplex_index_.find(key(c));
    return it == simplex_index_.end() ? -1 : static_cast<long>(it->second);
  }

  /// Multilinear (cube) or Kuhn-simplex barycentric (simplex) interpolation.
  /// Points are clamped onto E first.
  double interpolate(ConstSpan values, ConstSpan x) const {
    return domain_ == Domain::cube ? interpolate_cube(values, x) : interpolate_simplex(values, x);
  }

  Vector sample(const std::function<double(ConstSpan)>& f) const {
    Vector v(count_);
    for (std::size_t k = 0; k < count_; ++k) v[k] = f(node(k));
    return v;
  }

 private:
  Grid(Domain dom, int d, int m) : domain_(dom), d_(d), m_(m) {}

  std::uint64_t key(const std::vector<int>& c) const {
    std::uint64_t k = 0;
    for (int v : c) k = k * static_cast<std::uint64_t>(m_ + 1) + static_cast<std::uint64_t>(v);
    return k;
  }

  void add_simplex_node(const std::vector<int>& c) {
    simplex_index_.emplace(key(c), count_);
    for (int v : c) {
      index_.push_back(v);
      coords_.push_back(static_cast<double>(v) / static_cast<double>(m_));
    }
    ++count_;
  }

  double interpolate_cube(ConstSpan values, ConstSpan x) const {
    std::vector<int> base(static_cast<std::size_t>(d_));
    Vector w(static_cast<std::size_t>(d_));
    for (int i = 0; i < d_; ++i) {
      const double pos = (std::clamp(x[i], -1.0, 1.0) + 1.0) / spacing_;
      const int b = std::clamp(static_cast<int>(std::floor(pos)), 0, m_ - 2);
      base[i] = b;
      w[i] = std::clamp(pos - b, 0.0, 1.0);
    }
    double acc = 0.0;
    std::vector<int> c(static_cast<std::size_t>(d_));
    for (unsigned corner = 0; corner < (1u << d_); ++corner) {
      double weight = 1.0;
      for (int i = 0; i < d_; ++i) {
        const bool up = corner >> i & 1u;
        c[i] = base[i] + (up ? 1 : 0);
        weight *= up ? w[i] : 1.0 - w[i];
      }
      if (weight == 0.0) continue;
      acc += weight * values[static_cast<std::size_t>(lookup(c))];
    }
    return acc;
  }

  // Cumulative coordinates z_j = m * (mu_0 + ... + mu_j), j < d-1, turn the
  // simplex lattice into the integer points of 0 <= z_0 <= ... <= z_{d-2} <= m,
  // a union of Kuhn simplices of the unit cubes.
  double interpolate_simplex(ConstSpan values, ConstSpan x) const {
    const Vector mu = project_to_domain(Domain::simplex, x);
    const int q = d_ - 1;
    Vector z(static_cast<std::size_t>(q));
    double cum = 0.0;
    for (int j = 0; j < q; ++j) {
      cum += mu[j];
      z[j] = std::clamp(cum * m_, 0.0, static_cast<double>(m_));
    }
    for (int j = 1; j < q; ++j) z[j] = std::max(z[j], z[j - 1]);
    std::vector<int> base(static_cast<std::size_t>(q));
    Vector r(static_cast<std::size_t>(q));
    for (int j = 0; j < q; ++j) {
      base[j] = std::min(static_cast<int>(std::floor(z[j])), m_ - 1);
      r[j] = z[j] - base[j];
    }
    std::vector<int> order(static_cast<std::size_t>(q));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return r[a] > r[b] || (r[a] == r[b] && a > b); });

    auto counts_of = [&](const std::vector<int>& zz) {
      std::vector<int> c(static_cast<std::size_t>(d_));
      c[0] = zz[0];
      for (int j = 1; j < q; ++j) c[j] = zz[j] - zz[j - 1];
      c[d_ - 1] = m_ - zz[q - 1];
      return c;
    };
    double acc = 0.0, used = 0.0;
    std::vector<int> vertex = base;
    for (int s = 0; s <= q; ++s) {
      if (s > 0) ++vertex[order[s - 1]];
      const double hi = s == 0 ? 1.0 : r[order[s - 1]];
      const double lo = s == q ? 0.0 : r[order[s]];
      const double weight = hi - lo;
      if (weight <= 0.0) continue;
      const long k = lookup(counts_of(vertex));
      if (k < 0) continue;  // only reachable with round-off sized weights
      acc += weight * values[static_cast<std::size_t>(k)];
      used += weight;
    }
    return acc / used;
  }

  Domain domain_;
  int d_;
  int m_;
  double spacing_ = 0.0;
  std::size_t count_ = 0;
  Vector coords_;
  std::vector<int> index_;
  std::unordered_map<std::uint64_t, std::size_t> simplex_index_;
};

/// Values on the nodes of a shared grid.
struct GridFunction {
  std::shared_ptr<const Grid> grid;
  Vector values;

  static GridFunction sample(std::shared_ptr<const Grid> g, const std::function<double(ConstSpan)>& f) {
    GridFunction out{g, g->sample(f)};
    return out;
  }
  double operator()(ConstSpan x) const { return grid->interpolate(values, x); }
};

inline double sup_difference(const GridFunction& a, const GridFunction& b) {
  require(a.values.size() == b.values.size(), "sup_difference: grid mismatch");
  return max_abs_diff(a.values, b.values);
}

}  // namespace mfldp
