#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "chaoskit/embedding.hpp"

namespace chaoskit {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
};

// Box-assisted grid over two projection coordinates (first and last delay
// coordinate), queried under the max norm over all coordinates. Answers are
// exact: the projected distance lower-bounds the full distance, so ring
// expansion with that bound never misses a closer point. Temporal exclusion
// is strict: candidate k is admissible iff |i - k| > theiler.
class NeighborIndex {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // Indexes the first `limit` vectors of `e` (all of them by default).
  // The embedding must outlive the index.
  explicit NeighborIndex(const DelayEmbedding& e, std::size_t limit = npos)
      : e_(&e),
        data_(e.series().data()),
        tau_(static_cast<std::size_t>(e.tau())),
        dim_(e.dim()),
        count_(std::min(limit, e.size())) {
    if (count_ == 0) throw std::invalid_argument("NeighborIndex: empty embedding");
    axis_[0] = 0;
    axis_[1] = dim_ - 1;
    build();
  }

  std::size_t size() const { return count_; }

  // Nearest admissible neighbour of point i; ties broken by smallest index.
  Neighbor nearest(std::size_t i, int theiler) const {
    check_query(i);
    double best_d = std::numeric_limits<double>::infinity();
    std::size_t best_k = npos;

    const double qx = proj(i, 0);
    const double qy = proj(i, 1);
    const long cx = cell_of_value(qx, 0);
    const long cy = cell_of_value(qy, 1);
    const long ring_max =
        std::max(std::max(cx, grid_[0] - 1 - cx), std::max(cy, grid_[1] - 1 - cy));

    for (long ring = 0; ring <= ring_max; ++ring) {
      // Every unscanned point is at projected distance >= (ring-1)*min_side;
      // scanning continues through equality so index ties stay reachable.
      if (min_side_ > 0.0 && best_k != npos &&
          static_cast<double>(ring - 1) * min_side_ > best_d)
        break;
      scan_ring(cx, cy, ring, [&](std::size_t k) {
        if (!admissible(i, k, theiler)) return;
        const double d = bounded_distance(i, k, best_d);
        if (d < best_d || (d == best_d && k < best_k)) {
          best_d = d;
          best_k = k;
        }
      });
    }
    if (best_k == npos)
      throw std::runtime_error("NeighborIndex::nearest: no admissible candidate");
    return {best_k, best_d};
  }

  // All admissible neighbours with distance <= eps, sorted by index.
  std::vector<Neighbor> within(std::size_t i, double eps, int theiler) const {
    check_query(i);
    if (!(eps > 0.0)) throw std::invalid_argument("NeighborIndex::within: eps must be > 0");
    std::vector<Neighbor> out;

    long lo[2], hi[2];
    for (int a = 0; a < 2; ++a) {
      const long c = cell_of_value(proj(i, a), a);
      long r = grid_[a];
      if (std::isfinite(eps) && side_[a] > 0.0) {
        const double cells = eps / side_[a] + 1.0;
        r = cells >= static_cast<double>(grid_[a]) ? grid_[a] : static_cast<long>(cells);
      }
      lo[a] = std::max(0L, c - r);
      hi[a] = std::min(grid_[a] - 1, c + r);
    }
    for (long x = lo[0]; x <= hi[0]; ++x) {
      for (long y = lo[1]; y <= hi[1]; ++y) {
        scan_cell(x, y, [&](std::size_t k) {
          if (!admissible(i, k, theiler)) return;
          const double d = full_distance(i, k);
          if (d <= eps) out.push_back({k, d});
        });
      }
    }
    std::sort(out.begin(), out.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    return out;
  }

 private:
  double coord(std::size_t i, int j) const { return data_[i + static_cast<std::size_t>(j) * tau_]; }
  double proj(std::size_t i, int a) const { return coord(i, axis_[a]); }

  static bool admissible(std::size_t i, std::size_t k, int theiler) {
    const auto gap = i > k ? i - k : k - i;
    return gap > static_cast<std::size_t>(std::max(0, theiler));
  }

  void check_query(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("NeighborIndex: query index out of range");
  }

  double full_distance(std::size_t i, std::size_t k) const {
    double d = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = std::abs(coord(i, j) - coord(k, j));
      if (diff > d) d = diff;
    }
    return d;
  }

  // Max-norm distance with early abort once it strictly exceeds `cap`
  // (a distance > cap can neither win nor tie).
  double bounded_distance(std::size_t i, std::size_t k, double cap) const {
    double d = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff = std::abs(coord(i, j) - coord(k, j));
      if (diff > d) {
        d = diff;
        if (d > cap) return d;
      }
    }
    return d;
  }

  long cell_of_value(double v, int a) const {
    if (side_[a] <= 0.0) return 0;
    const double f = (v - min_[a]) / side_[a];
    long c = f <= 0.0 ? 0 : static_cast<long>(f);
    return std::min(c, grid_[a] - 1);
  }

  template <typename F>
  void scan_cell(long x, long y, F&& f) const {
    const std::size_t c = static_cast<std::size_t>(x) * static_cast<std::size_t>(grid_[1]) +
                          static_cast<std::size_t>(y);
    for (std::size_t p = cell_start_[c]; p < cell_start_[c + 1]; ++p) f(points_[p]);
  }

  template <typename F>
  void scan_ring(long cx, long cy, long ring, F&& f) const {
    const long x0 = cx - ring, x1 = cx + ring;
    const long y0 = cy - ring, y1 = cy + ring;
    if (ring == 0) {
      if (valid(x0, 0) && valid(y0, 1)) scan_cell(x0, y0, f);
      return;
    }
    for (long x = std::max(0L, x0); x <= std::min(grid_[0] - 1, x1); ++x) {
      const bool edge_col = (x == x0 || x == x1);
      if (valid(y0, 1)) scan_cell(x, y0, f);
      if (valid(y1, 1)) scan_cell(x, y1, f);
      if (!edge_col) continue;
      for (long y = std::max(0L, y0 + 1); y <= std::min(grid_[1] - 1, y1 - 1); ++y) {
        scan_cell(x, y, f);
      }
    }
  }

  bool valid(long c, int a) const { return c >= 0 && c < grid_[a]; }

  void build() {
    for (int a = 0; a < 2; ++a) {
      double lo = proj(0, a), hi = proj(0, a);
      for (std::size_t i = 1; i < count_; ++i) {
        const double v = proj(i, a);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      min_[a] = lo;
      const double range = hi - lo;
      if (range > 0.0) {
        const long g = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(count_))));
        grid_[a] = std::clamp(g, 1L, 512L);
        side_[a] = range / static_cast<double>(grid_[a]);
      } else {
        grid_[a] = 1;
        side_[a] = 0.0;
      }
    }
    min_side_ = 0.0;
    for (int a = 0; a < 2; ++a) {
      if (grid_[a] > 1 && (min_side_ == 0.0 || side_[a] < min_side_)) min_side_ = side_[a];
    }

    const std::size_t n_cells =
        static_cast<std::size_t>(grid_[0]) * static_cast<std::size_t>(grid_[1]);
    std::vector<std::size_t> cell_of(count_);
    std::vector<std::size_t> counts(n_cells, 0);
    for (std::size_t i = 0; i < count_; ++i) {
      const std::size_t c =
          static_cast<std::size_t>(cell_of_value(proj(i, 0), 0)) *
              static_cast<std::size_t>(grid_[1]) +
          static_cast<std::size_t>(cell_of_value(proj(i, 1), 1));
      cell_of[i] = c;
      ++counts[c];
    }
    cell_start_.assign(n_cells + 1, 0);
    for (std::size_t c = 0; c < n_cells; ++c) cell_start_[c + 1] = cell_start_[c] + counts[c];
    points_.resize(count_);
    std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    for (std::size_t i = 0; i < count_; ++i) points_[fill[cell_of[i]]++] = i;
  }

  const DelayEmbedding* e_;
  const double* data_;
  std::size_t tau_;
  int dim_;
  std::size_t count_;
  int axis_[2];
  double min_[2];
  double side_[2];
  long grid_[2];
  double min_side_ = 0.0;
  std::vector<std::size_t> cell_start_;
  std::vector<std::size_t> points_;
};

// Exhaustive-scan reference queries. These are the ground truth the grid is
// tested against and are kept free of any acceleration structure.
inline Neighbor brute_force_nearest(const DelayEmbedding& e, std::size_t i, int theiler,
                                    std::size_t limit = NeighborIndex::npos) {
  const std::size_t n = std::min(limit, e.size());
  if (i >= n) throw std::out_of_range("brute_force_nearest: query index out of range");
  double best_d = std::numeric_limits<double>::infinity();
  std::size_t best_k = NeighborIndex::npos;
  for (std::size_t k = 0; k < n; ++k) {
    const auto gap = i > k ? i - k : k - i;
    if (gap <= static_cast<std::size_t>(std::max(0, theiler))) continue;
    const double d = e.max_distance(i, k);
    if (d < best_d || (d == best_d && k < best_k)) {
      best_d = d;
      best_k = k;
    }
  }
  if (best_k == NeighborIndex::npos)
    throw std::runtime_error("brute_force_nearest: no admissible candidate");
  return {best_k, best_d};
}

inline std::vector<Neighbor> brute_force_within(const DelayEmbedding& e, std::size_t i, double eps,
                                                int theiler,
                                                std::size_t limit = NeighborIndex::npos) {
  const std::size_t n = std::min(limit, e.size());
  if (i >= n) throw std::out_of_range("brute_force_within: query index out of range");
  std::vector<Neighbor> out;
  for (std::size_t k = 0; k < n; ++k) {
    const auto gap = i > k ? i - k : k - i;
    if (gap <= static_cast<std::size_t>(std::max(0, theiler))) continue;
    const double d = e.max_distance(i, k);
    if (d <= eps) out.push_back({k, d});
  }
  return out;
}

}  // namespace chaoskit
