#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "chaoskit/embedding.hpp"

namespace chaoskit {

// Trajectory in phase space, row-major. The determinism machinery works on
// plain points so callers can analyze any subspace of an embedding.
struct PointMatrix {
  std::vector<double> data;
  std::size_t n = 0;
  int dim = 0;

  double at(std::size_t i, int j) const {
    return data[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
  }
  double& at(std::size_t i, int j) {
    return data[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
  }
};

// First `dims` delay coordinates of every embedding vector (all of them when
// dims <= 0).
inline PointMatrix points_from_embedding(const DelayEmbedding& e, int dims = 0) {
  if (dims <= 0) dims = e.dim();
  PointMatrix p;
  p.n = e.size();
  p.dim = dims;
  p.data.resize(p.n * static_cast<std::size_t>(dims));
  for (std::size_t i = 0; i < p.n; ++i) {
    for (int j = 0; j < dims; ++j) p.at(i, j) = e.coord(i, j);
  }
  return p;
}

struct GridSpec {
  int bins_per_axis = 25;
  int dim = 0;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> width;
};

using BoxId = std::vector<std::int32_t>;

struct CoarseGrained {
  GridSpec grid;
  std::vector<BoxId> ids;  // box id per trajectory point
};

// Boxes are stored sparsely: a dense bins^m array is infeasible for the
// dimensions this runs at. Points on an upper bound map to the last bin.
inline CoarseGrained coarse_grain(const PointMatrix& p, int bins_per_axis) {
  if (bins_per_axis < 2) throw std::invalid_argument("coarse_grain: bins_per_axis must be >= 2");
  if (p.n == 0) throw std::invalid_argument("coarse_grain: empty trajectory");

  CoarseGrained out;
  out.grid.bins_per_axis = bins_per_axis;
  out.grid.dim = p.dim;
  out.grid.lo.resize(static_cast<std::size_t>(p.dim));
  out.grid.hi.resize(static_cast<std::size_t>(p.dim));
  out.grid.width.resize(static_cast<std::size_t>(p.dim));
  for (int j = 0; j < p.dim; ++j) {
    double lo = p.at(0, j), hi = p.at(0, j);
    for (std::size_t i = 1; i < p.n; ++i) {
      const double v = p.at(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw std::invalid_argument("coarse_grain: degenerate (constant) axis");
    out.grid.lo[static_cast<std::size_t>(j)] = lo;
    out.grid.hi[static_cast<std::size_t>(j)] = hi;
    out.grid.width[static_cast<std::size_t>(j)] = (hi - lo) / bins_per_axis;
  }

  out.ids.resize(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    BoxId id(static_cast<std::size_t>(p.dim));
    for (int j = 0; j < p.dim; ++j) {
      const auto ja = static_cast<std::size_t>(j);
      const double f = (p.at(i, j) - out.grid.lo[ja]) / out.grid.width[ja];
      auto bin = static_cast<std::int32_t>(f);
      if (bin < 0) bin = 0;
      if (bin > bins_per_axis - 1) bin = bins_per_axis - 1;
      id[ja] = bin;
    }
    out.ids[i] = std::move(id);
  }
  return out;
}

inline CoarseGrained coarse_grain(const DelayEmbedding& e, int bins_per_axis, int dims = 0) {
  return coarse_grain(points_from_embedding(e, dims), bins_per_axis);
}

// One pass of the trajectory through a box: a maximal run of consecutive
// points with the same box id, plus the unit direction from the run's first
// point to the first point after the run.
struct BoxPass {
  BoxId box;
  std::size_t entry = 0;
  std::size_t exit = 0;
  std::vector<double> direction;  // unit Euclidean norm
};

struct PassCollection {
  std::vector<BoxPass> passes;
  std::size_t zero_displacement_dropped = 0;
  std::size_t end_run_dropped = 0;  // final run never exits the trajectory
};

inline PassCollection collect_passes(const PointMatrix& p, const CoarseGrained& cg) {
  PassCollection out;
  const int dims = cg.grid.dim;
  const std::size_t n = cg.ids.size();
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && cg.ids[j + 1] == cg.ids[i]) ++j;
    const std::size_t exit = j + 1;
    if (exit >= n) {
      out.end_run_dropped = 1;
      break;
    }
    std::vector<double> dir(static_cast<std::size_t>(dims));
    double ss = 0.0;
    for (int d = 0; d < dims; ++d) {
      const double v = p.at(exit, d) - p.at(i, d);
      dir[static_cast<std::size_t>(d)] = v;
      ss += v * v;
    }
    const double norm = std::sqrt(ss);
    if (norm == 0.0) {
      ++out.zero_displacement_dropped;
    } else {
      for (auto& v : dir) v /= norm;
      out.passes.push_back({cg.ids[i], i, exit, std::move(dir)});
    }
    i = exit;
  }
  return out;
}

struct BoxStats {
  std::size_t n = 0;                 // pass count n_k
  std::vector<double> mean;          // V_k
  double resultant_norm = 0.0;       // ||V_k||
};

struct VectorField {
  std::map<BoxId, BoxStats> boxes;   // ordered keys keep reductions deterministic
  std::size_t total_passes = 0;
  int dim = 0;
};

inline VectorField vector_field(const std::vector<BoxPass>& passes, int dims) {
  VectorField field;
  field.dim = dims;
  for (const auto& p : passes) {
    auto& st = field.boxes[p.box];
    if (st.mean.empty()) st.mean.assign(static_cast<std::size_t>(dims), 0.0);
    for (int d = 0; d < dims; ++d)
      st.mean[static_cast<std::size_t>(d)] += p.direction[static_cast<std::size_t>(d)];
    ++st.n;
    ++field.total_passes;
  }
  for (auto& [id, st] : field.boxes) {
    double ss = 0.0;
    for (auto& v : st.mean) {
      v /= static_cast<double>(st.n);
      ss += v * v;
    }
    st.resultant_norm = std::sqrt(ss);
  }
  return field;
}

struct DeterminismResult {
  double kappa = 0.0;      // per-box scores clamped to [0,1]
  double kappa_raw = 0.0;  // same weighting, unclamped scores
  std::size_t boxes_used = 0;
  std::size_t boxes_occupied = 0;
  std::size_t passes_total = 0;
  std::size_t boxes_below_n_min = 0;
  std::size_t zero_displacement_dropped = 0;
  int bins_per_axis = 25;
  int n_min = 2;
  int dims = 0;
  bool projected = false;
  EmbeddingParams params;
};

// Kappa: per-box score d_k = (||V_k||^2 - 1/n_k) / (1 - 1/n_k), the 1/n_k
// term being the expected squared resultant of n_k i.i.d. random unit
// vectors; boxes are weighted by pass count. Boxes with fewer than n_min
// passes are excluded (at n_k = 1 the score is undefined).
inline DeterminismResult kappa(const VectorField& field, int n_min) {
  if (n_min < 2) throw std::invalid_argument("kappa: n_min must be >= 2");
  DeterminismResult out;
  out.n_min = n_min;
  out.dims = field.dim;
  out.boxes_occupied = field.boxes.size();
  out.passes_total = field.total_passes;

  double weight = 0.0, clamped_sum = 0.0, raw_sum = 0.0;
  for (const auto& [id, st] : field.boxes) {
    if (st.n < static_cast<std::size_t>(n_min)) {
      ++out.boxes_below_n_min;
      continue;
    }
    const double nk = static_cast<double>(st.n);
    const double baseline = 1.0 / nk;
    const double d = (st.resultant_norm * st.resultant_norm - baseline) / (1.0 - baseline);
    raw_sum += nk * d;
    clamped_sum += nk * std::clamp(d, 0.0, 1.0);
    weight += nk;
    ++out.boxes_used;
  }
  if (out.boxes_used == 0) throw std::runtime_error("kappa: no box with n_k >= n_min");
  out.kappa = clamped_sum / weight;
  out.kappa_raw = raw_sum / weight;
  return out;
}

struct BoxRow {
  BoxId box;
  std::size_t n = 0;
  double v_norm = 0.0;
  double d = 0.0;  // clamped score; NaN for boxes below n_min
};

inline std::vector<BoxRow> box_table(const VectorField& field, int n_min) {
  std::vector<BoxRow> rows;
  rows.reserve(field.boxes.size());
  for (const auto& [id, st] : field.boxes) {
    BoxRow row{id, st.n, st.resultant_norm, std::numeric_limits<double>::quiet_NaN()};
    if (st.n >= static_cast<std::size_t>(n_min)) {
      const double baseline = 1.0 / static_cast<double>(st.n);
      row.d = std::clamp((st.resultant_norm * st.resultant_norm - baseline) / (1.0 - baseline),
                         0.0, 1.0);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline DeterminismResult determinism_test(const PointMatrix& p, int bins_per_axis, int n_min,
                                          VectorField* field_out = nullptr) {
  const auto cg = coarse_grain(p, bins_per_axis);
  const auto pc = collect_passes(p, cg);
  const auto field = vector_field(pc.passes, p.dim);
  DeterminismResult out = kappa(field, n_min);
  out.bins_per_axis = bins_per_axis;
  out.zero_displacement_dropped = pc.zero_displacement_dropped;
  if (field_out) *field_out = field;
  return out;
}

// Whole determinism test on an embedding; projection_2d restricts the
// analysis to the first two delay coordinates.
inline DeterminismResult determinism_test(const DelayEmbedding& e, int bins_per_axis, int n_min,
                                          bool projection_2d, VectorField* field_out = nullptr) {
  const int dims = projection_2d ? std::min(2, e.dim()) : e.dim();
  DeterminismResult out =
      determinism_test(points_from_embedding(e, dims), bins_per_axis, n_min, field_out);
  out.projected = projection_2d;
  out.params = e.params();
  return out;
}

}  // namespace chaoskit
