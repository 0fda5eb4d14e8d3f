#include "grouptrack/meanshift.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <omp.h>

namespace grouptrack {

namespace {

std::size_t check_input(std::span<const FeaturePoint> points, const MeanShiftParams& params) {
  if (points.empty()) throw std::invalid_argument("mean_shift: empty input");
  if (!(params.tolerance > 0)) throw std::invalid_argument("mean_shift: tolerance must be positive");
  const std::size_t dim = points.front().coords.size();
  for (const auto& p : points)
    if (p.coords.size() != dim) throw std::invalid_argument("mean_shift: dimension mismatch");
  return dim;
}

// Canonical processing order, so the partition does not depend on input order.
std::vector<std::size_t> canonical_order(std::span<const FeaturePoint> points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].owner != points[b].owner) return points[a].owner < points[b].owner;
    return points[a].coords < points[b].coords;
  });
  return order;
}

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

std::vector<Cluster> group_modes(std::span<const FeaturePoint> sorted, const std::vector<std::vector<double>>& modes,
                                 double tolerance) {
  const double merge_sq = (tolerance / 2) * (tolerance / 2);
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& mode = modes[i];
    std::size_t best = clusters.size();
    double best_sq = merge_sq;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      const double d = squared_distance(mode.data(), clusters[c].mode.data(), mode.size());
      // strict: an equidistant later cluster never beats an earlier one, and
      // earlier clusters have smaller minimum owner ids
      if (d < best_sq) {
        best_sq = d;
        best = c;
      }
    }
    if (best == clusters.size()) clusters.push_back({mode, {}});
    clusters[best].members.push_back(sorted[i].owner);
  }
  for (auto& c : clusters) std::sort(c.members.begin(), c.members.end());
  return clusters;
}

}  // namespace

std::vector<Cluster> mean_shift_reference(std::span<const FeaturePoint> points, const MeanShiftParams& params) {
  const std::size_t dim = check_input(points, params);
  std::vector<FeaturePoint> sorted;
  for (auto i : canonical_order(points)) sorted.push_back(points[i]);

  const double tol_sq = params.tolerance * params.tolerance;
  const double eps_sq = params.epsilon * params.epsilon;
  std::vector<std::vector<double>> modes;
  for (const auto& start : sorted) {
    std::vector<double> y = start.coords;
    for (int it = 0; it < params.max_iter; ++it) {
      std::vector<double> sum(dim, 0.0);
      std::size_t count = 0;
      for (const auto& p : sorted) {
        if (squared_distance(p.coords.data(), y.data(), dim) <= tol_sq) {
          for (std::size_t k = 0; k < dim; ++k) sum[k] += p.coords[k];
          ++count;
        }
      }
      if (count == 0) break;
      std::vector<double> next(dim);
      for (std::size_t k = 0; k < dim; ++k) next[k] = sum[k] / static_cast<double>(count);
      const double shift_sq = squared_distance(next.data(), y.data(), dim);
      y = std::move(next);
      if (shift_sq < eps_sq) break;
    }
    modes.push_back(std::move(y));
  }
  return group_modes(sorted, modes, params.tolerance);
}

std::vector<Cluster> mean_shift(std::span<const FeaturePoint> points, const MeanShiftParams& params) {
  const std::size_t dim = check_input(points, params);
  const auto order = canonical_order(points);
  const std::size_t n = points.size();

  std::vector<FeaturePoint> sorted;
  sorted.reserve(n);
  std::vector<double> data(n * dim);
  for (std::size_t i = 0; i < n; ++i) {
    sorted.push_back(points[order[i]]);
    std::copy(sorted.back().coords.begin(), sorted.back().coords.end(), data.begin() + i * dim);
  }

  const double tol_sq = params.tolerance * params.tolerance;
  const double eps_sq = params.epsilon * params.epsilon;
  std::vector<std::vector<double>> modes(n);

#pragma omp parallel
  {
    std::vector<double> sum(dim), next(dim);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      std::vector<double> y(data.begin() + i * dim, data.begin() + (i + 1) * dim);
      for (int it = 0; it < params.max_iter; ++it) {
        std::fill(sum.begin(), sum.end(), 0.0);
        std::size_t count = 0;
        for (std::size_t j = 0; j < n; ++j) {
          const double* p = data.data() + j * dim;
          if (squared_distance(p, y.data(), dim) <= tol_sq) {
            for (std::size_t k = 0; k < dim; ++k) sum[k] += p[k];
            ++count;
          }
        }
        if (count == 0) break;
        for (std::size_t k = 0; k < dim; ++k) next[k] = sum[k] / static_cast<double>(count);
        const double shift_sq = squared_distance(next.data(), y.data(), dim);
        y.swap(next);
        if (shift_sq < eps_sq) break;
      }
      modes[i] = std::move(y);
    }
  }
  return group_modes(sorted, modes, params.tolerance);
}

}  // namespace grouptrack
