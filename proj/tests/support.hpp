#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aprox/types.hpp"

namespace testing {

// Dense grid over [lo, hi] followed by repeated local re-gridding around the
// best point. Independent of the library's solvers.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi,
                          int points = 10'001, int passes = 6) {
  double best = lo;
  for (int pass = 0; pass < passes; ++pass) {
    double best_value = INFINITY;
    const double h = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double t = lo + h * i;
      const double v = f(t);
      if (v < best_value) {
        best_value = v;
        best = t;
      }
    }
    lo = best - 2 * h;
    hi = best + 2 * h;
  }
  return best;
}

// argmin_y max_i(c_i + s_i y) + (y - x)^2 / (2 alpha) by enumerating the
// stationary point of each piece and every pairwise crossing.
inline double lines_prox_1d(const std::vector<std::pair<double, double>>& lines, double x,
                            double alpha) {
  const auto h = [&](double y) {
    double m = -INFINITY;
    for (const auto& [c, s] : lines) m = std::max(m, c + s * y);
    return m + (y - x) * (y - x) / (2 * alpha);
  };
  std::vector<double> candidates;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    candidates.push_back(x - alpha * lines[i].second);
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double ds = lines[i].second - lines[j].second;
      if (ds != 0.0) candidates.push_back((lines[j].first - lines[i].first) / ds);
    }
  }
  double best = candidates.front();
  for (const double y : candidates) {
    if (h(y) < h(best)) best = y;
  }
  return best;
}

inline aprox::Vector vec(std::initializer_list<double> values) {
  aprox::Vector v(static_cast<aprox::Index>(values.size()));
  aprox::Index i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

std::string read_file(const std::string& path);

}  // namespace testing
