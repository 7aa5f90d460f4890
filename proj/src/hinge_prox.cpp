#include <algorithm>
#include <functional>
#include <vector>

#include "aprox/problems.hpp"

namespace aprox {

Vector project_capped_simplex(const Vector& v) {
  Vector w = v.cwiseMax(0.0);
  if (w.sum() <= 1.0) return w;
  // Euclidean projection onto {lambda >= 0, sum lambda = 1} by sorting.
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    running += sorted[i];
    const double candidate = (running - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

HingeDual solve_hinge_dual(const Vector& c, double q) {
  const Index dim = c.size();
  HingeDual out{Vector::Zero(dim), 0.0, 0};
  if (q <= 0.0) {
    // Degenerate curvature: the dual is linear, put all mass on the best class.
    Index arg = 0;
    if (c.maxCoeff(&arg) > 0.0) out.lambda(arg) = 1.0;
    return out;
  }
  const double classes = static_cast<double>(dim + 1);
  // Curvature of the dual is q (I + 11^T), whose top eigenvalue is q*K.
  const double step = 1.0 / (2.0 * q * classes);
  const auto gradient = [&](const Vector& lam) {
    return (c.array() - q * (lam.array() + lam.sum())).matrix();
  };
  Vector& lam = out.lambda;
  for (int it = 0; it < 10'000; ++it) {
    const Vector g = gradient(lam);
    const double residual =
        (lam - project_capped_simplex(lam + g / (q * classes))).lpNorm<Eigen::Infinity>();
    out.kkt_residual = residual;
    out.iterations = it;
    if (residual <= 1e-10) break;
    lam = project_capped_simplex(lam + step * g);
  }

  // Active-set finish: with the support and the cap status read off the
  // projected-gradient iterate, the stationarity conditions are linear with
  // Gram structure I + 11^T and solve in closed form.
  std::vector<Index> support;
  double support_sum = 0.0;
  for (Index j = 0; j < dim; ++j) {
    if (lam(j) > 1e-12) {
      support.push_back(j);
      support_sum += c(j);
    }
  }
  if (!support.empty()) {
    const double s = static_cast<double>(support.size());
    const bool capped = lam.sum() > 1.0 - 1e-9;
    Vector exact = Vector::Zero(dim);
    if (capped) {
      const double mu = (support_sum - q * (1.0 + s)) / s;
      for (const Index j : support) exact(j) = (c(j) - mu) / q - 1.0;
    } else {
      const double total = support_sum / q / (1.0 + s);
      for (const Index j : support) exact(j) = c(j) / q - total;
    }
    if (exact.minCoeff() >= 0.0 && exact.sum() <= 1.0 + 1e-15) {
      const double residual =
          (exact - project_capped_simplex(exact + gradient(exact) / (q * classes)))
              .lpNorm<Eigen::Infinity>();
      if (residual <= out.kkt_residual) {
        lam = exact;
        out.kkt_residual = residual;
      }
    }
  }
  return out;
}

}  // namespace aprox
