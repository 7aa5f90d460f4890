#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "aprox/datagen.hpp"
#include "aprox/errors.hpp"
#include "aprox/verify.hpp"

namespace aprox::verify {

RateFit fit_linear_rate(std::span<const std::int64_t> ks, std::span<const double> dist_sq) {
  if (ks.size() != dist_sq.size()) throw Error("fit_linear_rate: length mismatch");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double d2 = dist_sq[i];
    if (std::isfinite(d2) && d2 > 1e-28) {
      xs.push_back(static_cast<double>(ks[i]));
      ys.push_back(std::log(d2));
    }
  }
  if (xs.size() < 50) {
    throw InsufficientDecay("rate fit needs at least 50 points above the numerical floor, got " +
                            std::to_string(xs.size()));
  }
  const double count = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.points = xs.size();
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 1e-24 * count * (1.0 + my * my)) {
    fit.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ss_res += e * e;
    }
    fit.r_squared = 1.0 - ss_res / syy;
  }
  return fit;
}

RateFit fit_linear_rate(std::span<const double> dist_sq) {
  std::vector<std::int64_t> ks(dist_sq.size());
  for (std::size_t i = 0; i < ks.size(); ++i) ks[i] = static_cast<std::int64_t>(i) + 1;
  return fit_linear_rate(ks, dist_sq);
}

StabilityReport stability_check(const StabilityOptions& options) {
  GenSpec spec;
  spec.family = LossTag::LeastSquares;
  spec.m = options.m;
  spec.n = options.n;
  spec.sigma = options.sigma;
  spec.seed = options.seed;
  const Dataset data = generate(spec);
  const ReferenceOptimum ref = reference_optimum(data);
  const Vector x_hat = *ref.minimizer;
  const EmpiricalProblem problem(data);

  StabilityReport report;
  report.trials = options.trials;
  double c_hat = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    c_hat += subgrad(data.family, data.sample(i), x_hat).squaredNorm();
  }
  report.gradient_variance = c_hat / static_cast<double>(data.size());
  for (std::int64_t i = 1; i < options.k; ++i) {
    const double a = stepsize(options.schedule, i);
    report.sum_alpha_sq += a * a;
  }
  report.initial_dist_sq = x_hat.squaredNorm();
  report.bound = report.initial_dist_sq + report.gradient_variance * report.sum_alpha_sq;
  report.min_margin = std::numeric_limits<double>::infinity();

  double total = 0.0;
  for (int t = 0; t < options.trials; ++t) {
    RngStream sampler(options.seed, "stability", {static_cast<std::uint64_t>(t)});
    Vector x = Vector::Zero(problem.dimension());
    for (std::int64_t k = 1; k < options.k; ++k) {
      const Index idx = static_cast<Index>(sampler.index(static_cast<std::uint64_t>(data.size())));
      x = problem.step(options.model, x, idx, stepsize(options.schedule, k));
      report.max_path_dist_sq = std::max(report.max_path_dist_sq, (x - x_hat).squaredNorm());
    }
    const double final_sq = (x - x_hat).squaredNorm();
    total += final_sq;
    const double margin = report.bound - final_sq;
    report.min_margin = std::min(report.min_margin, margin);
    if (margin >= 0.0) ++report.within_bound;
  }
  report.mean_final_dist_sq = options.trials > 0 ? total / options.trials : 0.0;
  report.fraction_within =
      options.trials > 0 ? static_cast<double>(report.within_bound) / options.trials : 0.0;
  return report;
}

namespace {

struct TrajectoryResult {
  Vector scaled_error;
  double max_norm = 0.0;
};

TrajectoryResult normality_trajectory(const NormalityOptions& o, int trial) {
  const Index n = o.n;
  const LossFamily family{LossTag::LeastSquares, n, 1};
  const Vector x_star = Vector::Ones(n);
  RngStream rng(o.seed, "normality",
                {static_cast<std::uint64_t>(o.model), static_cast<std::uint64_t>(trial)});
  Vector a = Vector::Ones(n);
  Vector x = Vector::Zero(n);
  Vector sum = Vector::Zero(n);
  TrajectoryResult out;
  for (std::int64_t k = 1; k <= o.k; ++k) {
    sum += x;
    out.max_norm = std::max(out.max_norm, x.norm());
    if (k == o.k) break;
    if (o.gaussian_features) {
      for (Index i = 0; i < n; ++i) a(i) = rng.normal();
    }
    const double b = a.dot(x_star) + o.sigma * rng.normal();
    const BoundSample f(family, SampleView{Eigen::Map<const Vector>(a.data(), n), b});
    x = apply_model_step(o.model, x, f, stepsize(o.schedule, k));
    if (!std::isfinite(x.squaredNorm()) || x.norm() > kDivergenceNorm) {
      out.max_norm = std::numeric_limits<double>::infinity();
      break;
    }
  }
  const double kd = static_cast<double>(o.k);
  out.scaled_error = std::sqrt(kd) * (sum / kd - x_star);
  return out;
}

}  // namespace

NormalityReport normality_check(const NormalityOptions& options) {
  const int trials = options.trials;
  std::vector<TrajectoryResult> results(static_cast<std::size_t>(trials));
  unsigned workers = options.parallelism ? options.parallelism : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max(trials, 1))));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int t = next++; t < trials; t = next++) {
          try {
            results[static_cast<std::size_t>(t)] = normality_trajectory(options, t);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  const Index n = options.n;
  NormalityReport report;
  report.model = options.model;
  report.k = options.k;
  report.trials = trials;
  Vector mean = Vector::Zero(n);
  for (const auto& r : results) {
    mean += r.scaled_error;
    report.max_iterate_norm = std::max(report.max_iterate_norm, r.max_norm);
  }
  mean /= static_cast<double>(trials);
  report.empirical_cov = Matrix::Zero(n, n);
  for (const auto& r : results) {
    const Vector d = r.scaled_error - mean;
    report.empirical_cov += d * d.transpose();
  }
  report.empirical_cov /= static_cast<double>(std::max(trials - 1, 1));
  // H = E[a a^T] = I for both feature laws, and Cov(grad f(x*; S)) = sigma^2 H.
  report.target_cov = options.sigma * options.sigma * Matrix::Identity(n, n);
  const double target_norm = report.target_cov.norm();
  const double diff = (report.empirical_cov - report.target_cov).norm();
  report.rel_frobenius_err = target_norm > 0.0 ? diff / target_norm : diff;
  return report;
}

}  // namespace aprox::verify
