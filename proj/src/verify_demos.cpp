#include <cmath>
#include <limits>

#include "aprox/verify.hpp"

namespace aprox::verify {
namespace {

bool sentinel(double v) { return !std::isfinite(v) || std::fabs(v) > kDivergenceNorm; }

Vector scalar(double v) {
  Vector x(1);
  x(0) = v;
  return x;
}

}  // namespace

DivergenceTranscript divergence_demo_quartic(const StepSchedule& schedule, double x1, int steps,
                                             const StepSchedule& prox_schedule) {
  DivergenceTranscript out;
  const QuarticLoss f;

  Vector x = scalar(x1);
  out.gradient_path.push_back(x1);
  for (int k = 1; k < steps; ++k) {
    x = sgm_step(x, f.first_order(x), stepsize(schedule, k));
    out.gradient_path.push_back(x(0));
    if (sentinel(x(0))) {
      out.diverged = true;
      break;
    }
  }
  out.growth_holds = true;
  const double start = std::fabs(x1);
  for (std::size_t j = 1; j < out.gradient_path.size(); ++j) {
    const double cur = std::fabs(out.gradient_path[j]);
    const double prev = std::fabs(out.gradient_path[j - 1]);
    // ldexp is exact, so 2^j |x_1| has no rounding of its own.
    if (!(cur >= 2.0 * prev) || !(cur >= std::ldexp(start, static_cast<int>(j)))) {
      out.growth_holds = false;
    }
  }

  x = scalar(x1);
  out.prox_path.push_back(x1);
  for (int k = 1; k < steps; ++k) {
    x = full_prox_step(x, f, stepsize(prox_schedule, k));
    out.prox_path.push_back(x(0));
  }
  out.prox_monotone = true;
  out.prox_bounded = true;
  for (std::size_t j = 1; j < out.prox_path.size(); ++j) {
    const double cur = std::fabs(out.prox_path[j]);
    const double prev = std::fabs(out.prox_path[j - 1]);
    if (!(cur < prev || prev == 0.0)) out.prox_monotone = false;
    if (!(cur <= start)) out.prox_bounded = false;
  }
  return out;
}

DivergenceTranscript divergence_demo_quadratic(double alpha0, double beta, int horizon, double x1) {
  DivergenceTranscript out;
  const LossFamily family{LossTag::LeastSquares, 1, 1};
  const Vector a = scalar(1.0);
  const BoundSample f(family, SampleView{Eigen::Map<const Vector>(a.data(), 1), 0.0});
  const StepSchedule schedule{alpha0, beta};

  Vector x = scalar(x1);
  out.gradient_path.push_back(x1);
  out.growth_holds = true;
  for (int k = 1; k <= horizon; ++k) {
    x = sgm_step(x, f.first_order(x), stepsize(schedule, k));
    out.gradient_path.push_back(x(0));
    // Integer-exponent comparison: x - alpha x is not exactly -2x in floating
    // point even at alpha = 3, but the cumulative power-of-two bound is exact.
    const double factor = std::fabs(1.0 - stepsize(schedule, k));
    if (!(factor >= 2.0) || !(std::fabs(x(0)) >= std::ldexp(std::fabs(x1), k))) {
      out.growth_holds = false;
    }
    if (sentinel(x(0))) {
      out.diverged = true;
      break;
    }
  }

  // prox_bounded records the contraction |x_{k+1}| (1 + alpha_k) = |x_k| up to
  // a few ulps of rounding in the closed form.
  x = scalar(x1);
  out.prox_path.push_back(x1);
  out.prox_monotone = true;
  out.prox_bounded = true;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int k = 1; k <= horizon; ++k) {
    const double prev = std::fabs(x(0));
    const double alpha = stepsize(schedule, k);
    x = full_prox_step(x, f, alpha);
    out.prox_path.push_back(x(0));
    const double cur = std::fabs(x(0));
    if (!(cur < prev || prev == 0.0)) out.prox_monotone = false;
    if (!(std::fabs(cur * (1.0 + alpha) - prev) <= 8.0 * eps * (1.0 + alpha) * prev)) out.prox_bounded = false;
  }
  return out;
}

}  // namespace aprox::verify
