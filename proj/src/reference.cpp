#include <cmath>
#include <deque>
#include <limits>

#include "aprox/errors.hpp"
#include "aprox/problems.hpp"

namespace aprox {
namespace {

// Half the squared Newton decrement, g^T H^{-1} g / 2: the quadratic-model
// estimate of F(x) - F*.
double newton_gap(const Matrix& hessian, const Vector& gradient) {
  Eigen::LDLT<Matrix> ldlt(hessian);
  if (ldlt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double gap = 0.5 * gradient.dot(ldlt.solve(gradient));
  return std::isfinite(gap) ? std::max(gap, 0.0) : std::numeric_limits<double>::infinity();
}

ReferenceOptimum least_squares_reference(const Dataset& data) {
  const RowMatrix& a = data.features;
  const double m = static_cast<double>(data.size());
  Vector x = Eigen::ColPivHouseholderQR<Matrix>(Matrix(a)).solve(data.targets);
  ReferenceOptimum ref;
  ref.f_star = objective(data, x);
  const Vector normal = a.transpose() * (a * x - data.targets);
  ref.residual = normal.norm();
  ref.tolerance = newton_gap(a.transpose() * a / m, normal / m);
  ref.minimizer = std::move(x);
  ref.method = "normal-equations";
  return ref;
}

// Second derivative of the scalar link loss.
double link_curvature(LossTag tag, double eta, double target) {
  if (tag == LossTag::Poisson) return std::exp(eta);
  const double u = target * eta;
  const double p = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return p * (1.0 - p);
}

double link_slope(LossTag tag, double eta, double target) {
  if (tag == LossTag::Poisson) return std::exp(eta) - target;
  const double u = -target * eta;
  const double p = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
  return -target * p;
}

ReferenceOptimum newton_reference(const Dataset& data, const ReferenceOptions& options) {
  const RowMatrix& a = data.features;
  const LossTag tag = data.family.tag;
  const Index m = data.size();
  const ObjectiveEvaluator objective_of(data);
  Vector x = Vector::Zero(data.family.param_dim());
  double value = objective_of(x);
  Vector gradient;
  Matrix hessian;
  int it = 0;
  for (;; ++it) {
    const Vector eta = a * x;
    Vector slope(m), weight(m);
    for (Index i = 0; i < m; ++i) {
      slope(i) = link_slope(tag, eta(i), data.targets(i));
      weight(i) = link_curvature(tag, eta(i), data.targets(i));
    }
    gradient = a.transpose() * slope / static_cast<double>(m);
    hessian = a.transpose() * weight.asDiagonal() * a / static_cast<double>(m);
    if (gradient.norm() <= options.newton_gradient_tol || it >= options.newton_iterations) break;
    const Vector direction = -hessian.ldlt().solve(gradient);
    const double slope0 = gradient.dot(direction);
    double t = 1.0;
    Vector trial = x + direction;
    double trial_value = objective_of(trial);
    while (!(trial_value <= value + 1e-4 * t * slope0) && t > 1e-12) {
      t *= 0.5;
      trial = x + t * direction;
      trial_value = objective_of(trial);
    }
    if (!(trial_value <= value) && t <= 1e-12) break;
    x = std::move(trial);
    value = trial_value;
  }
  ReferenceOptimum ref;
  ref.f_star = value;
  ref.residual = gradient.norm();
  ref.tolerance = ref.residual <= options.newton_gradient_tol
                      ? newton_gap(hessian, gradient)
                      : std::max(newton_gap(hessian, gradient), ref.residual);
  ref.minimizer = std::move(x);
  ref.method = "damped-newton";
  return ref;
}

Vector batch_subgradient(const Dataset& data, const Vector& x) {
  const double m = static_cast<double>(data.size());
  if (data.family.tag == LossTag::AbsoluteLoss) {
    const Vector r = data.features * x - data.targets;
    const Vector sign = r.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    return data.features.transpose() * sign / m;
  }
  Vector g = Vector::Zero(x.size());
  for (Index i = 0; i < data.size(); ++i) g += subgrad(data.family, data.sample(i), x);
  return g / m;
}

// Full-batch subgradient method with Polyak steps towards the moving target
// level best - delta; delta halves whenever the path since the last
// sufficient decrease exceeds the budget.
ReferenceOptimum polyak_reference(const Dataset& data, const ReferenceOptions& options) {
  const ObjectiveEvaluator objective_of(data);
  Vector x = Vector::Zero(data.family.param_dim());
  if (data.family.tag == LossTag::AbsoluteLoss) {
    x = Eigen::ColPivHouseholderQR<Matrix>(Matrix(data.features)).solve(data.targets);
  }
  double value = objective_of(x);
  double best = value;
  Vector best_x = x;
  double delta = std::max(0.5 * value, 1e-8);
  const double budget = 1.0 + best_x.norm();
  double path = 0.0;
  std::deque<double> window;
  double window_improvement = std::numeric_limits<double>::infinity();
  for (long k = 0; k < options.polyak_iterations; ++k) {
    const Vector g = batch_subgradient(data, x);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) {
      window_improvement = 0.0;
      delta = 0.0;
      break;
    }
    const double step = (value - (best - delta)) / g2;
    x -= step * g;
    path += step * std::sqrt(g2);
    value = objective_of(x);
    if (value < best) {
      if (value <= best - 0.5 * delta) path = 0.0;
      best = value;
      best_x = x;
    }
    if (path > budget) {
      delta *= 0.5;
      path = 0.0;
      x = best_x;
      value = best;
    }
    window.push_back(best);
    if (static_cast<long>(window.size()) > options.polyak_window) window.pop_front();
    if (static_cast<long>(window.size()) == options.polyak_window) {
      window_improvement = window.front() - window.back();
    }
    if (delta < 1e-13 * (1.0 + std::fabs(best))) {
      if (!std::isfinite(window_improvement)) window_improvement = window.front() - window.back();
      break;
    }
  }
  ReferenceOptimum ref;
  ref.f_star = best;
  ref.tolerance = std::max(window_improvement, delta);
  ref.residual = delta;
  ref.minimizer = std::move(best_x);
  ref.method = "batch-polyak";
  return ref;
}

ReferenceOptimum structural_zero(const Dataset& data, std::string method) {
  ReferenceOptimum ref;
  ref.structural = true;
  ref.minimizer = data.planted_optimum;
  ref.method = std::move(method);
  if (data.planted_optimum && data.family.tag != LossTag::Logistic &&
      data.family.tag != LossTag::MulticlassHinge) {
    ref.residual = objective(data, *data.planted_optimum);
  }
  return ref;
}

}  // namespace

ReferenceOptimum reference_optimum(const Dataset& data, const ReferenceOptions& options) {
  if (data.size() == 0) throw Error("reference_optimum: empty dataset");
  switch (data.family.tag) {
    case LossTag::LeastSquares:
      if (data.noiseless) return structural_zero(data, "planted-interpolation");
      return least_squares_reference(data);
    case LossTag::AbsoluteLoss:
    case LossTag::MulticlassHinge:
      if (data.noiseless) return structural_zero(data, "planted-separable");
      return polyak_reference(data, options);
    case LossTag::Logistic:
      if (data.noiseless) return structural_zero(data, "separable-limit");
      return newton_reference(data, options);
    case LossTag::Poisson: return newton_reference(data, options);
    case LossTag::HalfspaceDist: return structural_zero(data, "planted-feasible");
  }
  throw Error("reference_optimum: unknown family");
}

void attach_reference(Dataset& data, const ReferenceOptimum& ref) {
  data.f_star = ref.f_star;
  data.f_star_tolerance = ref.tolerance;
  data.reference_method = ref.method;
}

}  // namespace aprox
