#include "aprox/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aprox/errors.hpp"

namespace aprox {
namespace {

int label_of(const SampleView& s) { return static_cast<int>(s.target); }

auto class_block(Vector& x, Index n, Index j) { return x.segment(j * n, n); }
auto class_block(const Vector& x, Index n, Index j) { return x.segment(j * n, n); }

// Logistic sigmoid 1/(1 + e^{-u}) without overflow.
double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Derivative of the scalar link loss in eta = <a, x>.
double link_derivative(LossTag tag, double eta, double target) {
  switch (tag) {
    case LossTag::Logistic: return -target * sigmoid(-target * eta);
    case LossTag::Poisson: return std::exp(eta) - target;
    default: return 0.0;
  }
}

double link_second_derivative(LossTag tag, double eta, double target) {
  switch (tag) {
    case LossTag::Logistic: return sigmoid(-target * eta) * sigmoid(target * eta);
    case LossTag::Poisson: return std::exp(eta);
    default: return 0.0;
  }
}

// Prox of a smooth scalar link loss l(<a, y>): y = x - s a with
// s = alpha l'(<a, x> - s |a|^2). The residual is increasing in s and changes
// sign between 0 and alpha l'(<a, x>). Newton steps inside the sign bracket,
// bisection when a step leaves it; stops once the bracket or the step reaches
// a few ulps (at most 200 iterations), tighter than the 1e-12 target.
Vector link_prox(LossTag tag, const SampleView& s, const Vector& x, double alpha) {
  const double eta0 = s.a.dot(x);
  const double a2 = s.a.squaredNorm();
  const double g0 = alpha * link_derivative(tag, eta0, s.target);
  if (g0 == 0.0 || a2 == 0.0) return x;
  const double bound = std::clamp(g0, -1e300, 1e300);
  double lo = std::min(0.0, bound);
  double hi = std::max(0.0, bound);
  const auto residual = [&](double step) {
    return step - alpha * link_derivative(tag, eta0 - step * a2, s.target);
  };
  // Geometric split while the bracket spans many magnitudes, else midpoint.
  const auto split = [](double l, double h) {
    if (l >= 0.0 && h > 1e3 * std::max(l, 1.0)) return std::sqrt(std::max(l, 1.0)) * std::sqrt(h);
    if (h <= 0.0 && -l > 1e3 * std::max(-h, 1.0)) return -std::sqrt(std::max(-h, 1.0)) * std::sqrt(-l);
    return l + 0.5 * (h - l);
  };
  const double eps = std::numeric_limits<double>::epsilon();
  double root = 0.0;
  double last_move = hi - lo;
  double move_before = hi - lo;
  for (int it = 0; it < 500; ++it) {
    const double r = residual(root);
    if (r == 0.0) break;
    if (r > 0.0) {
      hi = std::min(hi, root);
    } else {
      lo = std::max(lo, root);
    }
    if (hi - lo <= 4.0 * eps * std::max(std::fabs(lo), std::fabs(hi))) break;
    const double slope = 1.0 + alpha * a2 * link_second_derivative(tag, eta0 - root * a2, s.target);
    double next = root - r / slope;
    // Safeguarded Newton: bisect when the step leaves the bracket or stalls.
    if (!(next > lo && next < hi) || std::fabs(next - root) > 0.5 * move_before) next = split(lo, hi);
    move_before = last_move;
    last_move = std::fabs(next - root);
    root = next;
    if (last_move <= 4.0 * eps * std::fabs(root)) break;
  }
  return x - root * s.a;
}

}  // namespace

std::string_view to_string(LossTag tag) {
  switch (tag) {
    case LossTag::LeastSquares: return "LeastSquares";
    case LossTag::AbsoluteLoss: return "AbsoluteLoss";
    case LossTag::Logistic: return "Logistic";
    case LossTag::MulticlassHinge: return "MulticlassHinge";
    case LossTag::Poisson: return "Poisson";
    case LossTag::HalfspaceDist: return "HalfspaceDist";
  }
  return "?";
}

LossTag parse_loss_tag(std::string_view name) {
  for (const LossTag tag : kAllLosses) {
    if (to_string(tag) == name) return tag;
  }
  throw ConfigError("unknown loss family '" + std::string(name) + "'");
}

double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

double eval(const LossFamily& family, const SampleView& s, const Vector& x) {
  switch (family.tag) {
    case LossTag::LeastSquares: {
      const double r = s.a.dot(x) - s.target;
      return 0.5 * r * r;
    }
    case LossTag::AbsoluteLoss: return std::fabs(s.a.dot(x) - s.target);
    case LossTag::Logistic: return softplus(-s.target * s.a.dot(x));
    case LossTag::Poisson: {
      const double eta = s.a.dot(x);
      return std::exp(eta) - s.target * eta + std::lgamma(s.target + 1.0);
    }
    case LossTag::HalfspaceDist:
      return std::max(0.0, s.a.dot(x) - s.target) / s.a.norm();
    case LossTag::MulticlassHinge: {
      const Index n = family.dim;
      const int label = label_of(s);
      const double own = s.a.dot(class_block(x, n, label));
      double worst = 0.0;
      for (Index j = 0; j < family.classes; ++j) {
        if (j == label) continue;
        worst = std::max(worst, 1.0 + s.a.dot(class_block(x, n, j)) - own);
      }
      return worst;
    }
  }
  return 0.0;
}

Vector subgrad(const LossFamily& family, const SampleView& s, const Vector& x) {
  switch (family.tag) {
    case LossTag::LeastSquares: return (s.a.dot(x) - s.target) * s.a;
    case LossTag::AbsoluteLoss: {
      const double r = s.a.dot(x) - s.target;
      const double sign = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
      return sign * s.a;
    }
    case LossTag::Logistic:
    case LossTag::Poisson:
      return link_derivative(family.tag, s.a.dot(x), s.target) * s.a;
    case LossTag::HalfspaceDist: {
      if (s.a.dot(x) - s.target <= 0.0) return Vector::Zero(x.size());
      return s.a / s.a.norm();
    }
    case LossTag::MulticlassHinge: {
      const Index n = family.dim;
      const int label = label_of(s);
      const double own = s.a.dot(class_block(x, n, label));
      double worst = 0.0;
      Index arg = -1;
      for (Index j = 0; j < family.classes; ++j) {
        if (j == label) continue;
        const double term = 1.0 + s.a.dot(class_block(x, n, j)) - own;
        if (term > worst) {
          worst = term;
          arg = j;
        }
      }
      Vector g = Vector::Zero(x.size());
      if (arg >= 0) {
        class_block(g, n, arg) = s.a;
        class_block(g, n, label) = -s.a;
      }
      return g;
    }
  }
  return Vector::Zero(x.size());
}

FirstOrderInfo first_order(const LossFamily& family, const SampleView& s, const Vector& x) {
  return FirstOrderInfo{eval(family, s, x), subgrad(family, s, x), inf_value(family, s)};
}

double inf_value(const LossFamily& family, const SampleView& s) {
  if (family.tag != LossTag::Poisson) return 0.0;
  const double b = s.target;
  if (b <= 0.0) return 0.0;
  return std::lgamma(b + 1.0) + b - b * std::log(b);
}

Vector prox(const LossFamily& family, const SampleView& s, const Vector& x, double alpha) {
  switch (family.tag) {
    case LossTag::LeastSquares: {
      const double r = s.a.dot(x) - s.target;
      return x - (alpha * r / (1.0 + alpha * s.a.squaredNorm())) * s.a;
    }
    case LossTag::AbsoluteLoss: {
      // Same arithmetic as truncated_step on this family so the two agree bitwise.
      const double r = s.a.dot(x) - s.target;
      if (r == 0.0) return x;
      const Vector g = (r > 0.0 ? 1.0 : -1.0) * s.a;
      return x - std::min(alpha, std::fabs(r) / g.squaredNorm()) * g;
    }
    case LossTag::HalfspaceDist: {
      const double norm = s.a.norm();
      const double dist = std::max(0.0, s.a.dot(x) - s.target) / norm;
      if (dist <= 0.0) return x;
      const Vector normal = s.a / norm;
      return x - std::min(alpha, dist / normal.squaredNorm()) * normal;
    }
    case LossTag::Logistic:
    case LossTag::Poisson: return link_prox(family.tag, s, x, alpha);
    case LossTag::MulticlassHinge: {
      const Index n = family.dim;
      const int label = label_of(s);
      const double own = s.a.dot(class_block(x, n, label));
      Vector c(family.classes - 1);
      for (Index j = 0, t = 0; j < family.classes; ++j) {
        if (j == label) continue;
        c(t++) = 1.0 + s.a.dot(class_block(x, n, j)) - own;
      }
      if (c.maxCoeff() <= 0.0) return x;
      const HingeDual dual = solve_hinge_dual(c, alpha * s.a.squaredNorm());
      Vector y = x;
      for (Index j = 0, t = 0; j < family.classes; ++j) {
        if (j == label) continue;
        class_block(y, n, j) -= (alpha * dual.lambda(t++)) * s.a;
      }
      class_block(y, n, label) += (alpha * dual.lambda.sum()) * s.a;
      return y;
    }
  }
  throw UnsupportedProx("no prox for family");
}

double objective(const Dataset& data, const Vector& x) {
  double total = 0.0;
  for (Index i = 0; i < data.size(); ++i) total += eval(data.family, data.sample(i), x);
  return total / static_cast<double>(data.size());
}

ObjectiveEvaluator::ObjectiveEvaluator(const Dataset& data) : data_(data) {
  const double m = static_cast<double>(data.size());
  if (data.family.tag == LossTag::LeastSquares) {
    gram_ = data.features.transpose() * data.features / m;
    moment_ = data.features.transpose() * data.targets / m;
    offset_ = 0.5 * data.targets.squaredNorm() / m;
  } else if (data.family.tag == LossTag::Poisson) {
    double total = 0.0;
    for (Index i = 0; i < data.size(); ++i) total += std::lgamma(data.targets(i) + 1.0);
    offset_ = total / m;
  }
}

double ObjectiveEvaluator::operator()(const Vector& x) const {
  const Dataset& d = data_;
  const double m = static_cast<double>(d.size());
  switch (d.family.tag) {
    case LossTag::LeastSquares: return 0.5 * x.dot(gram_ * x) - moment_.dot(x) + offset_;
    case LossTag::AbsoluteLoss: return (d.features * x - d.targets).lpNorm<1>() / m;
    case LossTag::Logistic: {
      const Vector eta = d.features * x;
      double total = 0.0;
      for (Index i = 0; i < d.size(); ++i) total += softplus(-d.targets(i) * eta(i));
      return total / m;
    }
    case LossTag::Poisson: {
      const Vector eta = d.features * x;
      return (eta.array().exp() - d.targets.array() * eta.array()).sum() / m + offset_;
    }
    default: return objective(d, x);
  }
}

}  // namespace aprox
