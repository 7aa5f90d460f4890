#include "aprox/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aprox/errors.hpp"

namespace aprox {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SGM: return "SGM";
    case ModelKind::Truncated: return "Truncated";
    case ModelKind::FullProx: return "FullProx";
    case ModelKind::Bundle2: return "Bundle2";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  for (const ModelKind kind : kAllModels) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown model kind '" + std::string(name) +
                    "' (expected SGM, Truncated, FullProx or Bundle2)");
}

double stepsize(const StepSchedule& schedule, std::int64_t k) {
  if (schedule.beta == 0.0) return schedule.alpha0;
  return schedule.alpha0 * std::pow(static_cast<double>(k), -schedule.beta);
}

double AffineMinorant::operator()(const Vector& y) const {
  return anchor_value + slope.dot(y - anchor_point);
}

AffineMinorant AffineMinorant::tangent(const Vector& at, const FirstOrderInfo& info) {
  return AffineMinorant{info.value, info.subgrad, at};
}

Vector SampleOracle::prox(const Vector&, double) const {
  throw UnsupportedProx("sample oracle exposes no proximal operator");
}

Vector sgm_step(const Vector& x, const FirstOrderInfo& info, double alpha) {
  return x - alpha * info.subgrad;
}

Vector truncated_step(const Vector& x, const FirstOrderInfo& info, double alpha) {
  const double excess = std::max(info.value - info.inf_value, 0.0);
  const double g2 = info.subgrad.squaredNorm();
  if (g2 < 1e-300) {
    // Rounding in value and inf_value is tolerated; anything larger means the
    // oracle claims a stationary point that is not a minimizer.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::fabs(info.value) + std::fabs(info.inf_value));
    if (excess > slack) {
      throw OracleInconsistency("zero subgradient at positive excess loss " +
                                std::to_string(excess));
    }
    return x;
  }
  const double step = std::min(alpha, excess / g2);
  return x - step * info.subgrad;
}

PairProx bundle_pair_prox(const Vector& x, const AffineMinorant& l1, const AffineMinorant& l2,
                          double alpha) {
  const Vector diff = l1.slope - l2.slope;
  const double d2 = diff.squaredNorm();
  const double gap = l1(x) - l2(x);
  if (d2 == 0.0) {
    const double lambda = gap >= 0.0 ? 1.0 : 0.0;
    return PairProx{x - alpha * (gap >= 0.0 ? l1.slope : l2.slope), lambda};
  }
  // lambda = p / (alpha d2) and 1 - lambda = q / (alpha d2). Work from the
  // smaller weight so a near-zero one keeps its relative accuracy when the two
  // slopes differ by many orders of magnitude.
  const double p = gap - alpha * l2.slope.dot(diff);
  const double q = alpha * l1.slope.dot(diff) - gap;
  double lambda;
  Vector point;
  if (p <= q) {
    lambda = std::clamp(p / (alpha * d2), 0.0, 1.0);
    point = x - alpha * (l2.slope + lambda * diff);
  } else {
    const double mu = std::clamp(q / (alpha * d2), 0.0, 1.0);
    lambda = 1.0 - mu;
    point = x - alpha * (l1.slope - mu * diff);
  }
  return PairProx{std::move(point), lambda};
}

Vector bundle2_step(const Vector& x, const SampleOracle& f, double alpha) {
  const FirstOrderInfo at_x = f.first_order(x);
  const AffineMinorant l1 = AffineMinorant::tangent(x, at_x);
  const Vector x1 = sgm_step(x, at_x, alpha);
  const AffineMinorant l2 = AffineMinorant::tangent(x1, f.first_order(x1));
  return bundle_pair_prox(x, l1, l2, alpha).point;
}

Vector full_prox_step(const Vector& x, const SampleOracle& f, double alpha) {
  if (!f.has_prox()) throw UnsupportedProx("full proximal step requested for a loss without prox");
  return f.prox(x, alpha);
}

Vector apply_model_step(ModelKind kind, const Vector& x, const SampleOracle& f, double alpha) {
  switch (kind) {
    case ModelKind::SGM: return sgm_step(x, f.first_order(x), alpha);
    case ModelKind::Truncated: return truncated_step(x, f.first_order(x), alpha);
    case ModelKind::FullProx: return full_prox_step(x, f, alpha);
    case ModelKind::Bundle2: return bundle2_step(x, f, alpha);
  }
  return x;
}

}  // namespace aprox
