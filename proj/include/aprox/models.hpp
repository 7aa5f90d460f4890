#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "aprox/types.hpp"

namespace aprox {

enum class ModelKind { SGM, Truncated, FullProx, Bundle2 };

inline constexpr std::array<ModelKind, 4> kAllModels{ModelKind::SGM, ModelKind::Truncated,
                                                    ModelKind::FullProx, ModelKind::Bundle2};

std::string_view to_string(ModelKind kind);
// Throws ConfigError on an unknown name.
ModelKind parse_model_kind(std::string_view name);

// alpha_k = alpha0 * k^(-beta), k >= 1.
struct StepSchedule {
  double alpha0 = 1.0;
  double beta = 0.6;
};

double stepsize(const StepSchedule& schedule, std::int64_t k);

// f(x; s), a subgradient at x, and inf_z f(z; s).
struct FirstOrderInfo {
  double value = 0.0;
  Vector subgrad;
  double inf_value = 0.0;
};

// l(y) = anchor_value + <slope, y - anchor_point>
struct AffineMinorant {
  double anchor_value = 0.0;
  Vector slope;
  Vector anchor_point;

  double operator()(const Vector& y) const;
  static AffineMinorant tangent(const Vector& at, const FirstOrderInfo& info);
};

// One fixed sample's loss f(.; s).
class SampleOracle {
 public:
  virtual ~SampleOracle() = default;

  virtual double value(const Vector& x) const = 0;
  virtual FirstOrderInfo first_order(const Vector& x) const = 0;
  virtual bool has_prox() const { return false; }
  // argmin_y f(y; s) + |y - x|^2 / (2 alpha). Throws UnsupportedProx unless has_prox().
  virtual Vector prox(const Vector& x, double alpha) const;
};

Vector sgm_step(const Vector& x, const FirstOrderInfo& info, double alpha);

// Exact minimizer of max{value + <g, y - x>, inf_value} + |y - x|^2/(2 alpha):
// the Polyak-clipped step x - min{alpha, excess/|g|^2} g.
Vector truncated_step(const Vector& x, const FirstOrderInfo& info, double alpha);

struct PairProx {
  Vector point;
  double lambda = 1.0;  // weight on the first plane
};

// Exact minimizer of max{l1, l2} + |y - x|^2/(2 alpha). Equal slopes break the
// tie towards l1 when l1(x) >= l2(x).
PairProx bundle_pair_prox(const Vector& x, const AffineMinorant& l1, const AffineMinorant& l2,
                          double alpha);

// Two-line cutting-plane step: tangent at x, tangent at the SGM point, then the
// exact pair prox around x.
Vector bundle2_step(const Vector& x, const SampleOracle& f, double alpha);

Vector full_prox_step(const Vector& x, const SampleOracle& f, double alpha);

Vector apply_model_step(ModelKind kind, const Vector& x, const SampleOracle& f, double alpha);

}  // namespace aprox
