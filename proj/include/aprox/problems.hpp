#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "aprox/models.hpp"
#include "aprox/types.hpp"

namespace aprox {

enum class LossTag { LeastSquares, AbsoluteLoss, Logistic, MulticlassHinge, Poisson, HalfspaceDist };

inline constexpr std::array<LossTag, 6> kAllLosses{
    LossTag::LeastSquares,    LossTag::AbsoluteLoss, LossTag::Logistic,
    LossTag::MulticlassHinge, LossTag::Poisson,      LossTag::HalfspaceDist};

std::string_view to_string(LossTag tag);
LossTag parse_loss_tag(std::string_view name);

struct LossFamily {
  LossTag tag = LossTag::LeastSquares;
  Index dim = 1;      // feature dimension n
  Index classes = 1;  // K, multiclass hinge only

  // Length of the optimization variable: n, or n*K for the hinge (class j
  // occupies entries [j*n, (j+1)*n)).
  Index param_dim() const { return tag == LossTag::MulticlassHinge ? dim * classes : dim; }
};

// One datum. `target` is b for the regression losses, +-1 for logistic, the
// 0-based class label for the hinge, the count for Poisson and the offset of
// the halfspace <a, x> <= b for feasibility.
struct SampleView {
  Eigen::Map<const Vector> a;
  double target;
};

double eval(const LossFamily& family, const SampleView& s, const Vector& x);
// Hinge ties resolve to the lowest class index; sign(0) = 0 for absolute loss.
Vector subgrad(const LossFamily& family, const SampleView& s, const Vector& x);
FirstOrderInfo first_order(const LossFamily& family, const SampleView& s, const Vector& x);
double inf_value(const LossFamily& family, const SampleView& s);
Vector prox(const LossFamily& family, const SampleView& s, const Vector& x, double alpha);

// Stable log(1 + e^u).
double softplus(double u);

// Dual solution of the multiclass-hinge prox: lambda over the K-1 competing
// classes in the capped simplex {lambda >= 0, sum lambda <= 1}.
struct HingeDual {
  Vector lambda;
  double kkt_residual = 0.0;
  int iterations = 0;
};

// Maximizes sum_j lambda_j c_j - (q/2)(sum_j lambda_j^2 + (sum_j lambda_j)^2)
// by projected gradient; q = alpha |a|^2.
HingeDual solve_hinge_dual(const Vector& c, double q);
Vector project_capped_simplex(const Vector& v);

class BoundSample final : public SampleOracle {
 public:
  BoundSample(const LossFamily& family, SampleView sample) : family_(family), sample_(sample) {}

  double value(const Vector& x) const override { return eval(family_, sample_, x); }
  FirstOrderInfo first_order(const Vector& x) const override {
    return aprox::first_order(family_, sample_, x);
  }
  bool has_prox() const override { return true; }
  Vector prox(const Vector& x, double alpha) const override {
    return aprox::prox(family_, sample_, x, alpha);
  }

 private:
  const LossFamily& family_;
  SampleView sample_;
};

struct Dataset {
  LossFamily family;
  RowMatrix features;  // m x n, one sample per row
  Vector targets;      // m
  std::optional<Vector> planted_optimum;
  bool noiseless = false;
  double noise_level = 0.0;  // sigma for regression, p for classification

  // Filled by attach_reference().
  double f_star = 0.0;
  double f_star_tolerance = 0.0;
  std::string reference_method;

  Index size() const { return features.rows(); }
  SampleView sample(Index i) const {
    return SampleView{Eigen::Map<const Vector>(features.row(i).data(), features.cols()),
                      targets(i)};
  }
};

// F(x) = (1/m) sum_i f(x; s_i), evaluated sample by sample.
double objective(const Dataset& data, const Vector& x);

// Same value as objective(), precomputing what the family allows (the Gram
// form for least squares, the log-factorial constant for Poisson).
class ObjectiveEvaluator {
 public:
  explicit ObjectiveEvaluator(const Dataset& data);
  double operator()(const Vector& x) const;

 private:
  const Dataset& data_;
  Matrix gram_;  // A^T A / m
  Vector moment_;  // A^T b / m
  double offset_ = 0.0;
};

struct ReferenceOptions {
  // Full-batch Polyak budget for the noisy nonsmooth families.
  long polyak_iterations = 1'000'000;
  long polyak_window = 10'000;
  int newton_iterations = 200;
  double newton_gradient_tol = 1e-10;
};

struct ReferenceOptimum {
  double f_star = 0.0;
  double tolerance = 0.0;
  std::optional<Vector> minimizer;
  std::string method;
  // Gradient (or normal-equation) residual at the reported minimizer.
  double residual = 0.0;
  // f_star is zero by construction (noiseless interpolating data).
  bool structural = false;

  bool certified(double epsilon) const { return structural || tolerance <= epsilon / 10.0; }
};

ReferenceOptimum reference_optimum(const Dataset& data, const ReferenceOptions& options = {});
void attach_reference(Dataset& data, const ReferenceOptimum& ref);

// Columnar text snapshot: a header line "family m n K noise", then one sample
// per line as n feature values followed by the target.
void write_dataset(const Dataset& data, const std::string& path);
Dataset read_dataset(const std::string& path);

}  // namespace aprox
