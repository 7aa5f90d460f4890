#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aprox/harness.hpp"
#include "aprox/models.hpp"
#include "aprox/problems.hpp"
#include "json.hpp"

namespace aprox::verify {

// ---------------------------------------------------------------------------
// Brute-force prox oracle
// ---------------------------------------------------------------------------

// Minimizes f(x - t a/|a|; s) + t^2/(2 alpha) over t in [-2 alpha |g|, 2 alpha |g|]
// (g the subgradient at x) by golden-section search in quad precision, down to
// an interval width of 1e-11. For the hinge it requires K = 2 and n = 1 and
// runs a nested golden search over the two class weights instead.
Vector grid_prox_oracle(const LossFamily& family, const SampleView& s, const Vector& x, double alpha);

// The model f_x(y; s) each ModelKind minimizes, rebuilt at x. Bundle2 needs
// alpha to place its second cut.
double model_value(ModelKind kind, const Vector& x, const SampleOracle& f, double alpha, const Vector& y);

// A sample plus a probe point, for property checks.
struct RandomInstance {
  LossFamily family;
  Vector a;
  double target = 0.0;
  Vector x;
  double alpha = 1.0;

  SampleView view() const { return SampleView{Eigen::Map<const Vector>(a.data(), a.size()), target}; }
};

// Hinge instances use K = 2, n = 1 when `oracle_sized` is set.
RandomInstance random_instance(LossTag tag, RngStream& rng, bool oracle_sized = false);

// ---------------------------------------------------------------------------
// Deterministic one-dimensional test functions
// ---------------------------------------------------------------------------

// f(x) = x^4 / 4 with its prox from the cubic y + alpha y^3 = x.
class QuarticLoss final : public SampleOracle {
 public:
  double value(const Vector& x) const override;
  FirstOrderInfo first_order(const Vector& x) const override;
  bool has_prox() const override { return true; }
  Vector prox(const Vector& x, double alpha) const override;
};

// Every index maps to the same deterministic oracle.
class SingleSampleProblem final : public Problem {
 public:
  SingleSampleProblem(const SampleOracle& f, Index dim, double f_star = 0.0)
      : f_(f), dim_(dim), f_star_(f_star) {}
  Index sample_count() const override { return 1; }
  Index dimension() const override { return dim_; }
  double objective(const Vector& x) const override { return f_.value(x); }
  double f_star() const override { return f_star_; }
  Vector step(ModelKind kind, const Vector& x, Index, double alpha) const override {
    return apply_model_step(kind, x, f_, alpha);
  }

 private:
  const SampleOracle& f_;
  Index dim_;
  double f_star_;
};

struct DivergenceTranscript {
  std::vector<double> gradient_path;  // x_1, x_2, ... up to the sentinel or the step limit
  bool diverged = false;              // |x| exceeded 1e100 or became non-finite
  bool growth_holds = false;          // the doubling inequalities held on every recorded step
  std::vector<double> prox_path;
  bool prox_monotone = false;
  bool prox_bounded = false;
};

// Gradient method on x^4/4 (must diverge with |x_k| >= 2^{k-1}|x_1| when
// |x_1| >= sqrt(3/alpha_1) and alpha_{k+1} >= alpha_k/4) against the full
// proximal method under `prox_schedule`.
DivergenceTranscript divergence_demo_quartic(const StepSchedule& schedule, double x1, int steps,
                                             const StepSchedule& prox_schedule = {1.0, 1.0});

// Gradient method on x^2/2 with alpha0 >= 3 K^beta doubles for K steps; the
// proximal method contracts by 1/(1 + alpha_k) every step.
DivergenceTranscript divergence_demo_quadratic(double alpha0, double beta, int horizon, double x1 = 1.0);

// ---------------------------------------------------------------------------
// Rates and statistics
// ---------------------------------------------------------------------------

struct RateFit {
  double slope = 0.0;  // per-iteration change of log dist^2
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least squares of log dist^2 against k over points with dist > 1e-14.
// Throws InsufficientDecay with fewer than 50 usable points.
RateFit fit_linear_rate(std::span<const std::int64_t> ks, std::span<const double> dist_sq);
// Convenience form with k = 1, 2, ...
RateFit fit_linear_rate(std::span<const double> dist_sq);

struct StabilityOptions {
  Index m = 1000;
  Index n = 40;
  double sigma = 0.5;
  StepSchedule schedule{1.0, 0.6};
  std::int64_t k = 10'000;
  int trials = 100;
  std::uint64_t seed = 7;
  ModelKind model = ModelKind::FullProx;
};

struct StabilityReport {
  int trials = 0;
  int within_bound = 0;
  double fraction_within = 0.0;
  double initial_dist_sq = 0.0;
  double gradient_variance = 0.0;  // empirical E|grad f(x_hat; S)|^2
  double sum_alpha_sq = 0.0;
  double bound = 0.0;
  double mean_final_dist_sq = 0.0;
  double max_path_dist_sq = 0.0;
  double min_margin = 0.0;
};

// Checks dist^2(x_k, x_hat) <= dist^2(x_1, x_hat) + C sum alpha_i^2 per trial on
// a noisy least-squares dataset, with C the gradient variance at x_hat.
StabilityReport stability_check(const StabilityOptions& options);

struct NormalityOptions {
  Index n = 1;
  double sigma = 0.5;
  StepSchedule schedule{1.0, 0.6};
  std::int64_t k = 100'000;
  int trials = 200;
  std::uint64_t seed = 11;
  ModelKind model = ModelKind::SGM;
  // Features a ~ N(0, I_n) instead of a = 1 (then H = I).
  bool gaussian_features = false;
  unsigned parallelism = 0;
};

struct NormalityReport {
  ModelKind model = ModelKind::SGM;
  std::int64_t k = 0;
  int trials = 0;
  Matrix empirical_cov;
  Matrix target_cov;
  double rel_frobenius_err = 0.0;
  double max_iterate_norm = 0.0;
};

// Least squares under population sampling b = <a, x*> + sigma v with x* = 1:
// the sample covariance of sqrt(k)(xbar_k - x*) over independent
// trajectories against sigma^2 H^{-1}.
NormalityReport normality_check(const NormalityOptions& options);

// ---------------------------------------------------------------------------
// Named checks, shared by the CLI `verify` command and the acceptance suite
// ---------------------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

nlohmann::json to_json(const std::vector<CheckResult>& results);

// Max |prox - oracle| over `instances` random instances.
CheckResult check_prox_oracle(LossTag tag, int instances = 200, std::uint64_t seed = 101);
// Max |truncated - prox| on AbsoluteLoss or HalfspaceDist.
CheckResult check_truncated_equals_prox(LossTag tag, int instances = 1000, std::uint64_t seed = 202);
// Violations of the model-descent inequality and of |x+ - x| <= alpha |g|.
CheckResult check_model_descent(ModelKind kind, int tuples = 1000, std::uint64_t seed = 303);
CheckResult check_step_length(ModelKind kind, int tuples = 1000, std::uint64_t seed = 304);
std::vector<CheckResult> check_divergence_dichotomy();

struct EasyRateOptions {
  int trials = 20;
  std::int64_t k_max = 50'000;
  std::uint64_t seed = 17;
};
// Truncated on noiseless absolute-loss regression (m=1000, n=40, kappa=1, alpha0=1).
CheckResult check_easy_linear_rate(const EasyRateOptions& options = {});
// Span invariance and near-linear decay on an underdetermined interpolation problem.
std::vector<CheckResult> check_interpolation(std::uint64_t seed = 23);
// dist(x_k, x*) non-increasing for Truncated/FullProx on easy problems.
std::vector<CheckResult> check_easy_monotone(std::uint64_t seed = 29);
// |slope| within a factor of 10 of 1/n with rows on the sqrt(n)-sphere.
CheckResult check_kaczmarz_rate(std::uint64_t seed = 31);
std::vector<CheckResult> check_normality(const NormalityOptions& base = {});
CheckResult check_stability(const StabilityOptions& options = {});

struct SuiteOptions {
  bool include_statistical = true;
};
std::vector<CheckResult> run_verify_suite(const SuiteOptions& options = {});

}  // namespace aprox::verify
