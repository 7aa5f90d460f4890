#include <algorithm>
#include <cmath>
#include <string>

#include "aprox/datagen.hpp"
#include "aprox/errors.hpp"
#include "aprox/format.hpp"
#include "aprox/verify.hpp"

namespace aprox::verify {
namespace {

CheckResult make(std::string name, bool passed, double measured, double threshold,
                 std::string detail = {}) {
  return CheckResult{std::move(name), passed, measured, threshold, std::move(detail)};
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

Vector random_point_near(const Vector& x, RngStream& rng) {
  const double scale = std::pow(10.0, 2.0 * rng.uniform() - 1.0);
  Vector z(x.size());
  for (Index i = 0; i < z.size(); ++i) z(i) = x(i) + scale * rng.normal();
  return z;
}

// Poisson probes keep <a, z> moderate so e^eta stays representable.
Vector probe_point(const RandomInstance& inst, RngStream& rng) {
  if (inst.family.tag == LossTag::Poisson) {
    Vector z(inst.x.size());
    for (Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    return z;
  }
  return random_point_near(inst.x, rng);
}

}  // namespace

nlohmann::json to_json(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  const auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  for (const auto& r : results) {
    all = all && r.passed;
    checks.push_back({{"name", r.name},
                      {"passed", r.passed},
                      {"measured", number(r.measured)},
                      {"threshold", number(r.threshold)},
                      {"detail", r.detail}});
  }
  return {{"passed", all}, {"checks", checks}};
}

CheckResult check_prox_oracle(LossTag tag, int instances, std::uint64_t seed) {
  RngStream rng(seed, "prox-oracle", {static_cast<std::uint64_t>(tag)});
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const RandomInstance inst = random_instance(tag, rng, true);
    const Vector y = prox(inst.family, inst.view(), inst.x, inst.alpha);
    const Vector o = grid_prox_oracle(inst.family, inst.view(), inst.x, inst.alpha);
    const double err = (y - o).cwiseAbs().maxCoeff();
    worst = std::isfinite(err) ? std::max(worst, err) : std::numeric_limits<double>::infinity();
  }
  return make("prox_oracle_" + lower(to_string(tag)), worst <= 1e-8, worst, 1e-8,
              std::to_string(instances) + " instances");
}

CheckResult check_truncated_equals_prox(LossTag tag, int instances, std::uint64_t seed) {
  RngStream rng(seed, "truncated-prox", {static_cast<std::uint64_t>(tag)});
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const RandomInstance inst = random_instance(tag, rng);
    const Vector y = prox(inst.family, inst.view(), inst.x, inst.alpha);
    const Vector t =
        truncated_step(inst.x, first_order(inst.family, inst.view(), inst.x), inst.alpha);
    worst = std::max(worst, (y - t).cwiseAbs().maxCoeff());
  }
  return make("truncated_equals_prox_" + lower(to_string(tag)), worst <= 1e-12, worst, 1e-12,
              std::to_string(instances) + " instances");
}

// Rounding scale of the model values at x+ and z: the cut values themselves
// plus alpha |slope| |point| for every cut, so huge Poisson slopes at the
// gradient point do not turn cancellation into violations.
double descent_scale(ModelKind kind, const RandomInstance& inst, const SampleOracle& f,
                     const Vector& next, const Vector& z, double m_next, double m_z) {
  const FirstOrderInfo info = f.first_order(inst.x);
  const double reach = inst.x.norm() + next.norm() + z.norm();
  double scale = 1.0 + 0.5 * (inst.x - z).squaredNorm() +
                 inst.alpha * (std::fabs(m_next) + std::fabs(m_z) + std::fabs(info.value) +
                               info.subgrad.norm() * reach);
  if (kind == ModelKind::Bundle2) {
    const Vector x1 = sgm_step(inst.x, info, inst.alpha);
    const FirstOrderInfo second = f.first_order(x1);
    scale += inst.alpha * (std::fabs(second.value) + second.subgrad.norm() * (reach + x1.norm()));
  }
  return scale;
}

// Tuples cycle through the six families. The 1e-9 tolerance is relative to
// descent_scale().
CheckResult check_model_descent(ModelKind kind, int tuples, std::uint64_t seed) {
  RngStream rng(seed, "model-descent", {static_cast<std::uint64_t>(kind)});
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < tuples; ++i) {
    const LossTag tag = kAllLosses[static_cast<std::size_t>(i) % kAllLosses.size()];
    const RandomInstance inst = random_instance(tag, rng);
    const BoundSample f(inst.family, inst.view());
    const Vector z = probe_point(inst, rng);
    const Vector next = apply_model_step(kind, inst.x, f, inst.alpha);
    const double m_next = model_value(kind, inst.x, f, inst.alpha, next);
    const double m_z = model_value(kind, inst.x, f, inst.alpha, z);
    const double lhs = 0.5 * (next - z).squaredNorm();
    const double base = 0.5 * (inst.x - z).squaredNorm();
    const double rhs = base - inst.alpha * (m_next - m_z) - 0.5 * (inst.x - next).squaredNorm();
    const double scale = descent_scale(kind, inst, f, next, z, m_next, m_z);
    const double excess = (lhs - rhs) / scale;
    worst = std::max(worst, excess);
    if (!(excess <= 1e-9)) ++violations;
  }
  return make("model_descent_" + lower(to_string(kind)), violations == 0, violations, 0,
              "max scaled excess " + format_double(worst));
}

CheckResult check_step_length(ModelKind kind, int tuples, std::uint64_t seed) {
  RngStream rng(seed, "step-length", {static_cast<std::uint64_t>(kind)});
  int violations = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < tuples; ++i) {
    const LossTag tag = kAllLosses[static_cast<std::size_t>(i) % kAllLosses.size()];
    const RandomInstance inst = random_instance(tag, rng);
    const BoundSample f(inst.family, inst.view());
    const double limit = inst.alpha * f.first_order(inst.x).subgrad.norm();
    const double step = (apply_model_step(kind, inst.x, f, inst.alpha) - inst.x).norm();
    const double excess = (step - limit) / std::max(1.0, limit);
    worst = std::max(worst, excess);
    if (!(excess <= 1e-9)) ++violations;
  }
  return make("step_length_" + lower(to_string(kind)), violations == 0, violations, 0,
              "max scaled excess " + format_double(worst));
}

std::vector<CheckResult> check_divergence_dichotomy() {
  std::vector<CheckResult> out;
  const auto quartic = divergence_demo_quartic({1.0, 0.0}, 2.0, 100, {1.0, 0.0});
  out.push_back(make("quartic_sgm_diverges", quartic.diverged && quartic.growth_holds,
                     static_cast<double>(quartic.gradient_path.size()), 0,
                     quartic.diverged ? "sentinel reached" : "no sentinel"));
  out.push_back(make("quartic_prox_stable", quartic.prox_monotone && quartic.prox_bounded,
                     std::fabs(quartic.prox_path.back()), 2.0));
  const auto quadratic = divergence_demo_quadratic(48.0, 1.0, 16, 1.0);
  out.push_back(make("quadratic_sgm_doubles", quadratic.growth_holds,
                     std::fabs(quadratic.gradient_path.back()), std::ldexp(1.0, 16)));
  out.push_back(make("quadratic_prox_contracts", quadratic.prox_monotone && quadratic.prox_bounded,
                     std::fabs(quadratic.prox_path.back()), 1.0));
  return out;
}

CheckResult check_easy_linear_rate(const EasyRateOptions& options) {
  int good = 0;
  std::vector<double> slopes;
  for (int t = 0; t < options.trials; ++t) {
    GenSpec spec;
    spec.family = LossTag::AbsoluteLoss;
    spec.seed = derive_seed(options.seed, "easy-rate", {static_cast<std::uint64_t>(t)});
    const Dataset data = generate(spec);
    const EmpiricalProblem problem(data);
    const Vector& x_star = *data.planted_optimum;
    RngStream sampler(options.seed, "easy-rate-sampler", {static_cast<std::uint64_t>(t)});
    const StepSchedule schedule{1.0, 0.6};
    Vector x = Vector::Zero(problem.dimension());
    std::vector<double> d2{x_star.squaredNorm()};
    bool reached = false;
    for (std::int64_t k = 1; k < options.k_max; ++k) {
      const Index idx = static_cast<Index>(sampler.index(static_cast<std::uint64_t>(data.size())));
      x = problem.step(ModelKind::Truncated, x, idx, stepsize(schedule, k));
      d2.push_back((x - x_star).squaredNorm());
      if (d2.back() <= 1e-12) reached = true;
      if (d2.back() <= 1e-24) break;
    }
    try {
      const RateFit fit = fit_linear_rate(d2);
      slopes.push_back(fit.slope);
      if (reached && fit.slope < -1e-3 && fit.r_squared >= 0.9) ++good;
    } catch (const InsufficientDecay&) {
    }
  }
  std::sort(slopes.begin(), slopes.end());
  const double median = slopes.empty() ? 0.0 : percentile(slopes, 0.5);
  const int needed = (options.trials * 9 + 9) / 10;
  return make("easy_linear_rate", good >= needed, good, needed,
              "median slope " + format_double(median));
}

std::vector<CheckResult> check_interpolation(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (const LossTag tag : {LossTag::LeastSquares, LossTag::AbsoluteLoss}) {
    GenSpec spec;
    spec.family = tag;
    spec.m = 40;
    spec.n = 200;
    spec.interpolation = true;
    spec.seed = seed;
    const Dataset data = generate(spec);
    const EmpiricalProblem problem(data);
    const Vector& x_star = *data.planted_optimum;
    Eigen::HouseholderQR<Matrix> qr(Matrix(data.features.transpose()));
    const Matrix basis = qr.householderQ() * Matrix::Identity(spec.n, spec.m);
    for (const ModelKind kind : {ModelKind::Truncated, ModelKind::FullProx}) {
      RngStream sampler(seed, "interpolation", {static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(kind)});
      const StepSchedule schedule{1.0, 0.6};
      Vector x = Vector::Zero(problem.dimension());
      std::vector<double> d2{x_star.squaredNorm()};
      double span_residual = 0.0;
      for (std::int64_t k = 1; k < 50'000; ++k) {
        const Index idx = static_cast<Index>(sampler.index(static_cast<std::uint64_t>(data.size())));
        x = problem.step(kind, x, idx, stepsize(schedule, k));
        span_residual = std::max(span_residual, (x - basis * (basis.transpose() * x)).norm());
        d2.push_back((x - x_star).squaredNorm());
        if (d2.back() <= 1e-24) break;
      }
      const std::string suffix = lower(to_string(tag)) + "_" + lower(to_string(kind));
      out.push_back(make("interpolation_span_" + suffix, span_residual <= 1e-10, span_residual, 1e-10));
      RateFit fit;
      try {
        fit = fit_linear_rate(d2);
      } catch (const InsufficientDecay&) {
        fit.slope = 0.0;
      }
      out.push_back(make("interpolation_decay_" + suffix, fit.slope < 0.0 && fit.r_squared >= 0.9,
                         fit.r_squared, 0.9, "slope " + format_double(fit.slope)));
    }
  }
  return out;
}

std::vector<CheckResult> check_easy_monotone(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (const LossTag tag : {LossTag::LeastSquares, LossTag::AbsoluteLoss, LossTag::HalfspaceDist}) {
    GenSpec spec;
    spec.family = tag;
    spec.m = 200;
    spec.n = 20;
    spec.seed = seed;
    const Dataset data = generate(spec);
    const EmpiricalProblem problem(data);
    const Vector& x_star = *data.planted_optimum;
    for (const ModelKind kind : {ModelKind::Truncated, ModelKind::FullProx}) {
      RngStream sampler(seed, "monotone", {static_cast<std::uint64_t>(tag), static_cast<std::uint64_t>(kind)});
      const StepSchedule schedule{10.0, 0.6};
      Vector x = Vector::Zero(problem.dimension());
      double prev = (x - x_star).norm();
      double worst = 0.0;
      for (std::int64_t k = 1; k < 5'000; ++k) {
        const Index idx = static_cast<Index>(sampler.index(static_cast<std::uint64_t>(data.size())));
        x = problem.step(kind, x, idx, stepsize(schedule, k));
        const double cur = (x - x_star).norm();
        worst = std::max(worst, cur - prev);
        prev = cur;
      }
      const double tol = 1e-12 * (1.0 + x_star.norm());
      out.push_back(make("easy_monotone_" + lower(to_string(tag)) + "_" + lower(to_string(kind)),
                         worst <= tol, worst, tol));
    }
  }
  return out;
}

CheckResult check_kaczmarz_rate(std::uint64_t seed) {
  const Index m = 1000;
  const Index n = 40;
  RngStream rng(seed, "kaczmarz", {});
  Dataset data;
  data.family = LossFamily{LossTag::AbsoluteLoss, n, 1};
  data.features.resize(m, n);
  for (Index i = 0; i < m; ++i) {
    Vector row(n);
    for (Index j = 0; j < n; ++j) row(j) = rng.normal();
    data.features.row(i) = (std::sqrt(static_cast<double>(n)) / row.norm()) * row.transpose();
  }
  Vector x_star(n);
  for (Index j = 0; j < n; ++j) x_star(j) = rng.normal();
  data.targets = data.features * x_star;
  data.noiseless = true;
  const EmpiricalProblem problem(data);
  RngStream sampler(seed, "kaczmarz-sampler", {});
  const StepSchedule schedule{100.0, 0.6};
  Vector x = Vector::Zero(n);
  std::vector<double> d2{x_star.squaredNorm()};
  for (std::int64_t k = 1; k < 50'000; ++k) {
    const Index idx = static_cast<Index>(sampler.index(static_cast<std::uint64_t>(m)));
    x = problem.step(ModelKind::Truncated, x, idx, stepsize(schedule, k));
    d2.push_back((x - x_star).squaredNorm());
    if (d2.back() <= 1e-24) break;
  }
  const RateFit fit = fit_linear_rate(d2);
  const double ratio = std::fabs(fit.slope) * static_cast<double>(n);
  return make("kaczmarz_rate", ratio >= 0.1 && ratio <= 10.0, ratio, 10.0,
              "|slope| n, slope " + format_double(fit.slope));
}

std::vector<CheckResult> check_normality(const NormalityOptions& base) {
  std::vector<CheckResult> out;
  for (const ModelKind kind : kAllModels) {
    NormalityOptions o = base;
    o.model = kind;
    const NormalityReport r = normality_check(o);
    const double target = r.target_cov(0, 0);
    const double rel = target > 0.0 ? std::fabs(r.empirical_cov(0, 0) - target) / target
                                    : std::fabs(r.empirical_cov(0, 0));
    out.push_back(make("normality_" + lower(to_string(kind)), rel <= 0.3, rel, 0.3,
                       "variance " + format_double(r.empirical_cov(0, 0)) + ", max |x| " +
                           format_double(r.max_iterate_norm)));
  }
  return out;
}

CheckResult check_stability(const StabilityOptions& options) {
  const StabilityReport r = stability_check(options);
  const bool ok = r.fraction_within >= 0.95 && r.mean_final_dist_sq <= r.bound;
  return make("stability_bound", ok, r.fraction_within, 0.95,
              "mean dist^2 " + format_double(r.mean_final_dist_sq) + ", bound " +
                  format_double(r.bound));
}

std::vector<CheckResult> run_verify_suite(const SuiteOptions& options) {
  std::vector<CheckResult> out;
  for (const LossTag tag : kAllLosses) out.push_back(check_prox_oracle(tag));
  out.push_back(check_truncated_equals_prox(LossTag::AbsoluteLoss));
  out.push_back(check_truncated_equals_prox(LossTag::HalfspaceDist));
  for (const ModelKind kind : kAllModels) out.push_back(check_model_descent(kind));
  for (const ModelKind kind : kAllModels) out.push_back(check_step_length(kind));
  for (auto& r : check_divergence_dichotomy()) out.push_back(std::move(r));
  {
    std::vector<double> geometric(200);
    for (std::size_t i = 0; i < geometric.size(); ++i) geometric[i] = std::pow(0.5, static_cast<double>(i + 1));
    const RateFit fit = fit_linear_rate(geometric);
    const double err = std::fabs(fit.slope - std::log(0.5));
    out.push_back(make("rate_fit_geometric", err <= 1e-12, err, 1e-12));
  }
  if (options.include_statistical) {
    out.push_back(check_easy_linear_rate());
    for (auto& r : check_interpolation()) out.push_back(std::move(r));
    for (auto& r : check_easy_monotone()) out.push_back(std::move(r));
    out.push_back(check_kaczmarz_rate());
    for (auto& r : check_normality()) out.push_back(std::move(r));
    out.push_back(check_stability());
  }
  return out;
}

}  // namespace aprox::verify
