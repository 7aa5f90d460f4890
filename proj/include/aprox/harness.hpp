#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aprox/datagen.hpp"
#include "aprox/models.hpp"
#include "aprox/problems.hpp"

namespace aprox {

// A finite-sum objective the trial runner can step through. Each sample index
// names one f(.; s_i).
class Problem {
 public:
  virtual ~Problem() = default;
  virtual Index sample_count() const = 0;
  virtual Index dimension() const = 0;
  virtual double objective(const Vector& x) const = 0;
  virtual double f_star() const = 0;
  virtual Vector step(ModelKind kind, const Vector& x, Index sample, double alpha) const = 0;
};

class EmpiricalProblem final : public Problem {
 public:
  explicit EmpiricalProblem(const Dataset& data) : data_(data), objective_(data) {}

  Index sample_count() const override { return data_.size(); }
  Index dimension() const override { return data_.family.param_dim(); }
  double objective(const Vector& x) const override { return objective_(x); }
  double f_star() const override { return data_.f_star; }
  Vector step(ModelKind kind, const Vector& x, Index sample, double alpha) const override;

 private:
  const Dataset& data_;
  ObjectiveEvaluator objective_;
};

enum class TrialOutcome { Converged, NotConverged, Diverged };

std::string_view to_string(TrialOutcome outcome);

struct TrialSettings {
  ModelKind model = ModelKind::Truncated;
  StepSchedule schedule;
  double epsilon = 0.05;
  std::int64_t k_max = 50'000;
  std::int64_t eval_stride = 10;
  bool track_average = false;
  bool record_timing = false;
  // x_1; zero when absent.
  std::optional<Vector> initial_point;
  // Called with (k, x_k) for every iterate, including x_1.
  std::function<void(std::int64_t, const Vector&)> observer;
};

struct TrialRecord {
  double alpha0 = 0.0;
  double beta = 0.0;
  ModelKind model = ModelKind::SGM;
  LossTag family = LossTag::LeastSquares;
  int trial = 0;
  TrialOutcome outcome = TrialOutcome::NotConverged;
  // First evaluated k with F(x_k) - F* <= epsilon; 0 unless converged.
  std::int64_t hit_time = 0;
  // Last evaluated gap (the hitting gap for converged trials).
  double final_gap = 0.0;
  std::int64_t wall_nanos = 0;
  std::int64_t iterations = 0;
  // Running-average iterate, when tracked.
  std::optional<std::int64_t> average_hit_time;
  std::optional<double> average_final_gap;

  bool converged() const { return outcome == TrialOutcome::Converged; }
  bool diverged() const { return outcome == TrialOutcome::Diverged; }
};

// Iterates x_{k+1} = step(model, x_k, S_k, alpha_k) from x_1 with S_k drawn
// uniformly with replacement from `sampler`. The full objective is evaluated
// at k = 1, at every multiple of eval_stride and at k_max. The run stops at
// the first hit (after the averaged iterate also hits, when tracked), on
// divergence (|x| > 1e100 or a non-finite objective), or at k_max.
TrialRecord run_trial(const Problem& problem, const TrialSettings& settings, RngStream& sampler);

struct RunConfig {
  std::string experiment_id = "experiment";
  GenSpec gen_spec;
  std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
  StepSchedule schedule;
  double epsilon = 0.05;
  std::int64_t k_max = 50'000;
  int trials = 40;
  std::vector<double> alpha_grid;
  bool track_average = false;
  std::int64_t eval_stride = 10;
  std::uint64_t master_seed = 0;
  // One dataset per trial index reused across the alpha grid (default: a
  // fresh dataset per (alpha, trial) cell).
  bool shared_dataset = false;
  // Wall-clock timing makes records.csv run-dependent; off by default.
  bool record_timing = false;
};

// 21 log-spaced points over [1e-5, 1e5].
std::vector<double> default_alpha_grid();
RunConfig default_run_config();
// Throws ConfigError.
void validate(const RunConfig& config);

struct SummaryRow {
  double alpha0 = 0.0;
  ModelKind model = ModelKind::SGM;
  LossTag family = LossTag::LeastSquares;
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  double converged_fraction = 0.0;
  // Trials that entered the percentiles censored at k_max.
  int censored = 0;
};

// Linear interpolation between order statistics at position q * (n - 1).
double percentile(std::vector<double> values, double q);

// Groups by (alpha0, model) in first-appearance order; non-converged trials
// count as k_max.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, std::int64_t k_max);

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<SummaryRow> summaries;
};

struct SweepOptions {
  unsigned parallelism = 0;  // 0 = hardware concurrency
  ReferenceOptions reference;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// Dataset seed for a sweep cell; shared across models so they see the same data.
std::uint64_t cell_dataset_seed(const RunConfig& config, std::size_t alpha_index, int trial);

// Throws NonCertified when a cell's reference optimum is not certified to
// epsilon / 10.
SweepResult run_sweep(const RunConfig& config, const SweepOptions& options = {});

// records.csv / summary.csv writers. Throw IoError with the path.
void emit_records_csv(const std::vector<TrialRecord>& records, const std::string& experiment_id,
                      const std::string& path);
void emit_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::string records_csv(const std::vector<TrialRecord>& records, const std::string& experiment_id);
std::string summary_csv(const std::vector<SummaryRow>& rows);
void emit_json(const std::vector<TrialRecord>& records, const std::string& experiment_id,
               const std::string& path);
void emit_json(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace aprox
