#include "aprox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "aprox/errors.hpp"

namespace aprox {

Vector EmpiricalProblem::step(ModelKind kind, const Vector& x, Index sample, double alpha) const {
  const BoundSample oracle(data_.family, data_.sample(sample));
  return apply_model_step(kind, x, oracle, alpha);
}

std::string_view to_string(TrialOutcome outcome) {
  switch (outcome) {
    case TrialOutcome::Converged: return "Converged";
    case TrialOutcome::NotConverged: return "NotConverged";
    case TrialOutcome::Diverged: return "Diverged";
  }
  return "?";
}

TrialRecord run_trial(const Problem& problem, const TrialSettings& settings, RngStream& sampler) {
  const auto started = std::chrono::steady_clock::now();
  TrialRecord record;
  record.alpha0 = settings.schedule.alpha0;
  record.beta = settings.schedule.beta;
  record.model = settings.model;

  Vector x = settings.initial_point ? *settings.initial_point : Vector::Zero(problem.dimension());
  Vector average = x;
  const double f_star = problem.f_star();
  const auto m = static_cast<std::uint64_t>(problem.sample_count());
  bool hit = false;
  bool average_hit = !settings.track_average;

  const auto evaluate = [&](std::int64_t k) {
    const double gap = problem.objective(x) - f_star;
    if (!std::isfinite(gap)) return false;
    record.final_gap = gap;
    if (!hit && gap <= settings.epsilon) {
      hit = true;
      record.hit_time = k;
    }
    if (settings.track_average) {
      const double avg_gap = problem.objective(average) - f_star;
      record.average_final_gap = avg_gap;
      if (!average_hit && avg_gap <= settings.epsilon) {
        average_hit = true;
        record.average_hit_time = k;
      }
    }
    return true;
  };

  bool diverged = false;
  std::int64_t k = 1;
  if (settings.observer) settings.observer(1, x);
  if (!evaluate(1)) diverged = true;
  while (!diverged && !(hit && average_hit) && k < settings.k_max) {
    const double alpha = stepsize(settings.schedule, k);
    const auto sample = static_cast<Index>(sampler.index(m));
    x = problem.step(settings.model, x, sample, alpha);
    ++k;
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      diverged = true;
      break;
    }
    if (settings.observer) settings.observer(k, x);
    if (settings.track_average) average += (x - average) / static_cast<double>(k);
    if (k % settings.eval_stride == 0 || k == settings.k_max) {
      if (!evaluate(k)) diverged = true;
    }
  }
  record.iterations = k;
  if (diverged) {
    record.outcome = TrialOutcome::Diverged;
    record.hit_time = 0;
    record.final_gap = std::numeric_limits<double>::infinity();
  } else {
    record.outcome = hit ? TrialOutcome::Converged : TrialOutcome::NotConverged;
  }
  if (settings.record_timing) {
    record.wall_nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  }
  return record;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(std::pow(10.0, -5.0 + 0.5 * i));
  return grid;
}

RunConfig default_run_config() {
  RunConfig config;
  config.alpha_grid = default_alpha_grid();
  return config;
}

void validate(const RunConfig& config) {
  validate(config.gen_spec);
  if (config.models.empty()) throw ConfigError("config: at least one model required");
  if (!(config.epsilon > 0.0)) throw ConfigError("config: epsilon must be > 0");
  if (config.k_max < 1) throw ConfigError("config: k_max must be >= 1");
  if (config.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (config.eval_stride < 1) throw ConfigError("config: eval_stride must be >= 1");
  if (!(config.schedule.alpha0 > 0.0)) throw ConfigError("config: schedule.alpha0 must be > 0");
  if (config.alpha_grid.empty()) throw ConfigError("config: alpha_grid must be nonempty");
  for (std::size_t i = 0; i < config.alpha_grid.size(); ++i) {
    if (!(config.alpha_grid[i] > 0.0) || !std::isfinite(config.alpha_grid[i])) {
      throw ConfigError("config: alpha_grid entries must be positive and finite");
    }
    if (i > 0 && !(config.alpha_grid[i - 1] < config.alpha_grid[i])) {
      throw ConfigError("config: alpha_grid must be sorted ascending");
    }
  }
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("percentile: empty sample");
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, values.size() - 1);
  const double frac = position - static_cast<double>(lower);
  return values[lower] + frac * (values[upper] - values[lower]);
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, std::int64_t k_max) {
  std::vector<std::pair<double, ModelKind>> order;
  std::map<std::pair<double, int>, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) {
    const auto key = std::make_pair(r.alpha0, static_cast<int>(r.model));
    if (!groups.contains(key)) order.emplace_back(r.alpha0, r.model);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [alpha0, model] : order) {
    const auto& group = groups.at({alpha0, static_cast<int>(model)});
    SummaryRow row;
    row.alpha0 = alpha0;
    row.model = model;
    row.family = group.front()->family;
    std::vector<double> times;
    int converged = 0;
    for (const TrialRecord* r : group) {
      if (r->converged()) {
        ++converged;
        times.push_back(static_cast<double>(r->hit_time));
      } else {
        ++row.censored;
        times.push_back(static_cast<double>(k_max));
      }
    }
    row.median = percentile(times, 0.5);
    row.p5 = percentile(times, 0.05);
    row.p95 = percentile(times, 0.95);
    row.converged_fraction = static_cast<double>(converged) / static_cast<double>(group.size());
    rows.push_back(row);
  }
  return rows;
}

std::uint64_t cell_dataset_seed(const RunConfig& config, std::size_t alpha_index, int trial) {
  if (config.shared_dataset) {
    return derive_seed(config.master_seed, "dataset", {static_cast<std::uint64_t>(trial)});
  }
  return derive_seed(config.master_seed, "dataset",
                     {static_cast<std::uint64_t>(alpha_index), static_cast<std::uint64_t>(trial)});
}

namespace {

struct Cell {
  std::size_t alpha_index;
  int trial;
};

Dataset certified_dataset(const RunConfig& config, std::uint64_t seed,
                          const ReferenceOptions& options) {
  GenSpec spec = config.gen_spec;
  spec.seed = seed;
  Dataset data = generate(spec);
  const ReferenceOptimum ref = reference_optimum(data, options);
  if (!ref.certified(config.epsilon)) {
    throw NonCertified("reference optimum for seed " + std::to_string(seed) + " has tolerance " +
                       std::to_string(ref.tolerance) + " > epsilon/10 (" + ref.method + ")");
  }
  attach_reference(data, ref);
  return data;
}

}  // namespace

SweepResult run_sweep(const RunConfig& config, const SweepOptions& options) {
  validate(config);
  const std::size_t n_alpha = config.alpha_grid.size();
  const std::size_t n_models = config.models.size();
  const auto n_trials = static_cast<std::size_t>(config.trials);

  std::vector<Cell> cells;
  for (std::size_t a = 0; a < n_alpha; ++a) {
    for (int t = 0; t < config.trials; ++t) cells.push_back({a, t});
  }

  std::vector<Dataset> shared;
  if (config.shared_dataset) {
    for (int t = 0; t < config.trials; ++t) {
      shared.push_back(certified_dataset(config, cell_dataset_seed(config, 0, t), options.reference));
    }
  }

  std::vector<TrialRecord> records(n_alpha * n_models * n_trials);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mutex;

  const auto run_cell = [&](const Cell& cell) {
    std::optional<Dataset> owned;
    if (!config.shared_dataset) {
      owned = certified_dataset(config, cell_dataset_seed(config, cell.alpha_index, cell.trial),
                                options.reference);
    }
    const Dataset& data = config.shared_dataset ? shared[static_cast<std::size_t>(cell.trial)] : *owned;
    const EmpiricalProblem problem(data);
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      TrialSettings settings;
      settings.model = config.models[mi];
      settings.schedule = StepSchedule{config.alpha_grid[cell.alpha_index], config.schedule.beta};
      settings.epsilon = config.epsilon;
      settings.k_max = config.k_max;
      settings.eval_stride = config.eval_stride;
      settings.track_average = config.track_average;
      settings.record_timing = config.record_timing;
      RngStream sampler(config.master_seed, "trial-sampler",
                        {static_cast<std::uint64_t>(cell.alpha_index),
                         static_cast<std::uint64_t>(config.models[mi]),
                         static_cast<std::uint64_t>(cell.trial)});
      TrialRecord record = run_trial(problem, settings, sampler);
      record.family = data.family.tag;
      record.trial = cell.trial;
      records[(cell.alpha_index * n_models + mi) * n_trials + static_cast<std::size_t>(cell.trial)] =
          std::move(record);
    }
  };

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size() || failed.load()) return;
      try {
        run_cell(cells[i]);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (options.progress) {
        const std::lock_guard<std::mutex> lock(mutex);
        options.progress(finished, cells.size());
      }
    }
  };

  unsigned threads = options.parallelism ? options.parallelism : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  SweepResult result;
  result.records = std::move(records);
  result.summaries = summarize(result.records, config.k_max);
  return result;
}

}  // namespace aprox
