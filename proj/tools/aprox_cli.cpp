#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "aprox/config.hpp"
#include "aprox/datagen.hpp"
#include "aprox/errors.hpp"
#include "aprox/format.hpp"
#include "aprox/harness.hpp"
#include "aprox/verify.hpp"

namespace {

using namespace aprox;

struct GenArgs {
  std::string family = "LeastSquares";
  Index m = 1000;
  Index n = 40;
  double kappa = 1.0;
  double sigma = 0.0;
  double p = 0.0;
  Index K = 10;
  std::uint64_t seed = 0;
  bool interpolation = false;

  GenSpec spec() const {
    GenSpec s;
    s.family = parse_loss_tag(family);
    s.m = m;
    s.n = n;
    s.kappa = kappa;
    s.sigma = sigma;
    s.p = p;
    s.K = K;
    s.seed = seed;
    s.interpolation = interpolation;
    return s;
  }
};

void add_gen_options(CLI::App& cmd, GenArgs& g) {
  cmd.add_option("--family", g.family, "Loss family")->capture_default_str();
  cmd.add_option("--m", g.m, "Sample count")->capture_default_str();
  cmd.add_option("--n", g.n, "Feature dimension")->capture_default_str();
  cmd.add_option("--kappa", g.kappa, "Condition number")->capture_default_str();
  cmd.add_option("--sigma", g.sigma, "Regression noise std")->capture_default_str();
  cmd.add_option("--p", g.p, "Label corruption probability")->capture_default_str();
  cmd.add_option("--K", g.K, "Hinge class count")->capture_default_str();
  cmd.add_option("--seed", g.seed, "Dataset seed")->capture_default_str();
  cmd.add_flag("--interpolation", g.interpolation, "Underdetermined interpolation recipe");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void print_summary(const std::vector<SummaryRow>& rows) {
  std::printf("%-10s %-12s %10s %10s %10s %10s %9s\n", "model", "alpha0", "median", "p5", "p95",
              "converged", "censored");
  for (const auto& r : rows) {
    std::printf("%-10s %-12s %10.1f %10.1f %10.1f %10.3f %9d\n",
                std::string(to_string(r.model)).c_str(), format_double(r.alpha0).c_str(), r.median,
                r.p5, r.p95, r.converged_fraction, r.censored);
  }
}

int run_sweep_command(const std::string& config_path, const std::string& out_dir, unsigned jobs,
                      int verbosity) {
  const RunConfig config = load_run_config(config_path);
  const std::string started = rfc3339_now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  SweepOptions options;
  options.parallelism = jobs;
  if (verbosity > 0) {
    options.progress = [](std::size_t done, std::size_t total) {
      std::fprintf(stderr, "\rcells %zu/%zu", done, total);
      if (done == total) std::fputc('\n', stderr);
    };
  }
  const SweepResult result = run_sweep(config, options);
  const std::filesystem::path dir(out_dir);
  emit_records_csv(result.records, config.experiment_id, (dir / "records.csv").string());
  emit_summary_csv(result.summaries, (dir / "summary.csv").string());
  write_text(dir / "metadata.json", make_metadata(config, started).dump(2) + "\n");
  print_summary(result.summaries);
  return 0;
}

int run_trial_command(const GenArgs& g, const std::string& model, double alpha0, double beta,
                      double epsilon, std::int64_t k_max, std::int64_t stride) {
  Dataset data = generate(g.spec());
  const ReferenceOptimum ref = reference_optimum(data);
  if (!ref.certified(epsilon)) {
    throw NonCertified("reference optimum tolerance " + format_double(ref.tolerance) +
                       " exceeds epsilon/10");
  }
  attach_reference(data, ref);
  const EmpiricalProblem problem(data);
  TrialSettings settings;
  settings.model = parse_model_kind(model);
  settings.schedule = StepSchedule{alpha0, beta};
  settings.epsilon = epsilon;
  settings.k_max = k_max;
  settings.eval_stride = stride;
  RngStream sampler(g.seed, "trial-sampler", {0, static_cast<std::uint64_t>(settings.model), 0});
  TrialRecord record = run_trial(problem, settings, sampler);
  record.family = data.family.tag;
  record.alpha0 = alpha0;
  record.beta = beta;
  std::cout << records_csv({record}, "trial");
  std::cout << "outcome=" << to_string(record.outcome) << " iterations=" << record.iterations
            << " f_star=" << format_double(data.f_star) << " (" << ref.method << ")\n";
  return 0;
}

int run_verify_command(bool quick, const std::string& report_path) {
  verify::SuiteOptions options;
  options.include_statistical = !quick;
  const auto results = verify::run_verify_suite(options);
  const nlohmann::json report = verify::to_json(results);
  for (const auto& r : results) {
    std::fprintf(stderr, "%s %s measured=%s threshold=%s %s\n", r.passed ? "PASS" : "FAIL",
                 r.name.c_str(), format_double(r.measured).c_str(),
                 format_double(r.threshold).c_str(), r.detail.c_str());
  }
  if (report_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    write_text(report_path, report.dump(2) + "\n");
  }
  return report["passed"].get<bool>() ? 0 : 4;
}

void print_path(const char* label, const std::vector<double>& path) {
  std::printf("%s:", label);
  for (const double v : path) std::printf(" %s", format_double(v).c_str());
  std::printf("\n");
}

int run_demo_command() {
  const auto quartic = verify::divergence_demo_quartic({1.0, 0.0}, 2.0, 100, {1.0, 1.0});
  std::printf("Quartic: F(x) = x^4/4, x1 = 2\n");
  print_path("  gradient, alpha = 1", quartic.gradient_path);
  std::printf("  diverged=%d growth |x_k| >= 2^(k-1)|x_1|: %d\n", quartic.diverged,
              quartic.growth_holds);
  std::vector<double> head(quartic.prox_path.begin(),
                           quartic.prox_path.begin() +
                               static_cast<std::ptrdiff_t>(std::min<std::size_t>(10, quartic.prox_path.size())));
  print_path("  prox, alpha_k = 1/k (first 10)", head);
  std::printf("  prox monotone=%d bounded=%d final=%s\n", quartic.prox_monotone, quartic.prox_bounded,
              format_double(quartic.prox_path.back()).c_str());

  const auto quadratic = verify::divergence_demo_quadratic(48.0, 1.0, 16, 1.0);
  std::printf("Quadratic: F(x) = x^2/2, alpha_k = 48/k, x1 = 1\n");
  print_path("  gradient", quadratic.gradient_path);
  std::printf("  doubling for 16 steps: %d\n", quadratic.growth_holds);
  print_path("  prox", quadratic.prox_path);
  std::printf("  prox contraction 1/(1+alpha_k): %d\n", quadratic.prox_bounded && quadratic.prox_monotone);
  const bool ok = quartic.diverged && quartic.growth_holds && quartic.prox_monotone &&
                  quartic.prox_bounded && quadratic.growth_holds && quadratic.prox_monotone &&
                  quadratic.prox_bounded;
  return ok ? 0 : 4;
}

int run_gen_command(const GenArgs& g, const std::string& out_path) {
  Dataset data = generate(g.spec());
  write_dataset(data, out_path);
  std::printf("wrote %s (%lld x %lld)\n", out_path.c_str(), static_cast<long long>(data.size()),
              static_cast<long long>(data.features.cols()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aprox: stochastic model-based minimization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aprox::version_string());
  int verbosity = 0;
  unsigned jobs = 0;
  app.add_flag("-v,--verbose", verbosity, "Increase log verbosity");
  app.add_option("-j,--parallelism", jobs, "Worker threads (0 = all cores)");

  auto* sweep = app.add_subcommand("sweep", "Run a full stepsize sweep from a JSON config");
  std::string config_path;
  std::string out_dir = ".";
  sweep->add_option("--config", config_path, "RunConfig JSON or a metadata.json")->required();
  sweep->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();

  auto* trial = app.add_subcommand("trial", "Run one trial and print its record");
  GenArgs trial_gen;
  std::string model = "Truncated";
  double alpha0 = 1.0;
  double beta = 0.6;
  double epsilon = 0.05;
  std::int64_t k_max = 50'000;
  std::int64_t stride = 10;
  add_gen_options(*trial, trial_gen);
  trial->add_option("--model", model, "Model kind")->capture_default_str();
  trial->add_option("--alpha0", alpha0, "Initial stepsize")->capture_default_str();
  trial->add_option("--beta", beta, "Stepsize decay exponent")->capture_default_str();
  trial->add_option("--epsilon", epsilon, "Target accuracy")->capture_default_str();
  trial->add_option("--k-max", k_max, "Iteration budget")->capture_default_str();
  trial->add_option("--eval-stride", stride, "Objective evaluation stride")->capture_default_str();

  auto* verify_cmd = app.add_subcommand("verify", "Run the verification suites");
  bool quick = false;
  std::string report_path;
  verify_cmd->add_flag("--quick", quick, "Skip the statistical checks");
  verify_cmd->add_option("--report", report_path, "Write the JSON report here instead of stdout");

  app.add_subcommand("demo-divergence", "Print the divergence example transcripts");

  auto* gen = app.add_subcommand("gen", "Generate a dataset snapshot");
  GenArgs gen_args;
  std::string gen_out;
  add_gen_options(*gen, gen_args);
  gen->add_option("-o,--out", gen_out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sweep) return run_sweep_command(config_path, out_dir, jobs, verbosity);
    if (*trial) return run_trial_command(trial_gen, model, alpha0, beta, epsilon, k_max, stride);
    if (*verify_cmd) return run_verify_command(quick, report_path);
    if (app.got_subcommand("demo-divergence")) return run_demo_command();
    if (*gen) return run_gen_command(gen_args, gen_out);
  } catch (const aprox::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const aprox::NonCertified& e) {
    std::cerr << "non-certified reference optimum: " << e.what() << "\n";
    return 2;
  } catch (const aprox::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
