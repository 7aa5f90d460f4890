// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "aprox/config.hpp"
#include "aprox/format.hpp"
#include "aprox/harness.hpp"
#include "aprox/verify.hpp"

using namespace aprox;

namespace {

namespace tol {
constexpr double kProxOracle = 1e-8;
constexpr double kTruncatedProx = 1e-12;
constexpr double kConvergedLs = 0.95;
constexpr int kLsRunKappa1 = 13;
constexpr double kSgmMaxDecades = 3.0;
constexpr int kLsRunKappa15 = 11;
constexpr double kConvergedPoisson = 0.9;
constexpr int kPoissonRun = 9;
constexpr double kNormalityBand = 0.30;
}  // namespace tol

struct Outcome {
  bool passed = true;
  std::string detail;
};

void merge(Outcome& o, const verify::CheckResult& r) {
  if (!r.passed) {
    o.passed = false;
    o.detail += r.name + " failed (" + format_double(r.measured) + " vs " +
                format_double(r.threshold) + "); ";
  }
}

void merge(Outcome& o, const std::vector<verify::CheckResult>& rs) {
  for (const auto& r : rs) merge(o, r);
}

RunConfig config(const std::string& name) {
  return load_run_config(std::string(APROX_CONFIG_DIR) + "/" + name);
}

std::vector<double> fractions(const SweepResult& result, ModelKind model) {
  std::vector<double> out;
  for (const auto& row : result.summaries) {
    if (row.model == model) out.push_back(row.converged_fraction);
  }
  return out;
}

int longest_run(const std::vector<double>& fraction, double at_least) {
  int best = 0, run = 0;
  for (const double f : fraction) {
    run = f >= at_least ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

// Decades between the smallest and largest grid point that converge.
double converged_span(const SweepResult& result, ModelKind model, double at_least) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& row : result.summaries) {
    if (row.model != model || row.converged_fraction < at_least) continue;
    lo = std::min(lo, row.alpha0);
    hi = std::max(hi, row.alpha0);
  }
  return hi < lo ? 0.0 : std::log10(hi / lo);
}

std::string fraction_row(const std::vector<double>& f) {
  std::ostringstream out;
  for (const double v : f) out << (v >= 0.995 ? "#" : v > 0.0 ? "+" : ".");
  return out.str();
}

Outcome oracle_equivalence() {
  Outcome o;
  double worst = 0.0;
  for (const LossTag tag : kAllLosses) {
    const auto r = verify::check_prox_oracle(tag, 200);
    worst = std::max(worst, r.measured);
    merge(o, r);
    if (r.measured > tol::kProxOracle) o.passed = false;
  }
  double trunc = 0.0;
  for (const LossTag tag : {LossTag::AbsoluteLoss, LossTag::HalfspaceDist}) {
    const auto r = verify::check_truncated_equals_prox(tag, 1000);
    trunc = std::max(trunc, r.measured);
    merge(o, r);
    if (r.measured > tol::kTruncatedProx) o.passed = false;
  }
  o.detail += "max prox error " + format_double(worst) + ", truncated gap " + format_double(trunc);
  return o;
}

Outcome descent_invariants() {
  Outcome o;
  for (const ModelKind kind : kAllModels) {
    merge(o, verify::check_model_descent(kind, 1000));
    merge(o, verify::check_step_length(kind, 1000));
  }
  o.detail += "4 models x 2 invariants x 1000 tuples";
  return o;
}

Outcome dichotomy() {
  Outcome o;
  const auto rs = verify::check_divergence_dichotomy();
  merge(o, rs);
  o.detail += std::to_string(rs.size()) + " exact checks";
  return o;
}

Outcome ls_kappa1() {
  const SweepResult r = run_sweep(config("ls_noiseless_kappa1.json"));
  Outcome o;
  for (const ModelKind m : {ModelKind::Truncated, ModelKind::FullProx}) {
    const int run = longest_run(fractions(r, m), tol::kConvergedLs);
    if (run < tol::kLsRunKappa1) o.passed = false;
    o.detail += std::string(to_string(m)) + " run " + std::to_string(run) + "; ";
  }
  const double sgm = converged_span(r, ModelKind::SGM, tol::kConvergedLs);
  if (sgm > tol::kSgmMaxDecades) o.passed = false;
  o.detail += "SGM span " + format_double(sgm) + " decades";
  return o;
}

Outcome ls_kappa15() {
  const RunConfig c = config("ls_noiseless_kappa15.json");
  const SweepResult r = run_sweep(c);
  Outcome o;
  const auto sgm = fractions(r, ModelKind::SGM);
  double sgm_max = 0.0;
  for (const double f : sgm) sgm_max = std::max(sgm_max, f);
  if (sgm_max != 0.0 || c.k_max != 50'000) o.passed = false;
  o.detail += "SGM max fraction " + format_double(sgm_max) + "; ";
  for (const ModelKind m : {ModelKind::Truncated, ModelKind::FullProx}) {
    const int run = longest_run(fractions(r, m), tol::kConvergedLs);
    if (run < tol::kLsRunKappa15) o.passed = false;
    o.detail += std::string(to_string(m)) + " run " + std::to_string(run) + "; ";
  }
  return o;
}

Outcome easy_problems() {
  Outcome o;
  const auto rate = verify::check_easy_linear_rate();
  merge(o, rate);
  merge(o, verify::check_interpolation());
  o.detail += format_double(rate.measured) + "/20 trials linear, " + rate.detail;
  return o;
}

Outcome normality() {
  Outcome o;
  for (const ModelKind kind : kAllModels) {
    verify::NormalityOptions opts;
    opts.model = kind;
    const auto rep = verify::normality_check(opts);
    const double v = rep.empirical_cov(0, 0);
    if (std::fabs(v - 0.25) > tol::kNormalityBand * 0.25) o.passed = false;
    o.detail += std::string(to_string(kind)) + " " + format_double(v) + "; ";
  }
  return o;
}

Outcome poisson() {
  const SweepResult r = run_sweep(config("poisson_acceptance.json"));
  Outcome o;
  int bad = 0;
  for (const auto& rec : r.records) bad += rec.diverged() || !std::isfinite(rec.final_gap);
  if (bad) o.passed = false;
  for (const ModelKind m : {ModelKind::Truncated, ModelKind::FullProx}) {
    const auto f = fractions(r, m);
    const int run = longest_run(f, tol::kConvergedPoisson);
    if (run < tol::kPoissonRun) o.passed = false;
    o.detail += std::string(to_string(m)) + " run " + std::to_string(run) + " " + fraction_row(f) + "; ";
  }
  o.detail += "non-finite " + std::to_string(bad);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome reproducibility() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "aprox_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  RunConfig c = default_run_config();
  c.experiment_id = "repro";
  c.gen_spec.family = LossTag::Logistic;
  c.gen_spec.m = 200;
  c.gen_spec.n = 10;
  c.gen_spec.p = 0.1;
  c.alpha_grid = {0.1, 1.0, 10.0};
  c.trials = 5;
  c.k_max = 5000;
  c.master_seed = 12345;

  SweepOptions serial, threaded;
  serial.parallelism = 1;
  threaded.parallelism = 3;
  const SweepResult first = run_sweep(c, serial);
  emit_records_csv(first.records, c.experiment_id, (dir / "records_1.csv").string());
  std::ofstream(dir / "metadata.json") << make_metadata(c, rfc3339_now()).dump(2) << "\n";

  const RunConfig back = load_run_config((dir / "metadata.json").string());
  const SweepResult second = run_sweep(back, threaded);
  emit_records_csv(second.records, back.experiment_id, (dir / "records_2.csv").string());
  const std::string a = slurp(dir / "records_1.csv"), b = slurp(dir / "records_2.csv");
  Outcome o;
  o.passed = !a.empty() && a == b;
  o.detail = std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differ");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 10, oracle_equivalence},
      {2, "model descent and step length", 10, descent_invariants},
      {3, "divergence/stability dichotomy", 1, dichotomy},
      {4, "least squares kappa=1 robustness", 300, ls_kappa1},
      {5, "least squares kappa=15 conditioning", 600, ls_kappa15},
      {6, "easy-problem linear convergence", 120, easy_problems},
      {7, "asymptotic normality", 180, normality},
      {8, "Poisson viability", 300, poisson},
      {9, "reproducibility closure", 60, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs <= c.budget_seconds;
    const bool ok = o.passed && in_budget;
    failed += !ok;
    std::printf("%s criterion %d: %s [%.1fs / %.0fs%s] %s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                secs, c.budget_seconds, in_budget ? "" : " over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
