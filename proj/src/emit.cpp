#include <cmath>
#include <fstream>
#include <sstream>

#include "aprox/errors.hpp"
#include "aprox/format.hpp"
#include "aprox/harness.hpp"
#include "json.hpp"

namespace aprox {
namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string records_csv(const std::vector<TrialRecord>& records, const std::string& experiment_id) {
  std::ostringstream out;
  out << "experiment_id,family,model,alpha0,beta,trial,hit_time,converged,diverged,final_gap,"
         "wall_nanos\n";
  for (const TrialRecord& r : records) {
    out << experiment_id << ',' << to_string(r.family) << ',' << to_string(r.model) << ','
        << format_double(r.alpha0) << ',' << format_double(r.beta) << ',' << r.trial << ',';
    if (r.converged()) {
      out << r.hit_time;
    } else {
      out << "NA";
    }
    out << ',' << (r.converged() ? 1 : 0) << ',' << (r.diverged() ? 1 : 0) << ','
        << format_double(r.final_gap) << ',' << r.wall_nanos << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "family,model,alpha0,median,p5,p95,converged_fraction\n";
  for (const SummaryRow& r : rows) {
    out << to_string(r.family) << ',' << to_string(r.model) << ',' << format_double(r.alpha0) << ','
        << format_double(r.median) << ',' << format_double(r.p5) << ',' << format_double(r.p95)
        << ',' << format_double(r.converged_fraction) << '\n';
  }
  return out.str();
}

void emit_records_csv(const std::vector<TrialRecord>& records, const std::string& experiment_id,
                      const std::string& path) {
  write_file(path, records_csv(records, experiment_id));
}

void emit_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  write_file(path, summary_csv(rows));
}

void emit_json(const std::vector<TrialRecord>& records, const std::string& experiment_id,
               const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  for (const TrialRecord& r : records) {
    nlohmann::json row{{"experiment_id", experiment_id},
                       {"family", to_string(r.family)},
                       {"model", to_string(r.model)},
                       {"alpha0", r.alpha0},
                       {"beta", r.beta},
                       {"trial", r.trial},
                       {"hit_time", r.converged() ? nlohmann::json(r.hit_time) : nlohmann::json()},
                       {"converged", r.converged()},
                       {"diverged", r.diverged()},
                       {"final_gap", finite_or_null(r.final_gap)},
                       {"wall_nanos", r.wall_nanos}};
    if (r.average_final_gap) row["average_final_gap"] = finite_or_null(*r.average_final_gap);
    if (r.average_hit_time) row["average_hit_time"] = *r.average_hit_time;
    out.push_back(std::move(row));
  }
  write_file(path, out.dump(2) + "\n");
}

void emit_json(const std::vector<SummaryRow>& rows, const std::string& path) {
  nlohmann::json out = nlohmann::json::array();
  for (const SummaryRow& r : rows) {
    out.push_back({{"family", to_string(r.family)},
                   {"model", to_string(r.model)},
                   {"alpha0", r.alpha0},
                   {"median", r.median},
                   {"p5", r.p5},
                   {"p95", r.p95},
                   {"converged_fraction", r.converged_fraction},
                   {"censored", r.censored}});
  }
  write_file(path, out.dump(2) + "\n");
}

}  // namespace aprox
