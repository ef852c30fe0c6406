#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cobase/dataset.hpp"
#include "cobase/scoring.hpp"
#include "cobase/shuffling.hpp"

namespace cobase {

inline constexpr const char* kVersion = "cobase 0.1.0";

struct StationGroup {
  std::string name;
  std::vector<std::string> margin_labels;  // "STATION:VARIABLE"
};

struct RunConfig {
  // data source: csv paths or a synthetic generator config
  std::optional<std::string> forecasts_path;
  std::optional<std::string> observations_path;
  std::optional<SyntheticConfig> synthetic;

  std::vector<Method> methods;
  int n_samples = 0;  // output sample size N; 0 means "use M"
  int window_days = 30;
  double vs_p = 1.0;
  std::uint64_t base_seed = 0;
  std::vector<StationGroup> groups;  // empty: one group with every margin

  void validate_against(const Archive& archive) const;
};

// Flat key = value config file; unknown keys are errors.
RunConfig parse_run_config_file(const std::string& path);

struct DateScores {
  int date = 0;
  std::vector<double> crps;  // per margin
  double es = 0.0;
  double vs = 0.0;
};

struct MethodSeries {
  Method method = Method::EmosQ;
  std::vector<DateScores> scored;  // ascending dates
};

struct GroupResults {
  std::string name;
  std::vector<std::string> margin_labels;
  std::vector<MethodSeries> methods;
};

struct ResultTable {
  std::vector<GroupResults> groups;
  std::vector<std::string> log;
  std::size_t leakage_violations = 0;
  std::size_t margin_audit_violations = 0;
  // manifest metadata, echoed key/value pairs in insertion order
  std::vector<std::pair<std::string, std::string>> meta;
};

// Rolling-origin evaluation: for every date from window_days after the
// archive start on, fit EMOS per margin on the window, build each method's
// d x N forecast and score it. Deterministic given base_seed; dates are
// processed on a worker pool (COBASE_THREADS overrides the size).
ResultTable run_experiment(const RunConfig& config, const Archive& archive);
ResultTable run_experiment(const RunConfig& config);  // loads or generates

// Writes scores.csv, dm.csv, per_date_scores.csv, run_log.txt and
// manifest.json into out_dir.
void emit_outputs(const ResultTable& table, const std::string& out_dir);

// Writes only the aggregate tables (scores.csv, dm.csv); the re-aggregation
// path so it never clobbers an existing run log or manifest.
void emit_score_tables(const ResultTable& table, const std::string& out_dir);

// Rebuilds a table from a per_date_scores.csv written by emit_outputs
// (the `scores` subcommand's re-aggregation path).
ResultTable table_from_per_date_csv(const std::string& path);

// Aggregation helpers ---------------------------------------------------------

std::vector<double> mean_crps_per_margin(const MethodSeries& series);
double mean_crps(const MethodSeries& series);  // margin-averaged
double mean_es(const MethodSeries& series);
double mean_vs(const MethodSeries& series);

ScoreSeries crps_series(const MethodSeries& series);  // per-date margin mean
ScoreSeries margin_crps_series(const MethodSeries& series, std::size_t margin);
ScoreSeries es_series(const MethodSeries& series);
ScoreSeries vs_series(const MethodSeries& series);

// DM statistic on the dates both series share; nullopt when fewer than two.
std::optional<double> dm_on_common_dates(const ScoreSeries& a, const ScoreSeries& b,
                                         bool* degenerate = nullptr);

const MethodSeries* find_method(const GroupResults& group, Method m);

}  // namespace cobase
