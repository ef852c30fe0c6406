#include "cobase/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cobase/emos.hpp"
#include "cobase/rng.hpp"

namespace cobase {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(x))
    throw ConfigError("config key '" + key + "': cannot parse number '" + v + "'");
  return x;
}

long long parse_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': cannot parse integer '" + v + "'");
  return x;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("config key '" + key + "': cannot parse seed '" + v + "'");
  return x;
}

// Shortest representation that parses back to the identical double, so the
// re-aggregation path reproduces run outputs byte for byte.
std::string format_number(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Worker pool over [0, count); exceptions resurface on the caller thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("COBASE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) workers = static_cast<unsigned>(v);
  }
  workers = std::min<unsigned>(std::max(1u, workers),
                               static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MarginId parse_margin_label(const std::string& label) {
  const auto pos = label.find(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 >= label.size())
    throw ConfigError("bad margin label '" + label + "' (expected STATION:VARIABLE)");
  MarginId id;
  id.station = label.substr(0, pos);
  try {
    id.variable = parse_variable(label.substr(pos + 1));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return id;
}

}  // namespace

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  SyntheticConfig synth;
  bool any_synth = false;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));

    if (key == "forecasts") {
      cfg.forecasts_path = value;
    } else if (key == "observations") {
      cfg.observations_path = value;
    } else if (key == "methods") {
      for (const std::string& label : split_list(value))
        cfg.methods.push_back(parse_method(label));
    } else if (key == "n") {
      cfg.n_samples = static_cast<int>(parse_int(value, key));
    } else if (key == "window_days") {
      cfg.window_days = static_cast<int>(parse_int(value, key));
    } else if (key == "vs_p") {
      cfg.vs_p = parse_double(value, key);
    } else if (key == "seed") {
      cfg.base_seed = parse_u64(value, key);
    } else if (key.rfind("group.", 0) == 0) {
      StationGroup g;
      g.name = key.substr(6);
      if (g.name.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty group name");
      g.margin_labels = split_list(value);
      if (g.margin_labels.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty group");
      cfg.groups.push_back(std::move(g));
    } else if (key == "synthetic.n_stations") {
      synth.n_stations = static_cast<int>(parse_int(value, key));
      any_synth = true;
    } else if (key == "synthetic.n_variables") {
      synth.n_variables = static_cast<int>(parse_int(value, key));
      any_synth = true;
    } else if (key == "synthetic.n_days") {
      synth.n_days = static_cast<int>(parse_int(value, key));
      any_synth = true;
    } else if (key == "synthetic.ensemble_size") {
      synth.ensemble_size = static_cast<int>(parse_int(value, key));
      any_synth = true;
    } else if (key == "synthetic.seed") {
      synth.seed = parse_u64(value, key);
      any_synth = true;
    } else if (key == "synthetic.bias") {
      synth.bias = parse_double(value, key);
      any_synth = true;
    } else if (key == "synthetic.spread_deficit") {
      synth.spread_deficit = parse_double(value, key);
      any_synth = true;
    } else if (key == "synthetic.cross_correlation") {
      synth.cross_correlation = parse_double(value, key);
      any_synth = true;
    } else if (key == "synthetic.seasonal_amplitude") {
      synth.seasonal_amplitude = parse_double(value, key);
      any_synth = true;
    } else {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" +
                        key + "'");
    }
  }

  if (any_synth) cfg.synthetic = synth;
  return cfg;
}

void RunConfig::validate_against(const Archive& archive) const {
  if (window_days < 1) throw ConfigError("window_days must be >= 1");
  if (!(vs_p > 0.0)) throw ConfigError("vs_p must be > 0");
  const int n = n_samples > 0 ? n_samples : archive.ensemble_size;
  if (n < 1) throw ConfigError("n must be >= 1");
  if (std::find(methods.begin(), methods.end(), Method::ECC) != methods.end() &&
      n != archive.ensemble_size)
    throw ConfigError("ECC requires n == ensemble size (n=" + std::to_string(n) +
                      ", M=" + std::to_string(archive.ensemble_size) + ")");
  for (const StationGroup& g : groups) {
    for (const std::string& label : g.margin_labels) {
      const MarginId id = parse_margin_label(label);
      if (std::find(archive.margins.begin(), archive.margins.end(), id) ==
          archive.margins.end())
        throw ConfigError("group '" + g.name + "': margin " + label +
                          " not present in the archive");
    }
  }
}

namespace {

struct PerDateOutcome {
  bool scorable = false;             // complete obs and EMOS margins available
  std::string skip_reason;
  std::vector<GaussianMargin> margins;
  std::vector<std::string> log;
  std::vector<std::optional<DateScores>> per_method;
  std::vector<std::string> method_skips;  // aligned with per_method
  std::size_t leakage = 0;
  std::size_t margin_violations = 0;
};

struct MarginStats {
  double mean = 0.0;
  double var = 0.0;  // 1/(M-1)
};

}  // namespace

ResultTable run_experiment(const RunConfig& config) {
  if (config.synthetic) {
    if (config.forecasts_path || config.observations_path)
      throw ConfigError("config: give either csv paths or a synthetic block, not both");
    return run_experiment(config, generate_synthetic(*config.synthetic));
  }
  if (!config.forecasts_path || !config.observations_path)
    throw ConfigError("config: needs forecasts/observations paths or a synthetic block");
  return run_experiment(config,
                        load_archive(*config.forecasts_path, *config.observations_path));
}

ResultTable run_experiment(const RunConfig& config, const Archive& archive) {
  archive.validate();
  config.validate_against(archive);
  const int n_out = config.n_samples > 0 ? config.n_samples : archive.ensemble_size;

  // Resolve station groups; default is one group over every margin.
  struct ResolvedGroup {
    std::string name;
    std::vector<std::size_t> indices;
  };
  std::vector<ResolvedGroup> groups;
  if (config.groups.empty()) {
    ResolvedGroup g;
    g.name = "all";
    for (std::size_t i = 0; i < archive.dim(); ++i) g.indices.push_back(i);
    groups.push_back(std::move(g));
  } else {
    for (const StationGroup& sg : config.groups) {
      ResolvedGroup g;
      g.name = sg.name;
      for (const std::string& label : sg.margin_labels) {
        const MarginId id = parse_margin_label(label);
        const auto it = std::find(archive.margins.begin(), archive.margins.end(), id);
        g.indices.push_back(
            static_cast<std::size_t>(it - archive.margins.begin()));
      }
      groups.push_back(std::move(g));
    }
  }

  ResultTable table;
  table.meta.emplace_back("version", kVersion);
  table.meta.emplace_back("seed", std::to_string(config.base_seed));
  table.meta.emplace_back("n", std::to_string(n_out));
  table.meta.emplace_back("window_days", std::to_string(config.window_days));
  table.meta.emplace_back("vs_p", format_number(config.vs_p));
  {
    std::string labels;
    for (const Method m : config.methods) {
      if (!labels.empty()) labels += ",";
      labels += method_label(m);
    }
    table.meta.emplace_back("methods", labels);
    table.meta.emplace_back("dm_orientation",
                            "positive dm_statistic: method scores worse than baseline");
  }
  table.meta.emplace_back("ensemble_size", std::to_string(archive.ensemble_size));
  table.meta.emplace_back("n_dates", std::to_string(archive.n_dates()));
  if (archive.n_dates() > 0) {
    table.meta.emplace_back("first_date", iso_date(archive.forecasts.front().date));
    table.meta.emplace_back("last_date", iso_date(archive.forecasts.back().date));
  }
  if (config.forecasts_path) table.meta.emplace_back("forecasts", *config.forecasts_path);
  if (config.observations_path)
    table.meta.emplace_back("observations", *config.observations_path);
  if (config.synthetic) {
    const SyntheticConfig& s = *config.synthetic;
    table.meta.emplace_back("synthetic.n_stations", std::to_string(s.n_stations));
    table.meta.emplace_back("synthetic.n_variables", std::to_string(s.n_variables));
    table.meta.emplace_back("synthetic.n_days", std::to_string(s.n_days));
    table.meta.emplace_back("synthetic.ensemble_size", std::to_string(s.ensemble_size));
    table.meta.emplace_back("synthetic.seed", std::to_string(s.seed));
    table.meta.emplace_back("synthetic.bias", format_number(s.bias));
    table.meta.emplace_back("synthetic.spread_deficit", format_number(s.spread_deficit));
    table.meta.emplace_back("synthetic.cross_correlation",
                            format_number(s.cross_correlation));
    table.meta.emplace_back("synthetic.seasonal_amplitude",
                            format_number(s.seasonal_amplitude));
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const ResolvedGroup& rg = groups[gi];
    const Archive sub = archive.subset(rg.indices);
    const std::size_t d = sub.dim();
    const int start = sub.forecasts.front().date;

    GroupResults group;
    group.name = rg.name;
    for (const MarginId& id : sub.margins) group.margin_labels.push_back(id.label());
    for (const Method m : config.methods) {
      MethodSeries ms;
      ms.method = m;
      group.methods.push_back(std::move(ms));
    }

    // Verification dates: everything from window_days after the start on.
    std::vector<std::size_t> candidates;
    for (std::size_t t = 0; t < sub.n_dates(); ++t)
      if (sub.forecasts[t].date - start >= config.window_days) candidates.push_back(t);

    // Raw ensemble mean/variance per (date, margin).
    std::vector<std::vector<MarginStats>> stats(sub.n_dates(),
                                                std::vector<MarginStats>(d));
    parallel_for(sub.n_dates(), [&](std::size_t t) {
      const Matrix& members = sub.forecasts[t].members;
      const double m_count = static_cast<double>(members.rows());
      for (std::size_t l = 0; l < d; ++l) {
        double mean = 0.0;
        for (std::size_t k = 0; k < members.rows(); ++k) mean += members(k, l);
        mean /= m_count;
        double var = 0.0;
        for (std::size_t k = 0; k < members.rows(); ++k)
          var += (members(k, l) - mean) * (members(k, l) - mean);
        var /= (m_count - 1.0);
        stats[t][l] = {mean, var};
      }
    });

    // Pass A: independent EMOS fits for every candidate date and margin.
    struct FitCell {
      std::optional<EmosCoefficients> coeffs;
      bool insufficient = false;
    };
    std::vector<std::vector<FitCell>> fits(candidates.size(),
                                           std::vector<FitCell>(d));
    parallel_for(candidates.size(), [&](std::size_t ci) {
      const std::size_t t = candidates[ci];
      const int date = sub.forecasts[t].date;
      std::vector<std::size_t> window;
      for (std::size_t u = 0; u < sub.n_dates(); ++u) {
        const int du = sub.forecasts[u].date;
        if (du >= date - config.window_days && du < date &&
            sub.observations[u].complete())
          window.push_back(u);
      }
      for (std::size_t l = 0; l < d; ++l) {
        std::vector<EmosTrainingPair> pairs;
        pairs.reserve(window.size());
        for (const std::size_t u : window)
          pairs.push_back(
              {stats[u][l].mean, stats[u][l].var, sub.observations[u].values[l]});
        try {
          fits[ci][l].coeffs = fit_emos(pairs);
        } catch (const InsufficientDataError&) {
          fits[ci][l].insufficient = true;
        }
      }
    });

    // Pass B: fallback resolution in date order; a margin with no window
    // reuses its most recent fit, a date with no coefficients at all is
    // skipped.
    std::vector<PerDateOutcome> outcomes(candidates.size());
    std::vector<std::optional<EmosCoefficients>> last_good(d);
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      const std::size_t t = candidates[ci];
      const int date = sub.forecasts[t].date;
      PerDateOutcome& out = outcomes[ci];
      out.per_method.resize(config.methods.size());
      out.method_skips.resize(config.methods.size());

      std::vector<GaussianMargin> margins(d);
      bool usable = true;
      for (std::size_t l = 0; l < d; ++l) {
        const FitCell& cell = fits[ci][l];
        std::optional<EmosCoefficients> coeffs = cell.coeffs;
        if (!coeffs && cell.insufficient) {
          if (last_good[l]) {
            coeffs = last_good[l];
            out.log.push_back("emos fallback: " + group.name + " " +
                              group.margin_labels[l] + " " + iso_date(date) +
                              ": window too short, reusing previous coefficients");
          } else {
            out.log.push_back("date skipped: " + group.name + " " + iso_date(date) +
                              ": no usable EMOS coefficients for " +
                              group.margin_labels[l]);
            usable = false;
            break;
          }
        } else if (coeffs) {
          if (!coeffs->converged)
            out.log.push_back("emos convergence flag: " + group.name + " " +
                              group.margin_labels[l] + " " + iso_date(date));
          last_good[l] = coeffs;
        }
        if (coeffs) margins[l] = predict_margin(*coeffs, stats[t][l].mean, stats[t][l].var);
      }
      if (!usable) continue;
      if (!sub.observations[t].complete()) {
        out.log.push_back("date not scored: " + group.name + " " + iso_date(date) +
                          ": incomplete observation");
        continue;
      }
      out.scorable = true;
      out.margins = std::move(margins);
    }

    // Pass C: methods and scores.
    parallel_for(candidates.size(), [&](std::size_t ci) {
      PerDateOutcome& out = outcomes[ci];
      if (!out.scorable) return;
      const std::size_t t = candidates[ci];
      const int date = sub.forecasts[t].date;
      const std::vector<double>& y = sub.observations[t].values;
      const std::uint64_t date_seed =
          mix_seed(mix_seed(config.base_seed, gi), static_cast<std::uint64_t>(date));

      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        const Method method = config.methods[mi];
        std::vector<int> ref_dates;
        Matrix forecast;
        try {
          forecast = postprocess_multivariate(method, sub, date, out.margins, n_out,
                                              date_seed, config.window_days, &ref_dates);
        } catch (const InsufficientDataError& e) {
          out.method_skips[mi] = e.what();
          continue;
        } catch (const DataError& e) {
          out.method_skips[mi] = e.what();
          continue;
        }

        // Leakage audit: reference structures must never see the
        // verification date.
        if (std::find(ref_dates.begin(), ref_dates.end(), date) != ref_dates.end())
          ++out.leakage;

        // Margin identity audit: shuffled outputs carry exactly the
        // quantile sample per margin.
        if (method_uses_shuffling(method)) {
          for (std::size_t l = 0; l < d; ++l) {
            std::vector<double> row = forecast.row(l);
            std::sort(row.begin(), row.end());
            const MarginSample q = uniform_quantiles(out.margins[l], n_out);
            if (row != q.values) {
              ++out.margin_violations;
              break;
            }
          }
        }

        DateScores ds;
        ds.date = date;
        ds.crps.resize(d);
        for (std::size_t l = 0; l < d; ++l)
          ds.crps[l] = crps_ensemble(forecast.row(l), y[l]);
        const Matrix members = forecast.transposed();  // N x d
        ds.es = energy_score(members, y);
        ds.vs = variogram_score(members, y, config.vs_p);
        out.per_method[mi] = std::move(ds);
      }
    });

    // Merge in date order.
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      PerDateOutcome& out = outcomes[ci];
      for (const std::string& line : out.log) table.log.push_back(line);
      table.leakage_violations += out.leakage;
      table.margin_audit_violations += out.margin_violations;
      if (!out.scorable) continue;
      const int date = sub.forecasts[candidates[ci]].date;
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        if (out.per_method[mi]) {
          group.methods[mi].scored.push_back(std::move(*out.per_method[mi]));
        } else if (!out.method_skips[mi].empty()) {
          table.log.push_back("method skipped: " + group.name + " " +
                              method_label(config.methods[mi]) + " " + iso_date(date) +
                              ": " + out.method_skips[mi]);
        }
      }
    }

    for (std::size_t mi = 0; mi < group.methods.size(); ++mi)
      if (group.methods[mi].scored.empty())
        table.log.push_back("method skipped entirely: " + group.name + " " +
                            method_label(config.methods[mi]) + ": no scorable dates");

    table.groups.push_back(std::move(group));
  }

  table.meta.emplace_back("leakage_violations",
                          std::to_string(table.leakage_violations));
  table.meta.emplace_back("margin_audit_violations",
                          std::to_string(table.margin_audit_violations));

  if (table.margin_audit_violations > 0)
    throw InternalError("margin identity audit failed: shuffled output does not carry "
                        "the quantile margins");
  if (table.leakage_violations > 0)
    throw InternalError("leakage audit failed: a reference structure used the "
                        "verification date");
  return table;
}

// --- aggregation -------------------------------------------------------------

std::vector<double> mean_crps_per_margin(const MethodSeries& series) {
  if (series.scored.empty()) return {};
  std::vector<double> sums(series.scored.front().crps.size(), 0.0);
  for (const DateScores& ds : series.scored)
    for (std::size_t l = 0; l < sums.size(); ++l) sums[l] += ds.crps[l];
  for (double& s : sums) s /= static_cast<double>(series.scored.size());
  return sums;
}

double mean_crps(const MethodSeries& series) {
  const std::vector<double> per_margin = mean_crps_per_margin(series);
  if (per_margin.empty()) return std::nan("");
  double total = 0.0;
  for (double v : per_margin) total += v;
  return total / static_cast<double>(per_margin.size());
}

double mean_es(const MethodSeries& series) {
  if (series.scored.empty()) return std::nan("");
  double total = 0.0;
  for (const DateScores& ds : series.scored) total += ds.es;
  return total / static_cast<double>(series.scored.size());
}

double mean_vs(const MethodSeries& series) {
  if (series.scored.empty()) return std::nan("");
  double total = 0.0;
  for (const DateScores& ds : series.scored) total += ds.vs;
  return total / static_cast<double>(series.scored.size());
}

namespace {
ScoreSeries make_series(const MethodSeries& series, ScoreKind kind,
                        const std::function<double(const DateScores&)>& pick) {
  ScoreSeries out;
  out.method = method_label(series.method);
  out.kind = kind;
  for (const DateScores& ds : series.scored) {
    out.dates.push_back(ds.date);
    out.values.push_back(pick(ds));
  }
  return out;
}
}  // namespace

ScoreSeries crps_series(const MethodSeries& series) {
  return make_series(series, ScoreKind::CRPS, [](const DateScores& ds) {
    double total = 0.0;
    for (double v : ds.crps) total += v;
    return total / static_cast<double>(ds.crps.size());
  });
}

ScoreSeries margin_crps_series(const MethodSeries& series, std::size_t margin) {
  return make_series(series, ScoreKind::CRPS,
                     [margin](const DateScores& ds) { return ds.crps[margin]; });
}

ScoreSeries es_series(const MethodSeries& series) {
  return make_series(series, ScoreKind::ES,
                     [](const DateScores& ds) { return ds.es; });
}

ScoreSeries vs_series(const MethodSeries& series) {
  return make_series(series, ScoreKind::VS,
                     [](const DateScores& ds) { return ds.vs; });
}

std::optional<double> dm_on_common_dates(const ScoreSeries& a, const ScoreSeries& b,
                                         bool* degenerate) {
  ScoreSeries ca, cb;
  ca.method = a.method;
  cb.method = b.method;
  ca.kind = cb.kind = a.kind;
  std::size_t i = 0, j = 0;
  while (i < a.dates.size() && j < b.dates.size()) {
    if (a.dates[i] < b.dates[j]) {
      ++i;
    } else if (a.dates[i] > b.dates[j]) {
      ++j;
    } else {
      ca.dates.push_back(a.dates[i]);
      ca.values.push_back(a.values[i]);
      cb.dates.push_back(b.dates[j]);
      cb.values.push_back(b.values[j]);
      ++i;
      ++j;
    }
  }
  if (ca.dates.size() < 2) return std::nullopt;
  return dm_statistic(ca, cb, degenerate);
}

const MethodSeries* find_method(const GroupResults& group, Method m) {
  for (const MethodSeries& ms : group.methods)
    if (ms.method == m) return &ms;
  return nullptr;
}

// --- emission ----------------------------------------------------------------

void emit_score_tables(const ResultTable& table, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + out_dir + "'");

  const auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw DataError("cannot write '" + out_dir + "/" + name + "'");
    return out;
  };

  {
    std::ofstream out = open("scores.csv");
    out << "group,method,margin,crps,es,vs\n";
    for (const GroupResults& g : table.groups) {
      for (const MethodSeries& ms : g.methods) {
        const std::string label = method_label(ms.method);
        if (ms.scored.empty()) {
          out << g.name << ',' << label << ",,,,\n";
          continue;
        }
        const std::vector<double> per_margin = mean_crps_per_margin(ms);
        for (std::size_t l = 0; l < per_margin.size(); ++l)
          out << g.name << ',' << label << ',' << g.margin_labels[l] << ','
              << format_number(per_margin[l]) << ",,\n";
        out << g.name << ',' << label << ",," << format_number(mean_crps(ms)) << ','
            << format_number(mean_es(ms)) << ',' << format_number(mean_vs(ms)) << "\n";
      }
    }
  }

  {
    std::ofstream out = open("dm.csv");
    out << "group,score_kind,method,baseline,dm_statistic\n";
    for (const GroupResults& g : table.groups) {
      for (const ScoreKind kind : {ScoreKind::CRPS, ScoreKind::ES, ScoreKind::VS}) {
        for (const MethodSeries& a : g.methods) {
          if (a.scored.empty()) continue;
          for (const MethodSeries& b : g.methods) {
            if (a.method == b.method || b.scored.empty()) continue;
            const auto series = [&](const MethodSeries& ms) {
              switch (kind) {
                case ScoreKind::CRPS: return crps_series(ms);
                case ScoreKind::ES: return es_series(ms);
                case ScoreKind::VS: return vs_series(ms);
              }
              throw InternalError("emit_outputs: bad score kind");
            };
            const auto dm = dm_on_common_dates(series(a), series(b));
            if (!dm) continue;
            out << g.name << ',' << score_kind_name(kind) << ','
                << method_label(a.method) << ',' << method_label(b.method) << ','
                << format_number(*dm) << "\n";
          }
        }
      }
    }
  }
}

void emit_outputs(const ResultTable& table, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create output directory '" + out_dir + "'");

  const auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw DataError("cannot write '" + out_dir + "/" + name + "'");
    return out;
  };

  emit_score_tables(table, out_dir);

  {
    std::ofstream out = open("per_date_scores.csv");
    out << "group,method,date,margin,crps,es,vs\n";
    for (const GroupResults& g : table.groups) {
      for (const MethodSeries& ms : g.methods) {
        const std::string label = method_label(ms.method);
        for (const DateScores& ds : ms.scored) {
          for (std::size_t l = 0; l < ds.crps.size(); ++l)
            out << g.name << ',' << label << ',' << iso_date(ds.date) << ','
                << g.margin_labels[l] << ',' << format_number(ds.crps[l]) << ",,\n";
          out << g.name << ',' << label << ',' << iso_date(ds.date) << ",,,"
              << format_number(ds.es) << ',' << format_number(ds.vs) << "\n";
        }
      }
    }
  }

  {
    std::ofstream out = open("run_log.txt");
    for (const std::string& line : table.log) out << line << "\n";
  }

  {
    nlohmann::json manifest;
    for (const auto& [key, value] : table.meta) manifest["config"][key] = value;
    manifest["audits"]["leakage_violations"] = table.leakage_violations;
    manifest["audits"]["margin_audit_violations"] = table.margin_audit_violations;
    manifest["version"] = kVersion;
    std::ofstream out = open("manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

ResultTable table_from_per_date_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "group,method,date,margin,crps,es,vs")
    throw DataError(path + ": unexpected header '" + line + "'");

  ResultTable table;
  std::size_t lineno = 1;
  auto find_group = [&](const std::string& name) -> GroupResults& {
    for (GroupResults& g : table.groups)
      if (g.name == name) return g;
    table.groups.push_back({name, {}, {}});
    return table.groups.back();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    while (f.size() < 7) f.emplace_back();
    if (f.size() != 7)
      throw DataError(path + ": row " + std::to_string(lineno) + ": expected 7 fields");

    GroupResults& g = find_group(f[0]);
    const Method method = parse_method(f[1]);
    MethodSeries* ms = nullptr;
    for (MethodSeries& m : g.methods)
      if (m.method == method) ms = &m;
    if (!ms) {
      g.methods.push_back({method, {}});
      ms = &g.methods.back();
    }
    const int date = parse_iso_date(f[2]);
    if (ms->scored.empty() || ms->scored.back().date != date) {
      DateScores ds;
      ds.date = date;
      ms->scored.push_back(std::move(ds));
    }
    DateScores& ds = ms->scored.back();
    if (!f[3].empty()) {
      // margin row
      const auto it =
          std::find(g.margin_labels.begin(), g.margin_labels.end(), f[3]);
      std::size_t idx;
      if (it == g.margin_labels.end()) {
        g.margin_labels.push_back(f[3]);
        idx = g.margin_labels.size() - 1;
      } else {
        idx = static_cast<std::size_t>(it - g.margin_labels.begin());
      }
      if (ds.crps.size() <= idx) ds.crps.resize(idx + 1);
      ds.crps[idx] = parse_double(f[4], "crps");
    } else {
      ds.es = parse_double(f[5], "es");
      ds.vs = parse_double(f[6], "vs");
    }
  }
  table.meta.emplace_back("version", kVersion);
  table.meta.emplace_back("reaggregated_from", path);
  return table;
}

}  // namespace cobase
