#include "cobase/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cobase/rng.hpp"

namespace cobase {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_value(const std::string& text, const std::string& file, std::size_t row,
                   const std::string& column, bool allow_missing) {
  if (allow_missing && text == "NA") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
    throw DataError(file + ": row " + std::to_string(row) + ", column '" + column +
                    "': cannot parse value '" + text + "'");
  return v;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

bool ObservationVector::complete() const {
  return std::none_of(values.begin(), values.end(),
                      [](double v) { return std::isnan(v); });
}

std::optional<std::size_t> Archive::index_of_date(int serial) const {
  auto it = std::lower_bound(
      forecasts.begin(), forecasts.end(), serial,
      [](const ForecastCase& f, int s) { return f.date < s; });
  if (it == forecasts.end() || it->date != serial) return std::nullopt;
  return static_cast<std::size_t>(it - forecasts.begin());
}

Archive Archive::subset(const std::vector<std::size_t>& margin_indices) const {
  Archive out;
  out.ensemble_size = ensemble_size;
  for (std::size_t idx : margin_indices) {
    if (idx >= margins.size()) throw InternalError("Archive::subset: index out of range");
    out.margins.push_back(margins[idx]);
  }
  out.forecasts.reserve(forecasts.size());
  out.observations.reserve(observations.size());
  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    ForecastCase fc;
    fc.date = forecasts[t].date;
    fc.margin_ids = out.margins;
    fc.members = Matrix(forecasts[t].members.rows(), margin_indices.size());
    for (std::size_t m = 0; m < fc.members.rows(); ++m)
      for (std::size_t c = 0; c < margin_indices.size(); ++c)
        fc.members(m, c) = forecasts[t].members(m, margin_indices[c]);
    out.forecasts.push_back(std::move(fc));

    ObservationVector ob;
    ob.date = observations[t].date;
    for (std::size_t c : margin_indices) ob.values.push_back(observations[t].values[c]);
    out.observations.push_back(std::move(ob));
  }
  return out;
}

void Archive::validate() const {
  const std::size_t d = margins.size();
  if (d == 0) throw DataError("archive has no margins");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      if (margins[i] == margins[j])
        throw DataError("duplicate margin " + margins[i].label());
  if (forecasts.size() != observations.size())
    throw InternalError("archive forecast/observation date axes differ");
  if (ensemble_size < 2) throw DataError("ensemble size must be >= 2");
  for (std::size_t t = 0; t < forecasts.size(); ++t) {
    const ForecastCase& fc = forecasts[t];
    if (t > 0 && forecasts[t - 1].date >= fc.date)
      throw DataError("forecast dates must be strictly increasing");
    if (fc.members.rows() != static_cast<std::size_t>(ensemble_size))
      throw DataError("inconsistent ensemble size on " + iso_date(fc.date));
    if (fc.members.cols() != d || fc.margin_ids.size() != d)
      throw DataError("inconsistent margin count on " + iso_date(fc.date));
    for (double v : fc.members.data())
      if (!std::isfinite(v))
        throw DataError("non-finite forecast value on " + iso_date(fc.date));
    if (observations[t].date != fc.date)
      throw InternalError("misaligned observation date on " + iso_date(fc.date));
    if (observations[t].values.size() != d)
      throw DataError("observation length mismatch on " + iso_date(fc.date));
  }
}

Archive load_archive(const std::string& forecast_path,
                     const std::string& observation_path) {
  // --- forecasts ---
  const auto fc_lines = read_lines(forecast_path);
  if (fc_lines.empty()) throw DataError(forecast_path + ": empty file");
  const auto fc_header = split_csv(fc_lines[0]);
  if (fc_header.size() < 4 || fc_header[0] != "date" || fc_header[1] != "station" ||
      fc_header[2] != "variable")
    throw DataError(forecast_path + ": header must start with date,station,variable");
  const std::size_t n_members = fc_header.size() - 3;
  for (std::size_t m = 0; m < n_members; ++m) {
    const std::string expected = "member_" + std::to_string(m + 1);
    if (fc_header[3 + m] != expected)
      throw DataError(forecast_path + ": header column " + std::to_string(4 + m) +
                      " must be '" + expected + "'");
  }
  if (n_members < 2)
    throw DataError(forecast_path + ": need at least 2 member columns");

  std::map<int, std::map<std::pair<std::string, std::string>, std::vector<double>>> fc_rows;
  std::vector<MarginId> margin_order;
  for (std::size_t r = 1; r < fc_lines.size(); ++r) {
    if (fc_lines[r].empty()) continue;
    const auto fields = split_csv(fc_lines[r]);
    if (fields.size() != fc_header.size())
      throw DataError(forecast_path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(fc_header.size()));
    const int date = parse_iso_date(fields[0]);
    const Variable var = parse_variable(fields[2]);
    const auto key = std::make_pair(fields[1], fields[2]);
    auto& date_map = fc_rows[date];
    if (date_map.count(key))
      throw DataError(forecast_path + ": row " + std::to_string(r + 1) +
                      ": duplicate (date, station, variable) entry");
    std::vector<double> members(n_members);
    for (std::size_t m = 0; m < n_members; ++m)
      members[m] = parse_value(fields[3 + m], forecast_path, r + 1, fc_header[3 + m],
                               /*allow_missing=*/false);
    date_map.emplace(key, std::move(members));

    const MarginId id{fields[1], var};
    if (std::find(margin_order.begin(), margin_order.end(), id) == margin_order.end())
      margin_order.push_back(id);
  }
  if (fc_rows.empty()) throw DataError(forecast_path + ": no data rows");

  const std::size_t d = margin_order.size();
  Archive archive;
  archive.margins = margin_order;
  archive.ensemble_size = static_cast<int>(n_members);
  for (const auto& [date, date_map] : fc_rows) {
    if (date_map.size() != d)
      throw DataError(forecast_path + ": date " + iso_date(date) + " has " +
                      std::to_string(date_map.size()) + " margins, expected " +
                      std::to_string(d));
    ForecastCase fc;
    fc.date = date;
    fc.margin_ids = margin_order;
    fc.members = Matrix(n_members, d);
    for (std::size_t c = 0; c < d; ++c) {
      const auto key = std::make_pair(margin_order[c].station,
                                      variable_name(margin_order[c].variable));
      auto it = date_map.find(key);
      if (it == date_map.end())
        throw DataError(forecast_path + ": date " + iso_date(date) +
                        " is missing margin " + margin_order[c].label());
      for (std::size_t m = 0; m < n_members; ++m) fc.members(m, c) = it->second[m];
    }
    archive.forecasts.push_back(std::move(fc));
  }

  // --- observations ---
  const auto ob_lines = read_lines(observation_path);
  if (ob_lines.empty()) throw DataError(observation_path + ": empty file");
  const auto ob_header = split_csv(ob_lines[0]);
  if (ob_header != std::vector<std::string>{"date", "station", "variable", "value"})
    throw DataError(observation_path + ": header must be date,station,variable,value");

  std::map<int, std::map<std::size_t, double>> ob_rows;
  for (std::size_t r = 1; r < ob_lines.size(); ++r) {
    if (ob_lines[r].empty()) continue;
    const auto fields = split_csv(ob_lines[r]);
    if (fields.size() != 4)
      throw DataError(observation_path + ": row " + std::to_string(r + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected 4");
    const int date = parse_iso_date(fields[0]);
    const MarginId id{fields[1], parse_variable(fields[2])};
    auto mit = std::find(margin_order.begin(), margin_order.end(), id);
    if (mit == margin_order.end())
      throw DataError(observation_path + ": row " + std::to_string(r + 1) +
                      ": margin " + id.label() + " does not appear in the forecasts");
    if (!fc_rows.count(date))
      throw DataError(observation_path + ": row " + std::to_string(r + 1) + ": date " +
                      fields[0] + " does not appear in the forecasts");
    const std::size_t col = static_cast<std::size_t>(mit - margin_order.begin());
    if (ob_rows[date].count(col))
      throw DataError(observation_path + ": row " + std::to_string(r + 1) +
                      ": duplicate (date, station, variable) entry");
    ob_rows[date][col] =
        parse_value(fields[3], observation_path, r + 1, "value", /*allow_missing=*/true);
  }

  for (const ForecastCase& fc : archive.forecasts) {
    ObservationVector ob;
    ob.date = fc.date;
    ob.values.assign(d, std::numeric_limits<double>::quiet_NaN());
    auto it = ob_rows.find(fc.date);
    if (it != ob_rows.end())
      for (const auto& [col, v] : it->second) ob.values[col] = v;
    archive.observations.push_back(std::move(ob));
  }

  archive.validate();
  return archive;
}

void write_archive(const Archive& archive, const std::string& forecast_path,
                   const std::string& observation_path) {
  std::ofstream fc(forecast_path);
  if (!fc) throw DataError("cannot write '" + forecast_path + "'");
  fc << "date,station,variable";
  for (int m = 1; m <= archive.ensemble_size; ++m) fc << ",member_" << m;
  fc << "\n";
  for (const ForecastCase& f : archive.forecasts) {
    for (std::size_t c = 0; c < archive.dim(); ++c) {
      fc << iso_date(f.date) << ',' << archive.margins[c].station << ','
         << variable_name(archive.margins[c].variable);
      for (std::size_t m = 0; m < f.members.rows(); ++m)
        fc << ',' << format_value(f.members(m, c));
      fc << "\n";
    }
  }

  write_observations_csv(observation_path, archive.margins, archive.observations);
}

void write_observations_csv(const std::string& path,
                            const std::vector<MarginId>& margins,
                            const std::vector<ObservationVector>& rows,
                            const std::string& value_header) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "date,station,variable," << value_header << "\n";
  for (const ObservationVector& ob : rows) {
    for (std::size_t c = 0; c < margins.size(); ++c)
      out << iso_date(ob.date) << ',' << margins[c].station << ','
          << variable_name(margins[c].variable) << ',' << format_value(ob.values[c])
          << "\n";
  }
}

void SyntheticConfig::validate() const {
  if (n_stations < 1) throw ConfigError("synthetic: n_stations must be >= 1");
  if (n_variables < 1 || n_variables > 2)
    throw ConfigError("synthetic: n_variables must be 1 (T2m) or 2 (T2m+DPT)");
  if (n_days < 90) throw ConfigError("synthetic: n_days must be >= 90");
  if (ensemble_size < 2) throw ConfigError("synthetic: ensemble_size must be >= 2");
  if (!(spread_deficit > 0.0 && spread_deficit <= 1.0))
    throw ConfigError("synthetic: spread_deficit must lie in (0,1]");
  if (!(cross_correlation >= 0.0 && cross_correlation < 1.0))
    throw ConfigError("synthetic: cross_correlation must lie in [0,1)");
}

namespace {
constexpr double kSignalSd = 3.0;   // day-to-day anomaly scale, degC
constexpr double kWeatherSd = 2.0;  // unpredictable same-day noise, degC
constexpr double kArCoeff = 0.7;    // anomaly persistence

// Equicorrelated standard normal vector via a shared factor.
void equicorrelated_draw(Rng& rng, double rho, std::vector<double>& out) {
  const double g = rng.normal();
  const double a = std::sqrt(rho), b = std::sqrt(1.0 - rho);
  for (double& v : out) v = a * g + b * rng.normal();
}
}  // namespace

Archive generate_synthetic(const SyntheticConfig& config,
                           std::vector<ObservationVector>* truth_out) {
  config.validate();
  const std::size_t d =
      static_cast<std::size_t>(config.n_stations) * config.n_variables;
  const int start = serial_from_civil(2015, 1, 1);

  Archive archive;
  archive.ensemble_size = config.ensemble_size;
  for (int j = 0; j < config.n_stations; ++j) {
    char name[16];
    std::snprintf(name, sizeof(name), "S%02d", j + 1);
    for (int k = 0; k < config.n_variables; ++k)
      archive.margins.push_back({name, k == 0 ? Variable::T2m : Variable::DPT});
  }

  // Station/variable base climates so margins are not interchangeable.
  std::vector<double> offset(d);
  for (std::size_t c = 0; c < d; ++c) {
    const std::size_t station = c / config.n_variables;
    const std::size_t var = c % config.n_variables;
    offset[c] = 2.0 * static_cast<double>(station) - (var == 1 ? 2.0 : 0.0);
  }

  Rng rng(config.seed);
  const double rho = config.cross_correlation;
  std::vector<double> state(d), innov(d), noise(d), center(d);
  equicorrelated_draw(rng, rho, state);  // stationary start

  if (truth_out) truth_out->clear();
  for (int t = 0; t < config.n_days; ++t) {
    const int date = start + t;
    if (t > 0) {
      equicorrelated_draw(rng, rho, innov);
      const double carry = kArCoeff, fresh = std::sqrt(1.0 - kArCoeff * kArCoeff);
      for (std::size_t c = 0; c < d; ++c) state[c] = carry * state[c] + fresh * innov[c];
    }
    const double season = config.seasonal_amplitude *
                          std::sin(2.0 * M_PI * (day_of_year_365(date) - 1) / 365.0);
    for (std::size_t c = 0; c < d; ++c)
      center[c] = offset[c] + season + kSignalSd * state[c];

    if (truth_out) {
      ObservationVector tr;
      tr.date = date;
      tr.values.assign(center.begin(), center.end());
      truth_out->push_back(std::move(tr));
    }

    ObservationVector ob;
    ob.date = date;
    ob.values.resize(d);
    equicorrelated_draw(rng, rho, noise);
    for (std::size_t c = 0; c < d; ++c) ob.values[c] = center[c] + kWeatherSd * noise[c];
    archive.observations.push_back(std::move(ob));

    ForecastCase fc;
    fc.date = date;
    fc.margin_ids = archive.margins;
    fc.members = Matrix(static_cast<std::size_t>(config.ensemble_size), d);
    for (std::size_t m = 0; m < static_cast<std::size_t>(config.ensemble_size); ++m) {
      equicorrelated_draw(rng, rho, noise);
      for (std::size_t c = 0; c < d; ++c)
        fc.members(m, c) =
            center[c] + config.bias + config.spread_deficit * kWeatherSd * noise[c];
    }
    archive.forecasts.push_back(std::move(fc));
  }

  archive.validate();
  return archive;
}

}  // namespace cobase
