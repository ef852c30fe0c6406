#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cobase/types.hpp"

namespace cobase {

// One verification date's raw ensemble: M members x d margins, Celsius.
struct ForecastCase {
  int date = 0;  // serial day
  std::vector<MarginId> margin_ids;
  Matrix members;  // M x d

  std::size_t ensemble_size() const { return members.rows(); }
  std::size_t dim() const { return members.cols(); }
};

// Observed values for one date; NaN marks a missing margin.
struct ObservationVector {
  int date = 0;
  std::vector<double> values;

  bool complete() const;
};

// Date-aligned forecast and observation archive. The forecast dates define
// the date axis; margin order is fixed across all dates.
struct Archive {
  std::vector<MarginId> margins;
  std::vector<ForecastCase> forecasts;        // strictly increasing dates
  std::vector<ObservationVector> observations;  // aligned 1:1 with forecasts
  int ensemble_size = 0;

  std::size_t dim() const { return margins.size(); }
  std::size_t n_dates() const { return forecasts.size(); }

  std::optional<std::size_t> index_of_date(int serial) const;
  // Restrict to a subset of margins (for station groups).
  Archive subset(const std::vector<std::size_t>& margin_indices) const;

  void validate() const;
};

struct SyntheticConfig {
  int n_stations = 3;
  int n_variables = 1;  // 1 = T2m, 2 = T2m + DPT
  int n_days = 365;
  int ensemble_size = 17;  // M
  std::uint64_t seed = 0;
  double bias = 0.0;               // additive member bias, degC
  double spread_deficit = 1.0;     // in (0,1]; 1 = calibrated spread
  double cross_correlation = 0.0;  // rho of the truth process, in [0,1)
  double seasonal_amplitude = 0.0; // degC

  void validate() const;
};

// Reads the two-file CSV archive (schemas in the README). Malformed rows
// abort the load with the row and column named.
Archive load_archive(const std::string& forecast_path,
                     const std::string& observation_path);

void write_archive(const Archive& archive, const std::string& forecast_path,
                   const std::string& observation_path);

// Seeded synthetic multi-station weather. The truth process is Gaussian
// with a seasonal mean cycle, equicorrelated margins (cross_correlation)
// and AR(1) day-to-day persistence; observations are draws from it and
// members are draws shifted by `bias` with spread scaled by
// `spread_deficit`. `truth_out`, when given, receives the latent daily
// centers (the noise-free signal).
Archive generate_synthetic(const SyntheticConfig& config,
                           std::vector<ObservationVector>* truth_out = nullptr);

void write_observations_csv(const std::string& path,
                            const std::vector<MarginId>& margins,
                            const std::vector<ObservationVector>& rows,
                            const std::string& value_header = "value");

}  // namespace cobase
