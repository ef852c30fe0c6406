#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cobase/copulas.hpp"
#include "cobase/dataset.hpp"
#include "cobase/sampling.hpp"
#include "cobase/types.hpp"

namespace cobase {

enum class ReferenceSource { ECC, Schaake, SimSchaake, Cobase };

// d x N rank pattern; every row is a permutation of 1..N. This is the
// discrete dependence structure the corrected margins get reordered by.
struct RankMatrix {
  IntMatrix ranks;
  ReferenceSource source = ReferenceSource::ECC;

  std::size_t dim() const { return ranks.rows(); }
  std::size_t width() const { return ranks.cols(); }
  void validate() const;  // checks the per-row bijection
};

// Per-row ranks (1 = smallest) of a d x N matrix; ties broken by seeded
// jitter, one derived stream per row.
IntMatrix ranks_of(const Matrix& data, std::uint64_t seed);

// Reorder each margin sample so its rank pattern matches the reference row.
Matrix shuffle_to_ranks(const std::vector<MarginSample>& samples,
                        const RankMatrix& ref);

// Reference constructors -----------------------------------------------------

RankMatrix ecc_reference(const ForecastCase& raw, std::uint64_t seed);

// N observation vectors drawn without replacement from dates whose
// day-of-year lies within +-14 of `date` (any year, the date itself
// excluded); only dates with complete observations are eligible.
RankMatrix schaake_reference(const Archive& archive, int date, int n,
                             std::uint64_t seed,
                             std::vector<int>* selected_dates = nullptr);

// Ensemble similarity criterion: root mean squared gap of the per-margin
// ensemble means and standard deviations (1/(M-1) denominator).
double similarity_delta(const ForecastCase& a, const ForecastCase& b);

// Observations of the N dates most similar to `current` under
// similarity_delta (ties broken by earlier date; the verification date and
// dates with incomplete observations excluded).
RankMatrix simschaake_reference(const Archive& archive, const ForecastCase& current,
                                int n, std::uint64_t seed,
                                std::vector<int>* selected_dates = nullptr);

RankMatrix cobase_reference(const CopulaModel& model, int n, std::uint64_t seed);

// Methods ---------------------------------------------------------------------

enum class Method {
  EmosQ,          // quantile margins, rows independently permuted
  EmosR,          // random margins, independent by construction
  SimSShR,        // SimSchaake ranks over random margins
  SimSSh,         // SimSchaake ranks over quantile margins
  SSh,            // Schaake ranks over quantile margins
  ECC,            // raw-ensemble ranks over quantile margins (N = M)
  GCA,            // Gaussian copula draws through margin quantile functions
  Clayton,
  Frank,
  Gumbel,
  CobaseGCA,      // copula-sample ranks over quantile margins
  CobaseClayton,
  CobaseFrank,
  CobaseGumbel,
};

std::string method_label(Method m);
Method parse_method(const std::string& label);
const std::vector<Method>& all_methods();

bool method_uses_shuffling(Method m);     // margin multisets preserved exactly
bool method_uses_random_margins(Method m);
std::optional<CopulaFamily> method_copula_family(Method m);

// Runs one method end to end for one verification date: build the reference
// structure (fitting a copula on the window observations where the method
// needs one), sample the margins and reorder. Returns d x N.
Matrix postprocess_multivariate(Method method, const Archive& archive, int date,
                                const std::vector<GaussianMargin>& margins, int n,
                                std::uint64_t seed, int window_days = 30,
                                std::vector<int>* reference_dates = nullptr);

}  // namespace cobase
