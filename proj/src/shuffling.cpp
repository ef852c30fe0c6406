#include "cobase/shuffling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranking.hpp"

namespace cobase {

namespace {
// Seed salts for the independent sub-streams of one (date, seed) context.
// Keyed by purpose, not by method label, so that method pairs which are
// meant to share structure (SimSSh vs SimSSh-R, EMOS-R vs SimSSh-R margins)
// actually do.
constexpr std::uint64_t kSaltReference = 0x7265666572ULL;
constexpr std::uint64_t kSaltRandomMargin = 0x6d617267696eULL;
constexpr std::uint64_t kSaltCopulaDraw = 0x636f70756c61ULL;
constexpr std::uint64_t kSaltRowPermutation = 0x7065726dULL;

std::uint64_t family_salt(CopulaFamily f) {
  return static_cast<std::uint64_t>(f) + 1;
}
}  // namespace

void RankMatrix::validate() const {
  const std::size_t n = ranks.cols();
  std::vector<bool> seen(n);
  for (std::size_t r = 0; r < ranks.rows(); ++r) {
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t c = 0; c < n; ++c) {
      const int v = ranks(r, c);
      if (v < 1 || static_cast<std::size_t>(v) > n || seen[static_cast<std::size_t>(v - 1)])
        throw InternalError("RankMatrix: row " + std::to_string(r) +
                            " is not a permutation of 1..N");
      seen[static_cast<std::size_t>(v - 1)] = true;
    }
  }
}

IntMatrix ranks_of(const Matrix& data, std::uint64_t seed) {
  const std::size_t d = data.rows(), n = data.cols();
  if (n < 1) throw DataError("ranks_of: empty rows");
  for (double v : data.data())
    if (!std::isfinite(v)) throw DataError("ranks_of: non-finite entry");
  IntMatrix out(d, n);
  for (std::size_t r = 0; r < d; ++r) {
    Rng rng(mix_seed(seed, r));
    const std::vector<double> row = data.row(r);
    const std::vector<int> ranks = detail::rank_vector(row, rng);
    for (std::size_t c = 0; c < n; ++c) out(r, c) = ranks[c];
  }
  return out;
}

Matrix shuffle_to_ranks(const std::vector<MarginSample>& samples,
                        const RankMatrix& ref) {
  const std::size_t d = ref.dim(), n = ref.width();
  if (samples.size() != d)
    throw DataError("shuffle_to_ranks: sample count does not match reference rows");
  Matrix out(d, n);
  for (std::size_t l = 0; l < d; ++l) {
    if (samples[l].size() != n)
      throw DataError("shuffle_to_ranks: sample " + std::to_string(l) +
                      " has length " + std::to_string(samples[l].size()) +
                      ", reference width is " + std::to_string(n));
    std::vector<double> sorted = samples[l].values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t c = 0; c < n; ++c)
      out(l, c) = sorted[static_cast<std::size_t>(ref.ranks(l, c) - 1)];
  }
  return out;
}

RankMatrix ecc_reference(const ForecastCase& raw, std::uint64_t seed) {
  RankMatrix ref;
  ref.source = ReferenceSource::ECC;
  ref.ranks = ranks_of(raw.members.transposed(), seed);
  return ref;
}

RankMatrix schaake_reference(const Archive& archive, int date, int n,
                             std::uint64_t seed, std::vector<int>* selected_dates) {
  if (n < 1) throw DataError("schaake_reference: sample size must be >= 1");
  std::vector<std::size_t> pool;
  for (std::size_t t = 0; t < archive.n_dates(); ++t) {
    const ObservationVector& ob = archive.observations[t];
    if (ob.date == date || !ob.complete()) continue;
    if (doy_circular_distance(ob.date, date) <= 14) pool.push_back(t);
  }
  if (pool.size() < static_cast<std::size_t>(n))
    throw InsufficientDataError(
        "schaake_reference: only " + std::to_string(pool.size()) +
        " complete observation dates within +-14 days of " + iso_date(date) +
        ", need " + std::to_string(n));

  Rng rng(mix_seed(seed, 0x5c4aa4eULL));
  const std::vector<std::size_t> pick =
      rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(n));

  const std::size_t d = archive.dim();
  Matrix stacked(d, static_cast<std::size_t>(n));
  if (selected_dates) selected_dates->clear();
  for (std::size_t k = 0; k < pick.size(); ++k) {
    const ObservationVector& ob = archive.observations[pool[pick[k]]];
    if (selected_dates) selected_dates->push_back(ob.date);
    for (std::size_t l = 0; l < d; ++l) stacked(l, k) = ob.values[l];
  }

  RankMatrix ref;
  ref.source = ReferenceSource::Schaake;
  ref.ranks = ranks_of(stacked, seed);
  return ref;
}

double similarity_delta(const ForecastCase& a, const ForecastCase& b) {
  const std::size_t d = a.dim();
  const std::size_t m = a.ensemble_size();
  if (b.dim() != d || b.ensemble_size() != m)
    throw DataError("similarity_delta: forecast shapes differ");
  double mean_gap = 0.0, sd_gap = 0.0;
  for (std::size_t l = 0; l < d; ++l) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      ma += a.members(k, l);
      mb += b.members(k, l);
    }
    ma /= static_cast<double>(m);
    mb /= static_cast<double>(m);
    double va = 0.0, vb = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      va += (a.members(k, l) - ma) * (a.members(k, l) - ma);
      vb += (b.members(k, l) - mb) * (b.members(k, l) - mb);
    }
    const double sa = std::sqrt(va / static_cast<double>(m - 1));
    const double sb = std::sqrt(vb / static_cast<double>(m - 1));
    mean_gap += (ma - mb) * (ma - mb);
    sd_gap += (sa - sb) * (sa - sb);
  }
  const double dd = static_cast<double>(d);
  return std::sqrt(mean_gap / dd + sd_gap / dd);
}

RankMatrix simschaake_reference(const Archive& archive, const ForecastCase& current,
                                int n, std::uint64_t seed,
                                std::vector<int>* selected_dates) {
  if (n < 1) throw DataError("simschaake_reference: sample size must be >= 1");
  struct Candidate {
    double delta;
    int date;
    std::size_t index;
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < archive.n_dates(); ++t) {
    const ForecastCase& fc = archive.forecasts[t];
    if (fc.date == current.date || !archive.observations[t].complete()) continue;
    candidates.push_back({similarity_delta(current, fc), fc.date, t});
  }
  if (candidates.size() < static_cast<std::size_t>(n))
    throw InsufficientDataError(
        "simschaake_reference: only " + std::to_string(candidates.size()) +
        " eligible dates, need " + std::to_string(n));
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.date < b.date;
  });

  const std::size_t d = archive.dim();
  Matrix stacked(d, static_cast<std::size_t>(n));
  if (selected_dates) selected_dates->clear();
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    const ObservationVector& ob = archive.observations[candidates[k].index];
    if (selected_dates) selected_dates->push_back(ob.date);
    for (std::size_t l = 0; l < d; ++l) stacked(l, k) = ob.values[l];
  }

  RankMatrix ref;
  ref.source = ReferenceSource::SimSchaake;
  ref.ranks = ranks_of(stacked, seed);
  return ref;
}

RankMatrix cobase_reference(const CopulaModel& model, int n, std::uint64_t seed) {
  RankMatrix ref;
  ref.source = ReferenceSource::Cobase;
  ref.ranks = ranks_of(sample_copula(model, n, seed).transposed(), seed);
  return ref;
}

// --- method table -----------------------------------------------------------

namespace {
struct MethodInfo {
  Method method;
  const char* label;
};
constexpr MethodInfo kMethods[] = {
    {Method::EmosQ, "EMOS-Q"},
    {Method::EmosR, "EMOS-R"},
    {Method::SimSShR, "SimSSh-R"},
    {Method::SimSSh, "SimSSh"},
    {Method::SSh, "SSh"},
    {Method::ECC, "ECC"},
    {Method::GCA, "GCA"},
    {Method::Clayton, "Clayton"},
    {Method::Frank, "Frank"},
    {Method::Gumbel, "Gumbel"},
    {Method::CobaseGCA, "COBASE-GCA"},
    {Method::CobaseClayton, "COBASE-Clayton"},
    {Method::CobaseFrank, "COBASE-Frank"},
    {Method::CobaseGumbel, "COBASE-Gumbel"},
};
}  // namespace

std::string method_label(Method m) {
  for (const auto& info : kMethods)
    if (info.method == m) return info.label;
  throw InternalError("method_label: bad enum value");
}

Method parse_method(const std::string& label) {
  for (const auto& info : kMethods)
    if (label == info.label) return info.method;
  throw ConfigError("unknown method '" + label + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (const auto& info : kMethods) v.push_back(info.method);
    return v;
  }();
  return all;
}

bool method_uses_shuffling(Method m) {
  switch (m) {
    case Method::EmosQ:
    case Method::SimSSh:
    case Method::SSh:
    case Method::ECC:
    case Method::CobaseGCA:
    case Method::CobaseClayton:
    case Method::CobaseFrank:
    case Method::CobaseGumbel:
      return true;
    default:
      return false;
  }
}

bool method_uses_random_margins(Method m) {
  switch (m) {
    case Method::EmosR:
    case Method::SimSShR:
    case Method::GCA:
    case Method::Clayton:
    case Method::Frank:
    case Method::Gumbel:
      return true;
    default:
      return false;
  }
}

std::optional<CopulaFamily> method_copula_family(Method m) {
  switch (m) {
    case Method::GCA:
    case Method::CobaseGCA:
      return CopulaFamily::Gaussian;
    case Method::Clayton:
    case Method::CobaseClayton:
      return CopulaFamily::Clayton;
    case Method::Frank:
    case Method::CobaseFrank:
      return CopulaFamily::Frank;
    case Method::Gumbel:
    case Method::CobaseGumbel:
      return CopulaFamily::Gumbel;
    default:
      return std::nullopt;
  }
}

namespace {
Matrix window_observations(const Archive& archive, int date, int window_days) {
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < archive.n_dates(); ++t) {
    const ObservationVector& ob = archive.observations[t];
    if (ob.date >= date - window_days && ob.date < date && ob.complete())
      rows.push_back(t);
  }
  Matrix out(rows.size(), archive.dim());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < archive.dim(); ++c)
      out(r, c) = archive.observations[rows[r]].values[c];
  return out;
}

CopulaModel fit_window_copula(const Archive& archive, int date, int window_days,
                              CopulaFamily family) {
  const Matrix window = window_observations(archive, date, window_days);
  if (family == CopulaFamily::Gaussian) return fit_gaussian_copula(window);
  return fit_archimedean(window, family);
}

std::vector<MarginSample> quantile_margins(const std::vector<GaussianMargin>& margins,
                                           int n) {
  std::vector<MarginSample> out;
  out.reserve(margins.size());
  for (const GaussianMargin& m : margins) out.push_back(uniform_quantiles(m, n));
  return out;
}

std::vector<MarginSample> random_margins(const std::vector<GaussianMargin>& margins,
                                         int n, std::uint64_t seed) {
  std::vector<MarginSample> out;
  out.reserve(margins.size());
  for (std::size_t l = 0; l < margins.size(); ++l)
    out.push_back(random_sample(margins[l], n, mix_seed(seed, l)));
  return out;
}

Matrix stack_samples(const std::vector<MarginSample>& samples) {
  Matrix out(samples.size(), samples.front().size());
  for (std::size_t l = 0; l < samples.size(); ++l)
    for (std::size_t c = 0; c < samples[l].size(); ++c)
      out(l, c) = samples[l].values[c];
  return out;
}
}  // namespace

Matrix postprocess_multivariate(Method method, const Archive& archive, int date,
                                const std::vector<GaussianMargin>& margins, int n,
                                std::uint64_t seed, int window_days,
                                std::vector<int>* reference_dates) {
  const std::size_t d = archive.dim();
  if (margins.size() != d)
    throw DataError("postprocess_multivariate: margin count mismatch");
  if (n < 1) throw DataError("postprocess_multivariate: sample size must be >= 1");
  if (reference_dates) reference_dates->clear();

  const auto idx = archive.index_of_date(date);
  if (!idx)
    throw DataError("postprocess_multivariate: date " + iso_date(date) +
                    " not in the archive");

  const std::uint64_t ref_seed = mix_seed(seed, kSaltReference);
  const std::uint64_t margin_seed = mix_seed(seed, kSaltRandomMargin);

  switch (method) {
    case Method::EmosQ: {
      // Independent arrangement: each quantile row gets its own permutation.
      const std::vector<MarginSample> q = quantile_margins(margins, n);
      Matrix out(d, static_cast<std::size_t>(n));
      for (std::size_t l = 0; l < d; ++l) {
        Rng rng(mix_seed(mix_seed(seed, kSaltRowPermutation), l));
        const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n));
        for (std::size_t c = 0; c < static_cast<std::size_t>(n); ++c)
          out(l, c) = q[l].values[perm[c]];
      }
      return out;
    }
    case Method::EmosR:
      return stack_samples(random_margins(margins, n, margin_seed));
    case Method::SimSShR: {
      const RankMatrix ref = simschaake_reference(
          archive, archive.forecasts[*idx], n, ref_seed, reference_dates);
      return shuffle_to_ranks(random_margins(margins, n, margin_seed), ref);
    }
    case Method::SimSSh: {
      const RankMatrix ref = simschaake_reference(
          archive, archive.forecasts[*idx], n, ref_seed, reference_dates);
      return shuffle_to_ranks(quantile_margins(margins, n), ref);
    }
    case Method::SSh: {
      const RankMatrix ref =
          schaake_reference(archive, date, n, ref_seed, reference_dates);
      return shuffle_to_ranks(quantile_margins(margins, n), ref);
    }
    case Method::ECC: {
      if (n != archive.ensemble_size)
        throw ConfigError("ECC requires N equal to the raw ensemble size M = " +
                          std::to_string(archive.ensemble_size));
      const RankMatrix ref = ecc_reference(archive.forecasts[*idx], ref_seed);
      return shuffle_to_ranks(quantile_margins(margins, n), ref);
    }
    case Method::GCA: {
      const CopulaModel model =
          fit_window_copula(archive, date, window_days, CopulaFamily::Gaussian);
      const std::uint64_t draw_seed =
          mix_seed(mix_seed(seed, kSaltCopulaDraw), family_salt(CopulaFamily::Gaussian));
      return gca_transform(model, margins, n, draw_seed).transposed();
    }
    case Method::Clayton:
    case Method::Frank:
    case Method::Gumbel: {
      const CopulaFamily family = *method_copula_family(method);
      const CopulaModel model = fit_window_copula(archive, date, window_days, family);
      const std::uint64_t draw_seed =
          mix_seed(mix_seed(seed, kSaltCopulaDraw), family_salt(family));
      Matrix u = sample_copula(model, n, draw_seed);
      Matrix out(d, static_cast<std::size_t>(n));
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r)
          out(c, r) = margins[c].quantile(u(r, c));
      return out;
    }
    case Method::CobaseGCA:
    case Method::CobaseClayton:
    case Method::CobaseFrank:
    case Method::CobaseGumbel: {
      const CopulaFamily family = *method_copula_family(method);
      const CopulaModel model = fit_window_copula(archive, date, window_days, family);
      const RankMatrix ref =
          cobase_reference(model, n, mix_seed(ref_seed, family_salt(family)));
      return shuffle_to_ranks(quantile_margins(margins, n), ref);
    }
  }
  throw InternalError("postprocess_multivariate: bad method enum");
}

}  // namespace cobase
