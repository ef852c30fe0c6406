#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <random>
#include <set>

#include "cobase/shuffling.hpp"
#include "oracles.hpp"

using namespace cobase;

namespace {
Matrix row_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

bool is_permutation_row(const IntMatrix& ranks, std::size_t row) {
  std::set<int> seen;
  for (std::size_t c = 0; c < ranks.cols(); ++c) seen.insert(ranks(row, c));
  return seen.size() == ranks.cols() && *seen.begin() == 1 &&
         *seen.rbegin() == static_cast<int>(ranks.cols());
}

// Small synthetic archive helper used across the reference tests.
Archive toy_archive(int n_days, int n_stations, double rho, std::uint64_t seed,
                    double bias = 0.0, double sd = 1.0, int m = 5) {
  SyntheticConfig cfg;
  cfg.n_stations = n_stations;
  cfg.n_variables = 1;
  cfg.n_days = n_days;
  cfg.ensemble_size = m;
  cfg.seed = seed;
  cfg.bias = bias;
  cfg.spread_deficit = sd;
  cfg.cross_correlation = rho;
  cfg.seasonal_amplitude = 0.0;
  return generate_synthetic(cfg);
}
}  // namespace

TEST_CASE("ranks_of orders a simple row") {
  const IntMatrix r = ranks_of(row_matrix({{10.0, 30.0, 20.0}}), 1);
  CHECK(r(0, 0) == 1);
  CHECK(r(0, 1) == 3);
  CHECK(r(0, 2) == 2);

  const IntMatrix sorted = ranks_of(row_matrix({{-2.0, -1.0, 0.5, 3.0}}), 1);
  for (std::size_t c = 0; c < 4; ++c) CHECK(sorted(0, c) == static_cast<int>(c + 1));
}

TEST_CASE("ranks_of breaks ties into valid permutations") {
  const Matrix constant = row_matrix({{5.0, 5.0, 5.0}});
  const IntMatrix a = ranks_of(constant, 1);
  const IntMatrix b = ranks_of(constant, 2);
  CHECK(is_permutation_row(a, 0));
  CHECK(is_permutation_row(b, 0));
  CHECK(ranks_of(constant, 1) == a);  // deterministic per seed
}

TEST_CASE("shuffle_to_ranks permutes by rank") {
  MarginSample s;
  s.values = {1.0, 2.0, 3.0};
  RankMatrix ref;
  ref.ranks = IntMatrix(1, 3);
  ref.ranks(0, 0) = 3;
  ref.ranks(0, 1) = 1;
  ref.ranks(0, 2) = 2;
  const Matrix out = shuffle_to_ranks({s}, ref);
  CHECK(out(0, 0) == 3.0);
  CHECK(out(0, 1) == 1.0);
  CHECK(out(0, 2) == 2.0);
}

TEST_CASE("identity ranks leave sorted samples alone") {
  MarginSample s;
  s.values = {-1.0, 0.0, 2.0, 5.0};
  RankMatrix ref;
  ref.ranks = IntMatrix(1, 4);
  for (std::size_t c = 0; c < 4; ++c) ref.ranks(0, c) = static_cast<int>(c + 1);
  const Matrix out = shuffle_to_ranks({s}, ref);
  for (std::size_t c = 0; c < 4; ++c) CHECK(out(0, c) == s.values[c]);
}

TEST_CASE("rank fidelity and margin preservation on random cases") {
  std::mt19937_64 gen(101);
  std::normal_distribution<double> dist;
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = 1 + gen() % 4;
    const std::size_t n = 2 + gen() % 30;
    Matrix source(d, n);
    for (auto& v : source.data()) v = dist(gen);
    RankMatrix ref;
    ref.source = ReferenceSource::Schaake;
    ref.ranks = ranks_of(source, gen());
    ref.validate();

    std::vector<MarginSample> samples(d);
    for (auto& s : samples) {
      s.values.resize(n);
      for (auto& v : s.values) v = dist(gen);
    }
    const Matrix out = shuffle_to_ranks(samples, ref);
    CHECK(ranks_of(out, 12345) == ref.ranks);  // distinct values almost surely
    for (std::size_t l = 0; l < d; ++l) {
      std::vector<double> got = out.row(l);
      std::vector<double> want = samples[l].values;
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      CHECK(got == want);
    }
  }
}

TEST_CASE("ecc reference reflects the raw ensemble") {
  ForecastCase raw;
  raw.date = 10;
  raw.margin_ids = {{"A", Variable::T2m}};
  raw.members = Matrix(3, 1);
  raw.members(0, 0) = 2.0;
  raw.members(1, 0) = 0.5;
  raw.members(2, 0) = 1.0;
  const RankMatrix ref = ecc_reference(raw, 5);
  CHECK(ref.source == ReferenceSource::ECC);
  CHECK(ref.ranks(0, 0) == 3);
  CHECK(ref.ranks(0, 1) == 1);
  CHECK(ref.ranks(0, 2) == 2);

  ForecastCase increasing;
  increasing.date = 11;
  increasing.margin_ids = {{"A", Variable::T2m}, {"B", Variable::T2m}};
  increasing.members = Matrix(4, 2);
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t c = 0; c < 2; ++c)
      increasing.members(m, c) = static_cast<double>(m);
  const RankMatrix id = ecc_reference(increasing, 6);
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(id.ranks(0, c) == static_cast<int>(c + 1));
    CHECK(id.ranks(1, c) == static_cast<int>(c + 1));
  }

  ForecastCase dup;
  dup.date = 12;
  dup.margin_ids = raw.margin_ids;
  dup.members = Matrix(4, 1, 7.0);
  const RankMatrix tied = ecc_reference(dup, 7);
  tied.validate();
}

TEST_CASE("ecc self-consistency: shuffling the raw margins rebuilds the ensemble") {
  std::mt19937_64 gen(102);
  std::normal_distribution<double> dist;
  ForecastCase raw;
  raw.date = 0;
  raw.members = Matrix(7, 3);
  for (auto& v : raw.members.data()) v = dist(gen);
  const RankMatrix ref = ecc_reference(raw, 99);
  std::vector<MarginSample> margins(3);
  for (std::size_t l = 0; l < 3; ++l) margins[l].values = raw.members.col(l);
  const Matrix rebuilt = shuffle_to_ranks(margins, ref);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t m = 0; m < 7; ++m)
      CHECK(rebuilt(l, m) == raw.members(m, l));  // distinct values: exact rebuild
}

TEST_CASE("similarity delta") {
  ForecastCase a, b;
  a.members = Matrix(4, 1);
  for (std::size_t m = 0; m < 4; ++m) a.members(m, 0) = static_cast<double>(m);
  b = a;
  CHECK(similarity_delta(a, a) == 0.0);
  for (std::size_t m = 0; m < 4; ++m) b.members(m, 0) += 3.0;  // same sd, mean gap 3
  CHECK(similarity_delta(a, b) == doctest::Approx(3.0).epsilon(1e-12));

  // d=2: mean gaps (3,4), sd gaps (0,0) -> sqrt((9+16)/2)
  ForecastCase c, e;
  c.members = Matrix(4, 2);
  for (std::size_t m = 0; m < 4; ++m)
    for (std::size_t l = 0; l < 2; ++l) c.members(m, l) = static_cast<double>(m);
  e = c;
  for (std::size_t m = 0; m < 4; ++m) {
    e.members(m, 0) += 3.0;
    e.members(m, 1) += 4.0;
  }
  CHECK(similarity_delta(c, e) == doctest::Approx(3.5355339059).epsilon(1e-9));

  ForecastCase wrong;
  wrong.members = Matrix(4, 3);
  CHECK_THROWS_AS(similarity_delta(a, wrong), DataError);
}

TEST_CASE("schaake reference draws from the seasonal pool") {
  const Archive archive = toy_archive(730, 2, 0.0, 1);
  const int date = archive.forecasts[400].date;
  std::vector<int> picked;
  const RankMatrix ref = schaake_reference(archive, date, 17, 3, &picked);
  ref.validate();
  CHECK(picked.size() == 17);
  for (const int p : picked) {
    CHECK(p != date);
    CHECK(doy_circular_distance(p, date) <= 14);
  }
}

TEST_CASE("schaake selection is forced when the pool is exactly N") {
  const Archive archive = toy_archive(365, 1, 0.0, 2);
  const int date = archive.forecasts[180].date;
  // one year: the +-14 day window holds exactly 28 other dates
  std::vector<int> a, b;
  schaake_reference(archive, date, 28, 10, &a);
  schaake_reference(archive, date, 29 - 1, 11, &b);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK_THROWS_AS(schaake_reference(archive, date, 29, 12, nullptr),
                  InsufficientDataError);
}

TEST_CASE("schaake reference carries the truth dependence") {
  const Archive archive = toy_archive(2000, 2, 0.9, 3, 0.0, 1.0, 5);
  const int date = archive.forecasts[1000].date;
  std::vector<int> picked;
  const RankMatrix ref = schaake_reference(archive, date, 51, 4, &picked);
  // Spearman of the two rank rows
  std::vector<double> r0(51), r1(51);
  for (std::size_t c = 0; c < 51; ++c) {
    r0[c] = ref.ranks(0, c);
    r1[c] = ref.ranks(1, c);
  }
  const double rho = oracle::pearson(r0, r1);
  CHECK(rho > 0.8);
  CHECK(rho < 0.97);
}

TEST_CASE("simschaake picks the most similar dates") {
  const Archive archive = toy_archive(200, 2, 0.3, 5);
  const std::size_t target = 120;
  const ForecastCase& current = archive.forecasts[target];

  std::vector<int> picked;
  const RankMatrix ref = simschaake_reference(archive, current, 20, 6, &picked);
  ref.validate();
  CHECK(picked.size() == 20);
  CHECK(std::find(picked.begin(), picked.end(), current.date) == picked.end());

  // oracle: exhaustive delta over all other dates
  std::vector<std::pair<double, int>> deltas;
  for (const ForecastCase& fc : archive.forecasts) {
    if (fc.date == current.date) continue;
    deltas.emplace_back(similarity_delta(current, fc), fc.date);
  }
  std::sort(deltas.begin(), deltas.end());
  std::set<int> expected;
  for (std::size_t i = 0; i < 20; ++i) expected.insert(deltas[i].second);
  CHECK(std::set<int>(picked.begin(), picked.end()) == expected);
}

TEST_CASE("a duplicated forecast is selected first by simschaake") {
  Archive archive = toy_archive(120, 1, 0.0, 7);
  const std::size_t target = 100, clone = 40;
  archive.forecasts[clone].members = archive.forecasts[target].members;
  std::vector<int> picked;
  simschaake_reference(archive, archive.forecasts[target], 5, 8, &picked);
  CHECK(picked.front() == archive.forecasts[clone].date);
}

TEST_CASE("simschaake with N = archive size - 1 selects everything") {
  const Archive archive = toy_archive(90, 1, 0.0, 9);
  std::vector<int> picked;
  simschaake_reference(archive, archive.forecasts[45], 89, 10, &picked);
  CHECK(picked.size() == 89);
  CHECK_THROWS_AS(
      simschaake_reference(archive, archive.forecasts[45], 90, 10, nullptr),
      InsufficientDataError);
}

TEST_CASE("cobase reference ranks a copula sample") {
  Matrix indep(2, 2, 0.0);
  indep(0, 0) = indep(1, 1) = 1.0;
  const CopulaModel id = CopulaModel::gaussian(indep);
  const RankMatrix a = cobase_reference(id, 10000, 11);
  a.validate();
  CHECK(a.source == ReferenceSource::Cobase);
  std::vector<double> r0(10000), r1(10000);
  for (std::size_t c = 0; c < 10000; ++c) {
    r0[c] = a.ranks(0, c);
    r1[c] = a.ranks(1, c);
  }
  CHECK(std::abs(oracle::pearson(r0, r1)) < 0.02);

  // near-comonotone: both rank rows coincide
  Matrix tight(2, 2, 1.0 - 1e-6);
  tight(0, 0) = tight(1, 1) = 1.0;
  const RankMatrix b = cobase_reference(CopulaModel::gaussian(tight), 17, 12);
  for (std::size_t c = 0; c < 17; ++c) CHECK(b.ranks(0, c) == b.ranks(1, c));

  CHECK(cobase_reference(id, 100, 13).ranks == cobase_reference(id, 100, 13).ranks);
}

TEST_CASE("method labels round trip") {
  for (const Method m : all_methods()) CHECK(parse_method(method_label(m)) == m);
  CHECK_THROWS_AS(parse_method("EMOS"), ConfigError);
  CHECK(method_label(Method::CobaseGCA) == "COBASE-GCA");
  CHECK(all_methods().size() == 14);
}

TEST_CASE("postprocess_multivariate preserves margins and handles ECC guard") {
  const Archive archive = toy_archive(120, 2, 0.4, 14);
  const int date = archive.forecasts[100].date;
  const std::vector<GaussianMargin> margins{{1.0, 0.8}, {-0.5, 1.3}};

  const Matrix cobase =
      postprocess_multivariate(Method::CobaseGCA, archive, date, margins, 17, 21);
  const Matrix emosq =
      postprocess_multivariate(Method::EmosQ, archive, date, margins, 17, 21);
  for (std::size_t l = 0; l < 2; ++l) {
    std::vector<double> a = cobase.row(l), b = emosq.row(l);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);  // same sorted values: both carry the quantile margins
    CHECK(a == uniform_quantiles(margins[l], 17).values);
  }

  CHECK_THROWS_AS(
      postprocess_multivariate(Method::ECC, archive, date, margins, 7, 21),
      ConfigError);
  const Matrix ecc =
      postprocess_multivariate(Method::ECC, archive, date, margins, 5, 21);
  CHECK(ecc.rows() == 2);
  CHECK(ecc.cols() == 5);
}

TEST_CASE("rank-identical raw ensembles yield comonotone ECC output") {
  Archive archive = toy_archive(120, 2, 0.0, 15);
  const std::size_t target = 110;
  // overwrite the raw members so both margins are increasing in member index
  for (std::size_t m = 0; m < archive.forecasts[target].members.rows(); ++m)
    for (std::size_t l = 0; l < 2; ++l)
      archive.forecasts[target].members(m, l) = static_cast<double>(m) + 0.1 * static_cast<double>(l);
  const int date = archive.forecasts[target].date;
  const std::vector<GaussianMargin> margins{{0.0, 1.0}, {5.0, 2.0}};
  const Matrix out =
      postprocess_multivariate(Method::ECC, archive, date, margins, 5, 16);
  // both rows must be sorted the same way (comonotone)
  for (std::size_t c = 1; c < 5; ++c) {
    CHECK(out(0, c) > out(0, c - 1));
    CHECK(out(1, c) > out(1, c - 1));
  }
}

TEST_CASE("simssh-r shares the reference ranks with simssh") {
  const Archive archive = toy_archive(150, 2, 0.5, 17);
  const int date = archive.forecasts[140].date;
  const std::vector<GaussianMargin> margins{{0.0, 1.0}, {0.0, 1.0}};
  const std::uint64_t seed = 31;
  const Matrix q =
      postprocess_multivariate(Method::SimSSh, archive, date, margins, 17, seed);
  const Matrix r =
      postprocess_multivariate(Method::SimSShR, archive, date, margins, 17, seed);
  CHECK(ranks_of(q, 555) == ranks_of(r, 555));  // same dependence pattern
  CHECK(!(q == r));                             // different margins
}
