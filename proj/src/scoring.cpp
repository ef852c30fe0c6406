#include "cobase/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cobase {

std::string score_kind_name(ScoreKind k) {
  switch (k) {
    case ScoreKind::CRPS: return "CRPS";
    case ScoreKind::ES: return "ES";
    case ScoreKind::VS: return "VS";
  }
  throw InternalError("score_kind_name: bad enum value");
}

double crps_ensemble(std::span<const double> members, double y) {
  const std::size_t m = members.size();
  if (m == 0) throw DataError("crps_ensemble: empty ensemble");
  std::vector<double> x(members.begin(), members.end());
  std::sort(x.begin(), x.end());
  // For sorted members, sum_{n,m} |x_n - x_m| = 2 * sum_i (2i-1-M) x_(i).
  double mad = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mad += std::abs(x[i] - y);
    spread += (2.0 * static_cast<double>(i + 1) - 1.0 - static_cast<double>(m)) * x[i];
  }
  const double dm = static_cast<double>(m);
  return mad / dm - spread / (dm * dm);
}

namespace {
double euclidean(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}
}  // namespace

double energy_score(const Matrix& members, std::span<const double> y) {
  const std::size_t m = members.rows();
  const std::size_t d = members.cols();
  if (m == 0) throw DataError("energy_score: empty ensemble");
  if (y.size() != d) throw DataError("energy_score: observation dimension mismatch");
  double to_obs = 0.0;
  for (std::size_t i = 0; i < m; ++i) to_obs += euclidean(members.row_ptr(i), y.data(), d);
  double between = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      between += euclidean(members.row_ptr(i), members.row_ptr(j), d);
  const double dm = static_cast<double>(m);
  return to_obs / dm - between / (dm * dm);
}

double variogram_score(const Matrix& members, std::span<const double> y, double p,
                       const Matrix& weights) {
  const std::size_t m = members.rows();
  const std::size_t d = members.cols();
  if (m == 0) throw DataError("variogram_score: empty ensemble");
  if (y.size() != d) throw DataError("variogram_score: observation dimension mismatch");
  if (!(p > 0.0)) throw DataError("variogram_score: order p must be > 0");
  const bool weighted = !weights.empty();
  if (weighted && (weights.rows() != d || weights.cols() != d))
    throw DataError("variogram_score: weight matrix must be d x d");
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (i == j) continue;  // |y_i - y_i| and |x_i - x_i| vanish
      double fc = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        fc += std::pow(std::abs(members(k, i) - members(k, j)), p);
      fc /= static_cast<double>(m);
      const double ob = std::pow(std::abs(y[i] - y[j]), p);
      const double w = weighted ? weights(i, j) : 1.0;
      total += w * (ob - fc) * (ob - fc);
    }
  }
  return total;
}

double dm_statistic(std::span<const double> a, std::span<const double> b,
                    bool* degenerate) {
  if (degenerate) *degenerate = false;
  if (a.size() != b.size()) throw DataError("dm_statistic: series lengths differ");
  const std::size_t n = a.size();
  if (n < 2) throw DataError("dm_statistic: need at least two dates");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  if (var == 0.0) {
    if (mean == 0.0) return 0.0;
    if (degenerate) *degenerate = true;
    return mean > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  }
  return mean / std::sqrt(var / static_cast<double>(n));
}

double dm_statistic(const ScoreSeries& a, const ScoreSeries& b, bool* degenerate) {
  if (a.kind != b.kind) throw DataError("dm_statistic: score kinds differ");
  if (a.dates != b.dates) throw DataError("dm_statistic: series dates are not aligned");
  return dm_statistic(std::span<const double>(a.values),
                      std::span<const double>(b.values), degenerate);
}

}  // namespace cobase
