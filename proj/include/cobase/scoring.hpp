#pragma once

#include <span>
#include <string>
#include <vector>

#include "cobase/types.hpp"

namespace cobase {

enum class ScoreKind { CRPS, ES, VS };

std::string score_kind_name(ScoreKind k);

// Per-date score values for one method; dates carried as serial day numbers
// so compared series can be aligned.
struct ScoreSeries {
  std::string method;
  ScoreKind kind = ScoreKind::CRPS;
  std::vector<int> dates;
  std::vector<double> values;
};

// CRPS of an ensemble forecast against a scalar observation:
//   mean |x_m - y|  -  (1/(2 M^2)) sum_{n,m} |x_n - x_m|
// evaluated through the sorted-member form, O(M log M).
double crps_ensemble(std::span<const double> members, double y);

// Energy score of M ensemble vectors (rows of `members`, each length d)
// against observation y.
double energy_score(const Matrix& members, std::span<const double> y);

// Variogram score of order p with pairwise weights; unit weights when
// `weights` is empty.
double variogram_score(const Matrix& members, std::span<const double> y,
                       double p = 1.0, const Matrix& weights = Matrix());

// Diebold-Mariano statistic for the loss differential a - b with the plain
// lag-0 sample variance. Positive values mean `a` scores worse (higher
// loss) than `b`. Degenerate cases: zero-variance differential maps to
// +-inf (flag set) or to 0 when the mean is zero too.
double dm_statistic(const ScoreSeries& a, const ScoreSeries& b,
                    bool* degenerate = nullptr);
double dm_statistic(std::span<const double> a, std::span<const double> b,
                    bool* degenerate = nullptr);

}  // namespace cobase
