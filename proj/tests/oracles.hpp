// Independent oracles used by the unit and acceptance tests. Everything in
// here deliberately avoids the library's own code paths: the CDF comes
// straight from erfc, quantiles from bisection, integrals from fixed-grid
// Simpson, tau from the O(n^2) definition.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bisection inverse of the standard normal CDF.
inline double phi_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("phi_inverse: bad p");
  double lo = -42.0, hi = 42.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi_cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// CRPS of a Gaussian forecast by quadrature of the Brier-integral form
//   integral (F(x) - 1{x >= y})^2 dx
// split at the kink and integrated by fixed-grid Simpson.
inline double gaussian_crps_quadrature(double mu, double sigma, double y) {
  const auto integrand = [&](double x) {
    const double f = phi_cdf((x - mu) / sigma);
    const double h = x >= y ? 1.0 : 0.0;
    return (f - h) * (f - h);
  };
  const double lo = std::min(mu - 14.0 * sigma, y - 14.0 * sigma);
  const double hi = std::max(mu + 14.0 * sigma, y + 14.0 * sigma);
  const auto simpson = [&](double a, double b, std::size_t intervals) {
    if (b <= a) return 0.0;
    const double h = (b - a) / static_cast<double>(intervals * 2);
    double total = integrand(a) + integrand(b);
    for (std::size_t i = 1; i < intervals * 2; ++i)
      total += integrand(a + h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    return total * h / 3.0;
  };
  return simpson(lo, y, 200000) + simpson(y, hi, 200000);
}

// Direct double-sum ensemble CRPS.
inline double crps_naive(std::span<const double> members, double y) {
  const std::size_t m = members.size();
  double mad = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mad += std::abs(members[i] - y);
    for (std::size_t j = 0; j < m; ++j) spread += std::abs(members[i] - members[j]);
  }
  const double dm = static_cast<double>(m);
  return mad / dm - spread / (2.0 * dm * dm);
}

// O(n^2) Kendall tau-b.
inline double kendall_naive(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0)
        ties_x += 1.0;
      else if (dy == 0.0)
        ties_y += 1.0;
      else if (dx * dy > 0.0)
        concordant += 1.0;
      else
        discordant += 1.0;
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_x) *
                                 (concordant + discordant + ties_y));
  return denom == 0.0 ? 0.0 : (concordant - discordant) / denom;
}

// Ordinary least squares of y on x: (intercept, slope).
inline std::pair<double, double> ols(std::span<const double> x,
                                     std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

// Fixed-grid Simpson integral of t/(e^t - 1) over [0, x], 2e6 intervals.
inline double debye1_fixed_grid(double x) {
  const auto f = [](double t) {
    return std::abs(t) < 1e-12 ? 1.0 : t / std::expm1(t);
  };
  const std::size_t steps = 2000000;
  const double h = x / static_cast<double>(steps * 2);
  double total = f(0.0) + f(x);
  for (std::size_t i = 1; i < steps * 2; ++i)
    total += f(h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
  return total * h / 3.0 / x;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_sd(std::span<const double> x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Kolmogorov-Smirnov statistic against U(0,1).
inline double ks_uniform(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const std::size_t n = u.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - u[i]));
    d = std::max(d, std::abs(u[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace oracle
