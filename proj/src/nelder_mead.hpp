#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace cobase::detail {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Downhill simplex with the standard coefficients. Stops when the
// best-to-worst objective spread drops below `tol`.
inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& start, double tol, int max_iter,
    double step_scale = 0.05) {
  const std::size_t n = start.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i)
    pts[i + 1][i] += step_scale * (std::abs(start[i]) + 1.0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    if (fv[worst] - fv[best] <= tol) {
      return {pts[best], fv[best], true, iter};
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](const std::vector<double>& from, double coeff) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i)
        p[i] = centroid[i] + coeff * (from[i] - centroid[i]);
      return p;
    };

    const std::vector<double> refl = blend(pts[worst], -alpha);
    const double f_refl = f(refl);
    if (f_refl < fv[best]) {
      const std::vector<double> exp_pt = blend(pts[worst], -alpha * gamma);
      const double f_exp = f(exp_pt);
      if (f_exp < f_refl) {
        pts[worst] = exp_pt;
        fv[worst] = f_exp;
      } else {
        pts[worst] = refl;
        fv[worst] = f_refl;
      }
      continue;
    }
    if (f_refl < fv[second]) {
      pts[worst] = refl;
      fv[worst] = f_refl;
      continue;
    }
    const bool outside = f_refl < fv[worst];
    const std::vector<double> contr = blend(pts[worst], outside ? -alpha * rho : rho);
    const double f_contr = f(contr);
    if (f_contr < (outside ? f_refl : fv[worst])) {
      pts[worst] = contr;
      fv[worst] = f_contr;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {  // shrink toward best
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i)
        pts[k][i] = pts[best][i] + sigma * (pts[k][i] - pts[best][i]);
      fv[k] = f(pts[k]);
    }
  }

  const std::size_t best = static_cast<std::size_t>(
      std::min_element(fv.begin(), fv.end()) - fv.begin());
  return {pts[best], fv[best], false, iter};
}

}  // namespace cobase::detail
