#include "cobase/copulas.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cobase/normal.hpp"
#include "ranking.hpp"

namespace cobase {

namespace {
constexpr double kUniformClamp = 1e-12;
constexpr double kFrankThetaMax = 35.0;
constexpr double kTauClamp = 0.999;
constexpr std::size_t kMinFitRows = 5;

double clamp_uniform(double u) {
  return std::clamp(u, kUniformClamp, 1.0 - kUniformClamp);
}

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenRowMajor to_eigen(const Matrix& m) {
  return Eigen::Map<const EigenRowMajor>(m.data().data(),
                                         static_cast<Eigen::Index>(m.rows()),
                                         static_cast<Eigen::Index>(m.cols()));
}

Matrix from_eigen(const EigenRowMajor& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c)
      m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = e(r, c);
  return m;
}
}  // namespace

std::string copula_family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Gaussian: return "Gaussian";
    case CopulaFamily::Clayton: return "Clayton";
    case CopulaFamily::Frank: return "Frank";
    case CopulaFamily::Gumbel: return "Gumbel";
  }
  throw InternalError("copula_family_name: bad enum value");
}

CopulaFamily parse_copula_family(const std::string& name) {
  if (name == "Gaussian") return CopulaFamily::Gaussian;
  if (name == "Clayton") return CopulaFamily::Clayton;
  if (name == "Frank") return CopulaFamily::Frank;
  if (name == "Gumbel") return CopulaFamily::Gumbel;
  throw ConfigError("unknown copula family '" + name + "'");
}

CopulaModel CopulaModel::gaussian(Matrix sigma) {
  CopulaModel m;
  m.family = CopulaFamily::Gaussian;
  m.dim = sigma.rows();
  m.sigma = std::move(sigma);
  m.validate();
  return m;
}

CopulaModel CopulaModel::archimedean(CopulaFamily family, double theta,
                                     std::size_t dim) {
  if (family == CopulaFamily::Gaussian)
    throw ConfigError("CopulaModel::archimedean: Gaussian is not Archimedean");
  CopulaModel m;
  m.family = family;
  m.dim = dim;
  m.theta = theta;
  m.validate();
  return m;
}

void CopulaModel::validate() const {
  if (dim < 1) throw DataError("CopulaModel: dimension must be >= 1");
  switch (family) {
    case CopulaFamily::Gaussian: {
      if (sigma.rows() != dim || sigma.cols() != dim)
        throw DataError("CopulaModel: sigma must be dim x dim");
      for (std::size_t i = 0; i < dim; ++i) {
        if (std::abs(sigma(i, i) - 1.0) > 1e-10)
          throw DataError("CopulaModel: sigma diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j)
          if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-10)
            throw DataError("CopulaModel: sigma must be symmetric");
      }
      Eigen::SelfAdjointEigenSolver<EigenRowMajor> es(to_eigen(sigma));
      if (es.eigenvalues().minCoeff() < 1e-8 - 1e-12)
        throw DataError("CopulaModel: sigma eigenvalues must be >= 1e-8");
      break;
    }
    case CopulaFamily::Clayton:
      if (!(theta > 0.0)) throw DataError("CopulaModel: Clayton needs theta > 0");
      break;
    case CopulaFamily::Gumbel:
      if (!(theta >= 1.0)) throw DataError("CopulaModel: Gumbel needs theta >= 1");
      break;
    case CopulaFamily::Frank:
      if (theta == 0.0 || std::abs(theta) > kFrankThetaMax)
        throw DataError("CopulaModel: Frank needs theta != 0 with |theta| <= 35");
      break;
  }
}

NormalScores pit_to_normal_scores(const Matrix& window_obs, std::uint64_t seed) {
  const std::size_t n = window_obs.rows();
  const std::size_t d = window_obs.cols();
  if (n < 2)
    throw InsufficientDataError("pit_to_normal_scores: need at least 2 rows, got " +
                                std::to_string(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      if (!std::isfinite(window_obs(r, c)))
        throw DataError("pit_to_normal_scores: non-finite entry (missing rows must "
                        "be dropped beforehand)");

  NormalScores out;
  out.scores = Matrix(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    const std::vector<double> col = window_obs.col(c);
    Rng rng(mix_seed(seed, c));
    bool ties = false;
    const std::vector<int> ranks = detail::rank_vector(col, rng, &ties);
    if (ties) out.jittered_columns.push_back(c);
    for (std::size_t r = 0; r < n; ++r)
      out.scores(r, c) = norm_ppf(static_cast<double>(ranks[r]) / (n + 1.0));
  }
  return out;
}

Matrix repair_correlation(Matrix sigma, double eig_floor) {
  const std::size_t d = sigma.rows();
  if (sigma.cols() != d) throw DataError("repair_correlation: matrix must be square");
  EigenRowMajor a = to_eigen(sigma);
  a = 0.5 * (a + a.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<EigenRowMajor> es(a);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(eig_floor);
  EigenRowMajor repaired =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd scale = repaired.diagonal().cwiseSqrt().cwiseInverse();
  repaired = scale.asDiagonal() * repaired * scale.asDiagonal();
  Matrix out = from_eigen(repaired);
  for (std::size_t i = 0; i < d; ++i) {
    out(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double v = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

CopulaModel fit_gaussian_copula(const Matrix& window_obs) {
  const std::size_t n = window_obs.rows();
  const std::size_t d = window_obs.cols();
  if (n < kMinFitRows)
    throw InsufficientDataError("fit_gaussian_copula: need at least 5 rows, got " +
                                std::to_string(n));
  const Matrix scores = pit_to_normal_scores(window_obs).scores;

  Matrix corr(d, d, 0.0);
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < n; ++r) mean[c] += scores(r, c);
    mean[c] /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double t = scores(r, c) - mean[c];
      sd[c] += t * t;
    }
    sd[c] = std::sqrt(sd[c]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    corr(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      double cov = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        cov += (scores(r, i) - mean[i]) * (scores(r, j) - mean[j]);
      const double rho = sd[i] > 0.0 && sd[j] > 0.0 ? cov / (sd[i] * sd[j]) : 0.0;
      corr(i, j) = rho;
      corr(j, i) = rho;
    }
  }

  const double lambda = std::min(0.5, static_cast<double>(d) / static_cast<double>(n));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      corr(i, j) = i == j ? 1.0 : (1.0 - lambda) * corr(i, j);

  return CopulaModel::gaussian(repair_correlation(std::move(corr)));
}

// --- Kendall tau ----------------------------------------------------------

namespace {
// Inversions of y by merge sort; equal keys are not inversions.
std::uint64_t merge_count(std::vector<double>& y, std::vector<double>& buf,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = merge_count(y, buf, lo, mid) + merge_count(y, buf, mid, hi);
  std::size_t a = lo, b = mid, k = lo;
  while (a < mid && b < hi) {
    if (y[b] < y[a]) {
      inv += mid - a;
      buf[k++] = y[b++];
    } else {
      buf[k++] = y[a++];
    }
  }
  while (a < mid) buf[k++] = y[a++];
  while (b < hi) buf[k++] = y[b++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

std::uint64_t tie_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::uint64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= v.size(); ++i) {
    if (i < v.size() && v[i] == v[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}
}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw DataError("kendall_tau: length mismatch");
  if (n < 2) throw DataError("kendall_tau: need at least 2 observations");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

  // joint ties counted within runs of equal x
  std::uint64_t xy_ties = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i + 1;
      while (j < n && x[order[j]] == x[order[i]]) ++j;
      if (j - i > 1) xy_ties += tie_pairs(std::vector<double>(
                         ys.begin() + static_cast<std::ptrdiff_t>(i),
                         ys.begin() + static_cast<std::ptrdiff_t>(j)));
      i = j;
    }
  }
  const std::uint64_t x_ties = tie_pairs(std::vector<double>(x.begin(), x.end()));
  const std::uint64_t y_ties = tie_pairs(std::vector<double>(y.begin(), y.end()));

  std::vector<double> buf(n);
  const std::uint64_t discordant = merge_count(ys, buf, 0, n);

  const double n0 = 0.5 * static_cast<double>(n) * (static_cast<double>(n) - 1.0);
  const double con_minus_dis = n0 - static_cast<double>(x_ties) -
                               static_cast<double>(y_ties) +
                               static_cast<double>(xy_ties) -
                               2.0 * static_cast<double>(discordant);
  const double denom = std::sqrt((n0 - static_cast<double>(x_ties)) *
                                 (n0 - static_cast<double>(y_ties)));
  if (denom == 0.0) return 0.0;
  return con_minus_dis / denom;
}

double mean_pairwise_tau(const Matrix& data) {
  const std::size_t d = data.cols();
  if (d < 2) throw DataError("mean_pairwise_tau: need at least 2 columns");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const std::vector<double> xi = data.col(i);
    for (std::size_t j = i + 1; j < d; ++j) {
      const std::vector<double> xj = data.col(j);
      total += kendall_tau(xi, xj);
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

// --- Debye function and tau inversions ------------------------------------

namespace {
double debye_integrand(double t) {
  if (std::abs(t) < 1e-8) return 1.0 - 0.5 * t;
  return t / std::expm1(t);
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = debye_integrand(lm), frm = debye_integrand(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace

double debye1(double x) {
  if (x < 0.0) throw DataError("debye1: x must be >= 0");
  if (x < 1e-6) return 1.0 - 0.25 * x + x * x / 36.0;
  const double fa = debye_integrand(0.0);
  const double fb = debye_integrand(x);
  const double fm = debye_integrand(0.5 * x);
  const double whole = simpson(0.0, x, fa, fm, fb);
  const double integral =
      adaptive_simpson(0.0, x, fa, fm, fb, whole, 1e-10 * std::max(whole, 1.0), 60);
  return integral / x;
}

double clayton_theta_from_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw DataError("clayton_theta_from_tau: tau must lie in (0,1)");
  return 2.0 * tau / (1.0 - tau);
}

double gumbel_theta_from_tau(double tau) {
  if (!(tau >= 0.0 && tau < 1.0))
    throw DataError("gumbel_theta_from_tau: tau must lie in [0,1)");
  return 1.0 / (1.0 - tau);
}

double frank_tau_from_theta(double theta) {
  if (theta == 0.0) return 0.0;
  if (theta < 0.0) return -frank_tau_from_theta(-theta);
  return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
}

double frank_theta_from_tau(double tau) {
  if (std::abs(tau) < 1e-6) return tau >= 0.0 ? 1e-4 : -1e-4;
  if (tau < 0.0) return -frank_theta_from_tau(-tau);
  if (tau >= frank_tau_from_theta(kFrankThetaMax)) return kFrankThetaMax;
  double lo = 1e-8, hi = kFrankThetaMax;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (frank_tau_from_theta(mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

CopulaModel fit_archimedean(const Matrix& window_obs, CopulaFamily family) {
  if (family == CopulaFamily::Gaussian)
    throw ConfigError("fit_archimedean: use fit_gaussian_copula for the Gaussian family");
  const std::size_t n = window_obs.rows();
  if (n < kMinFitRows)
    throw InsufficientDataError("fit_archimedean: need at least 5 rows, got " +
                                std::to_string(n));
  double tau = mean_pairwise_tau(window_obs);
  bool clamped = false;
  if (tau > kTauClamp) {
    tau = kTauClamp;
    clamped = true;
  }
  if (tau < -kTauClamp) {
    tau = -kTauClamp;
    clamped = true;
  }

  double theta = 0.0;
  switch (family) {
    case CopulaFamily::Clayton:
      if (tau <= 0.0) {
        theta = 1e-4;
        clamped = true;
      } else {
        theta = clayton_theta_from_tau(tau);
      }
      break;
    case CopulaFamily::Gumbel:
      if (tau <= 0.0) {
        theta = 1.0;
        clamped = true;
      } else {
        theta = gumbel_theta_from_tau(tau);
      }
      break;
    case CopulaFamily::Frank:
      theta = frank_theta_from_tau(tau);
      if (std::abs(tau) < 1e-6 || theta == kFrankThetaMax) clamped = true;
      break;
    case CopulaFamily::Gaussian:
      break;
  }

  CopulaModel model = CopulaModel::archimedean(family, theta, window_obs.cols());
  model.clamped = clamped;
  return model;
}

// --- sampling ---------------------------------------------------------------

double positive_stable(Rng& rng, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DataError("positive_stable: alpha must lie in (0,1]");
  if (alpha == 1.0) return 1.0;  // exp(-t^1): point mass at 1
  const double theta = M_PI * rng.uniform01();
  const double w = rng.exponential();
  // Kanter's representation, evaluated in logs to survive small alpha.
  const double log_s = std::log(std::sin(alpha * theta)) -
                       std::log(std::sin(theta)) / alpha +
                       (1.0 - alpha) / alpha *
                           (std::log(std::sin((1.0 - alpha) * theta)) - std::log(w));
  return std::exp(log_s);
}

std::uint64_t log_series(Rng& rng, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DataError("log_series: p must lie in (0,1)");
  const double v = rng.uniform01();
  if (v >= p) return 1;
  const double u = rng.uniform01();
  const double q = -std::expm1(u * std::log1p(-p));  // 1 - (1-p)^u
  if (v < q * q) {
    const double k = std::floor(1.0 + std::log(v) / std::log(q));
    if (!(k >= 1.0)) return 1;
    if (k >= 9.0e18) return static_cast<std::uint64_t>(9.0e18);
    return static_cast<std::uint64_t>(k);
  }
  return v < q ? 2 : 1;
}

namespace {
Matrix sample_gaussian(const CopulaModel& model, int n, Rng& rng) {
  const std::size_t d = model.dim;
  Eigen::LLT<EigenRowMajor> llt(to_eigen(model.sigma));
  if (llt.info() != Eigen::Success)
    throw InternalError("sample_copula: Cholesky failed on a validated matrix");
  const EigenRowMajor lower = llt.matrixL();

  Matrix out(static_cast<std::size_t>(n), d);
  std::vector<double> z(d);
  for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
    for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j)
        s += lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * z[j];
      out(r, i) = clamp_uniform(norm_cdf(s));
    }
  }
  return out;
}

// Marshall-Olkin: U_i = psi(E_i / V) with the family frailty V.
Matrix sample_archimedean(const CopulaModel& model, int n, Rng& rng) {
  const std::size_t d = model.dim;
  const double theta = model.theta;
  Matrix out(static_cast<std::size_t>(n), d);

  if (model.family == CopulaFamily::Frank && theta < 0.0) {
    if (d != 2)
      throw DataError("sample_copula: Frank with theta < 0 requires d = 2");
    const double expm1_t = std::expm1(-theta);
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
      const double u1 = rng.uniform01();
      const double p = rng.uniform01();
      const double a = std::exp(-theta * u1);
      const double b = p * expm1_t / (a * (1.0 - p) + p);
      out(r, 0) = clamp_uniform(u1);
      out(r, 1) = clamp_uniform(-std::log1p(b) / theta);
    }
    return out;
  }

  for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) {
    double frailty = 1.0;
    switch (model.family) {
      case CopulaFamily::Clayton:
        frailty = rng.gamma(1.0 / theta);
        break;
      case CopulaFamily::Gumbel:
        frailty = positive_stable(rng, 1.0 / theta);
        break;
      case CopulaFamily::Frank:
        frailty = static_cast<double>(log_series(rng, -std::expm1(-theta)));
        break;
      case CopulaFamily::Gaussian:
        throw InternalError("sample_archimedean: Gaussian family");
    }
    for (std::size_t c = 0; c < d; ++c) {
      const double t = rng.exponential() / frailty;
      double u = 0.0;
      switch (model.family) {
        case CopulaFamily::Clayton:
          u = std::exp(-std::log1p(t) / theta);
          break;
        case CopulaFamily::Gumbel:
          u = std::exp(-std::pow(t, 1.0 / theta));
          break;
        case CopulaFamily::Frank:
          u = -std::log1p(std::exp(-t) * std::expm1(-theta)) / theta;
          break;
        case CopulaFamily::Gaussian:
          break;
      }
      out(r, c) = clamp_uniform(u);
    }
  }
  return out;
}
}  // namespace

Matrix sample_copula(const CopulaModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw DataError("sample_copula: sample size must be >= 1");
  model.validate();
  Rng rng(seed);
  if (model.family == CopulaFamily::Gaussian) return sample_gaussian(model, n, rng);
  return sample_archimedean(model, n, rng);
}

Matrix gca_transform(const CopulaModel& model,
                     const std::vector<GaussianMargin>& margins, int n,
                     std::uint64_t seed) {
  if (model.family != CopulaFamily::Gaussian)
    throw ConfigError("gca_transform: model must be Gaussian");
  if (margins.size() != model.dim)
    throw DataError("gca_transform: margin count does not match copula dimension");
  Matrix u = sample_copula(model, n, seed);
  for (std::size_t r = 0; r < u.rows(); ++r)
    for (std::size_t c = 0; c < u.cols(); ++c)
      u(r, c) = margins[c].quantile(u(r, c));
  return u;
}

}  // namespace cobase
