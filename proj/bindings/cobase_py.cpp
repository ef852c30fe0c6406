// Python bindings for the main operations: scores, margin sampling, EMOS,
// copula fitting/sampling, rank shuffling and the file-level harness.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "cobase/copulas.hpp"
#include "cobase/dataset.hpp"
#include "cobase/emos.hpp"
#include "cobase/experiment.hpp"
#include "cobase/normal.hpp"
#include "cobase/sampling.hpp"
#include "cobase/scoring.hpp"
#include "cobase/shuffling.hpp"

namespace py = pybind11;
using namespace cobase;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw DataError("expected a 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> numpy_from_matrix(const Matrix& m) {
  py::array_t<double> a({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

py::array_t<int> numpy_from_int_matrix(const IntMatrix& m) {
  py::array_t<int> a({m.rows(), m.cols()});
  auto buf = a.mutable_unchecked<2>();
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      buf(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(c)) = m(r, c);
  return a;
}

std::vector<double> vector_from_numpy(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw DataError("expected a 1-d array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

std::vector<GaussianMargin> margins_from_pairs(
    const std::vector<std::pair<double, double>>& pairs) {
  std::vector<GaussianMargin> margins;
  margins.reserve(pairs.size());
  for (const auto& [mu, sigma] : pairs) margins.push_back({mu, sigma});
  return margins;
}

SyntheticConfig synthetic_from_kwargs(int n_stations, int n_variables, int n_days,
                                      int ensemble_size, std::uint64_t seed,
                                      double bias, double spread_deficit,
                                      double cross_correlation,
                                      double seasonal_amplitude) {
  SyntheticConfig cfg;
  cfg.n_stations = n_stations;
  cfg.n_variables = n_variables;
  cfg.n_days = n_days;
  cfg.ensemble_size = ensemble_size;
  cfg.seed = seed;
  cfg.bias = bias;
  cfg.spread_deficit = spread_deficit;
  cfg.cross_correlation = cross_correlation;
  cfg.seasonal_amplitude = seasonal_amplitude;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(cobase, m) {
  m.doc() = "Multivariate ensemble postprocessing: COBASE, shuffling baselines "
            "and proper scores";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

  // normal helpers
  m.def("norm_cdf", py::vectorize(&norm_cdf));
  m.def("norm_pdf", py::vectorize(&norm_pdf));
  m.def("norm_ppf", py::vectorize(&norm_ppf));

  // scores
  m.def(
      "crps_ensemble",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& members,
         double y) { return crps_ensemble(vector_from_numpy(members), y); },
      py::arg("members"), py::arg("y"));
  m.def(
      "gaussian_crps",
      [](double mu, double sigma, double y) { return gaussian_crps({mu, sigma}, y); },
      py::arg("mu"), py::arg("sigma"), py::arg("y"));
  m.def(
      "energy_score",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& members,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y) {
        return energy_score(matrix_from_numpy(members), vector_from_numpy(y));
      },
      py::arg("members"), py::arg("y"),
      "members: (M, d) array of ensemble vectors");
  m.def(
      "variogram_score",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& members,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y,
         double p, const py::object& weights) {
        Matrix w;
        if (!weights.is_none())
          w = matrix_from_numpy(weights.cast<
              py::array_t<double, py::array::c_style | py::array::forcecast>>());
        return variogram_score(matrix_from_numpy(members), vector_from_numpy(y), p, w);
      },
      py::arg("members"), py::arg("y"), py::arg("p") = 1.0,
      py::arg("weights") = py::none());
  m.def(
      "dm_statistic",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
        const std::vector<double> va = vector_from_numpy(a);
        const std::vector<double> vb = vector_from_numpy(b);
        return dm_statistic(std::span<const double>(va), std::span<const double>(vb));
      },
      py::arg("a"), py::arg("b"),
      "Positive values mean series `a` scores worse than baseline `b`");

  // margin sampling
  m.def(
      "uniform_quantiles",
      [](double mu, double sigma, int n) {
        return uniform_quantiles({mu, sigma}, n).values;
      },
      py::arg("mu"), py::arg("sigma"), py::arg("n"));
  m.def(
      "random_sample",
      [](double mu, double sigma, int n, std::uint64_t seed) {
        return random_sample({mu, sigma}, n, seed).values;
      },
      py::arg("mu"), py::arg("sigma"), py::arg("n"), py::arg("seed"));

  // EMOS
  py::class_<EmosCoefficients>(m, "EmosCoefficients")
      .def_readonly("alpha0", &EmosCoefficients::alpha0)
      .def_readonly("alpha1", &EmosCoefficients::alpha1)
      .def_readonly("beta0", &EmosCoefficients::beta0)
      .def_readonly("beta1", &EmosCoefficients::beta1)
      .def_readonly("converged", &EmosCoefficients::converged)
      .def("__repr__", [](const EmosCoefficients& c) {
        return "EmosCoefficients(alpha0=" + std::to_string(c.alpha0) +
               ", alpha1=" + std::to_string(c.alpha1) +
               ", beta0=" + std::to_string(c.beta0) +
               ", beta1=" + std::to_string(c.beta1) + ")";
      });
  m.def(
      "fit_emos",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& ens_mean,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& ens_var,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& obs) {
        const auto ms = vector_from_numpy(ens_mean);
        const auto vs = vector_from_numpy(ens_var);
        const auto ys = vector_from_numpy(obs);
        if (ms.size() != vs.size() || ms.size() != ys.size())
          throw DataError("fit_emos: input lengths differ");
        std::vector<EmosTrainingPair> window(ms.size());
        for (std::size_t i = 0; i < ms.size(); ++i) window[i] = {ms[i], vs[i], ys[i]};
        return fit_emos(window);
      },
      py::arg("ens_mean"), py::arg("ens_var"), py::arg("obs"));
  m.def(
      "predict_margin",
      [](const EmosCoefficients& c, double ens_mean, double ens_var) {
        const GaussianMargin g = predict_margin(c, ens_mean, ens_var);
        return std::make_pair(g.mu, g.sigma);
      },
      py::arg("coeffs"), py::arg("ens_mean"), py::arg("ens_var"),
      "Returns the predictive (mu, sigma)");

  // copulas
  py::class_<CopulaModel>(m, "CopulaModel")
      .def_property_readonly("family",
                             [](const CopulaModel& c) {
                               return copula_family_name(c.family);
                             })
      .def_readonly("dim", &CopulaModel::dim)
      .def_readonly("theta", &CopulaModel::theta)
      .def_readonly("clamped", &CopulaModel::clamped)
      .def_property_readonly(
          "sigma", [](const CopulaModel& c) { return numpy_from_matrix(c.sigma); })
      .def_static(
          "gaussian",
          [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s) {
            return CopulaModel::gaussian(matrix_from_numpy(s));
          },
          py::arg("sigma"))
      .def_static(
          "archimedean",
          [](const std::string& family, double theta, std::size_t dim) {
            return CopulaModel::archimedean(parse_copula_family(family), theta, dim);
          },
          py::arg("family"), py::arg("theta"), py::arg("dim"));

  m.def(
      "pit_to_normal_scores",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& obs,
         std::uint64_t seed) {
        const NormalScores ns = pit_to_normal_scores(matrix_from_numpy(obs), seed);
        return std::make_pair(numpy_from_matrix(ns.scores), ns.jittered_columns);
      },
      py::arg("window_obs"), py::arg("seed") = 0,
      "Returns (scores, jittered_columns)");
  m.def(
      "fit_gaussian_copula",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& obs) {
        return fit_gaussian_copula(matrix_from_numpy(obs));
      },
      py::arg("window_obs"));
  m.def(
      "fit_archimedean",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& obs,
         const std::string& family) {
        return fit_archimedean(matrix_from_numpy(obs), parse_copula_family(family));
      },
      py::arg("window_obs"), py::arg("family"));
  m.def(
      "sample_copula",
      [](const CopulaModel& model, int n, std::uint64_t seed) {
        return numpy_from_matrix(sample_copula(model, n, seed));
      },
      py::arg("model"), py::arg("n"), py::arg("seed"));
  m.def(
      "gca_transform",
      [](const CopulaModel& model, const std::vector<std::pair<double, double>>& margins,
         int n, std::uint64_t seed) {
        return numpy_from_matrix(gca_transform(model, margins_from_pairs(margins), n, seed));
      },
      py::arg("model"), py::arg("margins"), py::arg("n"), py::arg("seed"),
      "margins: list of (mu, sigma) pairs");
  m.def(
      "kendall_tau",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& y) {
        const std::vector<double> vx = vector_from_numpy(x);
        const std::vector<double> vy = vector_from_numpy(y);
        return kendall_tau(vx, vy);
      },
      py::arg("x"), py::arg("y"));
  m.def("debye1", &debye1, py::arg("x"));
  m.def("frank_theta_from_tau", &frank_theta_from_tau, py::arg("tau"));
  m.def("frank_tau_from_theta", &frank_tau_from_theta, py::arg("theta"));

  // rank shuffling
  m.def(
      "ranks_of",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& data,
         std::uint64_t seed) { return numpy_from_int_matrix(ranks_of(matrix_from_numpy(data), seed)); },
      py::arg("data"), py::arg("seed"),
      "Per-row ranks (1 = smallest) of a (d, N) matrix");
  m.def(
      "shuffle_to_ranks",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& ranks) {
        const Matrix s = matrix_from_numpy(samples);
        const Matrix r = matrix_from_numpy(ranks);
        RankMatrix ref;
        ref.ranks = IntMatrix(r.rows(), r.cols());
        for (std::size_t i = 0; i < r.rows(); ++i)
          for (std::size_t j = 0; j < r.cols(); ++j)
            ref.ranks(i, j) = static_cast<int>(r(i, j));
        ref.validate();
        std::vector<MarginSample> margin_samples(s.rows());
        for (std::size_t i = 0; i < s.rows(); ++i) margin_samples[i].values = s.row(i);
        return numpy_from_matrix(shuffle_to_ranks(margin_samples, ref));
      },
      py::arg("samples"), py::arg("ranks"),
      "Reorder each row of `samples` to match the rank pattern in `ranks`");

  // file-level harness
  m.def(
      "write_synthetic",
      [](const std::string& out_dir, int n_stations, int n_variables, int n_days,
         int ensemble_size, std::uint64_t seed, double bias, double spread_deficit,
         double cross_correlation, double seasonal_amplitude) {
        const SyntheticConfig cfg = synthetic_from_kwargs(
            n_stations, n_variables, n_days, ensemble_size, seed, bias,
            spread_deficit, cross_correlation, seasonal_amplitude);
        std::vector<ObservationVector> truth;
        const Archive archive = generate_synthetic(cfg, &truth);
        std::filesystem::create_directories(out_dir);
        write_archive(archive, out_dir + "/forecasts.csv",
                      out_dir + "/observations.csv");
        write_observations_csv(out_dir + "/truth.csv", archive.margins, truth);
      },
      py::arg("out_dir"), py::arg("n_stations") = 3, py::arg("n_variables") = 1,
      py::arg("n_days") = 365, py::arg("ensemble_size") = 17, py::arg("seed") = 0,
      py::arg("bias") = 0.0, py::arg("spread_deficit") = 1.0,
      py::arg("cross_correlation") = 0.0, py::arg("seasonal_amplitude") = 0.0);
  m.def(
      "run_experiment",
      [](const std::string& forecasts, const std::string& observations,
         const std::string& out_dir, const std::vector<std::string>& methods, int n,
         int window_days, double vs_p, std::uint64_t seed) {
        RunConfig cfg;
        cfg.forecasts_path = forecasts;
        cfg.observations_path = observations;
        for (const std::string& label : methods) cfg.methods.push_back(parse_method(label));
        cfg.n_samples = n;
        cfg.window_days = window_days;
        cfg.vs_p = vs_p;
        cfg.base_seed = seed;
        const ResultTable table = run_experiment(cfg);
        emit_outputs(table, out_dir);
        // mean scores per (group, method) for quick inspection
        py::dict summary;
        for (const GroupResults& g : table.groups) {
          py::dict per_method;
          for (const MethodSeries& ms : g.methods) {
            if (ms.scored.empty()) continue;
            py::dict entry;
            entry["crps"] = mean_crps(ms);
            entry["es"] = mean_es(ms);
            entry["vs"] = mean_vs(ms);
            entry["n_dates"] = ms.scored.size();
            per_method[py::str(method_label(ms.method))] = entry;
          }
          summary[py::str(g.name)] = per_method;
        }
        return summary;
      },
      py::arg("forecasts"), py::arg("observations"), py::arg("out_dir"),
      py::arg("methods"), py::arg("n") = 0, py::arg("window_days") = 30,
      py::arg("vs_p") = 1.0, py::arg("seed") = 0,
      "Runs the rolling-window evaluation, writes the csv outputs and returns "
      "a {group: {method: {crps, es, vs, n_dates}}} summary");

  m.def("method_labels", [] {
    std::vector<std::string> labels;
    for (const Method method : all_methods()) labels.push_back(method_label(method));
    return labels;
  });
}
