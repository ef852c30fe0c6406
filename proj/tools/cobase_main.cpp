// Command line front end: `generate` writes a synthetic archive, `run`
// executes the rolling-window evaluation, `scores` re-aggregates the
// per-date output of an earlier run.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cobase/dataset.hpp"
#include "cobase/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> methods;
  std::optional<int> n;
  std::optional<int> window_days;
  std::optional<double> vs_p;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool wants_config) {
  auto* opt = cmd->add_option("--config", flags.config_path, "config file (key = value)");
  if (wants_config) opt->required();
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "seed override");
  cmd->add_option("--methods", flags.methods, "comma separated method labels");
  cmd->add_option("--n", flags.n, "output sample size N");
  cmd->add_option("--window-days", flags.window_days, "training window length");
  cmd->add_option("--vs-p", flags.vs_p, "variogram score order p");
}

int run_generate(const CommonFlags& flags) {
  cobase::RunConfig cfg = cobase::parse_run_config_file(flags.config_path);
  if (!cfg.synthetic)
    throw cobase::ConfigError("generate: config has no synthetic.* block");
  cobase::SyntheticConfig synth = *cfg.synthetic;
  if (flags.seed) synth.seed = *flags.seed;

  std::vector<cobase::ObservationVector> truth;
  const cobase::Archive archive = cobase::generate_synthetic(synth, &truth);

  std::error_code ec;
  std::filesystem::create_directories(flags.out_dir, ec);
  if (ec) throw cobase::DataError("cannot create output directory '" + flags.out_dir + "'");
  cobase::write_archive(archive, flags.out_dir + "/forecasts.csv",
                        flags.out_dir + "/observations.csv");
  cobase::write_observations_csv(flags.out_dir + "/truth.csv", archive.margins, truth);
  std::printf("wrote %s/{forecasts,observations,truth}.csv: %zu dates, %zu margins, M=%d\n",
              flags.out_dir.c_str(), archive.n_dates(), archive.dim(),
              archive.ensemble_size);
  return 0;
}

int run_run(const CommonFlags& flags) {
  cobase::RunConfig cfg = cobase::parse_run_config_file(flags.config_path);
  if (flags.seed) cfg.base_seed = *flags.seed;
  if (flags.n) cfg.n_samples = *flags.n;
  if (flags.window_days) cfg.window_days = *flags.window_days;
  if (flags.vs_p) cfg.vs_p = *flags.vs_p;
  if (flags.methods) {
    cfg.methods.clear();
    std::string item;
    std::stringstream ss(*flags.methods);
    while (std::getline(ss, item, ','))
      if (!item.empty()) cfg.methods.push_back(cobase::parse_method(item));
  }

  const cobase::ResultTable table = cobase::run_experiment(cfg);
  cobase::emit_outputs(table, flags.out_dir);
  std::printf("wrote %s/{scores,dm,per_date_scores}.csv (+ run_log.txt, manifest.json)\n",
              flags.out_dir.c_str());
  std::printf("note: positive dm_statistic means the method scores worse than the baseline\n");
  return 0;
}

int run_scores(const CommonFlags& flags) {
  const cobase::ResultTable table =
      cobase::table_from_per_date_csv(flags.out_dir + "/per_date_scores.csv");
  cobase::emit_score_tables(table, flags.out_dir);
  std::printf("re-aggregated %s/per_date_scores.csv into scores.csv and dm.csv\n",
              flags.out_dir.c_str());
  std::printf("note: positive dm_statistic means the method scores worse than the baseline\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multivariate ensemble postprocessing: COBASE, shuffling baselines and scores"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, scores_flags;
  CLI::App* gen = app.add_subcommand("generate", "write a synthetic csv archive");
  add_common(gen, gen_flags, /*wants_config=*/true);
  CLI::App* run = app.add_subcommand("run", "run the postprocessing experiment");
  add_common(run, run_flags, /*wants_config=*/true);
  CLI::App* scores = app.add_subcommand("scores", "re-aggregate per-date outputs");
  add_common(scores, scores_flags, /*wants_config=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) return run_generate(gen_flags);
    if (run->parsed()) return run_run(run_flags);
    if (scores->parsed()) return run_scores(scores_flags);
    return kExitConfig;
  } catch (const cobase::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const cobase::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const cobase::InternalError& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
}
