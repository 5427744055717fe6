#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "ocda/cli.hpp"
#include "ocda/meta.hpp"

namespace {

int error_exit_code(const ocda::Error& e) {
  switch (e.category()) {
    case ocda::Error::Category::Config: return 2;
    case ocda::Error::Category::Data: return 3;
    case ocda::Error::Category::Numeric: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-class domain adaptation meta-learning experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global flags after the subcommand name

  std::string config_path;
  std::string out_override;
  std::vector<std::uint64_t> seeds_override;
  int threads = 1;
  app.add_option("--config", config_path, "experiment config (json)")->required();
  app.add_option("--out", out_override, "override the output directory");
  app.add_option("--seeds", seeds_override, "override the seed list");
  app.add_option("--threads", threads, "parallelism degree for meta-batch gradients");

  auto* prepare = app.add_subcommand("prepare", "materialize domains to disk");
  auto* train = app.add_subcommand("train", "train one checkpoint per seed");
  auto* evaluate = app.add_subcommand("evaluate", "meta-test or distribution-shift metrics");
  auto* analyze = app.add_subcommand("analyze", "meta-gradient expansion and alignment reports");
  auto* report = app.add_subcommand("report", "render result tables");

  CLI11_PARSE(app, argc, argv);

  try {
    ocda::set_parallelism(threads);
    ocda::ExperimentConfig config = ocda::ExperimentConfig::from_file(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (!seeds_override.empty()) config.seeds = seeds_override;
    config.validate();

    if (prepare->parsed()) {
      ocda::cmd_prepare(config);
    } else if (train->parsed()) {
      ocda::cmd_train(config);
    } else if (evaluate->parsed()) {
      ocda::cmd_evaluate(config);
    } else if (analyze->parsed()) {
      ocda::cmd_analyze(config);
    } else if (report->parsed()) {
      ocda::cmd_report(config);
    }
  } catch (const ocda::Error& e) {
    const int code = error_exit_code(e);
    std::fprintf(stderr, "error code=%d what=\"%s\"\n", code, e.what());
    return code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error code=1 what=\"%s\"\n", e.what());
    return 1;
  }
  return 0;
}
