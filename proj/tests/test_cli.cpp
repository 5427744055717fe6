#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "ocda/cli.hpp"
#include "ocda/serialize.hpp"
#include "testutil.hpp"

using namespace ocda;
using namespace ocda::test;

namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

// Small synthetic-pump experiment that runs end to end in seconds.
ExperimentConfig smoke_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  cfg.dataset.kind = "synthetic-pump";
  cfg.dataset.domain_count = 8;
  cfg.dataset.per_class = 10;
  cfg.dataset.seed = 5;
  cfg.split.counts = {5, 2, 1};
  cfg.split.seed = 2;
  cfg.model.kind = "pump-cnn";
  cfg.method.kind = "ocda-maml";
  cfg.method.normal_class = 0;
  cfg.method.hyper.shots = 2;
  cfg.method.hyper.meta_batch_size = 2;
  cfg.method.hyper.max_iterations = 12;
  cfg.method.hyper.eval_interval = 6;
  cfg.method.supports_per_domain = 2;
  cfg.analysis.tasks = 2;
  cfg.seeds = {1};
  cfg.out_dir = out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

TEST_CASE("experiment config round-trips through json") {
  const ExperimentConfig cfg = smoke_config("/tmp/x");
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.hash() == cfg.hash());
  CHECK(back.method.kind == "ocda-maml");
  CHECK(back.dataset.domain_count == 8);

  ExperimentConfig bad = cfg;
  bad.method.normal_class.reset();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.seeds.clear();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{"), ConfigError);
}

TEST_CASE("domain and checkpoint containers round-trip") {
  const DomainPtr d = make_synthetic_domain("ser", 3, 6, {2}, 51);
  const std::string dir = fresh_dir("ocda_ser_test");
  const std::string dom_path = dir + "/x.dom";
  save_domain(dom_path, *d);
  const DomainPtr back = load_domain(dom_path);
  CHECK(back->domain_id == d->domain_id);
  CHECK(back->feature_shape == d->feature_shape);
  REQUIRE(back->size() == d->size());
  for (std::size_t i = 0; i < d->size(); ++i) {
    CHECK(back->examples[i].label == d->examples[i].label);
    CHECK(back->examples[i].features == d->examples[i].features);
  }

  const ModelSpec spec = build_mlp({2}, {4}, 3);
  Checkpoint ckpt;
  ckpt.params = init_params(spec, 3);
  ckpt.adam_m = zeros_like(ckpt.params);
  ckpt.adam_v = zeros_like(ckpt.params);
  ckpt.adam_m.values[0] = 0.25;
  ckpt.arch_hash = architecture_hash(spec);
  ckpt.seed = 3;
  ckpt.iteration = 17;
  ckpt.best_iteration = 12;
  const std::string ckpt_path = dir + "/x.ckpt";
  save_checkpoint(ckpt_path, ckpt);
  const Checkpoint loaded = load_checkpoint(ckpt_path);
  CHECK(loaded.params.values == ckpt.params.values);
  CHECK(loaded.adam_m.values[0] == 0.25);
  CHECK(loaded.arch_hash == ckpt.arch_hash);
  CHECK(loaded.iteration == 17);
  CHECK(loaded.params.layout->fingerprint() == ckpt.params.layout->fingerprint());

  {
    std::ofstream f(dir + "/junk.dom", std::ios::binary);
    f << "NOTMAGIC" << std::string(64, 'x');
  }
  CHECK_THROWS_AS(load_domain(dir + "/junk.dom"), FormatError);
}

TEST_CASE("prepare/train/evaluate/analyze/report run end to end deterministically") {
  const std::string out_a = fresh_dir("ocda_cli_a");
  const std::string out_b = fresh_dir("ocda_cli_b");

  ExperimentConfig cfg_a = smoke_config(out_a);
  cmd_prepare(cfg_a);
  const std::string manifest_a = read_text_file(OutputPaths{out_a}.domain_manifest());
  cmd_prepare(cfg_a);  // idempotent rerun
  CHECK(read_text_file(OutputPaths{out_a}.domain_manifest()) == manifest_a);

  const auto domains = load_prepared_domains(cfg_a);
  CHECK(domains.size() == 8);

  cmd_train(cfg_a);
  CHECK(fs::exists(OutputPaths{out_a}.checkpoint(1)));
  CHECK(fs::exists(OutputPaths{out_a}.history(1)));
  CHECK(fs::exists(OutputPaths{out_a}.run_manifest(1)));

  cmd_evaluate(cfg_a);
  const std::string results_a = read_text_file(OutputPaths{out_a}.eval_dir() + "/results.csv");
  CHECK(results_a.find("domain") == 0);

  cmd_analyze(cfg_a);
  CHECK(fs::exists(OutputPaths{out_a}.analyze_dir() + "/residuals.csv"));
  CHECK(fs::exists(OutputPaths{out_a}.analyze_dir() + "/alignment.csv"));

  cmd_report(cfg_a);
  CHECK(fs::exists(OutputPaths{out_a}.report_path()));

  // Same config and seed into a fresh directory: bitwise-identical results.
  ExperimentConfig cfg_b = smoke_config(out_b);
  cmd_prepare(cfg_b);
  cmd_train(cfg_b);
  cmd_evaluate(cfg_b);
  const std::string results_b = read_text_file(OutputPaths{out_b}.eval_dir() + "/results.csv");
  CHECK(results_a == results_b);

  // Architecture mismatch between checkpoint and configured model.
  ExperimentConfig bad = cfg_a;
  bad.model.kind = "rainbow-cnn";
  CHECK_THROWS_AS(cmd_evaluate(bad), Error);
}

TEST_CASE("standard-learning config travels the same pipeline") {
  const std::string out = fresh_dir("ocda_cli_std");
  ExperimentConfig cfg = smoke_config(out);
  cfg.method.kind = "standard-learning";
  cfg.method.normal_class.reset();
  cfg.method.hyper.max_iterations = 40;
  cfg.method.hyper.eval_interval = 10;
  cfg.method.hyper.batch_size = 16;
  cfg.validate();

  cmd_prepare(cfg);
  cmd_train(cfg);
  CHECK(fs::exists(OutputPaths{out}.checkpoint(1)));
  cmd_evaluate(cfg);
  const std::string results = read_text_file(OutputPaths{out}.eval_dir() + "/results.csv");
  CHECK(results.find("ID") != std::string::npos);
  CHECK(results.find("OOD") != std::string::npos);
}

TEST_CASE("cli binary maps error categories to exit codes") {
  const char* cli = std::getenv("OCDA_CLI");
  if (cli == nullptr) return;  // only run when ctest provides the binary path
  const std::string dir = fresh_dir("ocda_cli_exit");
  write_text_file(dir + "/bad.json", "{\"dataset\":{\"kind\":\"nope\"}}");
  const std::string cmd = std::string(cli) + " prepare --config " + dir +
                          "/bad.json > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 2);

  write_text_file(dir + "/missing.json",
                  "{\"dataset\":{\"kind\":\"csv\",\"paths\":[\"/nonexistent.csv\"]},"
                  "\"split\":{\"train\":1,\"validation\":0,\"test\":0},"
                  "\"model\":{\"kind\":\"pump-cnn\"},"
                  "\"method\":{\"kind\":\"maml\"},\"seeds\":[1],\"out\":\"" +
                      dir + "\"}");
  const std::string cmd2 = std::string(cli) + " prepare --config " + dir +
                           "/missing.json > /dev/null 2>&1";
  const int status2 = std::system(cmd2.c_str());
  CHECK(WEXITSTATUS(status2) == 3);
}
