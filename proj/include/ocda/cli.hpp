#pragma once

#include <string>

#include "ocda/config.hpp"

namespace ocda {

// Output layout under config.out_dir. Everything a run produces lands here.
struct OutputPaths {
  std::string root;

  std::string domains_dir() const { return root + "/domains"; }
  std::string domain_manifest() const { return domains_dir() + "/manifest.json"; }
  std::string seed_dir(std::uint64_t seed) const {
    return root + "/train/seed" + std::to_string(seed);
  }
  std::string checkpoint(std::uint64_t seed) const { return seed_dir(seed) + "/checkpoint.ckpt"; }
  std::string history(std::uint64_t seed) const { return seed_dir(seed) + "/history.csv"; }
  std::string run_manifest(std::uint64_t seed) const { return seed_dir(seed) + "/manifest.json"; }
  std::string eval_dir() const { return root + "/evaluate"; }
  std::string analyze_dir() const { return root + "/analyze"; }
  std::string report_path() const { return root + "/report.txt"; }
};

void cmd_prepare(const ExperimentConfig& config);
void cmd_train(const ExperimentConfig& config);
void cmd_evaluate(const ExperimentConfig& config);
void cmd_analyze(const ExperimentConfig& config);
void cmd_report(const ExperimentConfig& config);

// Loads the prepared domains (sorted by id) and resolves the configured split.
std::vector<DomainPtr> load_prepared_domains(const ExperimentConfig& config);
DomainSplit resolve_split(const ExperimentConfig& config, const std::vector<DomainPtr>& domains);

}  // namespace ocda
