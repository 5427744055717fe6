#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocda/data.hpp"
#include "ocda/meta.hpp"

namespace ocda {

struct DatasetBlock {
  std::string kind;  // rainbow | synthetic-pump | csv
  // rainbow: IDX paths; when empty the procedural digit corpus is rendered.
  std::string images_path;
  std::string labels_path;
  int synth_count = 60000;
  // synthetic-pump:
  int domain_count = 32;
  int per_class = 60;
  SpectrumConfig spectrum = default_pump_config();
  // csv:
  std::vector<std::string> csv_paths;
  CsvSchema schema;
  std::uint64_t seed = 0;
};

struct SplitBlock {
  bool explicit_assignment = false;
  SplitCounts counts;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;
};

struct ModelBlock {
  std::string kind;  // rainbow-cnn | pump-cnn | custom
  std::string custom_path;
};

struct MethodBlock {
  std::string kind;  // maml | ocda-maml | standard-learning
  HyperParams hyper;
  std::optional<int> normal_class;
  int supports_per_domain = 1;  // meta-test supports averaged per target domain
};

struct AnalysisBlock {
  std::vector<double> alphas = {0.02, 0.01, 0.005};
  int tasks = 5;
};

struct ExperimentConfig {
  DatasetBlock dataset;
  SplitBlock split;
  ModelBlock model;
  MethodBlock method;
  AnalysisBlock analysis;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;

  void validate() const;  // throws ConfigError
  std::string to_json() const;
  std::uint64_t hash() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
};

// Builds the model named by the block (custom specs load from disk).
ModelSpec build_model(const ModelBlock& block, int class_count);

}  // namespace ocda
