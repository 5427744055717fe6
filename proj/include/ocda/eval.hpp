#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocda/data.hpp"
#include "ocda/meta.hpp"

namespace ocda {

struct MetricsReport {
  std::map<std::string, double> per_domain;  // domain id -> accuracy in [0,1]
  double aggregate = 0.0;                    // arithmetic mean of per_domain
  std::string protocol;                      // ID | OOD | ID-test | meta-test
};

MetricsReport make_report(std::string protocol, std::map<std::string, double> per_domain);

// Fraction of examples whose argmax class equals the label; argmax ties break
// toward the lowest class index.
double accuracy(const ModelSpec& spec, const ParameterVector& params, const ExampleBatch& data);

struct StandardProtocolResult {
  MetricsReport id;       // source-trained, held-out source test data
  MetricsReport ood;      // source-trained, balanced target-domain datasets
  MetricsReport id_test;  // target-trained, held-out target test data
};

struct StandardProtocolOptions {
  double train_fraction = 0.8;
  double val_fraction = 0.1;   // remainder is test
  std::size_t max_eval_examples = 2000;  // memory cap on pooled eval sets
  bool downsample_first = false;         // pump-style domains
};

// Appendix-style protocol: pooled-and-shuffled plain training three ways
// (ID / OOD / ID-test) with Adam and early stopping on validation loss.
StandardProtocolResult run_standard_learning_protocol(const ModelSpec& spec, const HyperParams& hp,
                                                      const DomainSplit& split,
                                                      const std::vector<DomainPtr>& domains,
                                                      std::uint64_t seed,
                                                      const StandardProtocolOptions& options = {});

struct PlainTrainResult {
  ParameterVector params;  // best-validation checkpoint
  TrainHistory history;
};

// Plain (non-meta) classifier on the pooled, shuffled examples of the given
// domains, holding out val_fraction for early stopping.
PlainTrainResult train_plain_pooled(const ModelSpec& spec, const HyperParams& hp,
                                    const std::vector<DomainPtr>& domains, double val_fraction,
                                    std::uint64_t seed);

// Per target domain: one-class K-shot meta-test task, inner adaptation from
// the shared meta-parameters, accuracy on the balanced query.
MetricsReport meta_test(const ModelSpec& spec, const ParameterVector& params,
                        const std::vector<DomainPtr>& target_domains, int normal_class,
                        int shots, const HyperParams& hp, std::uint64_t seed);

// meta_test averaged over several independently sampled supports per domain.
MetricsReport meta_test_averaged(const ModelSpec& spec, const ParameterVector& params,
                                 const std::vector<DomainPtr>& target_domains, int normal_class,
                                 int shots, const HyperParams& hp, std::uint64_t seed,
                                 int supports_per_domain);

// --- Result tables -----------------------------------------------------------

struct ResultsTable {
  std::string title;
  std::vector<std::string> columns;                 // first column is the row label
  std::vector<std::vector<std::string>> rows;
};

enum class TableFormat { Csv, Text };

// CSV (full precision) or aligned text (percentages, two decimals where the
// cell parses as a number).
std::string emit_results_table(const ResultsTable& table, TableFormat format);

ResultsTable parse_results_csv(const std::string& csv);

}  // namespace ocda
