#include "ocda/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "ocda/analysis.hpp"
#include "ocda/eval.hpp"
#include "ocda/serialize.hpp"

namespace ocda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int dataset_class_count(const std::vector<DomainPtr>& domains) {
  if (domains.empty()) throw ConfigError("no prepared domains found");
  return domains.front()->num_classes();
}

Strategy method_strategy(const MethodBlock& m) {
  return m.kind == "ocda-maml" ? Strategy::Ocda : Strategy::Standard;
}

json hyper_manifest(const HyperParams& hp) {
  return {{"inner_lr", hp.inner_lr},
          {"outer_lr", hp.outer_lr},
          {"inner_steps", hp.inner_steps},
          {"shots", hp.shots},
          {"meta_batch_size", hp.meta_batch_size},
          {"max_iterations", hp.max_iterations},
          {"weight_decay", hp.weight_decay},
          {"decoupled_decay", hp.decoupled_decay},
          {"adam_beta1", hp.adam_beta1},
          {"adam_beta2", hp.adam_beta2},
          {"adam_eps", hp.adam_eps},
          {"early_stop_patience", hp.early_stop_patience},
          {"eval_interval", hp.eval_interval},
          {"batch_size", hp.batch_size}};
}

}  // namespace

std::vector<DomainPtr> load_prepared_domains(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  json manifest;
  try {
    manifest = json::parse(read_text_file(paths.domain_manifest()));
  } catch (const json::exception& e) {
    throw ConfigError("domain manifest: " + std::string(e.what()));
  }
  std::vector<DomainPtr> domains;
  for (const auto& entry : manifest.at("domains")) {
    domains.push_back(load_domain(paths.domains_dir() + "/" +
                                  entry.at("file").get<std::string>()));
  }
  std::sort(domains.begin(), domains.end(),
            [](const DomainPtr& a, const DomainPtr& b) { return a->domain_id < b->domain_id; });
  return domains;
}

DomainSplit resolve_split(const ExperimentConfig& config, const std::vector<DomainPtr>& domains) {
  if (config.split.explicit_assignment) {
    return split_domains_explicit(domains, config.split.train, config.split.validation,
                                  config.split.test);
  }
  return split_domains(domains, config.split.counts, config.split.seed);
}

void cmd_prepare(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  fs::create_directories(paths.domains_dir());

  std::vector<DomainPtr> domains;
  json transform;
  if (config.dataset.kind == "rainbow") {
    std::string images = config.dataset.images_path;
    std::string labels = config.dataset.labels_path;
    if (images.empty()) {
      // No IDX corpus supplied: render the procedural digit corpus to IDX
      // files first so the ingestion path is identical either way.
      images = paths.domains_dir() + "/digits-images-idx3-ubyte";
      labels = paths.domains_dir() + "/digits-labels-idx1-ubyte";
      render_digit_corpus(images, labels, config.dataset.synth_count, config.dataset.seed);
      transform["source"] = "procedural-digit-corpus";
      transform["synth_count"] = config.dataset.synth_count;
    } else {
      transform["source"] = "idx";
    }
    const auto examples = load_idx(images, labels);
    domains = build_rainbow_domains(examples, config.dataset.seed);
    transform["colorize_threshold"] = 0.1;
    transform["order"] = "scale,rotate,colorize";
    transform["half_scale"] = "factor-2 bilinear, centered";
    transform["colors"] = {"red", "orange", "yellow", "green", "blue", "indigo", "violet"};
  } else if (config.dataset.kind == "synthetic-pump") {
    domains = generate_pump_domains(config.dataset.spectrum, config.dataset.domain_count,
                                    config.dataset.per_class, config.dataset.seed);
    transform["generator"] = "smooth-envelope-and-class-effects";
    transform["bins"] = config.dataset.spectrum.bins;
    transform["noise_scale"] = config.dataset.spectrum.noise_scale;
  } else {
    for (const auto& path : config.dataset.csv_paths) {
      domains.push_back(
          std::make_shared<DomainDataset>(load_csv_spectra(path, config.dataset.schema)));
    }
    transform["source"] = "csv";
  }

  json manifest;
  manifest["config_hash"] = hash_hex(config.hash());
  manifest["dataset_kind"] = config.dataset.kind;
  manifest["seed"] = config.dataset.seed;
  manifest["transform"] = transform;
  manifest["domains"] = json::array();
  for (const auto& d : domains) {
    const std::string file = d->domain_id + ".dom";
    save_domain(paths.domains_dir() + "/" + file, *d);
    json entry;
    entry["id"] = d->domain_id;
    entry["file"] = file;
    entry["descriptor"] = json::parse(descriptor_to_json(d->descriptor));
    entry["examples"] = d->size();
    json counts;
    for (const auto& [label, count] : d->class_counts) counts[std::to_string(label)] = count;
    entry["class_counts"] = counts;
    manifest["domains"].push_back(entry);
  }
  const std::string text = manifest.dump(2);
  write_text_file(paths.domain_manifest(), text);
  std::cout << "prepared " << domains.size() << " domains -> " << paths.domains_dir()
            << "\nmanifest_hash=" << hash_hex(fnv1a64(text)) << "\n";
}

void cmd_train(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  const auto domains = load_prepared_domains(config);
  const DomainSplit split = resolve_split(config, domains);
  const ModelSpec spec = build_model(config.model, dataset_class_count(domains));
  const auto train_domains = select_domains(domains, split.train);
  const auto val_domains = select_domains(domains, split.validation);

  for (const std::uint64_t seed : config.seeds) {
    fs::create_directories(paths.seed_dir(seed));
    TrainHistory history;
    Checkpoint ckpt;
    std::int64_t iterations_run = 0;
    std::int64_t best_iteration = 0;

    if (config.method.kind == "standard-learning") {
      std::vector<DomainPtr> source = train_domains;
      source.insert(source.end(), val_domains.begin(), val_domains.end());
      PlainTrainResult result = train_plain_pooled(spec, config.method.hyper, source, 0.1, seed);
      history = std::move(result.history);
      ckpt.params = std::move(result.params);
      ckpt.adam_m = zeros_like(ckpt.params);
      ckpt.adam_v = zeros_like(ckpt.params);
      iterations_run = config.method.hyper.max_iterations;
    } else {
      const Strategy strategy = method_strategy(config.method);
      TrainResult result =
          train(spec, config.method.hyper, train_domains, val_domains, strategy,
                config.method.normal_class, seed, [&](const EvalRecord& r) {
                  std::cout << "seed " << seed << " iter " << r.iteration << " train_loss "
                            << r.train_loss << " val_loss " << r.val_loss << " val_acc "
                            << r.val_accuracy << "\n";
                });
      history = std::move(result.history);
      ckpt.params = std::move(result.params);
      ckpt.adam_m = std::move(result.adam_m);
      ckpt.adam_v = std::move(result.adam_v);
      iterations_run = result.iterations_run;
      best_iteration = result.best_iteration;
    }

    ckpt.arch_hash = architecture_hash(spec);
    ckpt.config_hash = config.hash();
    ckpt.seed = seed;
    ckpt.iteration = iterations_run;
    ckpt.best_iteration = best_iteration;
    save_checkpoint(paths.checkpoint(seed), ckpt);
    write_text_file(paths.history(seed), history.to_csv());

    json manifest;
    manifest["config_hash"] = hash_hex(config.hash());
    manifest["seed"] = seed;
    manifest["method"] = config.method.kind;
    manifest["strategy"] = config.method.kind == "standard-learning"
                               ? "plain"
                               : to_string(method_strategy(config.method));
    if (config.method.normal_class) manifest["normal_class"] = *config.method.normal_class;
    manifest["architecture_hash"] = hash_hex(architecture_hash(spec));
    manifest["hyperparams"] = hyper_manifest(config.method.hyper);
    manifest["iterations_run"] = iterations_run;
    manifest["best_iteration"] = best_iteration;
    manifest["checkpoint_policy"] = "best-validation";
    manifest["train_domains"] = split.train;
    manifest["validation_domains"] = split.validation;
    write_text_file(paths.run_manifest(seed), manifest.dump(2));
    std::cout << "seed " << seed << " done: " << paths.checkpoint(seed) << "\n";
  }
}

void cmd_evaluate(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  const auto domains = load_prepared_domains(config);
  const DomainSplit split = resolve_split(config, domains);
  if (split.test.empty()) throw ConfigError("evaluation needs at least one target domain");
  const ModelSpec spec = build_model(config.model, dataset_class_count(domains));
  fs::create_directories(paths.eval_dir());

  json summary;
  summary["config_hash"] = hash_hex(config.hash());
  summary["method"] = config.method.kind;
  summary["target_domains"] = split.test;

  if (config.method.kind == "standard-learning") {
    ResultsTable table;
    table.title = "Standard learning distribution-shift metrics";
    table.columns = {"metric", "train_dataset", "test_dataset"};
    for (const std::uint64_t seed : config.seeds) {
      table.columns.push_back("seed" + std::to_string(seed));
    }
    table.columns.push_back("mean");
    std::map<std::string, std::vector<double>> rows{
        {"ID", {}}, {"OOD", {}}, {"ID-test", {}}};
    const bool downsample = config.dataset.kind != "rainbow";
    for (const std::uint64_t seed : config.seeds) {
      StandardProtocolOptions options;
      options.downsample_first = downsample;
      const StandardProtocolResult r = run_standard_learning_protocol(
          spec, config.method.hyper, split, domains, seed, options);
      rows["ID"].push_back(r.id.aggregate);
      rows["OOD"].push_back(r.ood.aggregate);
      rows["ID-test"].push_back(r.id_test.aggregate);
    }
    const char* sources[3][2] = {{"source", "source"}, {"source", "target"},
                                 {"target", "target"}};
    const char* names[3] = {"ID", "OOD", "ID-test"};
    for (int i = 0; i < 3; ++i) {
      std::vector<std::string> row = {names[i], sources[i][0], sources[i][1]};
      double mean = 0.0;
      for (double v : rows[names[i]]) {
        row.push_back(format_g(v));
        mean += v;
      }
      mean /= static_cast<double>(rows[names[i]].size());
      row.push_back(format_g(mean));
      table.rows.push_back(row);
      summary["mean"][names[i]] = mean;
    }
    write_text_file(paths.eval_dir() + "/results.csv",
                    emit_results_table(table, TableFormat::Csv));
    const std::string text = emit_results_table(table, TableFormat::Text);
    write_text_file(paths.eval_dir() + "/results.txt", text);
    std::cout << text;
  } else {
    if (!config.method.normal_class) {
      throw ConfigError("one-class meta-testing needs method.normal_class");
    }
    const auto targets = select_domains(domains, split.test);
    ResultsTable table;
    table.title = "One-class meta-test accuracy (" + config.method.kind + ")";
    table.columns = {"domain"};
    for (const std::uint64_t seed : config.seeds) {
      table.columns.push_back("seed" + std::to_string(seed));
    }
    table.columns.push_back("mean");
    std::map<std::string, std::vector<double>> per_domain;
    std::vector<double> seed_means;
    summary["run_manifests"] = json::array();
    for (const std::uint64_t seed : config.seeds) {
      const Checkpoint ckpt = load_checkpoint(paths.checkpoint(seed));
      if (ckpt.arch_hash != architecture_hash(spec)) {
        throw ConfigError("checkpoint architecture hash disagrees with the configured model");
      }
      const MetricsReport report = meta_test_averaged(
          spec, ckpt.params, targets, *config.method.normal_class, config.method.hyper.shots,
          config.method.hyper, seed, config.method.supports_per_domain);
      for (const auto& [id, acc] : report.per_domain) per_domain[id].push_back(acc);
      seed_means.push_back(report.aggregate);
      summary["run_manifests"].push_back(paths.run_manifest(seed));
    }
    for (const auto& [id, accs] : per_domain) {
      std::vector<std::string> row = {id};
      double mean = 0.0;
      for (double v : accs) {
        row.push_back(format_g(v));
        mean += v;
      }
      row.push_back(format_g(mean / accs.size()));
      table.rows.push_back(row);
    }
    std::vector<std::string> avg_row = {"average"};
    double total = 0.0;
    for (double v : seed_means) {
      avg_row.push_back(format_g(v));
      total += v;
    }
    avg_row.push_back(format_g(total / seed_means.size()));
    table.rows.push_back(avg_row);
    summary["mean_over_seeds"] = total / seed_means.size();
    write_text_file(paths.eval_dir() + "/results.csv",
                    emit_results_table(table, TableFormat::Csv));
    const std::string text = emit_results_table(table, TableFormat::Text);
    write_text_file(paths.eval_dir() + "/results.txt", text);
    std::cout << text;
  }
  write_text_file(paths.eval_dir() + "/summary.json", summary.dump(2));
}

void cmd_analyze(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  const auto domains = load_prepared_domains(config);
  const DomainSplit split = resolve_split(config, domains);
  const ModelSpec spec = build_model(config.model, dataset_class_count(domains));
  const std::uint64_t seed = config.seeds.front();
  const Checkpoint ckpt = load_checkpoint(paths.checkpoint(seed));
  if (ckpt.arch_hash != architecture_hash(spec)) {
    throw ConfigError("checkpoint architecture hash disagrees with the configured model");
  }
  fs::create_directories(paths.analyze_dir());

  const auto val_domains = select_domains(
      domains, split.validation.empty() ? split.train : split.validation);
  Rng rng = Rng::stream(seed, "analyze.tasks");
  const Strategy strategy = method_strategy(config.method);

  std::ostringstream residual_csv;
  residual_csv << "task,alpha,residual_norm,ratio\n";
  std::ostringstream alignment_csv;
  alignment_csv << "task,inner_product,support_grad_norm,query_grad_norm,cosine\n";
  std::vector<double> mean_residuals(config.analysis.alphas.size(), 0.0);
  double mean_cosine = 0.0;
  for (int t = 0; t < config.analysis.tasks; ++t) {
    const auto& domain = val_domains[t % val_domains.size()];
    const Task task = strategy == Strategy::Ocda
                          ? sample_ocda_task(domain, *config.method.normal_class,
                                             config.method.hyper.shots, rng)
                          : sample_standard_task(domain, config.method.hyper.shots, rng);
    const auto curve = residual_scaling(spec, ckpt.params, task, config.analysis.alphas);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      residual_csv << t << "," << format_g(curve[i].alpha) << ","
                   << format_g(curve[i].residual_norm) << ",";
      if (i + 1 < curve.size() && curve[i + 1].residual_norm > 0.0) {
        residual_csv << format_g(curve[i].residual_norm / curve[i + 1].residual_norm);
      }
      residual_csv << "\n";
      mean_residuals[i] += curve[i].residual_norm / config.analysis.tasks;
    }
    const AlignmentReport align = gradient_alignment(spec, ckpt.params, task);
    alignment_csv << t << "," << format_g(align.inner_product) << ","
                  << format_g(align.support_grad_norm) << ","
                  << format_g(align.query_grad_norm) << "," << format_g(align.cosine) << "\n";
    mean_cosine += align.cosine / config.analysis.tasks;
  }
  write_text_file(paths.analyze_dir() + "/residuals.csv", residual_csv.str());
  write_text_file(paths.analyze_dir() + "/alignment.csv", alignment_csv.str());

  json summary;
  summary["config_hash"] = hash_hex(config.hash());
  summary["checkpoint"] = paths.checkpoint(seed);
  summary["alphas"] = config.analysis.alphas;
  summary["mean_residual_norms"] = mean_residuals;
  json ratios = json::array();
  for (std::size_t i = 0; i + 1 < mean_residuals.size(); ++i) {
    if (mean_residuals[i + 1] > 0.0) ratios.push_back(mean_residuals[i] / mean_residuals[i + 1]);
  }
  summary["mean_residual_ratios"] = ratios;
  summary["mean_validation_cosine"] = mean_cosine;
  write_text_file(paths.analyze_dir() + "/summary.json", summary.dump(2));
  std::cout << "analysis written to " << paths.analyze_dir() << "\n";
}

void cmd_report(const ExperimentConfig& config) {
  const OutputPaths paths{config.out_dir};
  std::ostringstream report;
  const std::string results = paths.eval_dir() + "/results.csv";
  if (fs::exists(results)) {
    ResultsTable table = parse_results_csv(read_text_file(results));
    table.title = "Evaluation results (" + config.method.kind + ")";
    report << emit_results_table(table, TableFormat::Text) << "\n";
  }
  const std::string analysis = paths.analyze_dir() + "/summary.json";
  if (fs::exists(analysis)) {
    report << "Analysis summary:\n" << read_text_file(analysis) << "\n";
  }
  if (report.str().empty()) {
    throw ConfigError("nothing to report: run evaluate and/or analyze first");
  }
  write_text_file(paths.report_path(), report.str());
  std::cout << report.str();
}

}  // namespace ocda
