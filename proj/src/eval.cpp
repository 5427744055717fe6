#include "ocda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "src/engine.hpp"

namespace ocda {

MetricsReport make_report(std::string protocol, std::map<std::string, double> per_domain) {
  MetricsReport r;
  r.protocol = std::move(protocol);
  r.per_domain = std::move(per_domain);
  double sum = 0.0;
  for (const auto& [id, acc] : r.per_domain) {
    sum += acc;
    (void)id;
  }
  r.aggregate = r.per_domain.empty() ? 0.0 : sum / static_cast<double>(r.per_domain.size());
  return r;
}

double accuracy(const ModelSpec& spec, const ParameterVector& params, const ExampleBatch& data) {
  if (data.labels.empty()) throw EmptyDataset("accuracy needs at least one example");
  const PredictionBatch pred = engine::predict(spec, params, data.features);
  const int n = pred.probabilities.dim(1);
  int correct = 0;
  for (std::size_t b = 0; b < data.labels.size(); ++b) {
    const double* row = pred.probabilities.ptr() + b * n;
    int arg = 0;
    for (int c = 1; c < n; ++c) {
      if (row[c] > row[arg]) arg = c;  // strict: ties resolve to the lowest index
    }
    if (arg == data.labels[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.labels.size());
}

// --- Plain pooled training ----------------------------------------------------

namespace {

struct PooledExample {
  const LabeledExample* example;
  const DomainDataset* domain;
};

ExampleBatch pooled_batch(const std::vector<PooledExample>& pool, const std::vector<int>& take,
                          const Shape& feature_shape) {
  Shape shape;
  shape.push_back(static_cast<int>(take.size()));
  for (int v : feature_shape) shape.push_back(v);
  ExampleBatch batch{Tensor<double>(shape), {}};
  const std::size_t per_ex = shape_size(feature_shape);
  for (std::size_t i = 0; i < take.size(); ++i) {
    const auto& ex = *pool[take[i]].example;
    double* dst = batch.features.ptr() + i * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) dst[j] = static_cast<double>(ex.features[j]);
    batch.labels.push_back(ex.label);
  }
  return batch;
}

std::vector<int> iota_vec(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

// Plain minibatch Adam with early stopping on the validation loss. Same
// optimizer and stopping rule as the meta trainer, without the inner loop.
ParameterVector train_plain(const ModelSpec& spec, const HyperParams& hp,
                            const std::vector<PooledExample>& train_pool,
                            const std::vector<PooledExample>& val_pool,
                            const Shape& feature_shape, std::size_t max_eval, std::uint64_t seed,
                            TrainHistory* history = nullptr) {
  hp.validate();
  if (train_pool.empty()) throw InsufficientData("plain training pool is empty");

  Rng order_rng = Rng::stream(seed, "plain.order");
  Rng val_rng = Rng::stream(seed, "plain.val");
  std::vector<int> order = iota_vec(train_pool.size());
  order_rng.shuffle(order);

  std::vector<int> val_take = iota_vec(val_pool.size());
  if (val_take.size() > max_eval) {
    std::vector<int> picks = val_rng.sample_without_replacement(val_pool.size(), max_eval);
    std::sort(picks.begin(), picks.end());
    val_take = std::move(picks);
  }
  ExampleBatch val_batch;
  if (!val_pool.empty()) val_batch = pooled_batch(val_pool, val_take, feature_shape);

  TrainState state = make_train_state(init_params(spec, seed));
  ParameterVector best = state.params;
  std::size_t cursor = 0;
  double train_loss_acc = 0.0;
  int train_loss_n = 0;
  for (int iter = 0; iter < hp.max_iterations; ++iter) {
    const std::size_t take_n = std::min<std::size_t>(hp.batch_size, train_pool.size());
    std::vector<int> take;
    take.reserve(take_n);
    for (std::size_t i = 0; i < take_n; ++i) {
      if (cursor == order.size()) {
        order_rng.shuffle(order);
        cursor = 0;
      }
      take.push_back(order[cursor++]);
    }
    const ExampleBatch batch = pooled_batch(train_pool, take, feature_shape);
    DatasetLoss loss(spec, batch);
    auto [batch_loss, grad] = loss.value_and_grad(state.params.values);
    GradientVector g{state.params.layout, std::move(grad)};
    state = adam_step(state, g, hp);
    train_loss_acc += batch_loss;
    train_loss_n += 1;

    if ((iter + 1) % hp.eval_interval == 0 && !val_pool.empty()) {
      const double val_loss = evaluate_loss(spec, state.params, val_batch).loss;
      if (history) {
        history->records.push_back({state.iteration,
                                    train_loss_acc / std::max(train_loss_n, 1), val_loss,
                                    accuracy(spec, state.params, val_batch)});
      }
      train_loss_acc = 0.0;
      train_loss_n = 0;
      if (val_loss < state.best_validation_loss) {
        state.best_validation_loss = val_loss;
        state.iterations_since_best = 0;
        best = state.params;
      } else {
        state.iterations_since_best += 1;
        if (state.iterations_since_best >= hp.early_stop_patience) break;
      }
    }
  }
  if (!std::isfinite(state.best_validation_loss)) best = state.params;
  return best;
}

// Accuracy per origin domain over a pooled example list.
std::map<std::string, double> per_domain_accuracy(const ModelSpec& spec,
                                                  const ParameterVector& params,
                                                  const std::vector<PooledExample>& pool,
                                                  const Shape& feature_shape) {
  std::map<std::string, std::vector<int>> groups;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    groups[pool[i].domain->domain_id].push_back(static_cast<int>(i));
  }
  std::map<std::string, double> out;
  for (const auto& [id, take] : groups) {
    out[id] = accuracy(spec, params, pooled_batch(pool, take, feature_shape));
  }
  return out;
}

// Pooled-and-shuffled split of the selected domains into train/val/test.
struct PooledSplit {
  std::vector<PooledExample> train, val, test;
};

PooledSplit pool_and_split(const std::vector<DomainPtr>& domains, double train_fraction,
                           double val_fraction, Rng& rng) {
  std::vector<PooledExample> all;
  for (const auto& d : domains) {
    for (const auto& ex : d->examples) all.push_back({&ex, d.get()});
  }
  std::vector<int> order = iota_vec(all.size());
  rng.shuffle(order);
  const std::size_t n_train = static_cast<std::size_t>(train_fraction * all.size());
  const std::size_t n_val = static_cast<std::size_t>(val_fraction * all.size());
  PooledSplit split;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i < n_train) {
      split.train.push_back(all[order[i]]);
    } else if (i < n_train + n_val) {
      split.val.push_back(all[order[i]]);
    } else {
      split.test.push_back(all[order[i]]);
    }
  }
  return split;
}

}  // namespace

StandardProtocolResult run_standard_learning_protocol(const ModelSpec& spec,
                                                      const HyperParams& hp,
                                                      const DomainSplit& split,
                                                      const std::vector<DomainPtr>& domains,
                                                      std::uint64_t seed,
                                                      const StandardProtocolOptions& options) {
  std::vector<std::string> source_ids = split.train;
  source_ids.insert(source_ids.end(), split.validation.begin(), split.validation.end());
  std::vector<DomainPtr> source = select_domains(domains, source_ids);
  std::vector<DomainPtr> target = select_domains(domains, split.test);
  if (source.empty() || target.empty()) {
    throw ConfigError("standard protocol needs nonempty source and target domain sets");
  }
  if (options.downsample_first) {
    for (auto& d : source) d = downsample_balanced(d, seed);
    for (auto& d : target) d = downsample_balanced(d, seed);
  }
  const Shape feature_shape = source.front()->feature_shape;

  // ID: 3-way pooled split within the source domains.
  Rng id_rng = Rng::stream(seed, "protocol.id");
  const PooledSplit id_split =
      pool_and_split(source, options.train_fraction, options.val_fraction, id_rng);
  const ParameterVector id_params = train_plain(spec, hp, id_split.train, id_split.val,
                                                feature_shape, options.max_eval_examples, seed);
  MetricsReport id_report =
      make_report("ID", per_domain_accuracy(spec, id_params, id_split.test, feature_shape));

  // OOD: train/val pooled split within the source domains (no test slice);
  // evaluate on the class-balanced target domains.
  Rng ood_rng = Rng::stream(seed, "protocol.ood");
  const PooledSplit ood_split =
      pool_and_split(source, 1.0 - options.val_fraction, options.val_fraction, ood_rng);
  const ParameterVector ood_params = train_plain(spec, hp, ood_split.train, ood_split.val,
                                                 feature_shape, options.max_eval_examples, seed);
  std::map<std::string, double> ood_acc;
  for (const auto& d : target) {
    const DomainPtr balanced = downsample_balanced(d, seed);
    ood_acc[d->domain_id] = accuracy(spec, ood_params, make_batch_all(*balanced));
  }
  MetricsReport ood_report = make_report("OOD", std::move(ood_acc));

  // ID-test: the 3-way protocol inside the target domains.
  Rng idt_rng = Rng::stream(seed, "protocol.idtest");
  const PooledSplit idt_split =
      pool_and_split(target, options.train_fraction, options.val_fraction, idt_rng);
  const ParameterVector idt_params = train_plain(spec, hp, idt_split.train, idt_split.val,
                                                 feature_shape, options.max_eval_examples, seed);
  MetricsReport idt_report =
      make_report("ID-test", per_domain_accuracy(spec, idt_params, idt_split.test, feature_shape));

  return {std::move(id_report), std::move(ood_report), std::move(idt_report)};
}

PlainTrainResult train_plain_pooled(const ModelSpec& spec, const HyperParams& hp,
                                    const std::vector<DomainPtr>& domains, double val_fraction,
                                    std::uint64_t seed) {
  if (domains.empty()) throw ConfigError("train_plain_pooled needs at least one domain");
  Rng rng = Rng::stream(seed, "plain.pool");
  const PooledSplit split = pool_and_split(domains, 1.0 - val_fraction, val_fraction, rng);
  PlainTrainResult result;
  result.params = train_plain(spec, hp, split.train, split.val, domains.front()->feature_shape,
                              2000, seed, &result.history);
  return result;
}

MetricsReport meta_test(const ModelSpec& spec, const ParameterVector& params,
                        const std::vector<DomainPtr>& target_domains, int normal_class,
                        int shots, const HyperParams& hp, std::uint64_t seed) {
  return meta_test_averaged(spec, params, target_domains, normal_class, shots, hp, seed, 1);
}

MetricsReport meta_test_averaged(const ModelSpec& spec, const ParameterVector& params,
                                 const std::vector<DomainPtr>& target_domains, int normal_class,
                                 int shots, const HyperParams& hp, std::uint64_t seed,
                                 int supports_per_domain) {
  if (target_domains.empty()) throw ConfigError("meta_test needs at least one target domain");
  if (supports_per_domain < 1) throw ConfigError("supports_per_domain must be >= 1");
  std::map<std::string, double> per_domain;
  for (const auto& domain : target_domains) {
    // One stream per domain: domain subsets evaluate identically either way.
    Rng rng = Rng::stream(seed, "meta-test:" + domain->domain_id);
    double acc = 0.0;
    for (int s = 0; s < supports_per_domain; ++s) {
      const Task task = build_meta_test_task(domain, normal_class, shots, rng);
      ParameterVector adapted = params;
      if (hp.inner_lr > 0.0 && shots > 0) {
        adapted = inner_adapt(spec, params, task.support_batch(), hp.inner_lr, hp.inner_steps);
      }
      acc += accuracy(spec, adapted, task.query_batch());
    }
    per_domain[domain->domain_id] = acc / supports_per_domain;
  }
  return make_report("meta-test", std::move(per_domain));
}

// --- Result tables ---------------------------------------------------------

namespace {

bool parse_number(const std::string& s, double* out) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

}  // namespace

std::string emit_results_table(const ResultsTable& table, TableFormat format) {
  if (table.rows.empty()) throw ConfigError("results table has no rows");
  std::ostringstream os;
  if (format == TableFormat::Csv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      os << (c ? "," : "") << table.columns[c];
    }
    os << "\n";
    for (const auto& row : table.rows) {
      if (row.size() != table.columns.size()) throw ConfigError("ragged results table row");
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
      os << "\n";
    }
    return os.str();
  }

  // Aligned text: numeric cells rendered as percentages with two decimals.
  std::vector<std::vector<std::string>> rendered;
  rendered.push_back(table.columns);
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw ConfigError("ragged results table row");
    std::vector<std::string> cells;
    for (std::size_t c = 0; c < row.size(); ++c) {
      double v = 0.0;
      if (c > 0 && parse_number(row[c], &v)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
        cells.emplace_back(buf);
      } else {
        cells.push_back(row[c]);
      }
    }
    rendered.push_back(std::move(cells));
  }
  std::vector<std::size_t> widths(table.columns.size(), 0);
  for (const auto& row : rendered) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  if (!table.title.empty()) os << table.title << "\n";
  for (std::size_t r = 0; r < rendered.size(); ++r) {
    for (std::size_t c = 0; c < rendered[r].size(); ++c) {
      os << rendered[r][c] << std::string(widths[c] - rendered[r][c].size() + 2, ' ');
    }
    os << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w + 2;
      os << std::string(total, '-') << "\n";
    }
  }
  return os.str();
}

ResultsTable parse_results_csv(const std::string& csv) {
  ResultsTable table;
  std::istringstream is(csv);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (first) {
      table.columns = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw FormatError("results csv has no header");
  return table;
}

}  // namespace ocda
