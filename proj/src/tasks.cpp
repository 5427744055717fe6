#include "ocda/tasks.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace ocda {

namespace {

// K draws per requested class, without replacement, from the class pools;
// classes visited in ascending label order. `taken` marks excluded examples.
std::vector<int> draw_per_class(const DomainDataset& d, const std::vector<int>& classes,
                                int shots, const std::set<int>& taken, Rng& rng,
                                const char* what) {
  std::vector<int> out;
  for (int label : classes) {
    std::vector<int> pool;
    for (int idx : class_indices(d, label)) {
      if (!taken.count(idx)) pool.push_back(idx);
    }
    if (static_cast<int>(pool.size()) < shots) {
      throw InsufficientData(std::string(what) + ": class " + std::to_string(label) + " has " +
                             std::to_string(pool.size()) + " free examples, needs " +
                             std::to_string(shots));
    }
    for (int pick : rng.sample_without_replacement(pool.size(), shots)) {
      out.push_back(pool[pick]);
    }
  }
  return out;
}

std::vector<int> sorted_classes(const DomainDataset& d) {
  std::vector<int> classes;
  for (const auto& [label, count] : d.class_counts) {
    classes.push_back(label);
    (void)count;
  }
  return classes;  // std::map keys are already ascending
}

}  // namespace

void validate_task(const Task& t) {
  if (!t.domain) throw EmptyDataset("task has no domain");
  std::set<int> support(t.support.begin(), t.support.end());
  if (support.size() != t.support.size()) throw LabelError("duplicate support index");
  for (int q : t.query) {
    if (support.count(q)) throw LabelError("support and query overlap");
  }
  const int n = static_cast<int>(t.domain->size());
  for (int i : t.support) {
    if (i < 0 || i >= n) throw LabelError("support index out of range");
  }
  for (int i : t.query) {
    if (i < 0 || i >= n) throw LabelError("query index out of range");
  }
}

Task sample_standard_task(const DomainPtr& domain, int shots, Rng& rng) {
  const auto classes = sorted_classes(*domain);
  Task t;
  t.domain = domain;
  t.support = draw_per_class(*domain, classes, shots, {}, rng, "sample_standard_task support");
  const std::set<int> taken(t.support.begin(), t.support.end());
  t.query = draw_per_class(*domain, classes, shots, taken, rng, "sample_standard_task query");
  return t;
}

Task sample_ocda_task(const DomainPtr& domain, int normal_class, int shots, Rng& rng) {
  if (!domain->class_counts.count(normal_class)) {
    throw LabelError("normal class " + std::to_string(normal_class) + " not in domain '" +
                     domain->domain_id + "'");
  }
  const auto classes = sorted_classes(*domain);
  Task t;
  t.domain = domain;
  t.support = draw_per_class(*domain, {normal_class}, shots, {}, rng, "sample_ocda_task support");
  const std::set<int> taken(t.support.begin(), t.support.end());
  t.query = draw_per_class(*domain, classes, shots, taken, rng, "sample_ocda_task query");
  return t;
}

Task build_meta_test_task(const DomainPtr& domain, int normal_class, int shots, Rng& rng) {
  if (!domain->class_counts.count(normal_class)) {
    throw LabelError("normal class " + std::to_string(normal_class) + " not in domain '" +
                     domain->domain_id + "'");
  }
  Task t;
  t.domain = domain;
  if (shots > 0) {
    t.support =
        draw_per_class(*domain, {normal_class}, shots, {}, rng, "build_meta_test_task support");
  }
  const std::set<int> taken(t.support.begin(), t.support.end());
  // Support examples are removed before the min-class count is computed, so
  // the balanced query is as large as disjointness allows.
  int min_count = -1;
  for (const auto& [label, count] : domain->class_counts) {
    const int free_count = label == normal_class ? count - shots : count;
    if (free_count < 1) {
      throw InsufficientData("build_meta_test_task: class " + std::to_string(label) +
                             " exhausted by the support set");
    }
    min_count = min_count < 0 ? free_count : std::min(min_count, free_count);
  }
  const auto classes = sorted_classes(*domain);
  t.query = draw_per_class(*domain, classes, min_count, taken, rng, "build_meta_test_task query");
  return t;
}

std::string task_to_json(const Task& t) {
  nlohmann::json j;
  j["domain_id"] = t.domain ? t.domain->domain_id : "";
  j["support"] = t.support;
  j["query"] = t.query;
  return j.dump();
}

}  // namespace ocda
