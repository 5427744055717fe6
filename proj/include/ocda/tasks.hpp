#pragma once

#include <string>
#include <vector>

#include "ocda/dataset.hpp"
#include "ocda/rng.hpp"

namespace ocda {

// A (support, query) pair drawn from one domain. Examples are referenced by
// index into the source domain; support and query never overlap.
struct Task {
  DomainPtr domain;
  std::vector<int> support;  // example indices
  std::vector<int> query;

  ExampleBatch support_batch() const { return make_batch(*domain, support); }
  ExampleBatch query_batch() const { return make_batch(*domain, query); }
};

// Checks disjointness and index validity; throws on violation.
void validate_task(const Task& t);

// Standard N-way K-shot task: K support and K query examples per class,
// sampled without replacement.
Task sample_standard_task(const DomainPtr& domain, int shots, Rng& rng);

// One-class support: K examples all labeled normal_class; query balanced with
// K examples per class (including normal_class), disjoint from the support.
Task sample_ocda_task(const DomainPtr& domain, int normal_class, int shots, Rng& rng);

// Meta-testing task: K-shot one-class support; query is the domain minus the
// support, down-sampled to min-class balance (m examples per class).
Task build_meta_test_task(const DomainPtr& domain, int normal_class, int shots, Rng& rng);

// Audit-log record: domain id plus example indices.
std::string task_to_json(const Task& t);

}  // namespace ocda
