#include "ocda/dataset.hpp"

#include <algorithm>
#include <sstream>

namespace ocda {

std::string DomainDescriptor::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Rainbow:
      os << "rainbow(" << rainbow.color << "," << rainbow.rotation << "," << rainbow.scale << ")";
      break;
    case Kind::Pump:
      os << "pump(" << pump.unit << "," << pump.surface << ",s" << pump.session << ")";
      break;
    case Kind::Plain:
      os << "plain";
      break;
  }
  return os.str();
}

void finalize_counts(DomainDataset& d) {
  d.class_counts.clear();
  for (const auto& ex : d.examples) {
    d.class_counts[ex.label] += 1;
  }
  if (d.examples.empty()) throw EmptyDataset("domain '" + d.domain_id + "' has no examples");
  for (const auto& [label, count] : d.class_counts) {
    if (count < 1) throw InsufficientData("domain '" + d.domain_id + "' lacks class");
    (void)label;
  }
}

std::vector<int> class_indices(const DomainDataset& d, int label) {
  std::vector<int> out;
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    if (d.examples[i].label == label) out.push_back(static_cast<int>(i));
  }
  return out;
}

ExampleBatch make_batch(const DomainDataset& d, const std::vector<int>& indices) {
  if (indices.empty()) throw EmptyDataset("empty index list for domain '" + d.domain_id + "'");
  Shape shape;
  shape.push_back(static_cast<int>(indices.size()));
  for (int v : d.feature_shape) shape.push_back(v);
  ExampleBatch batch{Tensor<double>(shape), {}};
  const std::size_t per_ex = shape_size(d.feature_shape);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& ex = d.examples.at(indices[i]);
    if (ex.features.size() != per_ex) {
      throw ShapeError("example feature length disagrees with the domain feature shape");
    }
    double* dst = batch.features.ptr() + i * per_ex;
    for (std::size_t j = 0; j < per_ex; ++j) dst[j] = static_cast<double>(ex.features[j]);
    batch.labels.push_back(ex.label);
  }
  return batch;
}

ExampleBatch make_batch_all(const DomainDataset& d) {
  std::vector<int> idx(d.examples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return make_batch(d, idx);
}

}  // namespace ocda
