#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ocda/diffcore.hpp"
#include "ocda/tensor.hpp"

namespace ocda {

struct LabeledExample {
  std::vector<float> features;  // storage is float32; all engine math is 64-bit
  int label = 0;
};

struct RainbowDescriptor {
  std::string color;   // red..violet
  int rotation = 0;    // degrees, multiple of 90
  std::string scale;   // "full" | "half"
};

struct PumpDescriptor {
  std::string unit;     // P1..P4
  std::string surface;  // "steel" | "concrete"
  int session = 0;
};

struct DomainDescriptor {
  enum class Kind { Rainbow, Pump, Plain };
  Kind kind = Kind::Plain;
  RainbowDescriptor rainbow;
  PumpDescriptor pump;

  std::string to_string() const;
};

// Labeled examples plus a domain descriptor; immutable once built.
struct DomainDataset {
  std::string domain_id;
  DomainDescriptor descriptor;
  Shape feature_shape;  // per-example
  std::vector<LabeledExample> examples;
  std::map<int, int> class_counts;  // class -> N^i_c, kept consistent with examples

  std::size_t size() const { return examples.size(); }
  int num_classes() const { return static_cast<int>(class_counts.size()); }
};

using DomainPtr = std::shared_ptr<const DomainDataset>;

// Recomputes class_counts from examples and checks every class is present.
void finalize_counts(DomainDataset& d);

// Indices of every example with the given label, ascending.
std::vector<int> class_indices(const DomainDataset& d, int label);

// Stacks the selected examples into a 64-bit batch tensor.
ExampleBatch make_batch(const DomainDataset& d, const std::vector<int>& indices);
ExampleBatch make_batch_all(const DomainDataset& d);

}  // namespace ocda
