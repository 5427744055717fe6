#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ocda/error.hpp"
#include "ocda/tensor.hpp"

namespace ocda {

struct LayoutEntry {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
  Shape shape;
};

// Immutable mapping from named model tensors to disjoint contiguous ranges
// covering [0, total). Shared by every vector tied to one architecture.
class Layout {
 public:
  explicit Layout(std::vector<LayoutEntry> entries);

  const std::vector<LayoutEntry>& entries() const { return entries_; }
  std::size_t total() const { return total_; }
  const LayoutEntry& entry(std::string_view name) const;
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<LayoutEntry> entries_;
  std::size_t total_ = 0;
  std::uint64_t fingerprint_ = 0;
};

using LayoutPtr = std::shared_ptr<const Layout>;

// Flat 64-bit parameter vector plus its layout. Both optimization levels act
// on values of this type; gradients share the representation.
struct ParameterVector {
  LayoutPtr layout;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  std::span<double> range(std::string_view name);
  std::span<const double> range(std::string_view name) const;
  bool all_finite() const;
};

using GradientVector = ParameterVector;

inline bool same_layout(const ParameterVector& a, const ParameterVector& b) {
  return a.layout && b.layout &&
         (a.layout == b.layout || a.layout->fingerprint() == b.layout->fingerprint());
}

void require_same_layout(const ParameterVector& a, const ParameterVector& b,
                         std::string_view what);

// Throws NumericError when any entry is NaN/Inf. Engine-produced updates call
// this before handing values back.
void require_finite(const ParameterVector& p, std::string_view what);

GradientVector zeros_like(const ParameterVector& p);

}  // namespace ocda
