#include "ocda/params.hpp"

#include <cmath>
#include <sstream>

#include "ocda/rng.hpp"

namespace ocda {

Layout::Layout(std::vector<LayoutEntry> entries) : entries_(std::move(entries)) {
  std::size_t offset = 0;
  std::ostringstream sig;
  for (auto& e : entries_) {
    if (e.offset != offset) {
      throw LayoutError("entry '" + e.name + "' does not start at the running offset");
    }
    if (e.size != shape_size(e.shape)) {
      throw LayoutError("entry '" + e.name + "' size disagrees with its shape");
    }
    offset += e.size;
    sig << e.name << ':' << e.size << ';';
  }
  total_ = offset;
  fingerprint_ = fnv1a64(sig.str());
}

const LayoutEntry& Layout::entry(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw LayoutError("no entry named '" + std::string(name) + "'");
}

std::span<double> ParameterVector::range(std::string_view name) {
  const auto& e = layout->entry(name);
  return {values.data() + e.offset, e.size};
}

std::span<const double> ParameterVector::range(std::string_view name) const {
  const auto& e = layout->entry(name);
  return {values.data() + e.offset, e.size};
}

bool ParameterVector::all_finite() const {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void require_same_layout(const ParameterVector& a, const ParameterVector& b,
                         std::string_view what) {
  if (!same_layout(a, b)) {
    throw LayoutError(std::string(what) + ": layouts differ");
  }
}

void require_finite(const ParameterVector& p, std::string_view what) {
  if (!p.all_finite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

GradientVector zeros_like(const ParameterVector& p) {
  return {p.layout, std::vector<double>(p.values.size(), 0.0)};
}

}  // namespace ocda
