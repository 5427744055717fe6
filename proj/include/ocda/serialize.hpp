#pragma once

#include <cstdint>
#include <string>

#include "ocda/dataset.hpp"
#include "ocda/meta.hpp"

namespace ocda {

// Self-describing binary domain container: magic, version, JSON header
// (id, descriptor, shape, counts), then per-example label + float32 features.
void save_domain(const std::string& path, const DomainDataset& domain);
DomainPtr load_domain(const std::string& path);

std::string descriptor_to_json(const DomainDescriptor& d);
DomainDescriptor descriptor_from_json(const std::string& text);

// Checkpoint: flat parameters, layout table, optimizer state, architecture
// hash and a format version.
struct Checkpoint {
  ParameterVector params;
  GradientVector adam_m;
  GradientVector adam_v;
  std::uint64_t arch_hash = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::int64_t iteration = 0;
  std::int64_t best_iteration = 0;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ocda
