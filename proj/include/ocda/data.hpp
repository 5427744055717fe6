#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ocda/dataset.hpp"
#include "ocda/rng.hpp"

namespace ocda {

// --- IDX ingestion ----------------------------------------------------------

// Parses big-endian IDX image/label pairs (magics 0x803 / 0x801). Pixel bytes
// scale to [0,1]; feature shape is {1, rows, cols}.
std::vector<LabeledExample> load_idx(const std::string& images_path,
                                     const std::string& labels_path);

void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<LabeledExample>& examples, int rows, int cols);

// Procedural handwritten-digit-style corpus (stroke templates + random affine
// and elastic jitter), rendered straight to IDX files so the ingestion path
// stays identical to real MNIST. Used when no MNIST files are available.
void render_digit_corpus(const std::string& images_path, const std::string& labels_path,
                         int count, std::uint64_t seed);

// --- Rainbow domains --------------------------------------------------------

inline constexpr int kRainbowDomainCount = 56;

// The 56 descriptors: 7 colors x 4 rotations x 2 scales, fixed order.
std::vector<DomainDescriptor> rainbow_descriptors();

// Shuffles, forms 56 class-balanced sub-datasets of 1000 examples (100 per
// digit), and applies each descriptor's transform: scale -> rotate ->
// colorize. Output features are {3, 28, 28}.
std::vector<DomainPtr> build_rainbow_domains(const std::vector<LabeledExample>& examples,
                                             std::uint64_t seed);

// Exposed for tests: the per-descriptor transform of one grayscale example.
LabeledExample rainbow_transform(const LabeledExample& src, const DomainDescriptor& desc);

// --- Synthetic pump spectra ---------------------------------------------------

struct SpectrumPeak {
  double center = 0.0;     // bin
  double amplitude = 0.0;  // relative to local base level
  double width = 2.0;      // bins
};

struct ClassEffect {
  std::string label;
  double mod_gain = 0.0;    // smooth band modulation depth (0 = identity)
  double mod_center = 0.0;  // bin
  double mod_width = 40.0;
  std::vector<SpectrumPeak> peaks;
};

struct SpectrumConfig {
  int bins = 256;
  double noise_scale = 0.05;
  double envelope_floor = 0.02;     // keeps log-envelopes finite
  double domain_peak_jitter = 10.0; // per-domain shift of class peak positions, bins
  double domain_gain_spread = 0.35; // per-domain log-amplitude spread
  std::vector<ClassEffect> class_effects;  // one entry per class, label order = class id

  void validate() const;  // throws ConfigError
};

// Calibrated 5-class default: normal, idle, cavitation, hydraulic-blockage,
// dry-running.
SpectrumConfig default_pump_config();

// Each domain draws a smooth random base envelope; every example is
// envelope x class modulation + class peaks + noise, clipped at 0, so
// anomalous classes share the domain's base pattern. Features are {1, bins}.
std::vector<DomainPtr> generate_pump_domains(const SpectrumConfig& cfg, int domain_count,
                                             int per_class, std::uint64_t seed);

// --- CSV spectra --------------------------------------------------------------

struct CsvSchema {
  int bins = 256;
  std::string bin_prefix = "bin_";
  std::string label_column = "label";
  std::string domain_column = "domain";
  std::vector<std::string> label_vocabulary;  // index = class id
};

DomainDataset load_csv_spectra(const std::string& path, const CsvSchema& schema);
void export_csv_spectra(const std::string& path, const DomainDataset& domain,
                        const CsvSchema& schema);

// --- Splits -------------------------------------------------------------------

struct DomainSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct SplitCounts {
  int train = 0;
  int validation = 0;
  int test = 0;
};

// Deterministic shuffled partition; counts must sum to the domain count.
DomainSplit split_domains(const std::vector<DomainPtr>& domains, const SplitCounts& counts,
                          std::uint64_t seed);

// Explicit assignment (leave-one-unit-out style); every listed id must exist
// and the three lists must be disjoint.
DomainSplit split_domains_explicit(const std::vector<DomainPtr>& domains,
                                   const std::vector<std::string>& train,
                                   const std::vector<std::string>& validation,
                                   const std::vector<std::string>& test);

// Every class reduced to min_c N^i_c examples, without replacement.
DomainPtr downsample_balanced(const DomainPtr& domain, std::uint64_t seed);

std::vector<DomainPtr> select_domains(const std::vector<DomainPtr>& domains,
                                      const std::vector<std::string>& ids);

}  // namespace ocda
