#include "ocda/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ocda {

// --- IDX ---------------------------------------------------------------------

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("truncated header in " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::vector<LabeledExample> load_idx(const std::string& images_path,
                                     const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open " + labels_path);

  const std::uint32_t img_magic = read_be32(img, images_path);
  if (img_magic != kImageMagic) {
    throw FormatError("bad image magic in " + images_path + " at byte 0");
  }
  const std::uint32_t count = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  const std::uint32_t lab_magic = read_be32(lab, labels_path);
  if (lab_magic != kLabelMagic) {
    throw FormatError("bad label magic in " + labels_path + " at byte 0");
  }
  const std::uint32_t lab_count = read_be32(lab, labels_path);
  if (lab_count != count) {
    throw FormatError("image/label counts disagree: " + std::to_string(count) + " vs " +
                      std::to_string(lab_count));
  }

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), pixels);
    if (!img) {
      throw IoError("truncated image data in " + images_path + " at example " +
                    std::to_string(i));
    }
    int label = lab.get();
    if (label == EOF) {
      throw IoError("truncated label data in " + labels_path + " at example " +
                    std::to_string(i));
    }
    LabeledExample ex;
    ex.label = label;
    ex.features.resize(pixels);
    for (std::size_t j = 0; j < pixels; ++j) {
      ex.features[j] = static_cast<float>(buf[j] / 255.0);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<LabeledExample>& examples, int rows, int cols) {
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot write " + images_path);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot write " + labels_path);
  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(examples.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(examples.size()));
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  for (const auto& ex : examples) {
    if (ex.features.size() != pixels) throw ShapeError("example size disagrees with rows*cols");
    for (std::size_t j = 0; j < pixels; ++j) {
      const double v = std::clamp(static_cast<double>(ex.features[j]), 0.0, 1.0);
      buf[j] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    img.write(reinterpret_cast<const char*>(buf.data()), pixels);
    lab.put(static_cast<char>(ex.label));
  }
}

// --- Procedural digit corpus ---------------------------------------------------

namespace {

struct Pt {
  double x, y;
};
using Stroke = std::vector<Pt>;

std::vector<Stroke> circle(double cx, double cy, double rx, double ry, int n = 16) {
  Stroke s;
  for (int i = 0; i <= n; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * i / n;
    s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return {s};
}

std::vector<Stroke> digit_strokes(int d) {
  switch (d) {
    case 0:
      return circle(0.5, 0.5, 0.24, 0.36);
    case 1:
      return {{{0.4, 0.28}, {0.56, 0.13}}, {{0.56, 0.13}, {0.56, 0.88}}};
    case 2:
      return {{{0.28, 0.34},
               {0.32, 0.2},
               {0.45, 0.13},
               {0.58, 0.14},
               {0.68, 0.22},
               {0.7, 0.34},
               {0.62, 0.5},
               {0.45, 0.64},
               {0.3, 0.78},
               {0.27, 0.86}},
              {{0.27, 0.86}, {0.74, 0.86}}};
    case 3:
      return {{{0.3, 0.2}, {0.4, 0.13}, {0.55, 0.12}, {0.66, 0.2}, {0.66, 0.33}, {0.55, 0.44},
               {0.44, 0.48}},
              {{0.44, 0.48}, {0.58, 0.52}, {0.68, 0.62}, {0.68, 0.75}, {0.56, 0.86},
               {0.4, 0.87}, {0.3, 0.8}}};
    case 4:
      return {{{0.6, 0.12}, {0.26, 0.62}}, {{0.26, 0.62}, {0.78, 0.62}},
              {{0.6, 0.12}, {0.6, 0.88}}};
    case 5:
      return {{{0.7, 0.13}, {0.32, 0.13}},
              {{0.32, 0.13}, {0.3, 0.45}},
              {{0.3, 0.45}, {0.45, 0.4}, {0.6, 0.42}, {0.7, 0.52}, {0.72, 0.66}, {0.62, 0.8},
               {0.45, 0.86}, {0.3, 0.78}}};
    case 6:
      return {{{0.63, 0.13}, {0.48, 0.22}, {0.36, 0.38}, {0.3, 0.55}, {0.32, 0.72},
               {0.42, 0.84}, {0.58, 0.85}, {0.68, 0.74}, {0.66, 0.6}, {0.55, 0.52},
               {0.42, 0.54}, {0.33, 0.62}}};
    case 7:
      return {{{0.25, 0.14}, {0.75, 0.14}}, {{0.75, 0.14}, {0.45, 0.88}}};
    case 8: {
      auto top = circle(0.5, 0.3, 0.17, 0.17, 14);
      auto bottom = circle(0.5, 0.67, 0.21, 0.2, 14);
      top.push_back(bottom[0]);
      return top;
    }
    default:
      auto head = circle(0.52, 0.32, 0.18, 0.18, 14);
      head.push_back({{0.7, 0.32}, {0.68, 0.6}, {0.6, 0.88}});
      return head;
  }
}

double seg_dist(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = p.x - (a.x + t * vx);
  const double dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

LabeledExample render_digit(int label, Rng& rng) {
  auto strokes = digit_strokes(label);

  // Handwriting wobble: jitter control points, then a random affine map.
  const double rot = rng.uniform(-0.2, 0.2);
  const double sx = rng.uniform(0.82, 1.12);
  const double sy = rng.uniform(0.82, 1.12);
  const double shear = rng.uniform(-0.22, 0.22);
  const double tx = rng.uniform(-0.05, 0.05);
  const double ty = rng.uniform(-0.05, 0.05);
  const double cr = std::cos(rot);
  const double sr = std::sin(rot);
  const double wob_amp = rng.uniform(0.0, 0.03);
  const double wob_freq = rng.uniform(3.0, 9.0);
  const double wob_phase = rng.uniform(0.0, 6.28);
  for (auto& stroke : strokes) {
    for (auto& p : stroke) {
      p.x += rng.uniform(-0.015, 0.015);
      p.y += rng.uniform(-0.015, 0.015);
      p.x += wob_amp * std::sin(wob_freq * p.y + wob_phase);
      double x = (p.x - 0.5) + shear * (p.y - 0.5);
      double y = p.y - 0.5;
      const double rx = cr * x - sr * y;
      const double ry = sr * x + cr * y;
      p.x = 0.5 + sx * rx + tx;
      p.y = 0.5 + sy * ry + ty;
    }
  }

  const double half_width = rng.uniform(0.035, 0.07);
  const double aa = 0.04;
  const double gain = rng.uniform(0.78, 1.0);

  LabeledExample ex;
  ex.label = label;
  ex.features.resize(28 * 28);
  for (int iy = 0; iy < 28; ++iy) {
    for (int ix = 0; ix < 28; ++ix) {
      const Pt p{(ix + 0.5) / 28.0, (iy + 0.5) / 28.0};
      double dist = 1e9;
      for (const auto& stroke : strokes) {
        for (std::size_t i = 0; i + 1 < stroke.size(); ++i) {
          dist = std::min(dist, seg_dist(p, stroke[i], stroke[i + 1]));
        }
      }
      const double v = std::clamp((half_width + aa * 0.5 - dist) / aa, 0.0, 1.0);
      ex.features[iy * 28 + ix] = static_cast<float>(gain * v);
    }
  }
  return ex;
}

}  // namespace

void render_digit_corpus(const std::string& images_path, const std::string& labels_path,
                         int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("digit corpus count must be positive");
  Rng rng = Rng::stream(seed, "digit-corpus");
  std::vector<LabeledExample> examples;
  examples.reserve(count);
  for (int i = 0; i < count; ++i) {
    examples.push_back(render_digit(i % 10, rng));
  }
  rng.shuffle(examples);
  write_idx(images_path, labels_path, examples, 28, 28);
}

// --- Rainbow domains -----------------------------------------------------------

namespace {

const std::array<std::string, 7> kRainbowColors = {"red",  "orange", "yellow", "green",
                                                   "blue", "indigo", "violet"};

std::array<double, 3> color_rgb(const std::string& name) {
  if (name == "red") return {1.0, 0.0, 0.0};
  if (name == "orange") return {1.0, 0.5, 0.0};
  if (name == "yellow") return {1.0, 1.0, 0.0};
  if (name == "green") return {0.0, 1.0, 0.0};
  if (name == "blue") return {0.0, 0.0, 1.0};
  if (name == "indigo") return {75.0 / 255.0, 0.0, 130.0 / 255.0};
  if (name == "violet") return {148.0 / 255.0, 0.0, 211.0 / 255.0};
  throw ConfigError("unknown rainbow color '" + name + "'");
}

// Exact clockwise quarter-turn: out(y, x) = in(H-1-x, y).
std::vector<float> rot90cw(const std::vector<float>& in, int side) {
  std::vector<float> out(in.size());
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      out[y * side + x] = in[(side - 1 - x) * side + y];
    }
  }
  return out;
}

}  // namespace

std::vector<DomainDescriptor> rainbow_descriptors() {
  std::vector<DomainDescriptor> out;
  for (const auto& color : kRainbowColors) {
    for (int rot : {0, 90, 180, 270}) {
      for (const char* scale : {"full", "half"}) {
        DomainDescriptor d;
        d.kind = DomainDescriptor::Kind::Rainbow;
        d.rainbow = {color, rot, scale};
        out.push_back(d);
      }
    }
  }
  return out;
}

LabeledExample rainbow_transform(const LabeledExample& src, const DomainDescriptor& desc) {
  if (src.features.size() != 28 * 28) throw ShapeError("rainbow source must be 28x28 grayscale");
  std::vector<float> gray(src.features.begin(), src.features.end());

  if (desc.rainbow.scale == "half") {
    // Factor-2 bilinear reduction (2x2 block means), centered on a black canvas.
    std::vector<float> small(14 * 14);
    for (int y = 0; y < 14; ++y) {
      for (int x = 0; x < 14; ++x) {
        const float sum = gray[(2 * y) * 28 + 2 * x] + gray[(2 * y) * 28 + 2 * x + 1] +
                          gray[(2 * y + 1) * 28 + 2 * x] + gray[(2 * y + 1) * 28 + 2 * x + 1];
        small[y * 14 + x] = sum * 0.25f;
      }
    }
    std::vector<float> canvas(28 * 28, 0.0f);
    for (int y = 0; y < 14; ++y) {
      for (int x = 0; x < 14; ++x) {
        canvas[(y + 7) * 28 + (x + 7)] = small[y * 14 + x];
      }
    }
    gray = std::move(canvas);
  }

  for (int turns = 0; turns < desc.rainbow.rotation / 90; ++turns) {
    gray = rot90cw(gray, 28);
  }

  const auto bg = color_rgb(desc.rainbow.color);
  LabeledExample out;
  out.label = src.label;
  out.features.resize(3 * 28 * 28);
  for (int i = 0; i < 28 * 28; ++i) {
    const double g = gray[i];
    for (int c = 0; c < 3; ++c) {
      const double v = g < 0.1 ? bg[c] : g + (1.0 - g) * bg[c];
      out.features[c * 28 * 28 + i] = static_cast<float>(v);
    }
  }
  return out;
}

std::vector<DomainPtr> build_rainbow_domains(const std::vector<LabeledExample>& examples,
                                             std::uint64_t seed) {
  constexpr int kPerClassPerDomain = 100;
  constexpr int kNeededPerClass = kRainbowDomainCount * kPerClassPerDomain;
  if (examples.size() < 56000) {
    throw InsufficientData("rainbow construction needs >= 56000 examples, got " +
                           std::to_string(examples.size()));
  }
  std::array<std::vector<int>, 10> pools;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int label = examples[i].label;
    if (label < 0 || label > 9) throw LabelError("rainbow source labels must be digits");
    pools[label].push_back(static_cast<int>(i));
  }
  for (int c = 0; c < 10; ++c) {
    if (static_cast<int>(pools[c].size()) < kNeededPerClass) {
      throw InsufficientData("class " + std::to_string(c) + " has " +
                             std::to_string(pools[c].size()) + " examples, needs " +
                             std::to_string(kNeededPerClass));
    }
  }

  Rng rng = Rng::stream(seed, "rainbow-shuffle");
  for (auto& pool : pools) rng.shuffle(pool);

  const auto descriptors = rainbow_descriptors();
  std::vector<DomainPtr> domains;
  for (int d = 0; d < kRainbowDomainCount; ++d) {
    auto domain = std::make_shared<DomainDataset>();
    const auto& desc = descriptors[d];
    char id[64];
    std::snprintf(id, sizeof(id), "rb%02d_%s_%d_%s", d, desc.rainbow.color.c_str(),
                  desc.rainbow.rotation, desc.rainbow.scale.c_str());
    domain->domain_id = id;
    domain->descriptor = desc;
    domain->feature_shape = {3, 28, 28};
    std::vector<int> chosen;
    for (int c = 0; c < 10; ++c) {
      for (int k = 0; k < kPerClassPerDomain; ++k) {
        chosen.push_back(pools[c][d * kPerClassPerDomain + k]);
      }
    }
    Rng order = Rng::stream(seed, "rainbow-order:" + domain->domain_id);
    order.shuffle(chosen);
    for (int src_idx : chosen) {
      domain->examples.push_back(rainbow_transform(examples[src_idx], desc));
    }
    finalize_counts(*domain);
    domains.push_back(std::move(domain));
  }
  return domains;
}

// --- Synthetic pump spectra -----------------------------------------------------

void SpectrumConfig::validate() const {
  if (bins < 8) throw ConfigError("spectrum bins must be >= 8");
  if (noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
  if (envelope_floor <= 0.0) throw ConfigError("envelope_floor must be positive");
  if (class_effects.empty()) throw ConfigError("at least one class effect required");
  for (const auto& ce : class_effects) {
    if (ce.label.empty()) throw ConfigError("class effect without a label");
    if (ce.mod_gain < -1.0) throw ConfigError("mod_gain below -1 makes spectra negative");
    for (const auto& p : ce.peaks) {
      if (p.width <= 0.0) throw ConfigError("peak width must be positive");
      if (p.amplitude < 0.0) throw ConfigError("peak amplitude must be >= 0");
    }
  }
}

SpectrumConfig default_pump_config() {
  SpectrumConfig cfg;
  cfg.bins = 256;
  cfg.noise_scale = 0.06;
  cfg.domain_peak_jitter = 14.0;
  cfg.domain_gain_spread = 0.4;
  cfg.class_effects = {
      {"normal", 0.0, 0.0, 40.0, {}},
      {"idle", -0.72, 128.0, 220.0, {}},
      {"cavitation", 0.25, 190.0, 60.0, {{175.0, 1.1, 9.0}, {215.0, 0.8, 12.0}}},
      {"hydraulic-blockage", -0.3, 45.0, 35.0, {{62.0, 1.5, 6.0}}},
      {"dry-running", 0.0, 0.0, 40.0, {{118.0, 1.2, 7.0}, {238.0, 0.7, 10.0}}},
  };
  return cfg;
}

namespace {

double gauss_bump(double x, double mu, double sigma) {
  const double d = (x - mu) / sigma;
  return std::exp(-0.5 * d * d);
}

}  // namespace

std::vector<DomainPtr> generate_pump_domains(const SpectrumConfig& cfg, int domain_count,
                                             int per_class, std::uint64_t seed) {
  cfg.validate();
  if (domain_count < 1) throw ConfigError("domain_count must be >= 1");
  if (per_class < 1) throw ConfigError("per_class must be >= 1");

  std::vector<DomainPtr> domains;
  for (int d = 0; d < domain_count; ++d) {
    auto domain = std::make_shared<DomainDataset>();
    DomainDescriptor desc;
    desc.kind = DomainDescriptor::Kind::Pump;
    desc.pump.unit = "P" + std::to_string((d / 8) % 4 + 1);
    desc.pump.surface = (d / 4) % 2 == 0 ? "steel" : "concrete";
    desc.pump.session = d % 4;
    domain->descriptor = desc;
    char id[64];
    std::snprintf(id, sizeof(id), "pump%02d_%s_%s_s%d", d, desc.pump.unit.c_str(),
                  desc.pump.surface.c_str(), desc.pump.session);
    domain->domain_id = id;
    domain->feature_shape = {1, cfg.bins};

    Rng rng = Rng::stream(seed, "pump-domain:" + std::to_string(d));

    // Domain-specific smooth base envelope shared by every class.
    struct Bump {
      double mu, sigma, amp;
    };
    std::vector<Bump> bumps;
    for (int j = 0; j < 3; ++j) {
      bumps.push_back({rng.uniform(0.0, cfg.bins), rng.uniform(18.0, 55.0),
                       rng.uniform(0.5, 1.6)});
    }
    const double slope = rng.uniform(-0.8, 0.2);
    const double gain = std::exp(cfg.domain_gain_spread * rng.normal());
    const double peak_shift = cfg.domain_peak_jitter * rng.uniform(-1.0, 1.0);
    std::vector<double> base(cfg.bins);
    for (int x = 0; x < cfg.bins; ++x) {
      double v = 0.35 + slope * (static_cast<double>(x) / cfg.bins);
      for (const auto& b : bumps) v += b.amp * gauss_bump(x, b.mu, b.sigma);
      base[x] = cfg.envelope_floor + gain * std::max(v, 0.05);
    }

    for (std::size_t c = 0; c < cfg.class_effects.size(); ++c) {
      const auto& effect = cfg.class_effects[c];
      for (int i = 0; i < per_class; ++i) {
        LabeledExample ex;
        ex.label = static_cast<int>(c);
        ex.features.resize(cfg.bins);
        for (int x = 0; x < cfg.bins; ++x) {
          double v = base[x];
          if (effect.mod_gain != 0.0) {
            v *= 1.0 + effect.mod_gain *
                           gauss_bump(x, effect.mod_center + peak_shift, effect.mod_width);
          }
          for (const auto& p : effect.peaks) {
            const double center = p.center + peak_shift;
            const int anchor = std::clamp(static_cast<int>(std::lround(center)), 0, cfg.bins - 1);
            v += p.amplitude * base[anchor] * gauss_bump(x, center, p.width);
          }
          if (cfg.noise_scale > 0.0) {
            v += cfg.noise_scale * base[x] * std::abs(rng.normal());
          }
          ex.features[x] = static_cast<float>(std::max(v, 0.0));
        }
        domain->examples.push_back(std::move(ex));
      }
    }
    Rng order = Rng::stream(seed, "pump-order:" + domain->domain_id);
    order.shuffle(domain->examples);
    finalize_counts(*domain);
    domains.push_back(std::move(domain));
  }
  return domains;
}

// --- CSV spectra ----------------------------------------------------------------

DomainDataset load_csv_spectra(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty csv file " + path);

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const std::size_t expected_cols = static_cast<std::size_t>(schema.bins) + 2;
  if (header.size() != expected_cols) {
    throw FormatError(path + ": header has " + std::to_string(header.size()) +
                      " columns, expected " + std::to_string(expected_cols));
  }
  for (int b = 0; b < schema.bins; ++b) {
    if (header[b] != schema.bin_prefix + std::to_string(b)) {
      throw FormatError(path + ": column " + std::to_string(b) + " is '" + header[b] +
                        "', expected '" + schema.bin_prefix + std::to_string(b) + "'");
    }
  }
  if (header[schema.bins] != schema.label_column ||
      header[schema.bins + 1] != schema.domain_column) {
    throw FormatError(path + ": trailing columns must be " + schema.label_column + "," +
                      schema.domain_column);
  }

  DomainDataset d;
  d.feature_shape = {1, schema.bins};
  d.descriptor.kind = DomainDescriptor::Kind::Plain;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != expected_cols) {
      throw FormatError(path + ": row " + std::to_string(row_no) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(expected_cols));
    }
    LabeledExample ex;
    ex.features.resize(schema.bins);
    for (int b = 0; b < schema.bins; ++b) {
      try {
        ex.features[b] = std::stof(cells[b]);
      } catch (const std::exception&) {
        throw FormatError(path + ": row " + std::to_string(row_no) + " bin " +
                          std::to_string(b) + " is not a number");
      }
    }
    const auto& label = cells[schema.bins];
    const auto it =
        std::find(schema.label_vocabulary.begin(), schema.label_vocabulary.end(), label);
    if (it == schema.label_vocabulary.end()) {
      throw LabelError(path + ": row " + std::to_string(row_no) + " has unknown label '" +
                       label + "'");
    }
    ex.label = static_cast<int>(it - schema.label_vocabulary.begin());
    if (d.domain_id.empty()) {
      d.domain_id = cells[schema.bins + 1];
    } else if (d.domain_id != cells[schema.bins + 1]) {
      throw FormatError(path + ": row " + std::to_string(row_no) +
                        " mixes domains in a single file");
    }
    d.examples.push_back(std::move(ex));
  }
  finalize_counts(d);
  return d;
}

void export_csv_spectra(const std::string& path, const DomainDataset& domain,
                        const CsvSchema& schema) {
  if (domain.feature_shape != Shape{1, schema.bins}) {
    throw ShapeError("domain feature shape disagrees with the csv schema");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (int b = 0; b < schema.bins; ++b) out << schema.bin_prefix << b << ",";
  out << schema.label_column << "," << schema.domain_column << "\n";
  char buf[48];
  for (const auto& ex : domain.examples) {
    if (ex.label < 0 || ex.label >= static_cast<int>(schema.label_vocabulary.size())) {
      throw LabelError("label " + std::to_string(ex.label) + " outside the csv vocabulary");
    }
    for (int b = 0; b < schema.bins; ++b) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(ex.features[b]));
      out << buf << ",";
    }
    out << schema.label_vocabulary[ex.label] << "," << domain.domain_id << "\n";
  }
}

// --- Splits ---------------------------------------------------------------------

DomainSplit split_domains(const std::vector<DomainPtr>& domains, const SplitCounts& counts,
                          std::uint64_t seed) {
  const int total = counts.train + counts.validation + counts.test;
  if (total != static_cast<int>(domains.size())) {
    throw ConfigError("split counts sum to " + std::to_string(total) + " but there are " +
                      std::to_string(domains.size()) + " domains");
  }
  std::vector<std::string> ids;
  for (const auto& d : domains) ids.push_back(d->domain_id);
  Rng rng = Rng::stream(seed, "split-domains");
  rng.shuffle(ids);
  DomainSplit split;
  split.train.assign(ids.begin(), ids.begin() + counts.train);
  split.validation.assign(ids.begin() + counts.train,
                          ids.begin() + counts.train + counts.validation);
  split.test.assign(ids.begin() + counts.train + counts.validation, ids.end());
  return split;
}

DomainSplit split_domains_explicit(const std::vector<DomainPtr>& domains,
                                   const std::vector<std::string>& train,
                                   const std::vector<std::string>& validation,
                                   const std::vector<std::string>& test) {
  std::set<std::string> known;
  for (const auto& d : domains) known.insert(d->domain_id);
  std::set<std::string> seen;
  for (const auto* list : {&train, &validation, &test}) {
    for (const auto& id : *list) {
      if (!known.count(id)) throw ConfigError("unknown domain id '" + id + "'");
      if (!seen.insert(id).second) throw ConfigError("domain '" + id + "' assigned twice");
    }
  }
  return {train, validation, test};
}

DomainPtr downsample_balanced(const DomainPtr& domain, std::uint64_t seed) {
  if (domain->examples.empty()) throw EmptyDataset("cannot downsample an empty domain");
  int min_count = -1;
  for (const auto& [label, count] : domain->class_counts) {
    min_count = min_count < 0 ? count : std::min(min_count, count);
    (void)label;
  }
  Rng rng = Rng::stream(seed, "downsample:" + domain->domain_id);
  std::vector<int> keep;
  for (const auto& [label, count] : domain->class_counts) {
    const auto pool = class_indices(*domain, label);
    for (int pick : rng.sample_without_replacement(pool.size(), min_count)) {
      keep.push_back(pool[pick]);
    }
    (void)count;
  }
  std::sort(keep.begin(), keep.end());
  auto out = std::make_shared<DomainDataset>();
  out->domain_id = domain->domain_id;
  out->descriptor = domain->descriptor;
  out->feature_shape = domain->feature_shape;
  for (int idx : keep) out->examples.push_back(domain->examples[idx]);
  finalize_counts(*out);
  return out;
}

std::vector<DomainPtr> select_domains(const std::vector<DomainPtr>& domains,
                                      const std::vector<std::string>& ids) {
  std::vector<DomainPtr> out;
  for (const auto& id : ids) {
    bool found = false;
    for (const auto& d : domains) {
      if (d->domain_id == id) {
        out.push_back(d);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("domain id '" + id + "' not found");
  }
  return out;
}

}  // namespace ocda
