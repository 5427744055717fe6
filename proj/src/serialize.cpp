#include "ocda/serialize.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace ocda {

using nlohmann::json;

namespace {

constexpr char kDomainMagic[8] = {'O', 'C', 'D', 'A', 'D', 'O', 'M', '1'};
constexpr char kCkptMagic[8] = {'O', 'C', 'D', 'A', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("truncated file " + path);
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("truncated file " + path);
  return v;
}

void write_blob(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), s.size());
}

std::string read_blob(std::istream& in, const std::string& path) {
  const std::uint64_t n = read_u64(in, path);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw IoError("truncated blob in " + path);
  return s;
}

void check_magic(std::istream& in, const char (&magic)[8], const std::string& path) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) {
    throw FormatError("bad magic in " + path + " at byte 0");
  }
}

}  // namespace

std::string descriptor_to_json(const DomainDescriptor& d) {
  json j;
  switch (d.kind) {
    case DomainDescriptor::Kind::Rainbow:
      j["kind"] = "rainbow";
      j["color"] = d.rainbow.color;
      j["rotation"] = d.rainbow.rotation;
      j["scale"] = d.rainbow.scale;
      break;
    case DomainDescriptor::Kind::Pump:
      j["kind"] = "pump";
      j["unit"] = d.pump.unit;
      j["surface"] = d.pump.surface;
      j["session"] = d.pump.session;
      break;
    case DomainDescriptor::Kind::Plain:
      j["kind"] = "plain";
      break;
  }
  return j.dump();
}

DomainDescriptor descriptor_from_json(const std::string& text) {
  DomainDescriptor d;
  try {
    const json j = json::parse(text);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rainbow") {
      d.kind = DomainDescriptor::Kind::Rainbow;
      d.rainbow.color = j.at("color").get<std::string>();
      d.rainbow.rotation = j.at("rotation").get<int>();
      d.rainbow.scale = j.at("scale").get<std::string>();
    } else if (kind == "pump") {
      d.kind = DomainDescriptor::Kind::Pump;
      d.pump.unit = j.at("unit").get<std::string>();
      d.pump.surface = j.at("surface").get<std::string>();
      d.pump.session = j.at("session").get<int>();
    } else if (kind == "plain") {
      d.kind = DomainDescriptor::Kind::Plain;
    } else {
      throw FormatError("unknown descriptor kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("descriptor json: ") + e.what());
  }
  return d;
}

void save_domain(const std::string& path, const DomainDataset& domain) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kDomainMagic, 8);
  write_u32(out, kVersion);
  json header;
  header["domain_id"] = domain.domain_id;
  header["descriptor"] = json::parse(descriptor_to_json(domain.descriptor));
  header["feature_shape"] = domain.feature_shape;
  header["count"] = domain.examples.size();
  write_blob(out, header.dump());
  const std::size_t per_ex = shape_size(domain.feature_shape);
  for (const auto& ex : domain.examples) {
    const std::int32_t label = ex.label;
    out.write(reinterpret_cast<const char*>(&label), sizeof(label));
    out.write(reinterpret_cast<const char*>(ex.features.data()), per_ex * sizeof(float));
  }
  if (!out) throw IoError("short write to " + path);
}

DomainPtr load_domain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  check_magic(in, kDomainMagic, path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw FormatError(path + ": unsupported domain version " + std::to_string(version));
  }
  auto d = std::make_shared<DomainDataset>();
  std::size_t count = 0;
  try {
    const json header = json::parse(read_blob(in, path));
    d->domain_id = header.at("domain_id").get<std::string>();
    d->descriptor = descriptor_from_json(header.at("descriptor").dump());
    d->feature_shape = header.at("feature_shape").get<Shape>();
    count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(path + ": domain header: " + e.what());
  }
  const std::size_t per_ex = shape_size(d->feature_shape);
  for (std::size_t i = 0; i < count; ++i) {
    LabeledExample ex;
    std::int32_t label = 0;
    in.read(reinterpret_cast<char*>(&label), sizeof(label));
    ex.label = label;
    ex.features.resize(per_ex);
    in.read(reinterpret_cast<char*>(ex.features.data()), per_ex * sizeof(float));
    if (!in) {
      throw IoError(path + ": truncated at example " + std::to_string(i) + " (byte " +
                    std::to_string(in.tellg()) + ")");
    }
    d->examples.push_back(std::move(ex));
  }
  finalize_counts(*d);
  return d;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kCkptMagic, 8);
  write_u32(out, kVersion);
  write_u64(out, ckpt.arch_hash);
  write_u64(out, ckpt.config_hash);
  write_u64(out, ckpt.seed);
  json header;
  header["iteration"] = ckpt.iteration;
  header["best_iteration"] = ckpt.best_iteration;
  header["param_count"] = ckpt.params.values.size();
  header["layout"] = json::array();
  for (const auto& e : ckpt.params.layout->entries()) {
    header["layout"].push_back({{"name", e.name}, {"offset", e.offset}, {"size", e.size},
                                {"shape", e.shape}});
  }
  write_blob(out, header.dump());
  auto write_vec = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  };
  write_vec(ckpt.params.values);
  write_vec(ckpt.adam_m.values);
  write_vec(ckpt.adam_v.values);
  if (!out) throw IoError("short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  check_magic(in, kCkptMagic, path);
  const std::uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw FormatError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.arch_hash = read_u64(in, path);
  ckpt.config_hash = read_u64(in, path);
  ckpt.seed = read_u64(in, path);
  std::size_t count = 0;
  std::vector<LayoutEntry> entries;
  try {
    const json header = json::parse(read_blob(in, path));
    ckpt.iteration = header.at("iteration").get<std::int64_t>();
    ckpt.best_iteration = header.at("best_iteration").get<std::int64_t>();
    count = header.at("param_count").get<std::size_t>();
    for (const auto& e : header.at("layout")) {
      entries.push_back({e.at("name").get<std::string>(), e.at("offset").get<std::size_t>(),
                         e.at("size").get<std::size_t>(), e.at("shape").get<Shape>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": checkpoint header: " + e.what());
  }
  auto layout = std::make_shared<Layout>(std::move(entries));
  if (layout->total() != count) throw FormatError(path + ": layout/param count mismatch");
  auto read_vec = [&](std::vector<double>& v) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), count * sizeof(double));
    if (!in) throw IoError(path + ": truncated parameter data");
  };
  ckpt.params.layout = layout;
  ckpt.adam_m.layout = layout;
  ckpt.adam_v.layout = layout;
  read_vec(ckpt.params.values);
  read_vec(ckpt.adam_m.values);
  read_vec(ckpt.adam_v.values);
  return ckpt;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(content.data(), content.size());
  if (!out) throw IoError("short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ocda
