#include "ocda/config.hpp"

#include <json.hpp>

#include "ocda/serialize.hpp"

namespace ocda {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (dataset.kind != "rainbow" && dataset.kind != "synthetic-pump" && dataset.kind != "csv") {
    throw ConfigError("dataset.kind must be rainbow | synthetic-pump | csv");
  }
  if (model.kind != "rainbow-cnn" && model.kind != "pump-cnn" && model.kind != "custom") {
    throw ConfigError("model.kind must be rainbow-cnn | pump-cnn | custom");
  }
  if (model.kind == "custom" && model.custom_path.empty()) {
    throw ConfigError("model.kind=custom requires model.path");
  }
  if (method.kind != "maml" && method.kind != "ocda-maml" && method.kind != "standard-learning") {
    throw ConfigError("method.kind must be maml | ocda-maml | standard-learning");
  }
  if (method.kind == "ocda-maml" && !method.normal_class) {
    throw ConfigError("method.kind=ocda-maml requires normal_class");
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (out_dir.empty()) throw ConfigError("out directory required");
  if (dataset.kind == "csv" && dataset.csv_paths.empty()) {
    throw ConfigError("dataset.kind=csv requires csv paths");
  }
  method.hyper.validate();
  if (dataset.kind == "synthetic-pump") dataset.spectrum.validate();
}

namespace {

json hyper_to_json(const HyperParams& hp) {
  return {{"inner_lr", hp.inner_lr},
          {"outer_lr", hp.outer_lr},
          {"inner_steps", hp.inner_steps},
          {"shots", hp.shots},
          {"meta_batch_size", hp.meta_batch_size},
          {"max_iterations", hp.max_iterations},
          {"weight_decay", hp.weight_decay},
          {"decoupled_decay", hp.decoupled_decay},
          {"adam_beta1", hp.adam_beta1},
          {"adam_beta2", hp.adam_beta2},
          {"adam_eps", hp.adam_eps},
          {"early_stop_patience", hp.early_stop_patience},
          {"eval_interval", hp.eval_interval},
          {"batch_size", hp.batch_size}};
}

HyperParams hyper_from_json(const json& j) {
  HyperParams hp;
  hp.inner_lr = j.value("inner_lr", hp.inner_lr);
  hp.outer_lr = j.value("outer_lr", hp.outer_lr);
  hp.inner_steps = j.value("inner_steps", hp.inner_steps);
  hp.shots = j.value("shots", hp.shots);
  hp.meta_batch_size = j.value("meta_batch_size", hp.meta_batch_size);
  hp.max_iterations = j.value("max_iterations", hp.max_iterations);
  hp.weight_decay = j.value("weight_decay", hp.weight_decay);
  hp.decoupled_decay = j.value("decoupled_decay", hp.decoupled_decay);
  hp.adam_beta1 = j.value("adam_beta1", hp.adam_beta1);
  hp.adam_beta2 = j.value("adam_beta2", hp.adam_beta2);
  hp.adam_eps = j.value("adam_eps", hp.adam_eps);
  hp.early_stop_patience = j.value("early_stop_patience", hp.early_stop_patience);
  hp.eval_interval = j.value("eval_interval", hp.eval_interval);
  hp.batch_size = j.value("batch_size", hp.batch_size);
  return hp;
}

json spectrum_to_json(const SpectrumConfig& cfg) {
  json effects = json::array();
  for (const auto& ce : cfg.class_effects) {
    json peaks = json::array();
    for (const auto& p : ce.peaks) {
      peaks.push_back({{"center", p.center}, {"amplitude", p.amplitude}, {"width", p.width}});
    }
    effects.push_back({{"label", ce.label},
                       {"mod_gain", ce.mod_gain},
                       {"mod_center", ce.mod_center},
                       {"mod_width", ce.mod_width},
                       {"peaks", peaks}});
  }
  return {{"bins", cfg.bins},
          {"noise_scale", cfg.noise_scale},
          {"envelope_floor", cfg.envelope_floor},
          {"domain_peak_jitter", cfg.domain_peak_jitter},
          {"domain_gain_spread", cfg.domain_gain_spread},
          {"class_effects", effects}};
}

SpectrumConfig spectrum_from_json(const json& j) {
  SpectrumConfig cfg = default_pump_config();
  cfg.bins = j.value("bins", cfg.bins);
  cfg.noise_scale = j.value("noise_scale", cfg.noise_scale);
  cfg.envelope_floor = j.value("envelope_floor", cfg.envelope_floor);
  cfg.domain_peak_jitter = j.value("domain_peak_jitter", cfg.domain_peak_jitter);
  cfg.domain_gain_spread = j.value("domain_gain_spread", cfg.domain_gain_spread);
  if (j.contains("class_effects")) {
    cfg.class_effects.clear();
    for (const auto& e : j.at("class_effects")) {
      ClassEffect ce;
      ce.label = e.at("label").get<std::string>();
      ce.mod_gain = e.value("mod_gain", 0.0);
      ce.mod_center = e.value("mod_center", 0.0);
      ce.mod_width = e.value("mod_width", 40.0);
      if (e.contains("peaks")) {
        for (const auto& p : e.at("peaks")) {
          ce.peaks.push_back({p.at("center").get<double>(), p.at("amplitude").get<double>(),
                              p.value("width", 2.0)});
        }
      }
      cfg.class_effects.push_back(std::move(ce));
    }
  }
  return cfg;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = {{"kind", dataset.kind}, {"seed", dataset.seed}};
  if (dataset.kind == "rainbow") {
    j["dataset"]["images"] = dataset.images_path;
    j["dataset"]["labels"] = dataset.labels_path;
    j["dataset"]["synth_count"] = dataset.synth_count;
  } else if (dataset.kind == "synthetic-pump") {
    j["dataset"]["domain_count"] = dataset.domain_count;
    j["dataset"]["per_class"] = dataset.per_class;
    j["dataset"]["spectrum"] = spectrum_to_json(dataset.spectrum);
  } else if (dataset.kind == "csv") {
    j["dataset"]["paths"] = dataset.csv_paths;
    j["dataset"]["schema"] = {{"bins", dataset.schema.bins},
                              {"bin_prefix", dataset.schema.bin_prefix},
                              {"label_column", dataset.schema.label_column},
                              {"domain_column", dataset.schema.domain_column},
                              {"labels", dataset.schema.label_vocabulary}};
  }
  if (split.explicit_assignment) {
    j["split"] = {{"train", split.train}, {"validation", split.validation},
                  {"test", split.test}};
  } else {
    j["split"] = {{"train", split.counts.train},
                  {"validation", split.counts.validation},
                  {"test", split.counts.test},
                  {"seed", split.seed}};
  }
  j["model"] = {{"kind", model.kind}};
  if (!model.custom_path.empty()) j["model"]["path"] = model.custom_path;
  j["method"] = {{"kind", method.kind},
                 {"hyper", hyper_to_json(method.hyper)},
                 {"supports_per_domain", method.supports_per_domain}};
  if (method.normal_class) j["method"]["normal_class"] = *method.normal_class;
  j["analysis"] = {{"alphas", analysis.alphas}, {"tasks", analysis.tasks}};
  j["seeds"] = seeds;
  j["out"] = out_dir;
  return j.dump(2);
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(to_json()); }

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const json& d = j.at("dataset");
    cfg.dataset.kind = d.at("kind").get<std::string>();
    cfg.dataset.seed = d.value("seed", 0);
    if (cfg.dataset.kind == "rainbow") {
      cfg.dataset.images_path = d.value("images", "");
      cfg.dataset.labels_path = d.value("labels", "");
      cfg.dataset.synth_count = d.value("synth_count", 60000);
    } else if (cfg.dataset.kind == "synthetic-pump") {
      cfg.dataset.domain_count = d.value("domain_count", 32);
      cfg.dataset.per_class = d.value("per_class", 60);
      if (d.contains("spectrum")) cfg.dataset.spectrum = spectrum_from_json(d.at("spectrum"));
    } else if (cfg.dataset.kind == "csv") {
      cfg.dataset.csv_paths = d.value("paths", std::vector<std::string>{});
      if (d.contains("schema")) {
        const json& s = d.at("schema");
        cfg.dataset.schema.bins = s.value("bins", 256);
        cfg.dataset.schema.bin_prefix = s.value("bin_prefix", "bin_");
        cfg.dataset.schema.label_column = s.value("label_column", "label");
        cfg.dataset.schema.domain_column = s.value("domain_column", "domain");
        cfg.dataset.schema.label_vocabulary =
            s.value("labels", std::vector<std::string>{});
      }
    }

    const json& sp = j.at("split");
    if (sp.contains("train") && sp.at("train").is_array()) {
      cfg.split.explicit_assignment = true;
      cfg.split.train = sp.at("train").get<std::vector<std::string>>();
      cfg.split.validation = sp.value("validation", std::vector<std::string>{});
      cfg.split.test = sp.value("test", std::vector<std::string>{});
    } else {
      cfg.split.counts.train = sp.value("train", 0);
      cfg.split.counts.validation = sp.value("validation", 0);
      cfg.split.counts.test = sp.value("test", 0);
      cfg.split.seed = sp.value("seed", 0);
    }

    cfg.model.kind = j.at("model").at("kind").get<std::string>();
    cfg.model.custom_path = j.at("model").value("path", "");

    const json& m = j.at("method");
    cfg.method.kind = m.at("kind").get<std::string>();
    if (m.contains("hyper")) cfg.method.hyper = hyper_from_json(m.at("hyper"));
    if (m.contains("normal_class")) cfg.method.normal_class = m.at("normal_class").get<int>();
    cfg.method.supports_per_domain = m.value("supports_per_domain", 1);

    if (j.contains("analysis")) {
      cfg.analysis.alphas =
          j.at("analysis").value("alphas", std::vector<double>{0.02, 0.01, 0.005});
      cfg.analysis.tasks = j.at("analysis").value("tasks", 5);
    }
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.out_dir = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_json(read_text_file(path));
}

ModelSpec build_model(const ModelBlock& block, int class_count) {
  if (block.kind == "rainbow-cnn") return build_rainbow_cnn(class_count);
  if (block.kind == "pump-cnn") return build_pump_cnn(class_count);
  if (block.kind == "custom") {
    ModelSpec spec = spec_from_json(read_text_file(block.custom_path));
    if (spec.class_count != class_count) {
      throw ConfigError("custom model class_count " + std::to_string(spec.class_count) +
                        " disagrees with the dataset's " + std::to_string(class_count));
    }
    return spec;
  }
  throw ConfigError("unknown model kind '" + block.kind + "'");
}

}  // namespace ocda
