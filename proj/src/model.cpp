#include "ocda/model.hpp"

#include <json.hpp>

#include <cmath>

#include "ocda/rng.hpp"
#include "src/engine.hpp"

namespace ocda {

using nlohmann::json;

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::BatchNorm: return "batch_norm";
    case LayerKind::Relu: return "relu";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::MaxPool2d: return "max_pool2d";
    case LayerKind::MaxPool1d: return "max_pool1d";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Linear: return "linear";
    case LayerKind::Softmax: return "softmax";
  }
  throw SpecError("unknown layer kind");
}

LayerKind layer_kind_from_string(const std::string& s) {
  for (LayerKind k : {LayerKind::Conv2d, LayerKind::Conv1d, LayerKind::BatchNorm, LayerKind::Relu,
                      LayerKind::Tanh, LayerKind::MaxPool2d, LayerKind::MaxPool1d,
                      LayerKind::Flatten, LayerKind::Linear, LayerKind::Softmax}) {
    if (to_string(k) == s) return k;
  }
  throw SpecError("unknown layer kind '" + s + "'");
}

namespace {

// Canonical (C, H, W) view of a per-example shape; 1-D signals get H = 1.
Shape canonical3(const Shape& s) {
  if (s.size() == 3) return s;
  if (s.size() == 2) return {s[0], 1, s[1]};
  throw SpecError("expected a 2- or 3-dim feature shape");
}

}  // namespace

void propagate_shapes(ModelSpec& spec) {
  if (spec.class_count < 2) throw SpecError("class_count must be >= 2");
  if (spec.layers.empty() || spec.layers.back().kind != LayerKind::Softmax) {
    throw SpecError("final layer must be softmax");
  }
  Shape cur = spec.input_shape;
  for (auto& layer : spec.layers) {
    layer.in_shape = cur;
    switch (layer.kind) {
      case LayerKind::Conv2d: {
        const Shape c3 = canonical3(cur);
        if (c3[0] != layer.in_channels) throw SpecError("conv2d channel mismatch");
        const int ph = layer.same_padding ? (layer.kernel_h - 1) / 2 : 0;
        const int pw = layer.same_padding ? (layer.kernel_w - 1) / 2 : 0;
        const int oh = c3[1] + 2 * ph - layer.kernel_h + 1;
        const int ow = c3[2] + 2 * pw - layer.kernel_w + 1;
        if (oh <= 0 || ow <= 0) throw SpecError("conv2d output collapses");
        cur = {layer.out_channels, oh, ow};
        break;
      }
      case LayerKind::Conv1d: {
        const Shape c3 = canonical3(cur);
        if (c3[0] != layer.in_channels || c3[1] != 1) throw SpecError("conv1d shape mismatch");
        const int ol = c3[2] - layer.kernel_w + 1;
        if (ol <= 0) throw SpecError("conv1d output collapses");
        cur = {layer.out_channels, 1, ol};
        break;
      }
      case LayerKind::BatchNorm: {
        const Shape c3 = canonical3(cur);
        if (c3[0] != layer.in_channels) throw SpecError("batch_norm channel mismatch");
        cur = canonical3(cur);
        break;
      }
      case LayerKind::Relu:
      case LayerKind::Tanh:
        break;
      case LayerKind::MaxPool2d: {
        const Shape c3 = canonical3(cur);
        const int oh = c3[1] / layer.pool;
        const int ow = c3[2] / layer.pool;
        if (oh < 1 || ow < 1) throw SpecError("max_pool2d output collapses");
        cur = {c3[0], oh, ow};
        break;
      }
      case LayerKind::MaxPool1d: {
        const Shape c3 = canonical3(cur);
        if (c3[1] != 1) throw SpecError("max_pool1d expects 1-D input");
        const int ow = c3[2] / layer.pool;
        if (ow < 1) throw SpecError("max_pool1d output collapses");
        cur = {c3[0], 1, ow};
        break;
      }
      case LayerKind::Flatten:
        cur = {static_cast<int>(shape_size(cur))};
        break;
      case LayerKind::Linear: {
        if (cur.size() != 1) throw SpecError("linear expects flat input");
        if (cur[0] != layer.in_features) {
          throw SpecError("linear in_features mismatch: expected " + std::to_string(cur[0]) +
                          ", declared " + std::to_string(layer.in_features));
        }
        cur = {layer.out_features};
        break;
      }
      case LayerKind::Softmax: {
        if (cur.size() != 1 || cur[0] != spec.class_count) {
          throw SpecError("softmax input width must equal class_count");
        }
        break;
      }
    }
    layer.out_shape = cur;
  }
}

ModelSpec build_rainbow_cnn(int class_count) {
  if (class_count < 2) throw SpecError("class_count must be >= 2");
  ModelSpec spec;
  spec.input_shape = {3, 28, 28};
  spec.class_count = class_count;
  int channels = 3;
  int side = 28;
  for (int block = 0; block < 4; ++block) {
    LayerDesc conv{.kind = LayerKind::Conv2d,
                   .in_channels = channels,
                   .out_channels = 32,
                   .kernel_h = 3,
                   .kernel_w = 3,
                   .same_padding = true};
    spec.layers.push_back(conv);
    spec.layers.push_back({.kind = LayerKind::BatchNorm, .in_channels = 32});
    spec.layers.push_back({.kind = LayerKind::Relu});
    spec.layers.push_back({.kind = LayerKind::MaxPool2d, .pool = 2});
    channels = 32;
    side /= 2;
  }
  spec.layers.push_back({.kind = LayerKind::Flatten});
  spec.layers.push_back({.kind = LayerKind::Linear,
                         .in_features = 32 * side * side,
                         .out_features = class_count});
  spec.layers.push_back({.kind = LayerKind::Softmax});
  propagate_shapes(spec);
  return spec;
}

ModelSpec build_pump_cnn(int class_count) {
  if (class_count < 2) throw SpecError("class_count must be >= 2");
  ModelSpec spec;
  spec.input_shape = {1, 256};
  spec.class_count = class_count;
  int channels = 1;
  int length = 256;
  for (int block = 0; block < 3; ++block) {
    spec.layers.push_back({.kind = LayerKind::Conv1d,
                           .in_channels = channels,
                           .out_channels = 32,
                           .kernel_w = 5});
    spec.layers.push_back({.kind = LayerKind::MaxPool1d, .pool = 2});
    spec.layers.push_back({.kind = LayerKind::Relu});
    channels = 32;
    length = (length - 4) / 2;
  }
  spec.layers.push_back({.kind = LayerKind::Flatten});
  spec.layers.push_back({.kind = LayerKind::Linear,
                         .in_features = 32 * length,
                         .out_features = class_count});
  spec.layers.push_back({.kind = LayerKind::Softmax});
  propagate_shapes(spec);
  return spec;
}

ModelSpec build_mlp(const Shape& input_shape, const std::vector<int>& hidden, int class_count,
                    LayerKind activation) {
  if (class_count < 2) throw SpecError("class_count must be >= 2");
  if (activation != LayerKind::Tanh && activation != LayerKind::Relu) {
    throw SpecError("mlp activation must be tanh or relu");
  }
  ModelSpec spec;
  spec.input_shape = input_shape;
  spec.class_count = class_count;
  int features = static_cast<int>(shape_size(input_shape));
  if (input_shape.size() != 1) {
    spec.layers.push_back({.kind = LayerKind::Flatten});
  }
  for (int width : hidden) {
    spec.layers.push_back(
        {.kind = LayerKind::Linear, .in_features = features, .out_features = width});
    spec.layers.push_back({.kind = activation});
    features = width;
  }
  spec.layers.push_back(
      {.kind = LayerKind::Linear, .in_features = features, .out_features = class_count});
  spec.layers.push_back({.kind = LayerKind::Softmax});
  propagate_shapes(spec);
  return spec;
}

std::vector<ParamSlot> param_slots(const ModelSpec& spec) {
  std::vector<ParamSlot> slots;
  std::size_t offset = 0;
  auto push = [&](std::string name, Shape shape, ParamSlot::Init init, int fan_in) {
    ParamSlot s;
    s.name = std::move(name);
    s.shape = std::move(shape);
    s.offset = offset;
    s.size = shape_size(s.shape);
    s.init = init;
    s.fan_in = fan_in;
    offset += s.size;
    slots.push_back(std::move(s));
  };
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& l = spec.layers[i];
    const std::string prefix = "layer" + std::to_string(i);
    switch (l.kind) {
      case LayerKind::Conv2d:
        push(prefix + ".weight", {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w},
             ParamSlot::Init::FanInUniform, l.in_channels * l.kernel_h * l.kernel_w);
        push(prefix + ".bias", {l.out_channels}, ParamSlot::Init::Zero, 0);
        break;
      case LayerKind::Conv1d:
        push(prefix + ".weight", {l.out_channels, l.in_channels, l.kernel_w},
             ParamSlot::Init::FanInUniform, l.in_channels * l.kernel_w);
        push(prefix + ".bias", {l.out_channels}, ParamSlot::Init::Zero, 0);
        break;
      case LayerKind::BatchNorm:
        push(prefix + ".scale", {l.in_channels}, ParamSlot::Init::One, 0);
        push(prefix + ".shift", {l.in_channels}, ParamSlot::Init::Zero, 0);
        break;
      case LayerKind::Linear:
        push(prefix + ".weight", {l.out_features, l.in_features}, ParamSlot::Init::FanInUniform,
             l.in_features);
        push(prefix + ".bias", {l.out_features}, ParamSlot::Init::Zero, 0);
        break;
      default:
        break;
    }
  }
  return slots;
}

LayoutPtr make_layout(const ModelSpec& spec) {
  std::vector<LayoutEntry> entries;
  for (const auto& s : param_slots(spec)) {
    entries.push_back({s.name, s.offset, s.size, s.shape});
  }
  return std::make_shared<Layout>(std::move(entries));
}

ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  auto layout = make_layout(spec);
  ParameterVector p{layout, std::vector<double>(layout->total(), 0.0)};
  Rng rng = Rng::stream(seed, "init_params");
  for (const auto& s : param_slots(spec)) {
    switch (s.init) {
      case ParamSlot::Init::FanInUniform: {
        const double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in));
        for (std::size_t i = 0; i < s.size; ++i) {
          p.values[s.offset + i] = rng.uniform(-bound, bound);
        }
        break;
      }
      case ParamSlot::Init::One:
        for (std::size_t i = 0; i < s.size; ++i) p.values[s.offset + i] = 1.0;
        break;
      case ParamSlot::Init::Zero:
        break;
    }
  }
  return p;
}

PredictionBatch forward(const ModelSpec& spec, const ParameterVector& params,
                        const Tensor<double>& batch) {
  return engine::predict(spec, params, batch);
}

std::string spec_to_json(const ModelSpec& spec) {
  json j;
  j["input_shape"] = spec.input_shape;
  j["class_count"] = spec.class_count;
  j["layers"] = json::array();
  for (const auto& l : spec.layers) {
    json lj;
    lj["kind"] = to_string(l.kind);
    switch (l.kind) {
      case LayerKind::Conv2d:
        lj["in_channels"] = l.in_channels;
        lj["out_channels"] = l.out_channels;
        lj["kernel"] = {l.kernel_h, l.kernel_w};
        lj["padding"] = l.same_padding ? "same" : "valid";
        break;
      case LayerKind::Conv1d:
        lj["in_channels"] = l.in_channels;
        lj["out_channels"] = l.out_channels;
        lj["kernel"] = l.kernel_w;
        lj["padding"] = "valid";
        break;
      case LayerKind::BatchNorm:
        lj["channels"] = l.in_channels;
        break;
      case LayerKind::MaxPool2d:
      case LayerKind::MaxPool1d:
        lj["size"] = l.pool;
        break;
      case LayerKind::Linear:
        lj["in_features"] = l.in_features;
        lj["out_features"] = l.out_features;
        break;
      default:
        break;
    }
    lj["in_shape"] = l.in_shape;
    lj["out_shape"] = l.out_shape;
    j["layers"].push_back(lj);
  }
  return j.dump(2);
}

ModelSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model spec json: ") + e.what());
  }
  ModelSpec spec;
  try {
    spec.input_shape = j.at("input_shape").get<Shape>();
    spec.class_count = j.at("class_count").get<int>();
    for (const auto& lj : j.at("layers")) {
      LayerDesc l;
      l.kind = layer_kind_from_string(lj.at("kind").get<std::string>());
      switch (l.kind) {
        case LayerKind::Conv2d:
          l.in_channels = lj.at("in_channels").get<int>();
          l.out_channels = lj.at("out_channels").get<int>();
          l.kernel_h = lj.at("kernel").at(0).get<int>();
          l.kernel_w = lj.at("kernel").at(1).get<int>();
          l.same_padding = lj.at("padding").get<std::string>() == "same";
          break;
        case LayerKind::Conv1d:
          l.in_channels = lj.at("in_channels").get<int>();
          l.out_channels = lj.at("out_channels").get<int>();
          l.kernel_w = lj.at("kernel").get<int>();
          break;
        case LayerKind::BatchNorm:
          l.in_channels = lj.at("channels").get<int>();
          break;
        case LayerKind::MaxPool2d:
        case LayerKind::MaxPool1d:
          l.pool = lj.at("size").get<int>();
          break;
        case LayerKind::Linear:
          l.in_features = lj.at("in_features").get<int>();
          l.out_features = lj.at("out_features").get<int>();
          break;
        default:
          break;
      }
      spec.layers.push_back(l);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model spec json: ") + e.what());
  }
  propagate_shapes(spec);
  return spec;
}

std::uint64_t architecture_hash(const ModelSpec& spec) { return fnv1a64(spec_to_json(spec)); }

}  // namespace ocda
