#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ocda/params.hpp"
#include "ocda/tensor.hpp"

namespace ocda {

enum class LayerKind {
  Conv2d,
  Conv1d,
  BatchNorm,
  Relu,
  Tanh,
  MaxPool2d,
  MaxPool1d,
  Flatten,
  Linear,
  Softmax,
};

std::string to_string(LayerKind k);
LayerKind layer_kind_from_string(const std::string& s);

struct LayerDesc {
  LayerKind kind;
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 0;   // conv2d only
  int kernel_w = 0;   // conv2d width / conv1d kernel size
  bool same_padding = false;
  int pool = 0;       // pooling window == stride
  int in_features = 0;
  int out_features = 0;
  // Per-example shapes, filled by propagate_shapes. The batch dimension is
  // implicit and never part of these.
  Shape in_shape;
  Shape out_shape;
};

// Architecture description decoupled from parameters. The final layer is
// always Softmax over class_count outputs.
struct ModelSpec {
  Shape input_shape;    // per-example, e.g. {3, 28, 28} or {1, 256}
  int class_count = 0;
  std::vector<LayerDesc> layers;
};

// Row-stochastic probabilities, rows = examples, columns = classes.
struct PredictionBatch {
  Tensor<double> probabilities;  // shape {B, class_count}
};

// Fills every layer's in/out shapes and validates consecutive compatibility.
// Throws SpecError on malformed specs.
void propagate_shapes(ModelSpec& spec);

// 4 blocks of [conv2d 32@3x3 'same' -> batch-norm -> relu -> max-pool 2x2],
// flatten, linear, softmax. Input 28x28 RGB.
ModelSpec build_rainbow_cnn(int class_count);

// 3 blocks of [conv1d 32@5 valid -> max-pool 2 -> relu], flatten, linear,
// softmax. Input 1x256.
ModelSpec build_pump_cnn(int class_count);

// Fully-connected stack with the given activation between linear layers;
// used by the analysis suite and tests.
ModelSpec build_mlp(const Shape& input_shape, const std::vector<int>& hidden,
                    int class_count, LayerKind activation = LayerKind::Tanh);

LayoutPtr make_layout(const ModelSpec& spec);

// Deterministic per seed: weights uniform in +-sqrt(6/fan_in), biases zero,
// batch-norm scale 1 / shift 0.
ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Full forward pass including the softmax layer.
PredictionBatch forward(const ModelSpec& spec, const ParameterVector& params,
                        const Tensor<double>& batch);

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const std::string& text);

// Hash of the canonical serialized architecture; stored in checkpoints and
// manifests so mismatched evaluations fail loudly.
std::uint64_t architecture_hash(const ModelSpec& spec);

}  // namespace ocda
