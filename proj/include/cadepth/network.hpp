#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace cadepth {

// Layer widths of the blur-size classifier: 3x3 'same' convolutions, each
// followed by a rectifier and 2x2 mean pooling, then fully connected layers
// with rectifiers between them and a log-softmax head.
struct NetworkSpec {
  int input_size = 32;
  std::vector<int> conv_channels = {16, 32, 32};
  std::vector<int> fc_widths = {512, 256, 128, 64};  // hidden widths; the head adds `classes`
  int classes = 7;

  void validate() const;
  std::string describe() const;
  bool operator==(const NetworkSpec&) const = default;
};

// Where one layer's weights and biases sit in the flat parameter vector.
struct LayerSlot {
  Eigen::Index weight_offset = 0;
  int rows = 0;  // output units (channels)
  int cols = 0;  // inputs (in_channels * 9 for convolutions)
  Eigen::Index bias_offset = 0;
};

struct NetworkLayout {
  NetworkSpec spec;
  std::vector<LayerSlot> conv;
  std::vector<LayerSlot> fc;
  Eigen::Index size = 0;

  explicit NetworkLayout(NetworkSpec s);
};

struct NetworkParams {
  NetworkLayout layout;
  Eigen::VectorXd values;

  explicit NetworkParams(const NetworkSpec& spec);

  // He-uniform weights, zero biases.
  static NetworkParams initialize(const NetworkSpec& spec, std::uint64_t seed);

  Eigen::Map<const Eigen::MatrixXd> weight(const LayerSlot& slot) const {
    return {values.data() + slot.weight_offset, slot.rows, slot.cols};
  }
  Eigen::Map<const Eigen::VectorXd> bias(const LayerSlot& slot) const {
    return {values.data() + slot.bias_offset, slot.rows};
  }
};

// Per-sample cached activations needed by the backward pass.
// Samples are stacked along rows: row n * pixels + p is pixel p of sample n.
struct ConvCache {
  Eigen::MatrixXd columns;  // im2col of the layer input, (batch*pixels) x (in_channels*9)
  Eigen::MatrixXd pre;      // pre-activation, (batch*pixels) x channels
};

struct ForwardTrace {
  std::vector<ConvCache> conv;              // [layer]
  std::vector<Eigen::MatrixXd> fc_input;     // [layer] inputs x batch
  std::vector<Eigen::MatrixXd> fc_pre;       // [layer] pre-activations x batch
  Eigen::MatrixXd log_probs;                 // classes x batch
};

// inputs: one input_size x input_size feature per sample, stored row-major
// as a column of the matrix (pixels x batch).
ForwardTrace forward_trace(const NetworkParams& params, const Eigen::MatrixXd& inputs);

// Log-probabilities, batch x classes.
Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& inputs);

// Backpropagates d loss / d log_probs (classes x batch). Accumulates the
// parameter gradient into `grad` (same layout as params.values) and, if
// `input_grad` is non-null, writes d loss / d inputs (pixels x batch).
void backward(const NetworkParams& params, const Eigen::MatrixXd& inputs, const ForwardTrace& trace,
              const Eigen::MatrixXd& grad_log_probs, Eigen::VectorXd& grad,
              Eigen::MatrixXd* input_grad = nullptr);

// Signs of every rectifier input, for detecting kinks between two forward
// passes.
std::vector<bool> relu_pattern(const ForwardTrace& trace);

}  // namespace cadepth
