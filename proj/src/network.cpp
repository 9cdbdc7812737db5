#include "cadepth/network.hpp"

#include "cadepth/errors.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace cadepth {

void NetworkSpec::validate() const {
  if (input_size < 1) throw InvalidConfiguration("network: input size must be positive");
  int side = input_size;
  for (int c : conv_channels) {
    if (c < 1) throw InvalidConfiguration("network: convolution channel counts must be positive");
    if (side % 2 != 0) throw InvalidConfiguration("network: pooling needs an even feature side");
    side /= 2;
  }
  for (int w : fc_widths)
    if (w < 1) throw InvalidConfiguration("network: fully connected widths must be positive");
  if (classes < 1) throw InvalidConfiguration("network: class count must be positive");
}

std::string NetworkSpec::describe() const {
  std::ostringstream os;
  os << "input=" << input_size << " conv=";
  for (size_t i = 0; i < conv_channels.size(); ++i) os << (i ? "/" : "") << conv_channels[i];
  os << " fc=";
  for (int w : fc_widths) os << w << "-";
  os << classes;
  return os.str();
}

NetworkLayout::NetworkLayout(NetworkSpec s) : spec(std::move(s)) {
  spec.validate();
  Eigen::Index offset = 0;
  auto add = [&offset](int rows, int cols) {
    LayerSlot slot{offset, rows, cols, offset + static_cast<Eigen::Index>(rows) * cols};
    offset = slot.bias_offset + rows;
    return slot;
  };
  int in_channels = 1;
  int side = spec.input_size;
  for (int c : spec.conv_channels) {
    conv.push_back(add(c, in_channels * 9));
    in_channels = c;
    side /= 2;
  }
  int in = in_channels * side * side;
  for (int w : spec.fc_widths) {
    fc.push_back(add(w, in));
    in = w;
  }
  fc.push_back(add(spec.classes, in));
  size = offset;
}

NetworkParams::NetworkParams(const NetworkSpec& spec)
    : layout(spec), values(Eigen::VectorXd::Zero(layout.size)) {}

NetworkParams NetworkParams::initialize(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkParams p(spec);
  std::mt19937_64 rng(seed);
  auto fill = [&](const LayerSlot& slot) {
    const double bound = std::sqrt(6.0 / slot.cols);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(slot.rows) * slot.cols; ++i)
      p.values[slot.weight_offset + i] = dist(rng);
  };
  for (const auto& s : p.layout.conv) fill(s);
  for (const auto& s : p.layout.fc) fill(s);
  return p;
}

namespace {

// Activations are (batch*side*side) x channels; every sample occupies a
// contiguous block of rows.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& in, int side) {
  const Eigen::Index channels = in.cols();
  const int pixels = side * side;
  const Eigen::Index batch = in.rows() / pixels;
  Eigen::MatrixXd cols(in.rows(), channels * 9);
  for (Eigen::Index ch = 0; ch < channels; ++ch)
    for (int ki = 0; ki < 3; ++ki)
      for (int kj = 0; kj < 3; ++kj) {
        double* dst = cols.col(ch * 9 + ki * 3 + kj).data();
        const double* src = in.col(ch).data();
        for (Eigen::Index n = 0; n < batch; ++n, dst += pixels, src += pixels)
          for (int r = 0; r < side; ++r) {
            const int sr = r + ki - 1;
            for (int c = 0; c < side; ++c) {
              const int sc = c + kj - 1;
              dst[r * side + c] = (sr < 0 || sr >= side || sc < 0 || sc >= side) ? 0.0 : src[sr * side + sc];
            }
          }
      }
  return cols;
}

Eigen::MatrixXd col2im(const Eigen::MatrixXd& cols, int channels, int side) {
  const int pixels = side * side;
  const Eigen::Index batch = cols.rows() / pixels;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cols.rows(), channels);
  for (int ch = 0; ch < channels; ++ch)
    for (int ki = 0; ki < 3; ++ki)
      for (int kj = 0; kj < 3; ++kj) {
        const double* src = cols.col(ch * 9 + ki * 3 + kj).data();
        double* dst = out.col(ch).data();
        for (Eigen::Index n = 0; n < batch; ++n, dst += pixels, src += pixels)
          for (int r = 0; r < side; ++r) {
            const int sr = r + ki - 1;
            if (sr < 0 || sr >= side) continue;
            for (int c = 0; c < side; ++c) {
              const int sc = c + kj - 1;
              if (sc < 0 || sc >= side) continue;
              dst[sr * side + sc] += src[r * side + c];
            }
          }
      }
  return out;
}

Eigen::MatrixXd mean_pool(const Eigen::MatrixXd& in, int side) {
  const int half = side / 2;
  const int pixels = side * side;
  const Eigen::Index batch = in.rows() / pixels;
  Eigen::MatrixXd out(batch * half * half, in.cols());
  for (Eigen::Index ch = 0; ch < in.cols(); ++ch)
    for (Eigen::Index n = 0; n < batch; ++n) {
      const double* src = in.col(ch).data() + n * pixels;
      double* dst = out.col(ch).data() + n * half * half;
      for (int r = 0; r < half; ++r)
        for (int c = 0; c < half; ++c) {
          const double* p = src + 2 * r * side + 2 * c;
          dst[r * half + c] = 0.25 * (p[0] + p[1] + p[side] + p[side + 1]);
        }
    }
  return out;
}

Eigen::MatrixXd mean_pool_backward(const Eigen::MatrixXd& grad, int side) {
  const int half = side / 2;
  const int pixels = side * side;
  const Eigen::Index batch = grad.rows() / (half * half);
  Eigen::MatrixXd out(batch * pixels, grad.cols());
  for (Eigen::Index ch = 0; ch < grad.cols(); ++ch)
    for (Eigen::Index n = 0; n < batch; ++n) {
      const double* src = grad.col(ch).data() + n * half * half;
      double* dst = out.col(ch).data() + n * pixels;
      for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) dst[r * side + c] = 0.25 * src[(r / 2) * half + c / 2];
    }
  return out;
}

Eigen::MatrixXd log_softmax_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mx = z.col(j).maxCoeff();
    const double lse = mx + std::log((z.col(j).array() - mx).exp().sum());
    out.col(j) = z.col(j).array() - lse;
  }
  return out;
}

}  // namespace

ForwardTrace forward_trace(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  const auto& layout = params.layout;
  const int side0 = layout.spec.input_size;
  if (inputs.rows() != side0 * side0) throw InvalidConfiguration("network: input size mismatch");
  const Eigen::Index batch = inputs.cols();

  ForwardTrace trace;
  // inputs is pixels x batch, so its storage already stacks samples.
  Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(inputs.data(), inputs.size(), 1);
  int side = side0;
  for (const auto& slot : layout.conv) {
    ConvCache cache;
    cache.columns = im2col(a, side);
    cache.pre.noalias() = cache.columns * params.weight(slot).transpose();
    cache.pre.rowwise() += params.bias(slot).transpose();
    a = mean_pool(cache.pre.cwiseMax(0.0), side);
    side /= 2;
    trace.conv.push_back(std::move(cache));
  }
  // Flatten channel-major: feature index ch * side^2 + pixel.
  const Eigen::Index per = static_cast<Eigen::Index>(side) * side;
  const int flat = static_cast<int>(layout.fc.front().cols);
  Eigen::MatrixXd h(flat, batch);
  for (Eigen::Index n = 0; n < batch; ++n)
    for (Eigen::Index ch = 0; ch < a.cols(); ++ch) h.col(n).segment(ch * per, per) = a.col(ch).segment(n * per, per);

  for (size_t l = 0; l < layout.fc.size(); ++l) {
    const auto& slot = layout.fc[l];
    Eigen::MatrixXd z = params.weight(slot) * h;
    z.colwise() += params.bias(slot);
    trace.fc_input.push_back(std::move(h));
    trace.fc_pre.push_back(z);
    h = l + 1 < layout.fc.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  trace.log_probs = log_softmax_columns(h);
  return trace;
}

Eigen::MatrixXd forward(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  return forward_trace(params, inputs).log_probs.transpose();
}

void backward(const NetworkParams& params, const Eigen::MatrixXd& inputs, const ForwardTrace& trace,
              const Eigen::MatrixXd& grad_log_probs, Eigen::VectorXd& grad, Eigen::MatrixXd* input_grad) {
  const auto& layout = params.layout;
  if (grad.size() != layout.size) grad = Eigen::VectorXd::Zero(layout.size);
  const Eigen::Index batch = inputs.cols();

  // log-softmax: dz = g - softmax * sum(g)
  const Eigen::MatrixXd probs = trace.log_probs.array().exp();
  Eigen::MatrixXd dz = grad_log_probs - probs * grad_log_probs.colwise().sum().asDiagonal();

  for (int l = static_cast<int>(layout.fc.size()) - 1; l >= 0; --l) {
    const auto& slot = layout.fc[l];
    if (l + 1 < static_cast<int>(layout.fc.size()))
      dz = dz.cwiseProduct((trace.fc_pre[l].array() > 0.0).cast<double>().matrix());
    Eigen::Map<Eigen::MatrixXd>(grad.data() + slot.weight_offset, slot.rows, slot.cols).noalias() +=
        dz * trace.fc_input[l].transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + slot.bias_offset, slot.rows) += dz.rowwise().sum();
    dz = (params.weight(slot).transpose() * dz).eval();
  }

  const int nconv = static_cast<int>(layout.conv.size());
  std::vector<int> sides(nconv);
  sides[0] = layout.spec.input_size;
  for (int l = 1; l < nconv; ++l) sides[l] = sides[l - 1] / 2;

  // Undo the channel-major flatten.
  const int last_side = sides[nconv - 1] / 2;
  const Eigen::Index per = static_cast<Eigen::Index>(last_side) * last_side;
  const int last_channels = layout.conv.back().rows;
  Eigen::MatrixXd da(batch * per, last_channels);
  for (Eigen::Index n = 0; n < batch; ++n)
    for (int ch = 0; ch < last_channels; ++ch) da.col(ch).segment(n * per, per) = dz.col(n).segment(ch * per, per);

  for (int l = nconv - 1; l >= 0; --l) {
    const auto& slot = layout.conv[l];
    const ConvCache& cache = trace.conv[l];
    Eigen::MatrixXd dpre = mean_pool_backward(da, sides[l]);
    dpre = dpre.cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
    Eigen::Map<Eigen::MatrixXd>(grad.data() + slot.weight_offset, slot.rows, slot.cols).noalias() +=
        dpre.transpose() * cache.columns;
    Eigen::Map<Eigen::VectorXd>(grad.data() + slot.bias_offset, slot.rows) += dpre.colwise().sum().transpose();
    if (l == 0 && !input_grad) break;
    Eigen::MatrixXd dcols;
    dcols.noalias() = dpre * params.weight(slot);
    da = col2im(dcols, slot.cols / 9, sides[l]);
  }
  if (input_grad) *input_grad = Eigen::Map<const Eigen::MatrixXd>(da.data(), inputs.rows(), batch);
}

std::vector<bool> relu_pattern(const ForwardTrace& trace) {
  std::vector<bool> out;
  for (const auto& c : trace.conv)
    for (Eigen::Index i = 0; i < c.pre.size(); ++i) out.push_back(c.pre.data()[i] > 0.0);
  for (size_t l = 0; l + 1 < trace.fc_pre.size(); ++l)
    for (Eigen::Index i = 0; i < trace.fc_pre[l].size(); ++i) out.push_back(trace.fc_pre[l].data()[i] > 0.0);
  return out;
}

}  // namespace cadepth
