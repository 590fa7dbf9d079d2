#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "memnav/neural/tensor.hpp"

namespace memnav::neural {

// Dynamic reverse-mode tape. Build a graph per forward pass; backward()
// replays recorded closures in reverse, accumulating into Tensor::g.
// Parameter tensors are ordinary inputs; zero their grads before a pass.
// Every op checks its output for NaN/Inf and throws NumericalError.
//
// Layout conventions:
//   [B, N]    batched vectors
//   [B, L, C] batched 1-D feature maps, position-major per sample
class Graph {
public:
    // leaf holding given values; participates in grad accumulation like any
    // other tensor (callers usually ignore the grads of constants)
    TensorPtr constant(std::vector<std::size_t> shape, const std::vector<double>& values);
    TensorPtr scalar(double value);

    // y[b] = W x[b] + b
    TensorPtr affine(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b);

    // W is [F, K*C] row-major per filter, window layout [k][c]
    TensorPtr conv1d(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b, int kernel,
                     int stride, int pad);

    // transposed convolution; W is [C, K*F] row-major per input channel,
    // window layout [k][f]; Lout = (L-1)*stride + kernel - 2*pad
    TensorPtr deconv1d(const TensorPtr& x, const TensorPtr& W, const TensorPtr& b, int kernel,
                       int stride, int pad);

    TensorPtr relu(const TensorPtr& x);
    TensorPtr sigmoid(const TensorPtr& x);
    TensorPtr tanh_(const TensorPtr& x);
    TensorPtr exp_(const TensorPtr& x);

    struct LstmOut {
        TensorPtr h, c;
    };
    // gates ordered [input, forget, candidate, output] in blocks of H rows
    LstmOut lstm_cell(const TensorPtr& x, const TensorPtr& h, const TensorPtr& c,
                      const TensorPtr& Wx, const TensorPtr& Wh, const TensorPtr& b);

    // z = mu + exp(0.5*logvar) * eps; eps is an input (not reparameterized)
    TensorPtr reparameterize(const TensorPtr& mu, const TensorPtr& logvar, const TensorPtr& eps);

    TensorPtr add(const TensorPtr& a, const TensorPtr& b);
    TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
    TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
    TensorPtr min_(const TensorPtr& a, const TensorPtr& b);
    TensorPtr scale_const(const TensorPtr& x, double c);
    TensorPtr add_const(const TensorPtr& x, double c);
    TensorPtr clamp_const(const TensorPtr& x, double lo, double hi);
    TensorPtr clamp_min_const(const TensorPtr& x, double lo);

    TensorPtr sum_all(const TensorPtr& x);
    TensorPtr mean_all(const TensorPtr& x);
    // [B, N] -> [B]
    TensorPtr sum_rows(const TensorPtr& x);
    // y[b][n] = x[b][n] * s[n]
    TensorPtr rowwise_scale(const TensorPtr& x, const TensorPtr& s);
    // y = x + s[0] broadcast; gradient flows to s
    TensorPtr add_scalar_node(const TensorPtr& x, const TensorPtr& s);
    // [B, N] -> [B, to-from]
    TensorPtr slice_cols(const TensorPtr& x, std::size_t from, std::size_t to);
    // same numel, new shape (copies values; identity gradient)
    TensorPtr reshape(const TensorPtr& x, std::vector<std::size_t> shape);
    // stack [Bi, N] blocks along dim 0
    TensorPtr concat_rows(const std::vector<TensorPtr>& xs);
    // pick rows of [T, N] by index (duplicates allowed)
    TensorPtr gather_rows(const TensorPtr& x, const std::vector<std::size_t>& rows);

    // mean over all elements of (a-b)^2
    TensorPtr mse(const TensorPtr& a, const TensorPtr& b);
    // mean over batch of 0.5 * sum_n (mu^2 + exp(logvar) - 1 - logvar)
    TensorPtr kl_unit_gaussian(const TensorPtr& mu, const TensorPtr& logvar);

    // seeds d(loss)/d(loss) = 1 and replays the tape
    void backward(const TensorPtr& loss);

    std::size_t op_count() const { return tape_.size(); }

private:
    TensorPtr out(std::vector<std::size_t> shape, const char* op);
    void record(std::function<void()> fn) { tape_.push_back(std::move(fn)); }

    std::vector<std::function<void()>> tape_;
};

} // namespace memnav::neural
