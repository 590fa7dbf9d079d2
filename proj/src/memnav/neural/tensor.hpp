#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <vector>

namespace memnav::neural {

// Value + gradient buffer pair. Double precision throughout; checkpoints
// store float32.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> v;
    std::vector<double> g;

    std::size_t numel() const { return v.size(); }

    std::size_t dim(std::size_t i) const { return shape[i]; }

    void zero_grad() { std::fill(g.begin(), g.end(), 0.0); }
};

using TensorPtr = std::shared_ptr<Tensor>;

inline std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline TensorPtr make_tensor(std::vector<std::size_t> shape) {
    auto t = std::make_shared<Tensor>();
    const std::size_t n = shape_numel(shape);
    t->shape = std::move(shape);
    t->v.assign(n, 0.0);
    t->g.assign(n, 0.0);
    return t;
}

inline TensorPtr make_tensor(std::vector<std::size_t> shape, const std::vector<double>& values) {
    auto t = make_tensor(std::move(shape));
    t->v = values;
    t->g.assign(t->v.size(), 0.0);
    return t;
}

inline bool same_shape(const Tensor& a, const Tensor& b) { return a.shape == b.shape; }

} // namespace memnav::neural
