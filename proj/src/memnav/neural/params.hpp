#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memnav/core/rng.hpp"
#include "memnav/neural/tensor.hpp"

namespace memnav::neural {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Named parameter tensors with per-parameter Adam moments.
class ParameterSet {
public:
    TensorPtr add(const std::string& name, std::vector<std::size_t> shape);
    TensorPtr at(const std::string& name) const;
    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    std::size_t count() const { return entries_.size(); }
    std::size_t total_values() const;

    void zero_grad();

    // Standard Adam with bias correction. Zero gradients from fresh moments
    // leave parameters unchanged.
    void adam_step(const AdamConfig& cfg);
    std::int64_t step_count() const { return step_; }

    // sorted by name
    std::vector<std::pair<std::string, TensorPtr>> items() const;

    // hash of the double-precision values (order: name-sorted)
    std::uint64_t value_hash() const;

private:
    struct Entry {
        TensorPtr t;
        std::vector<double> m, v; // Adam moments
    };
    std::map<std::string, Entry> entries_;
    std::int64_t step_ = 0;
};

// uniform(-sqrt(6/fan_in), sqrt(6/fan_in))
void init_kaiming_uniform(Tensor& t, std::size_t fan_in, Rng& rng);
void init_uniform(Tensor& t, double lo, double hi, Rng& rng);
void init_constant(Tensor& t, double value);

} // namespace memnav::neural
