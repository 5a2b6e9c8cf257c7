#pragma once

#include "duallag/tensor.hpp"

#include <cstdint>
#include <vector>

namespace duallag {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are shaped like their
/// parameters; the step counter is strictly increasing.
class Adam {
public:
    explicit Adam(std::vector<Tensor> params, const AdamConfig& cfg = {});

    /// One update from the parameters' current gradients. Throws
    /// std::runtime_error naming the parameter on a non-finite gradient.
    void step();

    void zero_grad();

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig cfg_;
    std::int64_t t_ = 0;
};

}  // namespace duallag
