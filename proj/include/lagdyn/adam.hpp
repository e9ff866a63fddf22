#pragma once

#include <vector>

#include "lagdyn/mlp.hpp"
#include "lagdyn/tensor.hpp"

namespace lagdyn::train {

/// Adam with L2 weight decay folded into the gradient, matching the
/// reference optimizer settings (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
public:
    Adam(double learning_rate, double weight_decay)
        : lr_(learning_rate), wd_(weight_decay) {}

    void step(const std::vector<nets::ParamRef>& params, const std::vector<Tensor>& grads);

private:
    double lr_;
    double wd_;
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace lagdyn::train
