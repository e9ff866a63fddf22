#include "lagdyn/adam.hpp"

#include <cmath>

#include "lagdyn/errors.hpp"

namespace lagdyn::train {

void Adam::step(const std::vector<nets::ParamRef>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size())
        throw UsageError("Adam::step: parameter and gradient counts differ");
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.push_back(Tensor(p.tensor->shape()));
            v_.push_back(Tensor(p.tensor->shape()));
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& theta = *params[i].tensor;
        const Tensor& grad = grads[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (int64_t j = 0; j < theta.size(); ++j) {
            const double g = grad[j] + wd_ * theta[j];
            m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
            v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            theta[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

} // namespace lagdyn::train
