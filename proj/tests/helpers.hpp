#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "lagdyn/autodiff.hpp"
#include "lagdyn/rng.hpp"
#include "lagdyn/tensor.hpp"

namespace testutil {

using lagdyn::Rng;
using lagdyn::Tensor;

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

/// Builds a scalar graph from leaf tensors; used by the finite-difference
/// gradient check below.
using ScalarBuilder =
    std::function<lagdyn::ad::Var(lagdyn::ad::Graph&, const std::vector<lagdyn::ad::Var>&)>;

struct GradCheckResult {
    double max_rel = 0.0;
    double max_abs = 0.0;
};

inline double eval_builder(const ScalarBuilder& build, const std::vector<Tensor>& inputs) {
    lagdyn::ad::Graph g;
    std::vector<lagdyn::ad::Var> leaves;
    leaves.reserve(inputs.size());
    for (const auto& t : inputs) leaves.push_back(g.leaf(t));
    return g.value(build(g, leaves))[0];
}

/// Reverse-mode gradients vs central finite differences, coordinate by
/// coordinate. rel error uses max(|ad|, |fd|) with an absolute floor so
/// near-zero coordinates are judged absolutely.
inline GradCheckResult gradcheck(const ScalarBuilder& build, std::vector<Tensor> inputs,
                                 double step = 1e-6, double abs_floor = 1e-8) {
    lagdyn::ad::Graph g;
    std::vector<lagdyn::ad::Var> leaves;
    for (const auto& t : inputs) leaves.push_back(g.leaf(t));
    lagdyn::ad::Var root = build(g, leaves);
    g.backward(root);
    GradCheckResult result;
    for (size_t k = 0; k < inputs.size(); ++k) {
        const Tensor grad = g.gradient(leaves[k]);
        for (int64_t i = 0; i < inputs[k].size(); ++i) {
            const double saved = inputs[k][i];
            inputs[k][i] = saved + step;
            const double fp = eval_builder(build, inputs);
            inputs[k][i] = saved - step;
            const double fm = eval_builder(build, inputs);
            inputs[k][i] = saved;
            const double fd = (fp - fm) / (2.0 * step);
            const double ad = grad[i];
            const double abs_err = std::abs(ad - fd);
            result.max_abs = std::max(result.max_abs, abs_err);
            if (abs_err > abs_floor) {
                const double rel = abs_err / std::max(std::abs(ad), std::abs(fd));
                result.max_rel = std::max(result.max_rel, rel);
            }
        }
    }
    return result;
}

} // namespace testutil
