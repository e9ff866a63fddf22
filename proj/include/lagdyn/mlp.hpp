#pragma once

#include <string>
#include <vector>

#include "lagdyn/autodiff.hpp"
#include "lagdyn/rng.hpp"
#include "lagdyn/tensor.hpp"

namespace lagdyn::nets {

/// Fully-connected network: affine layers with tanh on hidden layers and an
/// identity output layer.
struct MlpParams {
    std::vector<Tensor> weights; // layer l: (out_l, in_l)
    std::vector<Tensor> biases;  // layer l: (out_l)

    int layer_count() const { return static_cast<int>(weights.size()); }
    int input_dim() const { return weights.front().dim(1); }
    int output_dim() const { return weights.back().dim(0); }
    int64_t parameter_count() const;

    /// dims = {in, hidden..., out}. Weights uniform in
    /// [-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero.
    static MlpParams create(const std::vector<int>& dims, Rng& rng);
};

/// Forward pass keeping the hidden activations; they feed the closed-form
/// input Jacobian below.
struct MlpTrace {
    Tensor out;
    std::vector<Tensor> hidden; // post-tanh, one per hidden layer
};

MlpTrace mlp_trace(const MlpParams& p, const Tensor& x);
Tensor mlp_forward(const MlpParams& p, const Tensor& x);

/// d(out)/d(x) as an (out_dim, in_dim) matrix:
/// W_L diag(1-h^2) W_{L-1} ... diag(1-h^2) W_1.
Tensor mlp_input_jacobian(const MlpParams& p, const MlpTrace& trace);

// ---- graph-side mirror (same math on the tape) ----

struct MlpVars {
    std::vector<ad::Var> weights;
    std::vector<ad::Var> biases;
};

MlpVars insert_params(ad::Graph& g, const MlpParams& p);

struct MlpEvalVars {
    ad::Var out;
    std::vector<ad::Var> hidden;
};

MlpEvalVars mlp_eval_g(const MlpVars& vars, ad::Var x);
ad::Var mlp_input_jacobian_g(const MlpVars& vars, const MlpEvalVars& eval);

/// Named views of the parameter tensors, ordered w0, b0, w1, b1, ...
struct ParamRef {
    std::string name;
    Tensor* tensor;
};

void collect_params(MlpParams& p, const std::string& prefix, std::vector<ParamRef>& out);

} // namespace lagdyn::nets
