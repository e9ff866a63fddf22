#include "lagdyn/mlp.hpp"

#include <cmath>

#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"

namespace lagdyn::nets {

int64_t MlpParams::parameter_count() const {
    int64_t n = 0;
    for (const auto& w : weights) n += w.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

MlpParams MlpParams::create(const std::vector<int>& dims, Rng& rng) {
    if (dims.size() < 2) throw UsageError("mlp needs at least input and output dims");
    MlpParams p;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const int in = dims[l], out = dims[l + 1];
        Tensor w({out, in});
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
        p.weights.push_back(std::move(w));
        p.biases.push_back(Tensor({out}));
    }
    return p;
}

MlpTrace mlp_trace(const MlpParams& p, const Tensor& x) {
    if (x.ndim() != 1 || x.dim(0) != p.input_dim())
        throw UsageError("mlp_forward: input length " + std::to_string(x.size()) +
                         " does not match first layer input " + std::to_string(p.input_dim()));
    MlpTrace trace;
    const int layers = p.layer_count();
    Tensor h = x;
    for (int l = 0; l < layers; ++l) {
        const Tensor& w = p.weights[static_cast<size_t>(l)];
        const Tensor& b = p.biases[static_cast<size_t>(l)];
        Tensor a({w.dim(0)});
        linalg::matvec(w.data(), h.data(), a.data(), w.dim(0), w.dim(1));
        for (int i = 0; i < a.dim(0); ++i) a[i] += b[i];
        if (l + 1 < layers) {
            for (int i = 0; i < a.dim(0); ++i) a[i] = std::tanh(a[i]);
            trace.hidden.push_back(a);
        }
        h = std::move(a);
    }
    trace.out = std::move(h);
    return trace;
}

Tensor mlp_forward(const MlpParams& p, const Tensor& x) { return mlp_trace(p, x).out; }

Tensor mlp_input_jacobian(const MlpParams& p, const MlpTrace& trace) {
    const int layers = p.layer_count();
    Tensor m = p.weights[0];
    for (int l = 0; l + 1 < layers; ++l) {
        const Tensor& h = trace.hidden[static_cast<size_t>(l)];
        const int rows = m.dim(0), cols = m.dim(1);
        for (int i = 0; i < rows; ++i) {
            const double s = 1.0 - h[i] * h[i];
            double* row = m.data() + static_cast<size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) row[j] *= s;
        }
        const Tensor& w = p.weights[static_cast<size_t>(l + 1)];
        Tensor next({w.dim(0), cols});
        linalg::matmul(w.data(), m.data(), next.data(), w.dim(0), w.dim(1), cols);
        m = std::move(next);
    }
    return m;
}

MlpVars insert_params(ad::Graph& g, const MlpParams& p) {
    MlpVars vars;
    for (size_t l = 0; l < p.weights.size(); ++l) {
        vars.weights.push_back(g.leaf(p.weights[l]));
        vars.biases.push_back(g.leaf(p.biases[l]));
    }
    return vars;
}

MlpEvalVars mlp_eval_g(const MlpVars& vars, ad::Var x) {
    MlpEvalVars eval;
    const int layers = static_cast<int>(vars.weights.size());
    ad::Var h = x;
    for (int l = 0; l < layers; ++l) {
        ad::Var a = ad::add(ad::matvec(vars.weights[static_cast<size_t>(l)], h),
                            vars.biases[static_cast<size_t>(l)]);
        if (l + 1 < layers) {
            a = ad::tanh(a);
            eval.hidden.push_back(a);
        }
        h = a;
    }
    eval.out = h;
    return eval;
}

ad::Var mlp_input_jacobian_g(const MlpVars& vars, const MlpEvalVars& eval) {
    const int layers = static_cast<int>(vars.weights.size());
    ad::Var m = vars.weights[0];
    for (int l = 0; l + 1 < layers; ++l) {
        ad::Var h = eval.hidden[static_cast<size_t>(l)];
        ad::Var s = ad::affine(ad::mul(h, h), -1.0, 1.0); // 1 - h^2
        m = ad::matmul(vars.weights[static_cast<size_t>(l + 1)], ad::row_scale(m, s));
    }
    return m;
}

void collect_params(MlpParams& p, const std::string& prefix, std::vector<ParamRef>& out) {
    for (size_t l = 0; l < p.weights.size(); ++l) {
        out.push_back({prefix + ".w" + std::to_string(l), &p.weights[l]});
        out.push_back({prefix + ".b" + std::to_string(l), &p.biases[l]});
    }
}

} // namespace lagdyn::nets
