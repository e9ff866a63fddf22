#include "lagdyn/vision.hpp"

#include <cmath>

#include "lagdyn/conv.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"

namespace lagdyn::vision {

std::vector<int> ConvSpec::spatial_trace() const {
    std::vector<int> trace{input_hw};
    int hw = input_hw;
    for (size_t l = 0; l < channels.size(); ++l) {
        hw = conv::conv_out_size(hw, kernel, stride, pad);
        if (hw < 1) throw UsageError("conv stack shrinks the image to nothing");
        trace.push_back(hw);
    }
    return trace;
}

int ConvSpec::bottleneck_hw() const { return spatial_trace().back(); }

int ConvSpec::flat_dim() const {
    const int hw = bottleneck_hw();
    return channels.back() * hw * hw;
}

ConvSpec pendulum_conv_spec() { return ConvSpec{}; }

ConvSpec acrobot_conv_spec() {
    ConvSpec s;
    s.latent = 6;
    return s;
}

namespace {

// He-style uniform init, sqrt(6/fan_in), for the relu conv stacks; biases
// draw from the plain fan-in rule. The conservative 1/sqrt(fan_in) used for
// the tanh networks shrinks the mostly-black frames to a vanishing latent
// signal, and zero biases pin the background at exactly zero through every
// relu; either way the auto-encoder stalls at the mean image.
Tensor init_weight(std::vector<int> shape, int fan_in, Rng& rng) {
    Tensor w(std::move(shape));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    return w;
}

Tensor init_bias(int n, int fan_in, Rng& rng) {
    Tensor b({n});
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int64_t i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bound, bound);
    return b;
}

void audit_spec(const ConvSpec& spec) {
    if (spec.latent % 2 != 0)
        throw UsageError("latent dimension must be even to split into (q, qdot)");
    // also validates the spatial trace
    if (spec.flat_dim() < 1) throw UsageError("conv bottleneck is empty");
}

} // namespace

Encoder Encoder::create(const ConvSpec& spec, Rng& rng) {
    audit_spec(spec);
    Encoder e;
    e.spec = spec;
    int cin = spec.in_channels;
    for (int cout : spec.channels) {
        const int fan = cin * spec.kernel * spec.kernel;
        e.conv_w.push_back(init_weight({cout, cin, spec.kernel, spec.kernel}, fan, rng));
        e.conv_b.push_back(init_bias(cout, fan, rng));
        cin = cout;
    }
    e.fc_w = init_weight({spec.latent, spec.flat_dim()}, spec.flat_dim(), rng);
    e.fc_b = init_bias(spec.latent, spec.flat_dim(), rng);
    return e;
}

Decoder Decoder::create(const ConvSpec& spec, Rng& rng) {
    audit_spec(spec);
    Decoder d;
    d.spec = spec;
    d.fc_w = init_weight({spec.flat_dim(), spec.latent}, spec.latent, rng);
    d.fc_b = init_bias(spec.flat_dim(), spec.latent, rng);
    // transposed convs walk the encoder channels backwards
    std::vector<int> chain = spec.channels;
    chain.insert(chain.begin(), spec.in_channels); // {3, 12, 24, 12}
    for (size_t l = chain.size() - 1; l >= 1; --l) {
        const int cin = chain[l], cout = chain[l - 1];
        const int fan = cin * spec.kernel * spec.kernel;
        d.conv_w.push_back(init_weight({cin, cout, spec.kernel, spec.kernel}, fan, rng));
        d.conv_b.push_back(init_bias(cout, fan, rng));
    }
    // output bias starts at the logit of a dim-background prior so early
    // steps are not spent saturating the sigmoid toward mostly-dark frames
    d.conv_b.back().fill(-3.0);
    return d;
}

AutoEncoder AutoEncoder::create(const ConvSpec& spec, Rng& rng) {
    AutoEncoder ae;
    ae.encoder = Encoder::create(spec, rng);
    ae.decoder = Decoder::create(spec, rng);
    return ae;
}

Tensor encode_batch(const Encoder& e, const Tensor& x) {
    const ConvSpec& spec = e.spec;
    if (x.ndim() != 4 || x.dim(1) != spec.in_channels || x.dim(2) != spec.input_hw ||
        x.dim(3) != spec.input_hw)
        throw UsageError("encode: observation batch must be (N," +
                         std::to_string(spec.in_channels) + "," + std::to_string(spec.input_hw) +
                         "," + std::to_string(spec.input_hw) + "), got " +
                         Tensor::shape_string(x.shape()));
    const int n = x.dim(0);
    Tensor h = x;
    int cin = spec.in_channels, hw = spec.input_hw;
    for (size_t l = 0; l < e.conv_w.size(); ++l) {
        const int cout = spec.channels[l];
        const int hwo = conv::conv_out_size(hw, spec.kernel, spec.stride, spec.pad);
        conv::Conv2dDims dims{n, cin, hw, hw, cout, spec.kernel, spec.kernel,
                              spec.stride, spec.pad, hwo, hwo};
        Tensor out({n, cout, hwo, hwo});
        conv::conv2d_forward(h.data(), e.conv_w[l].data(), e.conv_b[l].data(), out.data(), dims);
        for (int64_t i = 0; i < out.size(); ++i)
            if (out[i] < 0.0) out[i] = 0.0;
        h = std::move(out);
        cin = cout;
        hw = hwo;
    }
    const int flat = spec.flat_dim();
    Tensor z({n, spec.latent});
    for (int i = 0; i < n; ++i) {
        const double* row = h.data() + static_cast<size_t>(i) * flat;
        for (int o = 0; o < spec.latent; ++o)
            z.at(i, o) = e.fc_b[o] +
                         linalg::dot(row, e.fc_w.data() + static_cast<size_t>(o) * flat, flat);
    }
    return z;
}

Tensor encode(const Encoder& e, const Tensor& x) {
    Tensor batch = x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
    return encode_batch(e, batch).reshaped({e.spec.latent});
}

Tensor decode_batch(const Decoder& d, const Tensor& z) {
    const ConvSpec& spec = d.spec;
    if (z.ndim() != 2 || z.dim(1) != spec.latent)
        throw UsageError("decode: latent batch must be (N," + std::to_string(spec.latent) +
                         "), got " + Tensor::shape_string(z.shape()));
    const int n = z.dim(0);
    const int flat = spec.flat_dim();
    Tensor h({n, flat});
    for (int i = 0; i < n; ++i) {
        const double* zi = z.data() + static_cast<size_t>(i) * spec.latent;
        double* hi = h.data() + static_cast<size_t>(i) * flat;
        for (int o = 0; o < flat; ++o) {
            const double a =
                d.fc_b[o] +
                linalg::dot(zi, d.fc_w.data() + static_cast<size_t>(o) * spec.latent, spec.latent);
            hi[o] = a > 0.0 ? a : 0.0;
        }
    }
    int hw = spec.bottleneck_hw();
    int cin = spec.channels.back();
    h = h.reshaped({n, cin, hw, hw});
    for (size_t l = 0; l < d.conv_w.size(); ++l) {
        const int cout = d.conv_w[l].dim(1);
        const int hwo = conv::convt_out_size(hw, spec.kernel, spec.stride, spec.pad);
        conv::Conv2dDims dims{n, cin, hw, hw, cout, spec.kernel, spec.kernel,
                              spec.stride, spec.pad, hwo, hwo};
        Tensor out({n, cout, hwo, hwo});
        conv::convt2d_forward(h.data(), d.conv_w[l].data(), d.conv_b[l].data(), out.data(), dims);
        const bool last = l + 1 == d.conv_w.size();
        if (last)
            for (int64_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
        else
            for (int64_t i = 0; i < out.size(); ++i)
                if (out[i] < 0.0) out[i] = 0.0;
        h = std::move(out);
        cin = cout;
        hw = hwo;
    }
    return h;
}

Tensor decode(const Decoder& d, const Tensor& z) {
    Tensor batch = z.reshaped({1, d.spec.latent});
    Tensor out = decode_batch(d, batch);
    return out.reshaped({out.dim(1), out.dim(2), out.dim(3)});
}

dynamics::PhaseState latent_split(const Tensor& z) {
    if (z.ndim() != 1 || z.dim(0) % 2 != 0)
        throw UsageError("latent_split: latent length must be even, got " +
                         Tensor::shape_string(z.shape()));
    const int m = z.dim(0) / 2;
    Tensor q({m}), qd({m});
    for (int i = 0; i < m; ++i) {
        q[i] = z[i];
        qd[i] = z[m + i];
    }
    return dynamics::PhaseState(std::move(q), std::move(qd));
}

EncoderVars insert_params(ad::Graph& g, const Encoder& e) {
    EncoderVars v;
    for (size_t l = 0; l < e.conv_w.size(); ++l) {
        v.conv_w.push_back(g.leaf(e.conv_w[l]));
        v.conv_b.push_back(g.leaf(e.conv_b[l]));
    }
    v.fc_w = g.leaf(e.fc_w);
    v.fc_b = g.leaf(e.fc_b);
    return v;
}

DecoderVars insert_params(ad::Graph& g, const Decoder& d) {
    DecoderVars v;
    v.fc_w = g.leaf(d.fc_w);
    v.fc_b = g.leaf(d.fc_b);
    for (size_t l = 0; l < d.conv_w.size(); ++l) {
        v.conv_w.push_back(g.leaf(d.conv_w[l]));
        v.conv_b.push_back(g.leaf(d.conv_b[l]));
    }
    return v;
}

ad::Var encode_g(const ConvSpec& spec, const EncoderVars& vars, ad::Var x) {
    ad::Var h = x;
    for (size_t l = 0; l < vars.conv_w.size(); ++l)
        h = ad::relu(ad::conv2d(h, vars.conv_w[l], vars.conv_b[l], spec.stride, spec.pad));
    const int n = x.graph->value(x).dim(0);
    h = ad::reshape(h, {n, spec.flat_dim()});
    return ad::linear(h, vars.fc_w, vars.fc_b);
}

ad::Var decode_g(const ConvSpec& spec, const DecoderVars& vars, ad::Var z) {
    const int n = z.graph->value(z).dim(0);
    ad::Var h = ad::relu(ad::linear(z, vars.fc_w, vars.fc_b));
    const int hw = spec.bottleneck_hw();
    h = ad::reshape(h, {n, spec.channels.back(), hw, hw});
    for (size_t l = 0; l < vars.conv_w.size(); ++l) {
        h = ad::conv2d_transpose(h, vars.conv_w[l], vars.conv_b[l], spec.stride, spec.pad);
        if (l + 1 < vars.conv_w.size()) h = ad::relu(h);
    }
    return ad::sigmoid(h);
}

void collect_params(Encoder& e, const std::string& prefix, std::vector<nets::ParamRef>& out) {
    for (size_t l = 0; l < e.conv_w.size(); ++l) {
        out.push_back({prefix + ".conv" + std::to_string(l) + ".w", &e.conv_w[l]});
        out.push_back({prefix + ".conv" + std::to_string(l) + ".b", &e.conv_b[l]});
    }
    out.push_back({prefix + ".fc.w", &e.fc_w});
    out.push_back({prefix + ".fc.b", &e.fc_b});
}

void collect_params(Decoder& d, const std::string& prefix, std::vector<nets::ParamRef>& out) {
    out.push_back({prefix + ".fc.w", &d.fc_w});
    out.push_back({prefix + ".fc.b", &d.fc_b});
    for (size_t l = 0; l < d.conv_w.size(); ++l) {
        out.push_back({prefix + ".conv" + std::to_string(l) + ".w", &d.conv_w[l]});
        out.push_back({prefix + ".conv" + std::to_string(l) + ".b", &d.conv_b[l]});
    }
}

} // namespace lagdyn::vision
