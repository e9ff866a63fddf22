#pragma once

#include <vector>

#include "lagdyn/autodiff.hpp"
#include "lagdyn/dynamics.hpp"
#include "lagdyn/mlp.hpp"
#include "lagdyn/rng.hpp"
#include "lagdyn/tensor.hpp"

namespace lagdyn::vision {

/// Convolution stack description. The default matches the reference
/// architecture: three 4x4 stride-2 pad-1 convolutions (channels 12, 24, 12)
/// over 3x32x32 observations, then a fully-connected layer to the latent.
struct ConvSpec {
    int input_hw = 32;
    int in_channels = 3;
    std::vector<int> channels = {12, 24, 12};
    int kernel = 4;
    int stride = 2;
    int pad = 1;
    int latent = 4;

    /// Spatial sizes after each convolution; audited at construction.
    std::vector<int> spatial_trace() const;
    int bottleneck_hw() const;
    int flat_dim() const; // channels.back() * bottleneck^2
};

/// Encoder: conv(+ReLU) stack then one fully-connected layer, no activation
/// on the latent output.
struct Encoder {
    ConvSpec spec;
    std::vector<Tensor> conv_w; // (O, C, k, k)
    std::vector<Tensor> conv_b; // (O)
    Tensor fc_w;                // (latent, flat)
    Tensor fc_b;                // (latent)

    static Encoder create(const ConvSpec& spec, Rng& rng);
};

/// Decoder mirroring the encoder: fully-connected to the bottleneck, ReLU,
/// transposed convolutions reversing the encoder shapes, sigmoid output.
struct Decoder {
    ConvSpec spec; // same spec as the encoder it mirrors
    Tensor fc_w;   // (flat, latent)
    Tensor fc_b;   // (flat)
    std::vector<Tensor> conv_w; // transposed conv l: (C_in, C_out, k, k)
    std::vector<Tensor> conv_b; // (C_out)

    static Decoder create(const ConvSpec& spec, Rng& rng);
};

struct AutoEncoder {
    Encoder encoder;
    Decoder decoder;

    static AutoEncoder create(const ConvSpec& spec, Rng& rng);
};

/// Reference configurations (latent 4 for the pendulum, 6 for the acrobot).
ConvSpec pendulum_conv_spec();
ConvSpec acrobot_conv_spec();

Tensor encode_batch(const Encoder& e, const Tensor& x); // (N,C,H,W) -> (N,latent)
Tensor encode(const Encoder& e, const Tensor& x);       // (C,H,W) -> (latent)
Tensor decode_batch(const Decoder& d, const Tensor& z); // (N,latent) -> (N,C,H,W)
Tensor decode(const Decoder& d, const Tensor& z);       // (latent) -> (C,H,W)

/// Interpret a latent code as a phase state: q first half, qdot second half.
dynamics::PhaseState latent_split(const Tensor& z);

// ---- graph-side ----

struct EncoderVars {
    std::vector<ad::Var> conv_w, conv_b;
    ad::Var fc_w, fc_b;
};

struct DecoderVars {
    ad::Var fc_w, fc_b;
    std::vector<ad::Var> conv_w, conv_b;
};

EncoderVars insert_params(ad::Graph& g, const Encoder& e);
DecoderVars insert_params(ad::Graph& g, const Decoder& d);

ad::Var encode_g(const ConvSpec& spec, const EncoderVars& vars, ad::Var x);
ad::Var decode_g(const ConvSpec& spec, const DecoderVars& vars, ad::Var z);

void collect_params(Encoder& e, const std::string& prefix, std::vector<nets::ParamRef>& out);
void collect_params(Decoder& d, const std::string& prefix, std::vector<nets::ParamRef>& out);

} // namespace lagdyn::vision
