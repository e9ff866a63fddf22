#include "lagdyn/checkpoint.hpp"

#include <sstream>

#include "lagdyn/container.hpp"
#include "lagdyn/errors.hpp"

namespace lagdyn::io {

namespace {

void add_mlp(Container& c, const std::string& prefix, const nets::MlpParams& p) {
    for (size_t l = 0; l < p.weights.size(); ++l) {
        c.add_f64(prefix + ".w" + std::to_string(l), p.weights[l]);
        c.add_f64(prefix + ".b" + std::to_string(l), p.biases[l]);
    }
}

nets::MlpParams read_mlp(const Container& c, const std::string& prefix) {
    nets::MlpParams p;
    for (int l = 0;; ++l) {
        const NamedTensor* w = c.find(prefix + ".w" + std::to_string(l));
        if (!w) break;
        p.weights.push_back(w->to_tensor());
        p.biases.push_back(c.require(prefix + ".b" + std::to_string(l)).to_tensor());
    }
    if (p.weights.empty()) throw DataError("checkpoint has no layers for '" + prefix + "'");
    return p;
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stoi(item));
    return out;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    Container c;
    c.meta["format"] = "checkpoint-v1";
    c.meta["regime"] = ckpt.regime;
    c.meta["kind"] = sim::to_string(ckpt.kind);
    c.meta["dt"] = std::to_string(ckpt.dt);
    c.meta["m"] = std::to_string(ckpt.lagrangian.m);
    c.meta["lambda"] = std::to_string(ckpt.lagrangian.lambda);
    std::vector<int> jdims{ckpt.lagrangian.inertia_net.input_dim()};
    for (const auto& w : ckpt.lagrangian.inertia_net.weights) jdims.push_back(w.dim(0));
    c.meta["layers"] = join_ints(jdims);
    add_mlp(c, "jnet", ckpt.lagrangian.inertia_net);
    add_mlp(c, "vnet", ckpt.lagrangian.potential_net);
    if (ckpt.autoencoder) {
        const vision::ConvSpec& spec = ckpt.autoencoder->encoder.spec;
        c.meta["latent"] = std::to_string(spec.latent);
        c.meta["conv_channels"] = join_ints(spec.channels);
        c.meta["input_hw"] = std::to_string(spec.input_hw);
        c.meta["kernel"] = std::to_string(spec.kernel);
        c.meta["stride"] = std::to_string(spec.stride);
        c.meta["pad"] = std::to_string(spec.pad);
        const vision::Encoder& e = ckpt.autoencoder->encoder;
        for (size_t l = 0; l < e.conv_w.size(); ++l) {
            c.add_f64("encoder.conv" + std::to_string(l) + ".w", e.conv_w[l]);
            c.add_f64("encoder.conv" + std::to_string(l) + ".b", e.conv_b[l]);
        }
        c.add_f64("encoder.fc.w", e.fc_w);
        c.add_f64("encoder.fc.b", e.fc_b);
        const vision::Decoder& d = ckpt.autoencoder->decoder;
        c.add_f64("decoder.fc.w", d.fc_w);
        c.add_f64("decoder.fc.b", d.fc_b);
        for (size_t l = 0; l < d.conv_w.size(); ++l) {
            c.add_f64("decoder.conv" + std::to_string(l) + ".w", d.conv_w[l]);
            c.add_f64("decoder.conv" + std::to_string(l) + ".b", d.conv_b[l]);
        }
    }
    write_container(path, c);
}

Checkpoint load_checkpoint(const std::string& path) {
    Container c = read_container(path);
    if (c.meta_at("format") != "checkpoint-v1")
        throw DataError("'" + path + "' is not a checkpoint file");
    Checkpoint ckpt;
    ckpt.regime = c.meta_at("regime");
    ckpt.kind = sim::system_from_string(c.meta_at("kind"));
    ckpt.dt = c.meta_double("dt");
    ckpt.lagrangian.m = static_cast<int>(c.meta_int("m"));
    ckpt.lagrangian.lambda = c.meta_double("lambda");
    ckpt.lagrangian.inertia_net = read_mlp(c, "jnet");
    ckpt.lagrangian.potential_net = read_mlp(c, "vnet");
    if (ckpt.regime == "video") {
        vision::ConvSpec spec;
        spec.latent = static_cast<int>(c.meta_int("latent"));
        spec.channels = split_ints(c.meta_at("conv_channels"));
        spec.input_hw = static_cast<int>(c.meta_int("input_hw"));
        spec.kernel = static_cast<int>(c.meta_int("kernel"));
        spec.stride = static_cast<int>(c.meta_int("stride"));
        spec.pad = static_cast<int>(c.meta_int("pad"));
        vision::AutoEncoder ae;
        ae.encoder.spec = spec;
        for (size_t l = 0; l < spec.channels.size(); ++l) {
            ae.encoder.conv_w.push_back(c.require("encoder.conv" + std::to_string(l) + ".w").to_tensor());
            ae.encoder.conv_b.push_back(c.require("encoder.conv" + std::to_string(l) + ".b").to_tensor());
        }
        ae.encoder.fc_w = c.require("encoder.fc.w").to_tensor();
        ae.encoder.fc_b = c.require("encoder.fc.b").to_tensor();
        ae.decoder.spec = spec;
        ae.decoder.fc_w = c.require("decoder.fc.w").to_tensor();
        ae.decoder.fc_b = c.require("decoder.fc.b").to_tensor();
        for (size_t l = 0; l < spec.channels.size(); ++l) {
            ae.decoder.conv_w.push_back(c.require("decoder.conv" + std::to_string(l) + ".w").to_tensor());
            ae.decoder.conv_b.push_back(c.require("decoder.conv" + std::to_string(l) + ".b").to_tensor());
        }
        ckpt.autoencoder = std::move(ae);
    }
    return ckpt;
}

} // namespace lagdyn::io
