#pragma once

#include <optional>
#include <string>

#include "lagdyn/lagrangian.hpp"
#include "lagdyn/systems.hpp"
#include "lagdyn/vision.hpp"

namespace lagdyn::io {

/// Trained model state: the Lagrangian networks always, the auto-encoder in
/// the video regime. Serialized as named f64 tensors plus metadata (regime,
/// m, lambda, layer sizes, dt, format version).
struct Checkpoint {
    std::string regime; // "state" | "video"
    sim::SystemKind kind = sim::SystemKind::pendulum;
    double dt = 0.05;
    nets::LagrangianModel lagrangian;
    std::optional<vision::AutoEncoder> autoencoder;

    int latent_dim() const { return 2 * lagrangian.m; }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

} // namespace lagdyn::io
