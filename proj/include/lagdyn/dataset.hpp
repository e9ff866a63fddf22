#pragma once

#include <cstdint>
#include <string>

#include "lagdyn/render.hpp"
#include "lagdyn/systems.hpp"
#include "lagdyn/tensor.hpp"

namespace lagdyn::sim {

/// Ground-truth state sequences: states (N, T, 2m), flat rows [q..., qdot...].
struct TrajectoryDataset {
    Tensor states;
    double dt = 0.05;
    SystemSpec spec;
    uint64_t seed = 0;

    int count() const { return states.dim(0); }
    int length() const { return states.dim(1); }
    dynamics::PhaseState state_at(int n, int t) const;
};

/// Rendered counterpart: observations (N, T, 3, H, W) stacked from raw
/// frames (N, T+2, H, W). `latents` carries the underlying states for
/// evaluation only; training never reads it.
struct ObservationDataset {
    Tensor observations;
    Tensor frames;
    Tensor latents; // (N, T, 2m)
    double dt = 0.05;
    SystemSpec spec;
    uint64_t seed = 0;

    int count() const { return observations.dim(0); }
    int length() const { return observations.dim(1); }
    Tensor observation_at(int n, int t) const;       // (3, H, W)
    Tensor observation_block(int n, int t0, int len) const; // (len, 3, H, W)
};

struct GeneratedData {
    TrajectoryDataset trajectories;
    ObservationDataset observations;
};

/// Draw initial states (pendulum: q in [-pi, pi), qdot in [-1, 1]; acrobot:
/// q_i in [-pi, pi), qdot_i in [-0.5, 0.5]) and integrate with RK4 at
/// spec.dt. Deterministic in `seed`.
TrajectoryDataset generate_trajectories(const SystemSpec& spec, int n, int t, uint64_t seed);

/// Trajectories plus rendered frames and stacked observations. The state
/// rows align one-to-one with the observations; frames run two steps longer.
GeneratedData generate_dataset(const SystemSpec& spec, int n, int t, uint64_t seed);

void save_dataset(const std::string& path, const GeneratedData& data);
GeneratedData load_dataset(const std::string& path);

} // namespace lagdyn::sim
