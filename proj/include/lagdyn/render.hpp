#pragma once

#include <vector>

#include "lagdyn/systems.hpp"
#include "lagdyn/tensor.hpp"

namespace lagdyn::sim {

inline constexpr int kFrameSize = 32;

/// Single grayscale frame, intensities in [0, 1], shape (H, W).
using Frame = Tensor;

/// Three consecutive frames stacked channel-wise, shape (3, H, W).
using Observation = Tensor;

/// Rasterize the system at configuration q: thick anti-aliased white links
/// on black. The pendulum pivots at the image center, the acrobot in the
/// upper third so both links stay inside the frame for every pose.
Frame render_frame(const SystemSpec& spec, const Tensor& q);

/// Observation t stacks frames (t, t+1, t+2); output length = input - 2.
std::vector<Observation> build_observations(const std::vector<Frame>& frames);

} // namespace lagdyn::sim
