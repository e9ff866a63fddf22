#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagdyn/dataset.hpp"
#include "lagdyn/lagrangian.hpp"
#include "lagdyn/vision.hpp"

namespace lagdyn::train {

enum class Regime { state_space, video };
enum class Ablation { full, no_dyn, no_lat, no_ae };

std::string to_string(Regime r);
std::string to_string(Ablation a);
Regime regime_from_string(const std::string& s);
Ablation ablation_from_string(const std::string& s);

struct TrainConfig {
    Regime regime = Regime::state_space;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    double gamma = 0.1;
    int batch_size = 64;
    int epochs = 50;
    uint64_t seed = 1;
    Ablation ablation = Ablation::full;
    dynamics::Integrator integrator = dynamics::Integrator::euler;
    /// Latent-agreement term as mean absolute difference instead of the
    /// squared norm (off by default).
    bool lat_abs = false;
    int hidden = 200;
    double train_fraction = 0.8;
    int threads = 0;          // 0 = hardware concurrency (capped)
    int checkpoint_every = 0; // epochs between snapshots; 0 = final only

    void validate() const;
};

/// Per-term loss values; masked terms are still reported but contribute
/// zero to `total`.
struct LossBreakdown {
    double l_ae = 0.0;
    double l_dyn = 0.0;
    double l_lat = 0.0;
    double total = 0.0;
};

struct Models {
    nets::LagrangianModel lagrangian;
    std::optional<vision::AutoEncoder> autoencoder;
};

std::vector<nets::ParamRef> collect_params(Models& models);

/// Seeded shuffle then split: first train_fraction of the order trains,
/// the rest is held out.
std::pair<std::vector<int>, std::vector<int>> train_test_split(int n, double train_fraction,
                                                               uint64_t seed);

/// Mean absolute rollout error over a batch (the state-space objective):
/// Euler rollout from each trajectory's first state, summed |z - zhat| over
/// steps and components, divided by the batch size.
double state_space_loss(const nets::LagrangianModel& model, const sim::TrajectoryDataset& data,
                        std::span<const int> batch);

/// The three video terms on a batch: reconstruction, predicted-sequence
/// reconstruction, latent agreement (weighted by gamma in the total).
LossBreakdown video_losses(const Models& models, const sim::ObservationDataset& data,
                           std::span<const int> batch, const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    LossBreakdown mean;
};

struct TrainResult {
    Models models;
    std::vector<EpochRecord> history;
};

using CheckpointHook = std::function<void(int epoch, const Models& models)>;

/// Adam training loop over the dataset matching config.regime. Deterministic
/// for a fixed config: chunked gradient reduction keeps results independent
/// of the thread count. Throws NumericalError with epoch/batch context if a
/// loss stops being finite.
TrainResult train(const TrainConfig& config, const sim::GeneratedData& data, Models initial,
                  const CheckpointHook& on_checkpoint = {});

struct EvalStep {
    int step = 0; // 1-based rollout step
    bool in_range = false;
    bool has_ground_truth = false;
    double error = 0.0; // state MAE or per-pixel MSE, meaningful when has_ground_truth
};

/// Per-step rollout errors averaged over trajectories, split into in-range
/// and extrapolation halves of the horizon (the figure protocol: the first
/// half of the rollout covers the test range, the rest extrapolates).
struct EvalReport {
    std::vector<EvalStep> steps;
    int trajectory_count = 0;
    double in_range_mean = 0.0;
    double extrapolation_mean = 0.0;
    bool has_in_range = false;
    bool has_extrapolation = false;
};

int in_range_boundary(int horizon);

/// Rollout the given continuous dynamics against a state dataset.
EvalReport evaluate_state_rollout(const dynamics::DynamicsFn& dynamics,
                                  const sim::TrajectoryDataset& data, std::span<const int> trajs,
                                  int horizon, dynamics::Integrator integrator);

/// Encode the first observation, roll the latent forward, decode, and score
/// per-pixel MSE against the stored observations.
EvalReport evaluate_video_rollout(const Models& models, const sim::ObservationDataset& data,
                                  std::span<const int> trajs, int horizon);

/// Two-row image strip for one trajectory: ground-truth frames on top,
/// decoded rollout below.
Tensor rollout_strip(const Models& models, const sim::ObservationDataset& data, int traj,
                     int horizon);

} // namespace lagdyn::train
