#include "lagdyn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "lagdyn/adam.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/rng.hpp"

namespace lagdyn::train {

namespace {
constexpr int kGradChunks = 16;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

std::string to_string(Regime r) { return r == Regime::state_space ? "state" : "video"; }

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::no_dyn: return "no_dyn";
        case Ablation::no_lat: return "no_lat";
        case Ablation::no_ae: return "no_ae";
    }
    return "full";
}

Regime regime_from_string(const std::string& s) {
    if (s == "state" || s == "state_space") return Regime::state_space;
    if (s == "video") return Regime::video;
    throw UsageError("unknown regime '" + s + "' (expected state or video)");
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "full") return Ablation::full;
    if (s == "no_dyn") return Ablation::no_dyn;
    if (s == "no_lat") return Ablation::no_lat;
    if (s == "no_ae") return Ablation::no_ae;
    throw UsageError("unknown ablation '" + s + "' (expected full, no_dyn, no_lat or no_ae)");
}

void TrainConfig::validate() const {
    if (gamma < 0.0) throw UsageError("gamma must be >= 0");
    if (learning_rate <= 0.0) throw UsageError("learning rate must be positive");
    if (weight_decay < 0.0) throw UsageError("weight decay must be >= 0");
    if (batch_size < 1) throw UsageError("batch size must be >= 1");
    if (epochs < 0) throw UsageError("epochs must be >= 0");
    if (train_fraction <= 0.0 || train_fraction > 1.0)
        throw UsageError("train fraction must be in (0, 1]");
    if (integrator != dynamics::Integrator::euler)
        throw UsageError("training integrates with the Euler update");
    if (threads < 0) throw UsageError("threads must be >= 0");
}

std::vector<nets::ParamRef> collect_params(Models& models) {
    std::vector<nets::ParamRef> out;
    nets::collect_params(models.lagrangian, out);
    if (models.autoencoder) {
        vision::collect_params(models.autoencoder->encoder, "encoder", out);
        vision::collect_params(models.autoencoder->decoder, "decoder", out);
    }
    return out;
}

std::pair<std::vector<int>, std::vector<int>> train_test_split(int n, double train_fraction,
                                                               uint64_t seed) {
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    const int train_n = std::max(1, static_cast<int>(std::floor(train_fraction * n)));
    std::vector<int> train(order.begin(), order.begin() + train_n);
    std::vector<int> test(order.begin() + train_n, order.end());
    return {std::move(train), std::move(test)};
}

// ---- graph construction ----

namespace {

struct VideoVars {
    nets::LagrangianVars lag;
    vision::EncoderVars enc;
    vision::DecoderVars dec;
};

std::vector<ad::Var> ordered_leaves(const VideoVars& vv, bool with_autoencoder) {
    std::vector<ad::Var> leaves = nets::param_vars(vv.lag);
    if (with_autoencoder) {
        for (size_t l = 0; l < vv.enc.conv_w.size(); ++l) {
            leaves.push_back(vv.enc.conv_w[l]);
            leaves.push_back(vv.enc.conv_b[l]);
        }
        leaves.push_back(vv.enc.fc_w);
        leaves.push_back(vv.enc.fc_b);
        leaves.push_back(vv.dec.fc_w);
        leaves.push_back(vv.dec.fc_b);
        for (size_t l = 0; l < vv.dec.conv_w.size(); ++l) {
            leaves.push_back(vv.dec.conv_w[l]);
            leaves.push_back(vv.dec.conv_b[l]);
        }
    }
    return leaves;
}

Tensor traj_states(const sim::TrajectoryDataset& data, int n) {
    const int t = data.states.dim(1), m2 = data.states.dim(2);
    Tensor out({t, m2});
    const double* src = data.states.data() + static_cast<size_t>(n) * t * m2;
    for (int64_t i = 0; i < out.size(); ++i) out[i] = src[i];
    return out;
}

/// Eq-style rollout objective for one trajectory: Euler steps from the
/// first stored state, absolute differences summed over steps 1..T-1.
ad::Var state_traj_loss(ad::Graph& g, const nets::LagrangianVars& vars, double lambda, int m,
                        const Tensor& states, double dt) {
    const int t_len = states.dim(0);
    Tensor z0({2 * m});
    for (int i = 0; i < 2 * m; ++i) z0[i] = states.at(0, i);
    ad::Var z = g.constant(z0);
    ad::Var loss;
    for (int t = 1; t < t_len; ++t) {
        ad::Var q = ad::slice(z, 0, m);
        ad::Var qd = ad::slice(z, m, m);
        ad::Var upd = nets::model_dynamics_g(g, vars, q, qd, lambda);
        z = ad::add(z, ad::scale(upd, dt));
        if (!g.value(z).all_finite())
            throw NumericalError("rollout diverged to a non-finite state at step " +
                                 std::to_string(t));
        Tensor target({2 * m});
        for (int i = 0; i < 2 * m; ++i) target[i] = states.at(t, i);
        ad::Var term = ad::sum_abs(ad::sub(z, g.constant(target)));
        loss = t == 1 ? term : ad::add(loss, term);
    }
    return loss;
}

struct VideoTrajTerms {
    ad::Var l_ae;
    ad::Var l_dyn;
    ad::Var l_lat;
    bool has_rollout = false;
};

VideoTrajTerms video_traj_terms(ad::Graph& g, const VideoVars& vv, const vision::ConvSpec& spec,
                                double lambda, int m, const Tensor& obs, double dt,
                                bool lat_abs) {
    const int t_len = obs.dim(0);
    const int latent = spec.latent;
    VideoTrajTerms out;
    ad::Var x = g.constant(obs);
    ad::Var z_seq = vision::encode_g(spec, vv.enc, x);
    ad::Var recon = vision::decode_g(spec, vv.dec, z_seq);
    out.l_ae = ad::scale(ad::sum_sq(ad::sub(recon, x)), 1.0 / t_len);
    if (t_len < 2) return out;
    ad::Var z = ad::reshape(ad::slice_rows(z_seq, 0, 1), {latent});
    std::vector<ad::Var> rolled;
    rolled.reserve(static_cast<size_t>(t_len - 1));
    for (int t = 1; t < t_len; ++t) {
        ad::Var q = ad::slice(z, 0, m);
        ad::Var qd = ad::slice(z, m, m);
        ad::Var upd = nets::model_dynamics_g(g, vv.lag, q, qd, lambda);
        z = ad::add(z, ad::scale(upd, dt));
        if (!g.value(z).all_finite())
            throw NumericalError("latent rollout diverged to a non-finite state at step " +
                                 std::to_string(t));
        rolled.push_back(z);
    }
    ad::Var z_hat = ad::stack_rows(rolled);
    ad::Var decoded = vision::decode_g(spec, vv.dec, z_hat);
    out.l_dyn =
        ad::scale(ad::sum_sq(ad::sub(decoded, ad::slice_rows(x, 1, t_len - 1))), 1.0 / t_len);
    ad::Var lat_diff = ad::sub(z_hat, ad::slice_rows(z_seq, 1, t_len - 1));
    out.l_lat = lat_abs ? ad::sum_abs(lat_diff) : ad::sum_sq(lat_diff);
    out.has_rollout = true;
    return out;
}

/// Active-term total for one trajectory; masked terms stay out of the sum.
ad::Var video_total(ad::Graph& g, const VideoTrajTerms& terms, Ablation ablation, double gamma) {
    std::vector<ad::Var> active;
    if (ablation != Ablation::no_ae) active.push_back(terms.l_ae);
    if (terms.has_rollout && ablation != Ablation::no_dyn) active.push_back(terms.l_dyn);
    if (terms.has_rollout && ablation != Ablation::no_lat)
        active.push_back(ad::scale(terms.l_lat, gamma));
    if (active.empty()) return ad::scale(terms.l_ae, 0.0);
    ad::Var total = active[0];
    for (size_t i = 1; i < active.size(); ++i) total = ad::add(total, active[i]);
    return total;
}

double scalar(ad::Graph& g, ad::Var v) { return g.value(v)[0]; }

// ---- chunked batch execution ----

struct ChunkResult {
    std::vector<Tensor> grads;
    LossBreakdown sums;
    std::string error;
    bool failed = false;
};

int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

/// Run `fn(chunk)` for chunks 0..n_chunks-1 on up to `threads` workers.
/// Chunk results land in per-chunk slots, so the merge order (and therefore
/// the floating-point result) does not depend on scheduling.
void run_chunks(int n_chunks, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n_chunks <= 1) {
        for (int c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n_chunks);
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([w, workers, n_chunks, &fn]() {
            for (int c = w; c < n_chunks; c += workers) fn(c);
        });
    for (auto& th : pool) th.join();
}

struct BatchResult {
    std::vector<Tensor> grads; // summed over the batch
    LossBreakdown sums;        // summed over the batch
};

BatchResult run_state_batch(const nets::LagrangianModel& model,
                            const sim::TrajectoryDataset& data, std::span<const int> batch,
                            int threads, bool with_grads) {
    const int bn = static_cast<int>(batch.size());
    const int n_chunks = std::min(kGradChunks, bn);
    std::vector<ChunkResult> chunks(static_cast<size_t>(n_chunks));
    auto work = [&](int c) {
        ChunkResult& slot = chunks[static_cast<size_t>(c)];
        const int lo = static_cast<int>(static_cast<int64_t>(bn) * c / n_chunks);
        const int hi = static_cast<int>(static_cast<int64_t>(bn) * (c + 1) / n_chunks);
        if (lo >= hi) return;
        try {
            ad::Graph g;
            g.reserve(2048);
            nets::LagrangianVars vars = nets::insert_params(g, model);
            ad::Var total;
            for (int i = lo; i < hi; ++i) {
                const int traj = batch[static_cast<size_t>(i)];
                ad::Var loss;
                try {
                    loss = state_traj_loss(g, vars, model.lambda, model.m,
                                           traj_states(data, traj), data.dt);
                } catch (const NumericalError& e) {
                    throw NumericalError("trajectory " + std::to_string(traj) + ": " + e.what());
                }
                slot.sums.total += scalar(g, loss);
                total = i == lo ? loss : ad::add(total, loss);
            }
            if (with_grads) {
                g.backward(total);
                slot.grads = nets::extract_gradients(g, nets::param_vars(vars), {});
            }
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.error = e.what();
        }
    };
    run_chunks(n_chunks, effective_threads(threads), work);
    BatchResult out;
    for (const auto& slot : chunks) {
        if (slot.failed) throw NumericalError(slot.error);
        out.sums.total += slot.sums.total;
        if (slot.grads.empty()) continue;
        if (out.grads.empty()) {
            out.grads = slot.grads;
        } else {
            for (size_t p = 0; p < out.grads.size(); ++p)
                for (int64_t j = 0; j < out.grads[p].size(); ++j)
                    out.grads[p][j] += slot.grads[p][j];
        }
    }
    return out;
}

BatchResult run_video_batch(const Models& models, const sim::ObservationDataset& data,
                            std::span<const int> batch, const TrainConfig& config, int threads,
                            bool with_grads) {
    const vision::ConvSpec& spec = models.autoencoder->encoder.spec;
    const int bn = static_cast<int>(batch.size());
    const int t_len = data.length();
    const int n_chunks = std::min(kGradChunks, bn);
    std::vector<ChunkResult> chunks(static_cast<size_t>(n_chunks));
    auto work = [&](int c) {
        ChunkResult& slot = chunks[static_cast<size_t>(c)];
        const int lo = static_cast<int>(static_cast<int64_t>(bn) * c / n_chunks);
        const int hi = static_cast<int>(static_cast<int64_t>(bn) * (c + 1) / n_chunks);
        if (lo >= hi) return;
        try {
            ad::Graph g;
            g.reserve(4096);
            VideoVars vv;
            vv.lag = nets::insert_params(g, models.lagrangian);
            vv.enc = vision::insert_params(g, models.autoencoder->encoder);
            vv.dec = vision::insert_params(g, models.autoencoder->decoder);
            ad::Var total;
            for (int i = lo; i < hi; ++i) {
                const int traj = batch[static_cast<size_t>(i)];
                VideoTrajTerms terms;
                try {
                    terms = video_traj_terms(g, vv, spec, models.lagrangian.lambda,
                                             models.lagrangian.m,
                                             data.observation_block(traj, 0, t_len), data.dt,
                                             config.lat_abs);
                } catch (const NumericalError& e) {
                    throw NumericalError("trajectory " + std::to_string(traj) + ": " + e.what());
                }
                slot.sums.l_ae += scalar(g, terms.l_ae);
                if (terms.has_rollout) {
                    slot.sums.l_dyn += scalar(g, terms.l_dyn);
                    slot.sums.l_lat += scalar(g, terms.l_lat);
                }
                ad::Var traj_total = video_total(g, terms, config.ablation, config.gamma);
                slot.sums.total += scalar(g, traj_total);
                total = i == lo ? traj_total : ad::add(total, traj_total);
            }
            if (with_grads) {
                g.backward(total);
                slot.grads = nets::extract_gradients(g, ordered_leaves(vv, true), {});
            }
        } catch (const std::exception& e) {
            slot.failed = true;
            slot.error = e.what();
        }
    };
    run_chunks(n_chunks, effective_threads(threads), work);
    BatchResult out;
    for (const auto& slot : chunks) {
        if (slot.failed) throw NumericalError(slot.error);
        out.sums.l_ae += slot.sums.l_ae;
        out.sums.l_dyn += slot.sums.l_dyn;
        out.sums.l_lat += slot.sums.l_lat;
        out.sums.total += slot.sums.total;
        if (slot.grads.empty()) continue;
        if (out.grads.empty()) {
            out.grads = slot.grads;
        } else {
            for (size_t p = 0; p < out.grads.size(); ++p)
                for (int64_t j = 0; j < out.grads[p].size(); ++j)
                    out.grads[p][j] += slot.grads[p][j];
        }
    }
    return out;
}

} // namespace

double state_space_loss(const nets::LagrangianModel& model, const sim::TrajectoryDataset& data,
                        std::span<const int> batch) {
    if (batch.empty()) throw UsageError("state_space_loss: empty batch");
    if (data.length() < 2) throw UsageError("state_space_loss: trajectories need T >= 2");
    const BatchResult r = run_state_batch(model, data, batch, 1, false);
    return r.sums.total / static_cast<double>(batch.size());
}

LossBreakdown video_losses(const Models& models, const sim::ObservationDataset& data,
                           std::span<const int> batch, const TrainConfig& config) {
    if (batch.empty()) throw UsageError("video_losses: empty batch");
    if (!models.autoencoder) throw UsageError("video_losses: models lack an auto-encoder");
    const BatchResult r = run_video_batch(models, data, batch, config, 1, false);
    const double bn = static_cast<double>(batch.size());
    return LossBreakdown{r.sums.l_ae / bn, r.sums.l_dyn / bn, r.sums.l_lat / bn,
                         r.sums.total / bn};
}

TrainResult train(const TrainConfig& config, const sim::GeneratedData& data, Models initial,
                  const CheckpointHook& on_checkpoint) {
    config.validate();
    const bool video = config.regime == Regime::video;
    if (video && !initial.autoencoder)
        throw UsageError("video training needs auto-encoder parameters");
    if (video) {
        const int latent = initial.autoencoder->encoder.spec.latent;
        if (latent != 2 * initial.lagrangian.m)
            throw UsageError("latent dimension " + std::to_string(latent) +
                             " does not split into twice m=" +
                             std::to_string(initial.lagrangian.m));
        if (data.observations.observations.empty())
            throw DataError("dataset has no observations for video training");
        if (data.observations.length() < 2) throw DataError("video training needs T >= 2");
    } else {
        if (data.trajectories.states.empty()) throw DataError("dataset has no state trajectories");
        if (data.trajectories.length() < 2) throw DataError("state training needs T >= 2");
    }
    const int n = video ? data.observations.count() : data.trajectories.count();
    auto [train_idx, test_idx] = train_test_split(n, config.train_fraction, config.seed);
    (void)test_idx;

    TrainResult result;
    Models models = std::move(initial);
    std::vector<nets::ParamRef> params = collect_params(models);
    Adam optimizer(config.learning_rate, config.weight_decay);
    Rng shuffle_rng(Rng(config.seed).next_u64());

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (int i = static_cast<int>(train_idx.size()) - 1; i > 0; --i) {
            const int j = static_cast<int>(shuffle_rng.next_u64() % static_cast<uint64_t>(i + 1));
            std::swap(train_idx[static_cast<size_t>(i)], train_idx[static_cast<size_t>(j)]);
        }
        LossBreakdown epoch_sums;
        int seen = 0;
        int batch_index = 0;
        for (size_t start = 0; start < train_idx.size(); start += static_cast<size_t>(config.batch_size)) {
            const size_t end = std::min(train_idx.size(), start + static_cast<size_t>(config.batch_size));
            std::span<const int> batch(train_idx.data() + start, end - start);
            BatchResult br;
            try {
                br = video ? run_video_batch(models, data.observations, batch, config,
                                             config.threads, true)
                           : run_state_batch(models.lagrangian, data.trajectories, batch,
                                             config.threads, true);
            } catch (const NumericalError& e) {
                std::ostringstream msg;
                msg << "epoch " << epoch << " batch " << batch_index << ": " << e.what();
                throw NumericalError(msg.str());
            }
            if (!std::isfinite(br.sums.total)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << " batch " << batch_index;
                throw NumericalError(msg.str());
            }
            const double inv = 1.0 / static_cast<double>(batch.size());
            for (auto& grad : br.grads)
                for (int64_t j = 0; j < grad.size(); ++j) grad[j] *= inv;
            optimizer.step(params, br.grads);
            epoch_sums.l_ae += br.sums.l_ae;
            epoch_sums.l_dyn += br.sums.l_dyn;
            epoch_sums.l_lat += br.sums.l_lat;
            epoch_sums.total += br.sums.total;
            seen += static_cast<int>(batch.size());
            ++batch_index;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        const double inv = seen > 0 ? 1.0 / seen : 0.0;
        rec.mean = LossBreakdown{epoch_sums.l_ae * inv, epoch_sums.l_dyn * inv,
                                 epoch_sums.l_lat * inv, epoch_sums.total * inv};
        result.history.push_back(rec);
        if (on_checkpoint && config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0)
            on_checkpoint(epoch, models);
    }
    result.models = std::move(models);
    return result;
}

// ---- evaluation ----

int in_range_boundary(int horizon) { return (horizon + 1) / 2; }

namespace {

EvalReport finish_report(std::vector<EvalStep> steps, int traj_count) {
    EvalReport report;
    report.steps = std::move(steps);
    report.trajectory_count = traj_count;
    double in_sum = 0.0, ex_sum = 0.0;
    int in_n = 0, ex_n = 0;
    for (const auto& s : report.steps) {
        if (!s.has_ground_truth) continue;
        if (s.in_range) {
            in_sum += s.error;
            ++in_n;
        } else {
            ex_sum += s.error;
            ++ex_n;
        }
    }
    report.has_in_range = in_n > 0;
    report.has_extrapolation = ex_n > 0;
    report.in_range_mean = in_n > 0 ? in_sum / in_n : kNan;
    report.extrapolation_mean = ex_n > 0 ? ex_sum / ex_n : kNan;
    return report;
}

} // namespace

EvalReport evaluate_state_rollout(const dynamics::DynamicsFn& dynamics,
                                  const sim::TrajectoryDataset& data, std::span<const int> trajs,
                                  int horizon, dynamics::Integrator integrator) {
    if (horizon < 1) throw UsageError("evaluate: horizon must be >= 1");
    if (trajs.empty()) throw UsageError("evaluate: no trajectories selected");
    const int t_len = data.length();
    const int boundary = in_range_boundary(horizon);
    std::vector<double> err(static_cast<size_t>(horizon), 0.0);
    for (int traj : trajs) {
        dynamics::PhaseState z = data.state_at(traj, 0);
        bool diverged = false;
        for (int t = 1; t <= horizon; ++t) {
            if (!diverged) {
                try {
                    if (integrator == dynamics::Integrator::euler)
                        z = dynamics::euler_step(z, dynamics(z), data.dt);
                    else
                        z = dynamics::rk4_step(dynamics, z, data.dt);
                } catch (const NumericalError&) {
                    diverged = true;
                }
                if (!diverged && !z.finite()) diverged = true;
            }
            if (t >= t_len) continue; // no ground truth beyond the stored rows
            if (diverged) {
                err[static_cast<size_t>(t - 1)] += kInf;
                continue;
            }
            const dynamics::PhaseState truth = data.state_at(traj, t);
            const int m = truth.dof();
            double mae = 0.0;
            for (int i = 0; i < m; ++i)
                mae += std::abs(z.q[i] - truth.q[i]) + std::abs(z.qdot[i] - truth.qdot[i]);
            err[static_cast<size_t>(t - 1)] += mae / (2.0 * m);
        }
    }
    std::vector<EvalStep> steps;
    for (int t = 1; t <= horizon; ++t) {
        EvalStep s;
        s.step = t;
        s.in_range = t <= boundary;
        s.has_ground_truth = t < t_len;
        s.error = s.has_ground_truth ? err[static_cast<size_t>(t - 1)] / trajs.size() : kNan;
        steps.push_back(s);
    }
    return finish_report(std::move(steps), static_cast<int>(trajs.size()));
}

namespace {

/// Decoded frame MSE per pixel against the stored observation.
double observation_mse(const Tensor& decoded, const Tensor& truth) {
    double acc = 0.0;
    for (int64_t i = 0; i < decoded.size(); ++i) {
        const double d = decoded[i] - truth[i];
        acc += d * d;
    }
    return acc / static_cast<double>(decoded.size());
}

} // namespace

EvalReport evaluate_video_rollout(const Models& models, const sim::ObservationDataset& data,
                                  std::span<const int> trajs, int horizon) {
    if (horizon < 1) throw UsageError("evaluate: horizon must be >= 1");
    if (trajs.empty()) throw UsageError("evaluate: no trajectories selected");
    if (!models.autoencoder) throw UsageError("evaluate: video evaluation needs an auto-encoder");
    const vision::Encoder& enc = models.autoencoder->encoder;
    const vision::Decoder& dec = models.autoencoder->decoder;
    const nets::LagrangianModel& lag = models.lagrangian;
    const int t_len = data.length();
    const int boundary = in_range_boundary(horizon);
    std::vector<double> err(static_cast<size_t>(horizon), 0.0);
    const Tensor tau({lag.m});
    for (int traj : trajs) {
        Tensor z = vision::encode(enc, data.observation_at(traj, 0));
        bool diverged = false;
        for (int t = 1; t <= horizon; ++t) {
            if (!diverged) {
                try {
                    dynamics::PhaseState state = vision::latent_split(z);
                    const dynamics::DynamicsUpdate upd = nets::model_dynamics(lag, state, tau);
                    for (int i = 0; i < lag.m; ++i) {
                        z[i] += data.dt * upd.qdot[i];
                        z[lag.m + i] += data.dt * upd.qddot[i];
                    }
                } catch (const NumericalError&) {
                    diverged = true;
                }
                if (!diverged && !z.all_finite()) diverged = true;
            }
            if (t >= t_len) continue;
            if (diverged) {
                err[static_cast<size_t>(t - 1)] += kInf;
                continue;
            }
            const Tensor decoded = vision::decode(dec, z);
            err[static_cast<size_t>(t - 1)] +=
                observation_mse(decoded, data.observation_at(traj, t));
        }
    }
    std::vector<EvalStep> steps;
    for (int t = 1; t <= horizon; ++t) {
        EvalStep s;
        s.step = t;
        s.in_range = t <= boundary;
        s.has_ground_truth = t < t_len;
        s.error = s.has_ground_truth ? err[static_cast<size_t>(t - 1)] / trajs.size() : kNan;
        steps.push_back(s);
    }
    return finish_report(std::move(steps), static_cast<int>(trajs.size()));
}

Tensor rollout_strip(const Models& models, const sim::ObservationDataset& data, int traj,
                     int horizon) {
    if (!models.autoencoder) throw UsageError("rollout_strip needs a video checkpoint");
    const vision::Encoder& enc = models.autoencoder->encoder;
    const vision::Decoder& dec = models.autoencoder->decoder;
    const nets::LagrangianModel& lag = models.lagrangian;
    const int hw = data.observations.dim(3);
    const int t_len = data.length();
    const int cells = horizon + 1;
    const int sep = 1;
    const double sep_gray = 0.25;
    Tensor strip({2 * hw + 3 * sep, cells * (hw + sep) + sep});
    strip.fill(sep_gray);

    auto blit = [&](int row_block, int cell, const Tensor& frame) {
        const int r0 = sep + row_block * (hw + sep);
        const int c0 = sep + cell * (hw + sep);
        for (int r = 0; r < hw; ++r)
            for (int c = 0; c < hw; ++c) strip.at(r0 + r, c0 + c) = frame.at(r, c);
    };
    auto first_channel = [&](const Tensor& obs) {
        Tensor f({hw, hw});
        for (int64_t i = 0; i < f.size(); ++i) f[i] = obs[i];
        return f;
    };
    Tensor black({hw, hw});
    for (int cell = 0; cell < cells; ++cell) {
        if (cell < t_len)
            blit(0, cell, first_channel(data.observation_at(traj, cell)));
        else
            blit(0, cell, black);
    }

    Tensor z = vision::encode(enc, data.observation_at(traj, 0));
    const Tensor tau({lag.m});
    blit(1, 0, first_channel(vision::decode(dec, z)));
    bool diverged = false;
    for (int t = 1; t <= horizon; ++t) {
        if (!diverged) {
            try {
                dynamics::PhaseState state = vision::latent_split(z);
                const dynamics::DynamicsUpdate upd = nets::model_dynamics(lag, state, tau);
                for (int i = 0; i < lag.m; ++i) {
                    z[i] += data.dt * upd.qdot[i];
                    z[lag.m + i] += data.dt * upd.qddot[i];
                }
            } catch (const NumericalError&) {
                diverged = true;
            }
            if (!diverged && !z.all_finite()) diverged = true;
        }
        blit(1, t, diverged ? black : first_channel(vision::decode(dec, z)));
    }
    return strip;
}

} // namespace lagdyn::train
