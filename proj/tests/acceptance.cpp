// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured quantity against its pinned threshold; the binary exits
// nonzero if any criterion fails. The desk-scale training criteria dominate
// the runtime (tens of minutes in total).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lagdyn/checkpoint.hpp"
#include "lagdyn/container.hpp"
#include "lagdyn/dataset.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"
#include "lagdyn/pgm.hpp"
#include "lagdyn/training.hpp"

#ifndef LAGDYN_CLI_PATH
#define LAGDYN_CLI_PATH "lagdyn"
#endif

using namespace lagdyn;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool passed, const std::string& detail,
            double seconds) {
    std::printf("[%2d] %-34s %s  (%s, %.1fs)\n", index, name.c_str(),
                passed ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

dynamics::PhaseState random_state(const sim::SystemSpec& spec, Rng& rng, double vmax) {
    const double pi = 3.14159265358979323846;
    Tensor q({spec.dof}), qd({spec.dof});
    for (int i = 0; i < spec.dof; ++i) q[i] = rng.uniform(-pi, pi);
    for (int i = 0; i < spec.dof; ++i) qd[i] = rng.uniform(-vmax, vmax);
    return dynamics::PhaseState(std::move(q), std::move(qd));
}

// ---- criterion 1: analytic closure ----
void criterion_closure() {
    Timer timer;
    Rng rng(1001);
    double worst = 0.0;
    for (auto kind : {sim::SystemKind::pendulum, sim::SystemKind::acrobot}) {
        const sim::SystemSpec spec = kind == sim::SystemKind::pendulum
                                         ? sim::SystemSpec::pendulum()
                                         : sim::SystemSpec::acrobot();
        const sim::AnalyticLagrangian lag = sim::analytic_lagrangian(spec);
        const Tensor tau({spec.dof});
        for (int trial = 0; trial < 1000; ++trial) {
            const dynamics::PhaseState z = random_state(spec, rng, 1.5);
            const Tensor c = dynamics::coriolis_vector(lag.inertia_jacobian(z.q), z.qdot);
            const Tensor qddot =
                dynamics::forward_dynamics(lag.inertia(z.q), c, lag.potential_gradient(z.q), tau);
            const auto direct = kind == sim::SystemKind::pendulum
                                    ? sim::pendulum_dynamics(spec, z, tau)
                                    : sim::acrobot_dynamics(spec, z, tau);
            worst = std::max(worst, max_abs_diff(qddot, direct.qddot));
        }
    }
    report(1, "analytic closure", worst < 1e-10, "max |diff| " + fmt(worst) + " < 1e-10",
           timer.seconds());
}

// ---- criterion 2: coriolis against the finite-difference double sum ----
void criterion_coriolis() {
    Timer timer;
    Rng rng(1002);
    const sim::SystemSpec spec = sim::SystemSpec::acrobot();
    const sim::AnalyticLagrangian lag = sim::analytic_lagrangian(spec);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const dynamics::PhaseState z = random_state(spec, rng, 2.0);
        // independent brute force: finite-difference dD/dq into the c_ijk sum
        Tensor ddq({2, 2, 2});
        for (int k = 0; k < 2; ++k) {
            Tensor qp = z.q, qm = z.q;
            qp[k] += h;
            qm[k] -= h;
            const Tensor dp = lag.inertia(qp), dm = lag.inertia(qm);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    ddq.at3(i, j, k) = (dp.at(i, j) - dm.at(i, j)) / (2.0 * h);
        }
        Tensor expect({2});
        for (int k = 0; k < 2; ++k) {
            double acc = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    acc += (ddq.at3(k, j, i) - 0.5 * ddq.at3(i, j, k)) * z.qdot[i] * z.qdot[j];
            expect[k] = acc;
        }
        const Tensor got = dynamics::coriolis_vector(lag.inertia_jacobian(z.q), z.qdot);
        worst = std::max(worst, max_abs_diff(got, expect));
    }
    report(2, "coriolis correctness", worst < 1e-5, "max |diff| " + fmt(worst) + " < 1e-5",
           timer.seconds());
}

// ---- criterion 3: energy conservation ----
void criterion_energy() {
    Timer timer;
    double worst = 0.0;
    for (auto kind : {sim::SystemKind::pendulum, sim::SystemKind::acrobot}) {
        const sim::SystemSpec spec = kind == sim::SystemKind::pendulum
                                         ? sim::SystemSpec::pendulum()
                                         : sim::SystemSpec::acrobot();
        const auto dyn = sim::system_dynamics(spec);
        dynamics::PhaseState z =
            kind == sim::SystemKind::pendulum
                ? dynamics::PhaseState(Tensor::vector({2.0}), Tensor::vector({0.5}))
                : dynamics::PhaseState(Tensor::vector({0.7, -0.5}), Tensor::vector({0.3, 0.1}));
        const double e0 = sim::total_energy(spec, z);
        double drift = 0.0;
        for (int t = 0; t < 10000; ++t) {
            z = dynamics::rk4_step(dyn, z, 1e-3);
            drift = std::max(drift, std::abs(sim::total_energy(spec, z) - e0));
        }
        worst = std::max(worst, drift / std::abs(e0));
    }
    report(3, "energy conservation", worst < 1e-4, "max rel drift " + fmt(worst) + " < 1e-4",
           timer.seconds());
}

// ---- criterion 4: gradient exactness ----
double rollout_loss_value(const nets::LagrangianModel& model, const Tensor& z0,
                          const std::vector<Tensor>& targets, double dt) {
    ad::Graph g;
    nets::LagrangianVars vars = nets::insert_params(g, model);
    ad::Var z = g.constant(z0);
    ad::Var loss;
    for (size_t t = 0; t < targets.size(); ++t) {
        ad::Var q = ad::slice(z, 0, model.m);
        ad::Var qd = ad::slice(z, model.m, model.m);
        z = ad::add(z, ad::scale(nets::model_dynamics_g(g, vars, q, qd, model.lambda), dt));
        ad::Var term = ad::sum_abs(ad::sub(z, g.constant(targets[t])));
        loss = t == 0 ? term : ad::add(loss, term);
    }
    return g.value(loss)[0];
}

void criterion_gradients() {
    Timer timer;
    bool ok = true;
    std::string detail;
    // (a) rollout objective through two Euler steps, hidden width 4
    {
        Rng rng(1004);
        nets::LagrangianModel model = nets::LagrangianModel::create(1, rng, 4);
        const double dt = 0.05;
        const Tensor z0 = Tensor::vector({0.9, -0.3});
        const std::vector<Tensor> targets{Tensor::vector({0.85, -0.55}),
                                          Tensor::vector({0.78, -0.70})};
        ad::Graph g;
        nets::LagrangianVars vars = nets::insert_params(g, model);
        ad::Var z = g.constant(z0);
        ad::Var loss;
        for (size_t t = 0; t < targets.size(); ++t) {
            ad::Var q = ad::slice(z, 0, 1);
            ad::Var qd = ad::slice(z, 1, 1);
            z = ad::add(z, ad::scale(nets::model_dynamics_g(g, vars, q, qd, model.lambda), dt));
            ad::Var term = ad::sum_abs(ad::sub(z, g.constant(targets[t])));
            loss = t == 0 ? term : ad::add(loss, term);
        }
        g.backward(loss);
        std::vector<nets::ParamRef> refs;
        nets::collect_params(model, refs);
        const std::vector<Tensor> grads = nets::extract_gradients(g, nets::param_vars(vars), refs);
        const double h = 1e-6;
        double worst = 0.0;
        for (size_t p = 0; p < refs.size(); ++p) {
            Tensor& theta = *refs[p].tensor;
            for (int64_t j = 0; j < theta.size(); ++j) {
                const double saved = theta[j];
                theta[j] = saved + h;
                const double fp = rollout_loss_value(model, z0, targets, dt);
                theta[j] = saved - h;
                const double fm = rollout_loss_value(model, z0, targets, dt);
                theta[j] = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double err = std::abs(grads[p][j] - fd);
                if (err > 1e-8)
                    worst = std::max(worst, err / std::max(std::abs(grads[p][j]), std::abs(fd)));
            }
        }
        ok = ok && worst < 1e-4;
        detail = "rollout rel " + fmt(worst) + " < 1e-4";
    }
    // (b) full video objective on 4x4 toy images
    {
        Rng rng(1104);
        train::Models models;
        models.lagrangian = nets::LagrangianModel::create(1, rng, 4);
        vision::ConvSpec spec;
        spec.input_hw = 4;
        spec.channels = {2, 2};
        spec.latent = 2;
        models.autoencoder = vision::AutoEncoder::create(spec, rng);
        sim::ObservationDataset data;
        data.observations = Tensor({1, 3, 3, 4, 4});
        for (int64_t i = 0; i < data.observations.size(); ++i)
            data.observations[i] = rng.uniform(0.05, 0.95);
        data.dt = 0.05;
        data.spec = sim::SystemSpec::pendulum();
        train::TrainConfig config;
        config.regime = train::Regime::video;
        const std::vector<int> batch{0};

        // reverse-mode gradients of the total loss
        ad::Graph g;
        nets::LagrangianVars lv = nets::insert_params(g, models.lagrangian);
        vision::EncoderVars ev = vision::insert_params(g, models.autoencoder->encoder);
        vision::DecoderVars dv = vision::insert_params(g, models.autoencoder->decoder);
        ad::Var x = g.constant(data.observation_block(0, 0, 3));
        ad::Var z_seq = vision::encode_g(spec, ev, x);
        ad::Var l_ae =
            ad::scale(ad::sum_sq(ad::sub(vision::decode_g(spec, dv, z_seq), x)), 1.0 / 3.0);
        ad::Var z = ad::reshape(ad::slice_rows(z_seq, 0, 1), {2});
        std::vector<ad::Var> rolled;
        for (int t = 1; t < 3; ++t) {
            ad::Var q = ad::slice(z, 0, 1);
            ad::Var qd = ad::slice(z, 1, 1);
            z = ad::add(z, ad::scale(nets::model_dynamics_g(g, lv, q, qd, 1.0), data.dt));
            rolled.push_back(z);
        }
        ad::Var z_hat = ad::stack_rows(rolled);
        ad::Var l_dyn = ad::scale(
            ad::sum_sq(ad::sub(vision::decode_g(spec, dv, z_hat), ad::slice_rows(x, 1, 2))),
            1.0 / 3.0);
        ad::Var l_lat = ad::sum_sq(ad::sub(z_hat, ad::slice_rows(z_seq, 1, 2)));
        ad::Var total = ad::add(ad::add(l_ae, l_dyn), ad::scale(l_lat, 0.1));
        g.backward(total);

        std::vector<nets::ParamRef> refs = train::collect_params(models);
        std::vector<ad::Var> leaves = nets::param_vars(lv);
        for (size_t l = 0; l < ev.conv_w.size(); ++l) {
            leaves.push_back(ev.conv_w[l]);
            leaves.push_back(ev.conv_b[l]);
        }
        leaves.push_back(ev.fc_w);
        leaves.push_back(ev.fc_b);
        leaves.push_back(dv.fc_w);
        leaves.push_back(dv.fc_b);
        for (size_t l = 0; l < dv.conv_w.size(); ++l) {
            leaves.push_back(dv.conv_w[l]);
            leaves.push_back(dv.conv_b[l]);
        }
        const std::vector<Tensor> grads = nets::extract_gradients(g, leaves, refs);
        const double h = 1e-6;
        double worst = 0.0;
        for (size_t p = 0; p < refs.size(); ++p) {
            Tensor& theta = *refs[p].tensor;
            for (int64_t j = 0; j < theta.size(); ++j) {
                const double saved = theta[j];
                theta[j] = saved + h;
                const double fp = train::video_losses(models, data, batch, config).total;
                theta[j] = saved - h;
                const double fm = train::video_losses(models, data, batch, config).total;
                theta[j] = saved;
                const double fd = (fp - fm) / (2.0 * h);
                const double err = std::abs(grads[p][j] - fd);
                if (err > 1e-7)
                    worst = std::max(worst, err / std::max(std::abs(grads[p][j]), std::abs(fd)));
            }
        }
        ok = ok && worst < 1e-3;
        detail += ", video rel " + fmt(worst) + " < 1e-3";
    }
    report(4, "gradient exactness", ok, detail, timer.seconds());
}

// ---- criterion 5: SPD guarantee ----
void criterion_spd() {
    Timer timer;
    Rng rng(1005);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 3);
        nets::LagrangianModel model = nets::LagrangianModel::create(m, rng, 16);
        Tensor q({m});
        for (int i = 0; i < m; ++i) q[i] = rng.uniform(-3.2, 3.2);
        const Tensor d = nets::inertia_matrix(model, q);
        // Cholesky success of D and of D - (lambda - 1e-9) I certifies
        // both positive definiteness and the eigenvalue floor
        Tensor full = d, shifted = d;
        for (int i = 0; i < m; ++i) shifted.at(i, i) -= model.lambda - 1e-9;
        try {
            linalg::cholesky_factor(full);
            linalg::cholesky_factor(shifted);
        } catch (const NumericalError&) {
            ++failures;
        }
    }
    report(5, "SPD guarantee", failures == 0, std::to_string(failures) + " failures in 1000 draws",
           timer.seconds());
}

// ---- criteria 6 and 9: state-space learning and determinism, via the CLI ----
struct StateRunArtifacts {
    std::string dataset;
    std::string run1;
    std::string run2;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LAGDYN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

void criterion_state_learning(const std::string& work, StateRunArtifacts& artifacts) {
    Timer timer;
    artifacts.dataset = work + "/pendulum-state.ldc";
    artifacts.run1 = work + "/state-run1";
    artifacts.run2 = work + "/state-run2";
    bool ok = run_cli("gen-data --system=pendulum --n=500 --t=10 --dt=0.05 --seed=61 --out=" +
                      artifacts.dataset) == 0;
    ok = ok && run_cli("train --regime=state --data=" + artifacts.dataset +
                       " --epochs=50 --batch=64 --lr=1e-3 --weight-decay=1e-5 --seed=62 --out=" +
                       artifacts.run1) == 0;
    double ratio = 0.0;
    if (ok) {
        const io::Checkpoint ckpt = io::load_checkpoint(artifacts.run1 + "/model.ldc");
        const sim::GeneratedData data = sim::load_dataset(artifacts.dataset);
        auto [tr, te] = train::train_test_split(500, 0.8, 62);
        const auto model_report = train::evaluate_state_rollout(
            nets::make_dynamics(ckpt.lagrangian), data.trajectories, te, 9,
            dynamics::Integrator::euler);
        dynamics::DynamicsFn coast = [](const dynamics::PhaseState& z) {
            dynamics::DynamicsUpdate u;
            u.qdot = z.qdot;
            u.qddot = Tensor(z.q.shape());
            return u;
        };
        const auto base_report = train::evaluate_state_rollout(coast, data.trajectories, te, 9,
                                                               dynamics::Integrator::euler);
        double model_mae = 0.0, base_mae = 0.0;
        int n = 0;
        for (size_t i = 0; i < model_report.steps.size(); ++i)
            if (model_report.steps[i].has_ground_truth) {
                model_mae += model_report.steps[i].error;
                base_mae += base_report.steps[i].error;
                ++n;
            }
        model_mae /= n;
        base_mae /= n;
        ratio = base_mae / model_mae;
        ok = ratio >= 5.0;
        report(6, "state-space learning", ok,
               "held-out MAE ratio " + fmt(ratio) + "x >= 5x (model " + fmt(model_mae) +
                   ", baseline " + fmt(base_mae) + ")",
               timer.seconds());
        return;
    }
    report(6, "state-space learning", false, "pipeline failed", timer.seconds());
}

void criterion_determinism(const StateRunArtifacts& artifacts) {
    Timer timer;
    bool ok = run_cli("train --regime=state --data=" + artifacts.dataset +
                      " --epochs=50 --batch=64 --lr=1e-3 --weight-decay=1e-5 --seed=62 --out=" +
                      artifacts.run2) == 0;
    if (ok) {
        const std::string a = file_bytes(artifacts.run1 + "/model.ldc");
        const std::string b = file_bytes(artifacts.run2 + "/model.ldc");
        ok = !a.empty() && a == b;
    }
    report(9, "determinism", ok,
           ok ? "repeat run is byte-identical" : "checkpoints differ between same-seed runs",
           timer.seconds());
}

// ---- criterion 10: format round trips ----
void criterion_formats(const std::string& work) {
    Timer timer;
    bool ok = true;
    std::string detail = "dataset, checkpoint, strip round-trips";
    // dataset
    const auto data = sim::generate_dataset(sim::SystemSpec::acrobot(), 3, 4, 77);
    const std::string d1 = work + "/fmt1.ldc", d2 = work + "/fmt2.ldc";
    sim::save_dataset(d1, data);
    sim::save_dataset(d2, sim::load_dataset(d1));
    ok = ok && file_bytes(d1) == file_bytes(d2);
    // checkpoint
    Rng rng(1010);
    io::Checkpoint ckpt;
    ckpt.regime = "video";
    ckpt.kind = sim::SystemKind::acrobot;
    ckpt.dt = 0.05;
    ckpt.lagrangian = nets::LagrangianModel::create(3, rng, 16);
    ckpt.autoencoder = vision::AutoEncoder::create(vision::acrobot_conv_spec(), rng);
    const std::string c1 = work + "/ck1.ldc", c2 = work + "/ck2.ldc";
    io::save_checkpoint(c1, ckpt);
    io::save_checkpoint(c2, io::load_checkpoint(c1));
    ok = ok && file_bytes(c1) == file_bytes(c2);
    // eval strip is a valid graymap
    train::Models models;
    models.lagrangian = ckpt.lagrangian;
    models.autoencoder = ckpt.autoencoder;
    const Tensor strip = train::rollout_strip(models, data.observations, 0, 6);
    const std::string p = work + "/strip.pgm";
    io::write_pgm(p, strip);
    const Tensor back = io::read_pgm(p);
    ok = ok && back.shape() == strip.shape();
    report(10, "format round-trips", ok, detail, timer.seconds());
}

// ---- criteria 7 and 8: video pipeline and ablation ordering ----

train::TrainConfig video_smoke_config() {
    train::TrainConfig config;
    config.regime = train::Regime::video;
    config.epochs = 100;
    config.batch_size = 1;
    config.learning_rate = 1e-3;
    config.weight_decay = 1e-5;
    config.gamma = 0.1;
    config.seed = 71;
    config.threads = 0;
    return config;
}

train::Models fresh_video_models(uint64_t seed) {
    Rng rng(seed);
    train::Models models;
    models.lagrangian = nets::LagrangianModel::create(2, rng, 200);
    models.autoencoder = vision::AutoEncoder::create(vision::pendulum_conv_spec(), rng);
    return models;
}

double heldout_ae_mse(const train::Models& models, const sim::ObservationDataset& data,
                      const std::vector<int>& test_idx) {
    const vision::Encoder& enc = models.autoencoder->encoder;
    const vision::Decoder& dec = models.autoencoder->decoder;
    double acc = 0.0;
    int64_t count = 0;
    for (int traj : test_idx)
        for (int t = 0; t < data.length(); ++t) {
            const Tensor x = data.observation_at(traj, t);
            const Tensor rec = vision::decode(dec, vision::encode(enc, x));
            for (int64_t i = 0; i < x.size(); ++i) {
                const double d = rec[i] - x[i];
                acc += d * d;
            }
            count += x.size();
        }
    return acc / static_cast<double>(count);
}

double rollout_mse(const train::Models& models, const sim::ObservationDataset& data,
                   const std::vector<int>& test_idx, int horizon, bool extrapolation_only) {
    const auto report = train::evaluate_video_rollout(models, data, test_idx, horizon);
    double acc = 0.0;
    int n = 0;
    for (const auto& s : report.steps) {
        if (!s.has_ground_truth) continue;
        if (extrapolation_only && s.in_range) continue;
        acc += s.error;
        ++n;
    }
    return n > 0 ? acc / n : std::numeric_limits<double>::infinity();
}

struct VideoArtifacts {
    sim::GeneratedData data;
    std::vector<int> test_idx;
    train::Models full;
    bool trained = false;
};

void criterion_video(VideoArtifacts& artifacts) {
    Timer timer;
    artifacts.data = sim::generate_dataset(sim::SystemSpec::pendulum(), 200, 10, 71);
    const train::TrainConfig config = video_smoke_config();
    auto [train_idx, test_idx] = train::train_test_split(200, config.train_fraction, config.seed);
    artifacts.test_idx = test_idx;
    train::TrainResult result;
    try {
        result = train::train(config, artifacts.data, fresh_video_models(config.seed));
    } catch (const std::exception& e) {
        report(7, "video pipeline (smoke)", false, std::string("training failed: ") + e.what(),
               timer.seconds());
        return;
    }
    artifacts.full = result.models;
    artifacts.trained = true;
    const double ae = heldout_ae_mse(result.models, artifacts.data.observations, test_idx);
    const double dyn = rollout_mse(result.models, artifacts.data.observations, test_idx,
                                   artifacts.data.observations.length() - 1, false);
    const double seconds = timer.seconds();
    const bool ok = ae < 0.02 && dyn <= 3.0 * ae && seconds <= 900.0;
    report(7, "video pipeline (smoke)", ok,
           "held-out ae mse " + fmt(ae) + " < 0.02, rollout mse " + fmt(dyn) + " <= 3x ae (" +
               fmt(dyn / ae) + "x)",
           seconds);
}

void criterion_ablations(const VideoArtifacts& artifacts) {
    Timer timer;
    if (!artifacts.trained) {
        report(8, "ablation ordering", false, "skipped: criterion 7 training failed", 0.0);
        return;
    }
    // longer ground truth for the 20-step extrapolated comparison
    const auto eval_data = sim::generate_dataset(sim::SystemSpec::pendulum(), 50, 21, 72);
    std::vector<int> eval_idx;
    for (int i = 0; i < eval_data.observations.count(); ++i) eval_idx.push_back(i);

    const double full_extrap =
        rollout_mse(artifacts.full, eval_data.observations, eval_idx, 20, true);

    train::TrainConfig config = video_smoke_config();
    auto train_variant = [&](train::Ablation ablation) {
        config.ablation = ablation;
        const train::TrainResult r =
            train::train(config, artifacts.data, fresh_video_models(config.seed));
        return rollout_mse(r.models, eval_data.observations, eval_idx, 20, true);
    };
    double no_dyn_extrap = std::numeric_limits<double>::infinity();
    std::string note;
    try {
        no_dyn_extrap = train_variant(train::Ablation::no_dyn);
    } catch (const std::exception& e) {
        // a diverged ablated model is still a valid (worst-case) outcome
        note = std::string(" [no_dyn training aborted: diverged rollout]");
    }
    // reported but not gated
    std::string extras;
    for (auto ablation : {train::Ablation::no_lat, train::Ablation::no_ae}) {
        double v = std::numeric_limits<double>::infinity();
        try {
            v = train_variant(ablation);
        } catch (const std::exception&) {
        }
        extras += std::string(" ") + train::to_string(ablation) + " " + fmt(v);
    }
    const bool ok = no_dyn_extrap > full_extrap;
    report(8, "ablation ordering", ok,
           "extrapolated mse: full " + fmt(full_extrap) + ", no_dyn " + fmt(no_dyn_extrap) +
               " (must exceed full); ungated:" + extras + note,
           timer.seconds());
}

} // namespace

int main() {
    const std::string work =
        (std::filesystem::temp_directory_path() / "lagdyn_acceptance").string();
    std::filesystem::remove_all(work);
    std::filesystem::create_directories(work);
    std::printf("acceptance suite (work dir %s)\n", work.c_str());

    criterion_closure();
    criterion_coriolis();
    criterion_energy();
    criterion_gradients();
    criterion_spd();

    StateRunArtifacts state_runs;
    criterion_state_learning(work, state_runs);
    VideoArtifacts video;
    criterion_video(video);
    criterion_ablations(video);
    criterion_determinism(state_runs);
    criterion_formats(work);

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
