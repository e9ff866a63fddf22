// Command-line surface: dataset generation, training, evaluation, and the
// analytic-oracle selftest. Exit codes: 0 success, 1 usage error, 2 data or
// format error, 3 numerical failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lagdyn/checkpoint.hpp"
#include "lagdyn/container.hpp"
#include "lagdyn/dataset.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/pgm.hpp"
#include "lagdyn/runmeta.hpp"
#include "lagdyn/selftest.hpp"
#include "lagdyn/training.hpp"

namespace {

using namespace lagdyn;


/// Flat key=value config support: values are appended as --key=value for
/// keys not already present, so command-line flags override the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string config_path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i].rfind("--config=", 0) == 0)
            config_path = args[i].substr(9);
        else if (args[i] == "--config" && i + 1 < args.size())
            config_path = args[i + 1];
    }
    if (config_path.empty()) return args;
    std::ifstream is(config_path);
    if (!is) throw DataError("cannot open config file '" + config_path + "'");
    std::string line;
    int line_no = 0;
    std::vector<std::string> extra;
    while (std::getline(is, line)) {
        ++line_no;
        const size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const size_t end = line.find_last_not_of(" \t\r");
        line = line.substr(start, end - start + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("config file '" + config_path + "' line " + std::to_string(line_no) +
                             " is not key=value");
        const std::string key = line.substr(0, eq);
        const std::string flag = "--" + key;
        bool present = false;
        for (const std::string& arg : args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) present = true;
        if (!present) extra.push_back(flag + "=" + line.substr(eq + 1));
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

std::string checksum_hex(uint64_t value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
    return buf;
}

struct GenArgs {
    std::string system = "pendulum";
    int n = 100;
    int t = 10;
    double dt = 0.05;
    uint64_t seed = 1;
    std::string out;
};

int cmd_gen_data(const GenArgs& args) {
    sim::SystemSpec spec = args.system == "pendulum" ? sim::SystemSpec::pendulum(args.dt)
                                                     : sim::SystemSpec::acrobot(args.dt);
    if (args.n < 1 || args.t < 1) throw UsageError("gen-data needs --n >= 1 and --t >= 1");
    if (args.dt <= 0.0) throw UsageError("gen-data needs --dt > 0");
    std::string out = args.out;
    if (out.empty()) {
        io::ensure_directory(io::output_root());
        std::ostringstream name;
        name << io::output_root() << "/dataset-" << args.system << "-n" << args.n << "-t"
             << args.t << "-seed" << args.seed << ".ldc";
        out = name.str();
    }
    const sim::GeneratedData data = sim::generate_dataset(spec, args.n, args.t, args.seed);
    sim::save_dataset(out, data);
    std::cout << "wrote " << out << " (" << args.n << " trajectories, " << args.t
              << " observations each, checksum " << checksum_hex(io::file_checksum(out)) << ")\n";
    return 0;
}

struct TrainArgs {
    std::string regime = "state";
    std::string data_path;
    std::string out;
    std::string ablation = "full";
    int epochs = -1; // resolved by regime
    int batch = -1;  // resolved by regime
    double lr = 0.0; // resolved by regime/system
    double weight_decay = 1e-5;
    double gamma = 0.1;
    uint64_t seed = 1;
    int hidden = 200;
    int ckpt_every = 0;
    int threads = 0;
    bool lat_abs = false;
};

int cmd_train(const TrainArgs& args, const std::string& command_line) {
    const train::Regime regime = train::regime_from_string(args.regime);
    const sim::GeneratedData data = sim::load_dataset(args.data_path);
    const sim::SystemSpec& spec = data.trajectories.spec;
    const bool video = regime == train::Regime::video;

    // regime/dataset validation happens before any output is written
    if (data.trajectories.length() < 2)
        throw DataError("dataset '" + args.data_path + "' has T = " +
                        std::to_string(data.trajectories.length()) +
                        "; training needs at least 2 steps per trajectory");
    if (video && data.observations.observations.empty())
        throw DataError("dataset '" + args.data_path + "' has no observations for video training");

    train::TrainConfig config;
    config.regime = regime;
    config.ablation = train::ablation_from_string(args.ablation);
    // video training favours many small steps: the reconstruction objective
    // spends a long stretch on the mean-image plateau before breaking out
    config.batch_size = args.batch >= 1 ? args.batch : (video ? 1 : 64);
    config.weight_decay = args.weight_decay;
    config.gamma = args.gamma;
    config.seed = args.seed;
    config.hidden = args.hidden;
    config.threads = args.threads;
    config.checkpoint_every = args.ckpt_every;
    config.lat_abs = args.lat_abs;
    config.epochs = args.epochs >= 0 ? args.epochs : (video ? 100 : 50);
    config.learning_rate =
        args.lr > 0.0 ? args.lr
                      : (video && spec.kind == sim::SystemKind::acrobot ? 1e-4 : 1e-3);
    config.validate();

    Rng rng(config.seed);
    train::Models models;
    if (video) {
        const vision::ConvSpec conv_spec = spec.kind == sim::SystemKind::pendulum
                                               ? vision::pendulum_conv_spec()
                                               : vision::acrobot_conv_spec();
        models.lagrangian = nets::LagrangianModel::create(conv_spec.latent / 2, rng, config.hidden);
        models.autoencoder = vision::AutoEncoder::create(conv_spec, rng);
    } else {
        models.lagrangian = nets::LagrangianModel::create(spec.dof, rng, config.hidden);
    }

    std::string out = args.out;
    if (out.empty()) {
        std::ostringstream name;
        name << io::output_root() << "/train-" << args.regime << "-" << sim::to_string(spec.kind)
             << "-seed" << config.seed;
        out = name.str();
    }
    io::ensure_directory(out);

    io::KeyValues manifest;
    manifest.push_back({"command", command_line});
    manifest.push_back({"code_version", io::kVersion});
    manifest.push_back({"started", io::timestamp_utc()});
    manifest.push_back({"regime", args.regime});
    manifest.push_back({"system", sim::to_string(spec.kind)});
    manifest.push_back({"dataset", args.data_path});
    manifest.push_back({"dataset_checksum", checksum_hex(io::file_checksum(args.data_path))});
    manifest.push_back({"seed", std::to_string(config.seed)});
    manifest.push_back({"ablation", train::to_string(config.ablation)});
    manifest.push_back({"epochs", std::to_string(config.epochs)});
    manifest.push_back({"batch_size", std::to_string(config.batch_size)});
    manifest.push_back({"learning_rate", std::to_string(config.learning_rate)});
    manifest.push_back({"weight_decay", std::to_string(config.weight_decay)});
    manifest.push_back({"gamma", std::to_string(config.gamma)});
    manifest.push_back({"lat_abs", config.lat_abs ? "1" : "0"});
    manifest.push_back({"hidden", std::to_string(config.hidden)});
    manifest.push_back({"threads", std::to_string(config.threads)});
    manifest.push_back({"train_fraction", std::to_string(config.train_fraction)});
    io::write_key_values(out + "/manifest.txt", manifest);

    auto save = [&](const std::string& path, const train::Models& m) {
        io::Checkpoint ckpt;
        ckpt.regime = video ? "video" : "state";
        ckpt.kind = spec.kind;
        ckpt.dt = data.trajectories.dt;
        ckpt.lagrangian = m.lagrangian;
        ckpt.autoencoder = m.autoencoder;
        io::save_checkpoint(path, ckpt);
    };
    train::CheckpointHook hook;
    if (config.checkpoint_every > 0)
        hook = [&](int epoch, const train::Models& m) {
            char name[32];
            std::snprintf(name, sizeof(name), "/ckpt_%04d.ldc", epoch);
            save(out + name, m);
        };

    const train::TrainResult result = train::train(config, data, std::move(models), hook);

    std::ofstream history(out + "/history.csv");
    history << "epoch,l_ae,l_dyn,l_lat,total\n";
    history.precision(12);
    for (const auto& rec : result.history)
        history << rec.epoch << "," << rec.mean.l_ae << "," << rec.mean.l_dyn << ","
                << rec.mean.l_lat << "," << rec.mean.total << "\n";
    history.close();
    save(out + "/model.ldc", result.models);

    if (!result.history.empty()) {
        const auto& last = result.history.back().mean;
        std::cout << "trained " << config.epochs << " epochs; final loss " << last.total << "\n";
    }
    std::cout << "run directory: " << out << "\n";
    return 0;
}

struct EvalArgs {
    std::string checkpoint;
    std::string data_path;
    int horizon = 20;
    int count = 3;
    uint64_t seed = 1;
    uint64_t split_seed = 0; // 0: evaluate over the whole dataset
    std::string out;
};

int cmd_eval(const EvalArgs& args) {
    if (args.horizon < 1) throw UsageError("eval needs --horizon >= 1");
    if (args.count < 1) throw UsageError("eval needs --count >= 1");
    const io::Checkpoint ckpt = io::load_checkpoint(args.checkpoint);
    const sim::GeneratedData data = sim::load_dataset(args.data_path);
    const sim::SystemSpec& spec = data.trajectories.spec;
    if (ckpt.kind != spec.kind)
        throw DataError("checkpoint is for " + sim::to_string(ckpt.kind) + " but dataset holds " +
                        sim::to_string(spec.kind));
    const bool video = ckpt.regime == "video";
    if (video) {
        const int expected = spec.kind == sim::SystemKind::pendulum ? 4 : 6;
        if (ckpt.latent_dim() != expected)
            throw DataError("incompatible latent dimensions: checkpoint has " +
                            std::to_string(ckpt.latent_dim()) + ", " + sim::to_string(spec.kind) +
                            " datasets use " + std::to_string(expected));
    } else if (ckpt.lagrangian.m != spec.dof) {
        throw DataError("incompatible dimensions: checkpoint has m = " +
                        std::to_string(ckpt.lagrangian.m) + ", dataset has dof = " +
                        std::to_string(spec.dof));
    }

    const int n = data.trajectories.count();
    std::vector<int> candidates;
    if (args.split_seed != 0) {
        auto [tr, te] = train::train_test_split(n, 0.8, args.split_seed);
        candidates = std::move(te);
    } else {
        for (int i = 0; i < n; ++i) candidates.push_back(i);
    }
    Rng rng(args.seed);
    for (int i = static_cast<int>(candidates.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(i + 1));
        std::swap(candidates[static_cast<size_t>(i)], candidates[static_cast<size_t>(j)]);
    }
    if (static_cast<int>(candidates.size()) > args.count)
        candidates.resize(static_cast<size_t>(args.count));

    std::string out = args.out;
    if (out.empty()) out = io::output_root() + "/eval-seed" + std::to_string(args.seed);
    io::ensure_directory(out);

    train::Models models;
    models.lagrangian = ckpt.lagrangian;
    models.autoencoder = ckpt.autoencoder;
    train::EvalReport report;
    if (video) {
        report = train::evaluate_video_rollout(models, data.observations, candidates, args.horizon);
        for (size_t i = 0; i < candidates.size(); ++i) {
            const Tensor strip =
                train::rollout_strip(models, data.observations, candidates[i], args.horizon);
            char name[32];
            std::snprintf(name, sizeof(name), "/strip_%03d.pgm", static_cast<int>(i));
            io::write_pgm(out + name, strip);
        }
    } else {
        report = train::evaluate_state_rollout(nets::make_dynamics(models.lagrangian),
                                               data.trajectories, candidates, args.horizon,
                                               dynamics::Integrator::euler);
    }

    std::ofstream metrics(out + "/metrics.csv");
    metrics << "step,segment,has_ground_truth," << (video ? "pixel_mse" : "state_mae") << "\n";
    metrics.precision(12);
    for (const auto& s : report.steps) {
        metrics << s.step << "," << (s.in_range ? "in_range" : "extrapolation") << ","
                << (s.has_ground_truth ? 1 : 0) << ",";
        if (s.has_ground_truth) metrics << s.error;
        metrics << "\n";
    }
    metrics.close();

    std::ostringstream summary;
    summary << "trajectories=" << report.trajectory_count << "\n"
            << "horizon=" << args.horizon << "\n"
            << "in_range_mean=" << (report.has_in_range ? std::to_string(report.in_range_mean)
                                                        : "n/a")
            << "\n"
            << "extrapolation_mean="
            << (report.has_extrapolation ? std::to_string(report.extrapolation_mean) : "n/a")
            << "\n";
    std::ofstream(out + "/summary.txt") << summary.str();
    std::cout << summary.str() << "report directory: " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lagrangian dynamics learning from states and rendered image sequences"};
    app.require_subcommand(1);

    GenArgs gen;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a trajectory + observation dataset");
    std::string gen_config;
    gen_cmd->add_option("--config", gen_config, "flat key=value config file; flags override its values");
    gen_cmd->add_option("--system", gen.system, "pendulum or acrobot")
        ->check(CLI::IsMember({"pendulum", "acrobot"}));
    gen_cmd->add_option("--n", gen.n, "number of trajectories");
    gen_cmd->add_option("--t", gen.t, "observations per trajectory");
    gen_cmd->add_option("--dt", gen.dt, "integration step in seconds");
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--out", gen.out, "output file (default under $LAGDYN_OUT or runs/)");

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model on a dataset");
    std::string train_config;
    train_cmd->add_option("--config", train_config, "flat key=value config file; flags override its values");
    train_cmd->add_option("--regime", tr.regime, "state or video")
        ->check(CLI::IsMember({"state", "video"}));
    train_cmd->add_option("--data", tr.data_path, "dataset file")->required();
    train_cmd->add_option("--out", tr.out, "run directory");
    train_cmd->add_option("--ablation", tr.ablation, "full, no_dyn, no_lat or no_ae")
        ->check(CLI::IsMember({"full", "no_dyn", "no_lat", "no_ae"}));
    train_cmd->add_option("--epochs", tr.epochs, "epochs (default 50 state, 100 video)");
    train_cmd->add_option("--batch", tr.batch, "batch size (default 64 state, 1 video)");
    train_cmd->add_option("--lr", tr.lr, "learning rate (default 1e-3; 1e-4 for acrobot video)");
    train_cmd->add_option("--weight-decay", tr.weight_decay, "L2 weight decay");
    train_cmd->add_option("--gamma", tr.gamma, "latent-agreement weight");
    train_cmd->add_option("--seed", tr.seed, "random seed");
    train_cmd->add_option("--hidden", tr.hidden, "hidden width of the Lagrangian networks");
    train_cmd->add_option("--ckpt-every", tr.ckpt_every, "checkpoint every N epochs (0 = final only)");
    train_cmd->add_option("--threads", tr.threads, "worker threads (0 = auto)");
    train_cmd->add_flag("--lat-abs", tr.lat_abs,
                        "latent-agreement term as mean absolute difference");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "roll out a checkpoint against a dataset");
    std::string eval_config;
    eval_cmd->add_option("--config", eval_config, "flat key=value config file; flags override its values");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "model checkpoint")->required();
    eval_cmd->add_option("--data", ev.data_path, "dataset file")->required();
    eval_cmd->add_option("--horizon", ev.horizon, "rollout steps");
    eval_cmd->add_option("--count", ev.count, "number of trajectories to evaluate");
    eval_cmd->add_option("--seed", ev.seed, "selection seed");
    eval_cmd->add_option("--split-seed", ev.split_seed,
                         "held-out split seed (0 = use the whole dataset)");
    eval_cmd->add_option("--out", ev.out, "report directory");

    CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the analytic-oracle suite");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(std::move(args));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (train_cmd->parsed()) return cmd_train(tr, join_args(argc, argv));
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (selftest_cmd->parsed()) return selftest::run(std::cout) ? 0 : 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
