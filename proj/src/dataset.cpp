#include "lagdyn/dataset.hpp"

#include <cmath>

#include "lagdyn/container.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/rng.hpp"

namespace lagdyn::sim {

using dynamics::PhaseState;

PhaseState TrajectoryDataset::state_at(int n, int t) const {
    const int m2 = states.dim(2);
    Tensor z({m2});
    const double* row = states.data() + (static_cast<size_t>(n) * states.dim(1) + t) * m2;
    for (int i = 0; i < m2; ++i) z[i] = row[i];
    return PhaseState::from_flat(z);
}

Tensor ObservationDataset::observation_at(int n, int t) const {
    return observation_block(n, t, 1).reshaped(
        {observations.dim(2), observations.dim(3), observations.dim(4)});
}

Tensor ObservationDataset::observation_block(int n, int t0, int len) const {
    const int c = observations.dim(2), h = observations.dim(3), w = observations.dim(4);
    const int64_t obs_sz = static_cast<int64_t>(c) * h * w;
    Tensor out({len, c, h, w});
    const double* src =
        observations.data() + (static_cast<size_t>(n) * observations.dim(1) + t0) * obs_sz;
    for (int64_t i = 0; i < out.size(); ++i) out[i] = src[i];
    return out;
}

namespace {

PhaseState draw_initial(const SystemSpec& spec, Rng& rng) {
    const int m = spec.dof;
    Tensor q({m}), qd({m});
    const double pi = 3.14159265358979323846;
    const double vmax = spec.kind == SystemKind::pendulum ? 1.0 : 0.5;
    for (int i = 0; i < m; ++i) q[i] = rng.uniform(-pi, pi);
    for (int i = 0; i < m; ++i) qd[i] = rng.uniform(-vmax, vmax);
    return PhaseState(std::move(q), std::move(qd));
}

/// (N, steps, 2m) state rows, RK4-integrated from seeded initial draws.
Tensor simulate(const SystemSpec& spec, int n, int steps, uint64_t seed) {
    if (n < 1 || steps < 1) throw UsageError("dataset needs n >= 1 and t >= 1");
    const int m2 = 2 * spec.dof;
    Tensor states({n, steps, m2});
    Rng rng(seed);
    const dynamics::DynamicsFn dyn = system_dynamics(spec);
    for (int traj = 0; traj < n; ++traj) {
        PhaseState z = draw_initial(spec, rng);
        for (int t = 0; t < steps; ++t) {
            if (t > 0) z = dynamics::rk4_step(dyn, z, spec.dt);
            const Tensor flat = z.flat();
            double* row = states.data() + (static_cast<size_t>(traj) * steps + t) * m2;
            for (int i = 0; i < m2; ++i) row[i] = flat[i];
        }
    }
    return states;
}

} // namespace

TrajectoryDataset generate_trajectories(const SystemSpec& spec, int n, int t, uint64_t seed) {
    TrajectoryDataset d;
    d.states = simulate(spec, n, t, seed);
    d.dt = spec.dt;
    d.spec = spec;
    d.seed = seed;
    return d;
}

GeneratedData generate_dataset(const SystemSpec& spec, int n, int t, uint64_t seed) {
    const int frames_per_traj = t + 2;
    Tensor full = simulate(spec, n, frames_per_traj, seed);
    const int m = spec.dof, m2 = 2 * m;
    const int hw = kFrameSize;

    GeneratedData out;
    out.trajectories.dt = spec.dt;
    out.trajectories.spec = spec;
    out.trajectories.seed = seed;
    out.trajectories.states = Tensor({n, t, m2});

    out.observations.dt = spec.dt;
    out.observations.spec = spec;
    out.observations.seed = seed;
    out.observations.frames = Tensor({n, frames_per_traj, hw, hw});
    out.observations.observations = Tensor({n, t, 3, hw, hw});

    Tensor q({m});
    for (int traj = 0; traj < n; ++traj) {
        std::vector<Frame> traj_frames;
        traj_frames.reserve(static_cast<size_t>(frames_per_traj));
        for (int f = 0; f < frames_per_traj; ++f) {
            const double* row = full.data() + (static_cast<size_t>(traj) * frames_per_traj + f) * m2;
            for (int i = 0; i < m; ++i) q[i] = row[i];
            Frame frame = render_frame(spec, q);
            double* dst =
                out.observations.frames.data() + (static_cast<size_t>(traj) * frames_per_traj + f) * hw * hw;
            for (int64_t i = 0; i < frame.size(); ++i) dst[i] = frame[i];
            traj_frames.push_back(std::move(frame));
            if (f < t) {
                double* srow =
                    out.trajectories.states.data() + (static_cast<size_t>(traj) * t + f) * m2;
                for (int i = 0; i < m2; ++i) srow[i] = row[i];
            }
        }
        std::vector<Observation> obs = build_observations(traj_frames);
        for (int o = 0; o < t; ++o) {
            double* dst = out.observations.observations.data() +
                          (static_cast<size_t>(traj) * t + o) * 3 * hw * hw;
            const Observation& src = obs[static_cast<size_t>(o)];
            for (int64_t i = 0; i < src.size(); ++i) dst[i] = src[i];
        }
    }
    out.observations.latents = out.trajectories.states;
    return out;
}

namespace {

void put_spec_meta(io::Container& c, const SystemSpec& spec) {
    c.meta["kind"] = to_string(spec.kind);
    c.meta["dof"] = std::to_string(spec.dof);
    c.meta["dt"] = std::to_string(spec.dt);
    c.meta["gravity"] = std::to_string(spec.gravity);
    if (spec.kind == SystemKind::pendulum) {
        c.meta["mass"] = std::to_string(spec.mass);
        c.meta["length"] = std::to_string(spec.length);
    } else {
        c.meta["m1"] = std::to_string(spec.m1);
        c.meta["m2"] = std::to_string(spec.m2);
        c.meta["l1"] = std::to_string(spec.l1);
        c.meta["l2"] = std::to_string(spec.l2);
        c.meta["lc1"] = std::to_string(spec.lc1);
        c.meta["lc2"] = std::to_string(spec.lc2);
        c.meta["i1"] = std::to_string(spec.i1);
        c.meta["i2"] = std::to_string(spec.i2);
    }
}

SystemSpec spec_from_meta(const io::Container& c) {
    SystemSpec spec = c.meta_at("kind") == "pendulum" ? SystemSpec::pendulum()
                                                      : SystemSpec::acrobot();
    spec.dt = c.meta_double("dt");
    spec.gravity = c.meta_double("gravity");
    if (spec.kind == SystemKind::pendulum) {
        spec.mass = c.meta_double("mass");
        spec.length = c.meta_double("length");
    } else {
        spec.m1 = c.meta_double("m1");
        spec.m2 = c.meta_double("m2");
        spec.l1 = c.meta_double("l1");
        spec.l2 = c.meta_double("l2");
        spec.lc1 = c.meta_double("lc1");
        spec.lc2 = c.meta_double("lc2");
        spec.i1 = c.meta_double("i1");
        spec.i2 = c.meta_double("i2");
    }
    return spec;
}

} // namespace

void save_dataset(const std::string& path, const GeneratedData& data) {
    io::Container c;
    c.meta["format"] = "dataset-v1";
    put_spec_meta(c, data.trajectories.spec);
    c.meta["n"] = std::to_string(data.trajectories.count());
    c.meta["t"] = std::to_string(data.trajectories.length());
    c.meta["h"] = std::to_string(kFrameSize);
    c.meta["w"] = std::to_string(kFrameSize);
    c.meta["seed"] = std::to_string(data.trajectories.seed);
    c.add_f32("states", data.trajectories.states);
    c.add_f32("frames", data.observations.frames);
    c.add_f32("observations", data.observations.observations);
    io::write_container(path, c);
}

GeneratedData load_dataset(const std::string& path) {
    io::Container c = io::read_container(path);
    if (c.meta_at("format") != "dataset-v1")
        throw DataError("'" + path + "' is not a dataset file (format=" + c.meta_at("format") + ")");
    GeneratedData data;
    const SystemSpec spec = spec_from_meta(c);
    const uint64_t seed = static_cast<uint64_t>(c.meta_int("seed"));

    data.trajectories.spec = spec;
    data.trajectories.dt = spec.dt;
    data.trajectories.seed = seed;
    data.trajectories.states = c.require("states").to_tensor();

    data.observations.spec = spec;
    data.observations.dt = spec.dt;
    data.observations.seed = seed;
    data.observations.frames = c.require("frames").to_tensor();
    data.observations.observations = c.require("observations").to_tensor();
    data.observations.latents = data.trajectories.states;
    return data;
}

} // namespace lagdyn::sim
