#include "lagdyn/systems.hpp"

#include <cmath>

#include "lagdyn/errors.hpp"

namespace lagdyn::sim {

using dynamics::DynamicsUpdate;
using dynamics::PhaseState;

std::string to_string(SystemKind kind) {
    return kind == SystemKind::pendulum ? "pendulum" : "acrobot";
}

SystemKind system_from_string(const std::string& name) {
    if (name == "pendulum") return SystemKind::pendulum;
    if (name == "acrobot") return SystemKind::acrobot;
    throw UsageError("unknown system '" + name + "' (expected pendulum or acrobot)");
}

SystemSpec SystemSpec::pendulum(double dt) {
    SystemSpec s;
    s.kind = SystemKind::pendulum;
    s.dof = 1;
    s.dt = dt;
    return s;
}

SystemSpec SystemSpec::acrobot(double dt) {
    SystemSpec s;
    s.kind = SystemKind::acrobot;
    s.dof = 2;
    s.dt = dt;
    return s;
}

DynamicsUpdate pendulum_dynamics(const SystemSpec& spec, const PhaseState& z, const Tensor& tau) {
    if (z.dof() != 1) throw UsageError("pendulum_dynamics: expects a 1-dof state");
    DynamicsUpdate u;
    u.qdot = z.qdot;
    u.qddot = Tensor({1});
    u.qddot[0] = -(spec.gravity / spec.length) * std::sin(z.q[0]) +
                 tau[0] / (spec.mass * spec.length * spec.length);
    return u;
}

namespace {

dynamics::InertiaMatrix acrobot_inertia(const SystemSpec& s, const Tensor& q) {
    const double c2 = std::cos(q[1]);
    Tensor d({2, 2});
    d.at(0, 0) = s.m1 * s.lc1 * s.lc1 + s.i1 +
                 s.m2 * (s.l1 * s.l1 + s.lc2 * s.lc2 + 2.0 * s.l1 * s.lc2 * c2) + s.i2;
    d.at(0, 1) = s.m2 * (s.lc2 * s.lc2 + s.l1 * s.lc2 * c2) + s.i2;
    d.at(1, 0) = d.at(0, 1);
    d.at(1, 1) = s.m2 * s.lc2 * s.lc2 + s.i2;
    return d;
}

dynamics::InertiaJacobian acrobot_inertia_jacobian(const SystemSpec& s, const Tensor& q) {
    const double s2 = std::sin(q[1]);
    Tensor ddq({2, 2, 2});
    ddq.at3(0, 0, 1) = -2.0 * s.m2 * s.l1 * s.lc2 * s2;
    ddq.at3(0, 1, 1) = -s.m2 * s.l1 * s.lc2 * s2;
    ddq.at3(1, 0, 1) = ddq.at3(0, 1, 1);
    return ddq;
}

double acrobot_potential(const SystemSpec& s, const Tensor& q) {
    return -s.gravity * ((s.m1 * s.lc1 + s.m2 * s.l1) * std::cos(q[0]) +
                         s.m2 * s.lc2 * std::cos(q[0] + q[1]));
}

Tensor acrobot_potential_gradient(const SystemSpec& s, const Tensor& q) {
    Tensor g({2});
    const double s1 = std::sin(q[0]);
    const double s12 = std::sin(q[0] + q[1]);
    g[0] = s.gravity * ((s.m1 * s.lc1 + s.m2 * s.l1) * s1 + s.m2 * s.lc2 * s12);
    g[1] = s.gravity * s.m2 * s.lc2 * s12;
    return g;
}

} // namespace

DynamicsUpdate acrobot_dynamics(const SystemSpec& spec, const PhaseState& z, const Tensor& tau) {
    if (z.dof() != 2) throw UsageError("acrobot_dynamics: expects a 2-dof state");
    const Tensor d = acrobot_inertia(spec, z.q);
    const Tensor c = dynamics::coriolis_vector(acrobot_inertia_jacobian(spec, z.q), z.qdot);
    const Tensor g = acrobot_potential_gradient(spec, z.q);
    DynamicsUpdate u;
    u.qdot = z.qdot;
    u.qddot = dynamics::forward_dynamics(d, c, g, tau);
    return u;
}

dynamics::DynamicsFn system_dynamics(const SystemSpec& spec) {
    Tensor tau({spec.dof});
    if (spec.kind == SystemKind::pendulum)
        return [spec, tau](const PhaseState& z) { return pendulum_dynamics(spec, z, tau); };
    return [spec, tau](const PhaseState& z) { return acrobot_dynamics(spec, z, tau); };
}

AnalyticLagrangian analytic_lagrangian(const SystemSpec& spec) {
    AnalyticLagrangian out;
    if (spec.kind == SystemKind::pendulum) {
        const double ml2 = spec.mass * spec.length * spec.length;
        const double mgl = spec.mass * spec.gravity * spec.length;
        out.inertia = [ml2](const Tensor&) { return Tensor::scaled_identity(1, ml2); };
        out.potential = [mgl](const Tensor& q) { return -mgl * std::cos(q[0]); };
        out.inertia_jacobian = [](const Tensor&) { return Tensor({1, 1, 1}); };
        out.potential_gradient = [mgl](const Tensor& q) {
            Tensor g({1});
            g[0] = mgl * std::sin(q[0]);
            return g;
        };
    } else {
        out.inertia = [spec](const Tensor& q) { return acrobot_inertia(spec, q); };
        out.potential = [spec](const Tensor& q) { return acrobot_potential(spec, q); };
        out.inertia_jacobian = [spec](const Tensor& q) {
            return acrobot_inertia_jacobian(spec, q);
        };
        out.potential_gradient = [spec](const Tensor& q) {
            return acrobot_potential_gradient(spec, q);
        };
    }
    return out;
}

double total_energy(const SystemSpec& spec, const PhaseState& z) {
    const AnalyticLagrangian lag = analytic_lagrangian(spec);
    return dynamics::kinetic_energy(lag.inertia(z.q), z.qdot) + lag.potential(z.q);
}

} // namespace lagdyn::sim
