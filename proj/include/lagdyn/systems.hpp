#pragma once

#include <functional>
#include <string>

#include "lagdyn/dynamics.hpp"

namespace lagdyn::sim {

enum class SystemKind { pendulum, acrobot };

std::string to_string(SystemKind kind);
SystemKind system_from_string(const std::string& name);

/// Reference system constants. Angle convention: q = 0 hangs straight down,
/// positive counter-clockwise; all tests and the renderer share it.
struct SystemSpec {
    SystemKind kind = SystemKind::pendulum;
    int dof = 1;
    double dt = 0.05;
    double gravity = 9.81;
    // pendulum
    double mass = 1.0;
    double length = 1.0;
    // acrobot (two links)
    double m1 = 1.0, m2 = 1.0;
    double l1 = 1.0, l2 = 1.0;
    double lc1 = 0.5, lc2 = 0.5;
    double i1 = 1.0, i2 = 1.0;

    static SystemSpec pendulum(double dt = 0.05);
    static SystemSpec acrobot(double dt = 0.05);
};

/// qddot = -(g0/l) sin q + tau / (m l^2)
dynamics::DynamicsUpdate pendulum_dynamics(const SystemSpec& spec, const dynamics::PhaseState& z,
                                           const Tensor& tau);

/// Two-link dynamics assembled from the analytic D, C, g and solved through
/// dynamics::forward_dynamics.
dynamics::DynamicsUpdate acrobot_dynamics(const SystemSpec& spec, const dynamics::PhaseState& z,
                                          const Tensor& tau);

/// Unforced dynamics closure for the given system.
dynamics::DynamicsFn system_dynamics(const SystemSpec& spec);

/// Closed-form Lagrangian pieces of a reference system; the potential
/// gradient is included so forward dynamics can be assembled exactly.
struct AnalyticLagrangian {
    std::function<dynamics::InertiaMatrix(const Tensor& q)> inertia;
    std::function<double(const Tensor& q)> potential;
    std::function<dynamics::InertiaJacobian(const Tensor& q)> inertia_jacobian;
    std::function<Tensor(const Tensor& q)> potential_gradient;
};

AnalyticLagrangian analytic_lagrangian(const SystemSpec& spec);

/// Total mechanical energy T + V, for conservation checks.
double total_energy(const SystemSpec& spec, const dynamics::PhaseState& z);

} // namespace lagdyn::sim
