#pragma once

#include <functional>
#include <vector>

#include "lagdyn/tensor.hpp"

namespace lagdyn::dynamics {

/// Generalized position and velocity (q, qdot). Angles in radians for the
/// reference systems, stored flat as [q..., qdot...] when serialized.
struct PhaseState {
    Tensor q;    // (m)
    Tensor qdot; // (m)

    PhaseState() = default;
    PhaseState(Tensor q_, Tensor qdot_);

    int dof() const { return q.dim(0); }
    bool finite() const { return q.all_finite() && qdot.all_finite(); }

    Tensor flat() const;
    static PhaseState from_flat(const Tensor& z);
};

/// Time derivative of a phase state: (qdot, qddot).
struct DynamicsUpdate {
    Tensor qdot;  // (m)
    Tensor qddot; // (m)
};

using InertiaMatrix = Tensor;   // (m, m), symmetric positive definite
using InertiaJacobian = Tensor; // (m, m, m), [i][j][k] = dD_ij/dq_k

/// Continuous dynamics: state -> update.
using DynamicsFn = std::function<DynamicsUpdate(const PhaseState&)>;

enum class Integrator { euler, rk4 };

/// 1/2 qdot^T D qdot.
double kinetic_energy(const InertiaMatrix& d, const Tensor& qdot);

/// Kinetic minus potential energy.
double lagrangian(double kinetic, double potential);

/// C[k] = sum_ij (dD_kj/dq_i - 1/2 dD_ij/dq_k) qdot_i qdot_j.
Tensor coriolis_vector(const InertiaJacobian& ddq, const Tensor& qdot);

/// Solve D qddot = tau - c - g by Cholesky factorization. Throws
/// NumericalError naming the matrix when D is not positive definite.
Tensor forward_dynamics(const InertiaMatrix& d, const Tensor& c, const Tensor& g,
                        const Tensor& tau);

PhaseState euler_step(const PhaseState& z, const DynamicsUpdate& zdot, double dt);

PhaseState rk4_step(const DynamicsFn& dynamics, const PhaseState& z, double dt);

/// Integrate `steps` steps from z0; the returned sequence excludes z0.
/// Throws NumericalError with the step index if the state stops being finite.
std::vector<PhaseState> rollout(const DynamicsFn& dynamics, const PhaseState& z0, int steps,
                                double dt, Integrator integrator);

} // namespace lagdyn::dynamics
