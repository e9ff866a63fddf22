#include "lagdyn/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "lagdyn/errors.hpp"
#include "lagdyn/linalg.hpp"

namespace lagdyn::dynamics {

PhaseState::PhaseState(Tensor q_, Tensor qdot_) : q(std::move(q_)), qdot(std::move(qdot_)) {
    if (q.ndim() != 1 || qdot.ndim() != 1 || q.dim(0) != qdot.dim(0))
        throw UsageError("phase state needs q and qdot of equal length");
}

Tensor PhaseState::flat() const {
    const int m = dof();
    Tensor z({2 * m});
    for (int i = 0; i < m; ++i) {
        z[i] = q[i];
        z[m + i] = qdot[i];
    }
    return z;
}

PhaseState PhaseState::from_flat(const Tensor& z) {
    if (z.ndim() != 1 || z.dim(0) % 2 != 0)
        throw UsageError("flat phase state must have even length");
    const int m = z.dim(0) / 2;
    Tensor q({m}), qdot({m});
    for (int i = 0; i < m; ++i) {
        q[i] = z[i];
        qdot[i] = z[m + i];
    }
    return PhaseState(std::move(q), std::move(qdot));
}

double kinetic_energy(const InertiaMatrix& d, const Tensor& qdot) {
    if (d.ndim() != 2 || d.dim(0) != d.dim(1) || qdot.ndim() != 1 || qdot.dim(0) != d.dim(0))
        throw UsageError("kinetic_energy: D must be m x m and qdot length m");
    const int m = d.dim(0);
    Tensor dv({m});
    linalg::matvec(d.data(), qdot.data(), dv.data(), m, m);
    return 0.5 * linalg::dot(qdot.data(), dv.data(), m);
}

double lagrangian(double kinetic, double potential) { return kinetic - potential; }

Tensor coriolis_vector(const InertiaJacobian& ddq, const Tensor& qdot) {
    if (qdot.ndim() != 1) throw UsageError("coriolis_vector: qdot must be a vector");
    const int m = qdot.dim(0);
    if (ddq.ndim() != 3 || ddq.dim(0) != m || ddq.dim(1) != m || ddq.dim(2) != m)
        throw UsageError("coriolis_vector: inertia jacobian must be m x m x m");
    Tensor c({m});
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                acc += (ddq.at3(k, j, i) - 0.5 * ddq.at3(i, j, k)) * qdot[i] * qdot[j];
        c[k] = acc;
    }
    return c;
}

Tensor forward_dynamics(const InertiaMatrix& d, const Tensor& c, const Tensor& g,
                        const Tensor& tau) {
    if (d.ndim() != 2 || d.dim(0) != d.dim(1))
        throw UsageError("forward_dynamics: D must be square");
    const int m = d.dim(0);
    if (c.size() != m || g.size() != m || tau.size() != m)
        throw UsageError("forward_dynamics: C, g, tau must have length m");
    Tensor rhs({m});
    for (int i = 0; i < m; ++i) rhs[i] = tau[i] - c[i] - g[i];
    try {
        return linalg::cholesky_solve(d, rhs);
    } catch (const NumericalError& e) {
        std::ostringstream msg;
        msg << "inertia matrix is not positive definite [";
        for (int i = 0; i < m; ++i) {
            msg << (i ? "; " : "");
            for (int j = 0; j < m; ++j) msg << (j ? ", " : "") << d.at(i, j);
        }
        msg << "]: " << e.what();
        throw NumericalError(msg.str());
    }
}

PhaseState euler_step(const PhaseState& z, const DynamicsUpdate& zdot, double dt) {
    if (dt <= 0.0) throw UsageError("euler_step: dt must be positive");
    const int m = z.dof();
    Tensor q({m}), qd({m});
    for (int i = 0; i < m; ++i) {
        q[i] = z.q[i] + zdot.qdot[i] * dt;
        qd[i] = z.qdot[i] + zdot.qddot[i] * dt;
    }
    return PhaseState(std::move(q), std::move(qd));
}

PhaseState rk4_step(const DynamicsFn& dynamics, const PhaseState& z, double dt) {
    if (dt <= 0.0) throw UsageError("rk4_step: dt must be positive");
    const int m = z.dof();
    auto shifted = [m](const PhaseState& base, const DynamicsUpdate& k, double h) {
        Tensor q({m}), qd({m});
        for (int i = 0; i < m; ++i) {
            q[i] = base.q[i] + h * k.qdot[i];
            qd[i] = base.qdot[i] + h * k.qddot[i];
        }
        return PhaseState(std::move(q), std::move(qd));
    };
    const DynamicsUpdate k1 = dynamics(z);
    const DynamicsUpdate k2 = dynamics(shifted(z, k1, 0.5 * dt));
    const DynamicsUpdate k3 = dynamics(shifted(z, k2, 0.5 * dt));
    const DynamicsUpdate k4 = dynamics(shifted(z, k3, dt));
    Tensor q({m}), qd({m});
    const double w = dt / 6.0;
    for (int i = 0; i < m; ++i) {
        q[i] = z.q[i] + w * (k1.qdot[i] + 2.0 * k2.qdot[i] + 2.0 * k3.qdot[i] + k4.qdot[i]);
        qd[i] = z.qdot[i] + w * (k1.qddot[i] + 2.0 * k2.qddot[i] + 2.0 * k3.qddot[i] + k4.qddot[i]);
    }
    return PhaseState(std::move(q), std::move(qd));
}

std::vector<PhaseState> rollout(const DynamicsFn& dynamics, const PhaseState& z0, int steps,
                                double dt, Integrator integrator) {
    if (steps < 1) throw UsageError("rollout: steps must be >= 1");
    std::vector<PhaseState> out;
    out.reserve(static_cast<size_t>(steps));
    PhaseState z = z0;
    for (int t = 0; t < steps; ++t) {
        if (integrator == Integrator::euler)
            z = euler_step(z, dynamics(z), dt);
        else
            z = rk4_step(dynamics, z, dt);
        if (!z.finite()) {
            std::ostringstream msg;
            msg << "rollout diverged to a non-finite state at step " << t + 1;
            throw NumericalError(msg.str());
        }
        out.push_back(z);
    }
    return out;
}

} // namespace lagdyn::dynamics
