#include "lagdyn/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "lagdyn/dynamics.hpp"
#include "lagdyn/errors.hpp"
#include "lagdyn/lagrangian.hpp"
#include "lagdyn/linalg.hpp"
#include "lagdyn/rng.hpp"
#include "lagdyn/systems.hpp"

namespace lagdyn::selftest {

namespace {

using dynamics::PhaseState;


std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

PhaseState random_state(const sim::SystemSpec& spec, Rng& rng, double vmax) {
    const double pi = 3.14159265358979323846;
    Tensor q({spec.dof}), qd({spec.dof});
    for (int i = 0; i < spec.dof; ++i) q[i] = rng.uniform(-pi, pi);
    for (int i = 0; i < spec.dof; ++i) qd[i] = rng.uniform(-vmax, vmax);
    return PhaseState(std::move(q), std::move(qd));
}

Tensor fd_inertia_jacobian(const std::function<Tensor(const Tensor&)>& inertia, const Tensor& q,
                           double h) {
    const int m = q.dim(0);
    Tensor ddq({m, m, m});
    for (int k = 0; k < m; ++k) {
        Tensor qp = q, qm = q;
        qp[k] += h;
        qm[k] -= h;
        const Tensor dp = inertia(qp);
        const Tensor dm = inertia(qm);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) ddq.at3(i, j, k) = (dp.at(i, j) - dm.at(i, j)) / (2.0 * h);
    }
    return ddq;
}

Check check_closure() {
    Check c{"analytic closure (assembled vs direct dynamics)"};
    Rng rng(101);
    double worst = 0.0;
    for (auto kind : {sim::SystemKind::pendulum, sim::SystemKind::acrobot}) {
        const sim::SystemSpec spec =
            kind == sim::SystemKind::pendulum ? sim::SystemSpec::pendulum() : sim::SystemSpec::acrobot();
        const sim::AnalyticLagrangian lag = sim::analytic_lagrangian(spec);
        const Tensor tau({spec.dof});
        for (int trial = 0; trial < 1000; ++trial) {
            const PhaseState z = random_state(spec, rng, 1.0);
            const Tensor cor = dynamics::coriolis_vector(lag.inertia_jacobian(z.q), z.qdot);
            const Tensor qddot =
                dynamics::forward_dynamics(lag.inertia(z.q), cor, lag.potential_gradient(z.q), tau);
            const auto direct = kind == sim::SystemKind::pendulum
                                    ? sim::pendulum_dynamics(spec, z, tau)
                                    : sim::acrobot_dynamics(spec, z, tau);
            worst = std::max(worst, max_abs_diff(qddot, direct.qddot));
        }
    }
    c.passed = worst < 1e-10;
    c.detail = "max |diff| = " + sci(worst);
    return c;
}

double coriolis_fd_gap(const sim::AnalyticLagrangian& lag, const PhaseState& z,
                       bool flip_sign) {
    const Tensor ddq = fd_inertia_jacobian(lag.inertia, z.q, 1e-6);
    const int m = z.dof();
    Tensor expect({m});
    for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                // the fixture flips the sign of the 1/2 dD_ij/dq_k term
                const double cijk = ddq.at3(k, j, i) +
                                    (flip_sign ? 0.5 : -0.5) * ddq.at3(i, j, k);
                acc += cijk * z.qdot[i] * z.qdot[j];
            }
        expect[k] = acc;
    }
    const Tensor got = dynamics::coriolis_vector(lag.inertia_jacobian(z.q), z.qdot);
    return max_abs_diff(got, expect);
}

Check check_coriolis() {
    Check c{"coriolis vs finite-difference double sum (100 states)"};
    Rng rng(102);
    const sim::SystemSpec spec = sim::SystemSpec::acrobot();
    const sim::AnalyticLagrangian lag = sim::analytic_lagrangian(spec);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
        worst = std::max(worst, coriolis_fd_gap(lag, random_state(spec, rng, 2.0), false));
    c.passed = worst < 1e-5;
    c.detail = "max |diff| = " + sci(worst);
    return c;
}

Check check_coriolis_mutation() {
    Check c{"mutation fixture: sign error in c_ijk is detected"};
    Rng rng(103);
    const sim::SystemSpec spec = sim::SystemSpec::acrobot();
    const sim::AnalyticLagrangian lag = sim::analytic_lagrangian(spec);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial)
        worst = std::max(worst, coriolis_fd_gap(lag, random_state(spec, rng, 2.0), true));
    c.passed = worst > 1e-3; // the flipped oracle must disagree clearly
    c.detail = "flipped-term gap = " + sci(worst);
    return c;
}

Check check_energy() {
    Check c{"energy conservation along rk4 rollouts (dt 1e-3, 10 s)"};
    double worst_rel = 0.0;
    for (auto kind : {sim::SystemKind::pendulum, sim::SystemKind::acrobot}) {
        const sim::SystemSpec spec =
            kind == sim::SystemKind::pendulum ? sim::SystemSpec::pendulum() : sim::SystemSpec::acrobot();
        const auto dyn = sim::system_dynamics(spec);
        PhaseState z = kind == sim::SystemKind::pendulum
                           ? PhaseState(Tensor::vector({2.0}), Tensor::vector({0.5}))
                           : PhaseState(Tensor::vector({0.7, -0.5}), Tensor::vector({0.3, 0.1}));
        const double e0 = sim::total_energy(spec, z);
        double drift = 0.0;
        for (int t = 0; t < 10000; ++t) {
            z = dynamics::rk4_step(dyn, z, 1e-3);
            drift = std::max(drift, std::abs(sim::total_energy(spec, z) - e0));
        }
        worst_rel = std::max(worst_rel, drift / std::abs(e0));
    }
    c.passed = worst_rel < 1e-4;
    c.detail = "max relative drift = " + sci(worst_rel);
    return c;
}

bool spd_holds(const nets::LagrangianModel& model, const Tensor& q, double margin) {
    const Tensor d = nets::inertia_matrix(model, q);
    Tensor shifted = d;
    for (int i = 0; i < d.dim(0); ++i) shifted.at(i, i) -= model.lambda - margin;
    try {
        linalg::cholesky_factor(shifted);
    } catch (const NumericalError&) {
        return false;
    }
    Tensor plain = d;
    try {
        linalg::cholesky_factor(plain);
    } catch (const NumericalError&) {
        return false;
    }
    return true;
}

Check check_spd() {
    Check c{"learned inertia SPD guarantee (1000 random draws)"};
    Rng rng(104);
    int failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int m = 1 + static_cast<int>(rng.next_u64() % 3);
        nets::LagrangianModel model = nets::LagrangianModel::create(m, rng, 8);
        Tensor q({m});
        for (int i = 0; i < m; ++i) q[i] = rng.uniform(-3.2, 3.2);
        if (!spd_holds(model, q, 1e-9)) ++failures;
    }
    c.passed = failures == 0;
    c.detail = std::to_string(failures) + " failures";
    return c;
}

Check check_spd_mutation() {
    Check c{"mutation fixture: lambda = 0 breaks positive definiteness"};
    Rng rng(105);
    nets::LagrangianModel model = nets::LagrangianModel::create(2, rng, 8);
    model.lambda = 0.0;
    for (auto& w : model.inertia_net.weights) w.fill(0.0);
    for (auto& b : model.inertia_net.biases) b.fill(0.0);
    // D = J^T J with J = 0 is singular; the factorization must fail
    bool caught = false;
    try {
        Tensor d = nets::inertia_matrix(model, Tensor::vector({0.1, 0.2}));
        linalg::cholesky_factor(d);
    } catch (const NumericalError&) {
        caught = true;
    }
    c.passed = caught;
    c.detail = caught ? "singular inertia rejected" : "singular inertia slipped through";
    return c;
}

Check check_gradients() {
    Check c{"rollout objective gradients vs finite differences (tiny net)"};
    Rng rng(106);
    nets::LagrangianModel model = nets::LagrangianModel::create(1, rng, 4);
    const double dt = 0.05;
    const Tensor z0 = Tensor::vector({0.9, -0.3});
    const Tensor targets[2] = {Tensor::vector({0.85, -0.55}), Tensor::vector({0.78, -0.70})};

    auto build = [&](ad::Graph& g, const nets::LagrangianVars& vars) {
        ad::Var z = g.constant(z0);
        ad::Var loss;
        for (int t = 0; t < 2; ++t) {
            ad::Var q = ad::slice(z, 0, 1);
            ad::Var qd = ad::slice(z, 1, 1);
            z = ad::add(z, ad::scale(nets::model_dynamics_g(g, vars, q, qd, model.lambda), dt));
            ad::Var term = ad::sum_abs(ad::sub(z, g.constant(targets[t])));
            loss = t == 0 ? term : ad::add(loss, term);
        }
        return loss;
    };
    auto value = [&]() {
        ad::Graph g;
        nets::LagrangianVars vars = nets::insert_params(g, model);
        return g.value(build(g, vars))[0];
    };

    ad::Graph g;
    nets::LagrangianVars vars = nets::insert_params(g, model);
    g.backward(build(g, vars));
    std::vector<nets::ParamRef> refs;
    nets::collect_params(model, refs);
    const std::vector<Tensor> grads = nets::extract_gradients(g, nets::param_vars(vars), refs);

    double worst_rel = 0.0;
    const double h = 1e-6;
    for (size_t p = 0; p < refs.size(); ++p) {
        Tensor& theta = *refs[p].tensor;
        for (int64_t j = 0; j < theta.size(); ++j) {
            const double saved = theta[j];
            theta[j] = saved + h;
            const double fp = value();
            theta[j] = saved - h;
            const double fm = value();
            theta[j] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double err = std::abs(grads[p][j] - fd);
            if (err > 1e-8)
                worst_rel = std::max(worst_rel,
                                     err / std::max(std::abs(grads[p][j]), std::abs(fd)));
        }
    }
    c.passed = worst_rel < 1e-4;
    c.detail = "max relative error = " + sci(worst_rel);
    return c;
}

} // namespace

bool run(std::ostream& out) {
    const Check checks[] = {check_closure(),      check_coriolis(), check_coriolis_mutation(),
                            check_energy(),       check_spd(),      check_spd_mutation(),
                            check_gradients()};
    bool all = true;
    for (const Check& c : checks) {
        out << (c.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(56) << c.name
            << "  " << c.detail << "\n";
        all = all && c.passed;
    }
    out << (all ? "selftest: all checks passed" : "selftest: FAILURES detected") << "\n";
    return all;
}

} // namespace lagdyn::selftest
